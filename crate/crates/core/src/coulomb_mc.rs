//! Metropolis sampling of the n-point Boltzmann-Gibbs ensemble
//! `dP_n ∝ e^{-H_n} dA^{⊗n}` and histogram estimates of the one-point
//! intensity, plus an exact sampler of the moduli for radial potentials.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::equilibrium::droplet_radius;
use crate::error::{Error, Result};
use crate::potentials::{radial_derivative, radial_eval, MacroscopicPotential};
use crate::quad::{find_cutoff, find_peak, LOG_CUTOFF};
use crate::stats::batch_mean_se;

const TARGET_ACCEPTANCE: f64 = 0.35;
const TUNE_EVERY: usize = 20;
const ACCEPTANCE_BAND: (f64, f64) = (0.2, 0.6);
const SAMPLER_TABLE: usize = 4096;

/// `n V_n(ζ) = n Q(ζ) - 2c log|ζ| - h(ζ)`; `+∞` where the weight vanishes
/// or is singular.
pub fn site_energy(pot: &MacroscopicPotential, n: usize, z: Complex64) -> f64 {
    let mut e = n as f64 * pot.q(z);
    let c = pot.c();
    if c != 0.0 {
        let r = z.norm();
        if r == 0.0 {
            return f64::INFINITY;
        }
        e -= 2.0 * c * r.ln();
    }
    for s in pot.spectators() {
        if s.charge != 0.0 {
            let d = (z - s.position).norm();
            if d == 0.0 {
                return f64::INFINITY;
            }
            e -= 2.0 * s.charge * d.ln();
        }
    }
    e
}

/// `H_n = sum_{j≠k} log 1/|ζ_j - ζ_k| + sum_j n V_n(ζ_j)` with `n = points.len()`.
pub fn energy(points: &[Complex64], pot: &MacroscopicPotential) -> f64 {
    let n = points.len();
    let mut h = 0.0;
    for (j, &z) in points.iter().enumerate() {
        let s = site_energy(pot, n, z);
        if s == f64::INFINITY {
            return f64::INFINITY;
        }
        h += s;
        for &w in &points[j + 1..] {
            let d = (z - w).norm();
            if d == 0.0 {
                return f64::INFINITY;
            }
            h -= 2.0 * d.ln();
        }
    }
    h
}

/// Energy of particle `i` placed at `z` against the others.
fn particle_energy(points: &[Complex64], i: usize, z: Complex64, pot: &MacroscopicPotential) -> f64 {
    let mut e = site_energy(pot, points.len(), z);
    if e == f64::INFINITY {
        return e;
    }
    for (j, &w) in points.iter().enumerate() {
        if j != i {
            let d = (z - w).norm();
            if d == 0.0 {
                return f64::INFINITY;
            }
            e -= 2.0 * d.ln();
        }
    }
    e
}

/// `H_n` after moving particle `i` to `z`, minus `H_n` before.
pub fn delta_energy(points: &[Complex64], i: usize, z: Complex64, pot: &MacroscopicPotential) -> f64 {
    let new = particle_energy(points, i, z, pot);
    if new == f64::INFINITY {
        return f64::INFINITY;
    }
    new - particle_energy(points, i, points[i], pot)
}

/// Bin layout. Areas are in `dA = dxdy/π` units.
#[derive(Debug, Clone, PartialEq)]
pub enum HistogramSpec {
    /// Annuli with edges `r_max * i / bins`.
    Radial { r_max: f64, bins: usize },
    /// Rectangular cells on `[x0, x1] × [y0, y1]`.
    Grid {
        x: (f64, f64),
        y: (f64, f64),
        nx: usize,
        ny: usize,
    },
}

impl HistogramSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Radial { r_max, bins } => r_max > 0.0 && r_max.is_finite() && bins > 0,
            Self::Grid { x, y, nx, ny } => x.1 > x.0 && y.1 > y.0 && nx > 0 && ny > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad histogram spec {self:?}")))
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            Self::Radial { bins, .. } => bins,
            Self::Grid { nx, ny, .. } => nx * ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bin(&self, z: Complex64) -> Option<usize> {
        match *self {
            Self::Radial { r_max, bins } => {
                let r = z.norm();
                (r < r_max).then(|| ((r / r_max * bins as f64) as usize).min(bins - 1))
            }
            Self::Grid { x, y, nx, ny } => {
                if z.re < x.0 || z.re >= x.1 || z.im < y.0 || z.im >= y.1 {
                    return None;
                }
                let ix = (((z.re - x.0) / (x.1 - x.0) * nx as f64) as usize).min(nx - 1);
                let iy = (((z.im - y.0) / (y.1 - y.0) * ny as f64) as usize).min(ny - 1);
                Some(iy * nx + ix)
            }
        }
    }

    /// Radial edges `(lo, hi)` per bin, or cell corners for grids.
    pub fn radial_edges(&self) -> Option<Vec<(f64, f64)>> {
        match *self {
            Self::Radial { r_max, bins } => Some(
                (0..bins)
                    .map(|i| (r_max * i as f64 / bins as f64, r_max * (i + 1) as f64 / bins as f64))
                    .collect(),
            ),
            Self::Grid { .. } => None,
        }
    }

    pub fn areas(&self) -> Vec<f64> {
        match *self {
            Self::Radial { .. } => self
                .radial_edges()
                .expect("radial")
                .into_iter()
                .map(|(lo, hi)| hi * hi - lo * lo)
                .collect(),
            Self::Grid { x, y, nx, ny } => {
                let a = (x.1 - x.0) / nx as f64 * (y.1 - y.0) / ny as f64 / std::f64::consts::PI;
                vec![a; nx * ny]
            }
        }
    }

    /// Bin centers (midpoint radius, or cell center).
    pub fn centers(&self) -> Vec<Complex64> {
        match *self {
            Self::Radial { .. } => self
                .radial_edges()
                .expect("radial")
                .into_iter()
                .map(|(lo, hi)| Complex64::new(0.5 * (lo + hi), 0.0))
                .collect(),
            Self::Grid { x, y, nx, ny } => {
                let (dx, dy) = ((x.1 - x.0) / nx as f64, (y.1 - y.0) / ny as f64);
                (0..ny)
                    .flat_map(|iy| {
                        (0..nx).map(move |ix| Complex64::new(x.0 + (ix as f64 + 0.5) * dx, y.0 + (iy as f64 + 0.5) * dy))
                    })
                    .collect()
            }
        }
    }

    /// Coordinates scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match *self {
            Self::Radial { r_max, bins } => Self::Radial { r_max: r_max * s, bins },
            Self::Grid { x, y, nx, ny } => Self::Grid {
                x: (x.0 * s, x.1 * s),
                y: (y.0 * s, y.1 * s),
                nx,
                ny,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub potential: MacroscopicPotential,
    /// Initial proposal scale `δ`; tuned during burn-in.
    pub step: f64,
    /// Recorded sweeps, summed over chains.
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub histogram: HistogramSpec,
    /// Sweeps per batch for standard errors.
    pub batch_size: usize,
    pub chains: usize,
    /// Record all moduli every this many recorded sweeps.
    pub moduli_every: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(n: usize, potential: MacroscopicPotential, histogram: HistogramSpec) -> Self {
        Self {
            n,
            potential,
            step: 0.3,
            sweeps: 10_000,
            burn_in: 1_000,
            seed: 0,
            histogram,
            batch_size: 500,
            chains: 1,
            moduli_every: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if self.chains == 0 || self.batch_size == 0 {
            return Err(Error::InvalidParameter("chains and batch size must be positive".into()));
        }
        if self.sweeps < self.chains * self.batch_size {
            return Err(Error::InvalidParameter("need at least one batch per chain".into()));
        }
        if self.moduli_every == Some(0) {
            return Err(Error::InvalidParameter("moduli thinning must be positive".into()));
        }
        self.histogram.validate()
    }
}

/// Per-bin counts with per-batch breakdown; intensities are per `dA`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityHistogram {
    pub spec: HistogramSpec,
    pub counts: Vec<u64>,
    pub sweeps: u64,
    /// `(sweeps in batch, counts)`.
    pub batches: Vec<(u64, Vec<u64>)>,
}

impl IntensityHistogram {
    pub fn empty(spec: HistogramSpec) -> Self {
        let m = spec.len();
        Self {
            spec,
            counts: vec![0; m],
            sweeps: 0,
            batches: Vec::new(),
        }
    }

    /// Appends the batches of `other`.
    pub fn merge(&mut self, other: &IntensityHistogram) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidParameter("cannot merge histograms with different bins".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.sweeps += other.sweeps;
        self.batches.extend(other.batches.iter().cloned());
        Ok(())
    }

    /// Mean count per sweep divided by bin area.
    pub fn intensities(&self) -> Vec<f64> {
        let s = self.sweeps.max(1) as f64;
        self.counts.iter().zip(self.spec.areas()).map(|(&c, a)| c as f64 / s / a).collect()
    }

    /// Batch-means standard errors of `intensities`.
    pub fn std_errors(&self) -> Vec<f64> {
        let areas = self.spec.areas();
        (0..self.counts.len())
            .map(|b| {
                let per: Vec<f64> = self
                    .batches
                    .iter()
                    .map(|(s, c)| c[b] as f64 / *s as f64 / areas[b])
                    .collect();
                batch_mean_se(&per).1
            })
            .collect()
    }

    /// Sum of intensity times area, which estimates the mean number of
    /// points inside the binned region.
    pub fn total_mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.sweeps.max(1) as f64
    }
}

/// Histogram after `ζ → z = ζ / r_n`, with values times `r_n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledTable {
    pub spec: HistogramSpec,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
}

pub fn rescaled_histogram(h: &IntensityHistogram, rn: f64) -> Result<RescaledTable> {
    if !(rn > 0.0 && rn.is_finite()) {
        return Err(Error::InvalidParameter(format!("r_n must be positive, got {rn}")));
    }
    let f = rn * rn;
    Ok(RescaledTable {
        spec: h.spec.scaled(1.0 / rn),
        values: h.intensities().into_iter().map(|v| v * f).collect(),
        std_errors: h.std_errors().into_iter().map(|v| v * f).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun {
    pub histogram: IntensityHistogram,
    /// Post burn-in acceptance over all chains.
    pub acceptance: f64,
    /// Tuned step per chain.
    pub steps: Vec<f64>,
    pub warnings: Vec<String>,
    /// Recorded moduli, chain by chain.
    pub moduli: Vec<f64>,
}

struct ChainOutput {
    histogram: IntensityHistogram,
    accepted: u64,
    proposed: u64,
    step: f64,
    moduli: Vec<f64>,
}

fn initial_radius(pot: &MacroscopicPotential) -> f64 {
    if pot.is_radial() {
        droplet_radius(pot).unwrap_or(1.0)
    } else {
        1.0
    }
}

fn run_chain(cfg: &EnsembleConfig, chain: usize, sweeps: usize) -> ChainOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let pot = &cfg.potential;
    let n = cfg.n;
    let r0 = initial_radius(pot);
    let mut points: Vec<Complex64> = Vec::with_capacity(n);
    while points.len() < n {
        let r = r0 * rng.random::<f64>().sqrt();
        let t = std::f64::consts::TAU * rng.random::<f64>();
        let z = Complex64::from_polar(r, t);
        if particle_energy(&points, points.len(), z, pot).is_finite() && !points.contains(&z) {
            points.push(z);
        }
    }
    let mut step = cfg.step;
    let sweep = |points: &mut Vec<Complex64>, step: f64, rng: &mut ChaCha8Rng| -> u64 {
        let mut acc = 0;
        for i in 0..n {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let z = points[i] + Complex64::new(dx, dy) * step;
            let dh = delta_energy(points, i, z, pot);
            let u: f64 = rng.random();
            if dh <= 0.0 || u < (-dh).exp() {
                points[i] = z;
                acc += 1;
            }
        }
        acc
    };
    let mut window = 0u64;
    for s in 0..cfg.burn_in {
        window += sweep(&mut points, step, &mut rng);
        if (s + 1) % TUNE_EVERY == 0 {
            let rate = window as f64 / (TUNE_EVERY * n) as f64;
            step *= (rate / TARGET_ACCEPTANCE).clamp(0.5, 2.0);
            window = 0;
        }
    }
    let spec = &cfg.histogram;
    let mut hist = IntensityHistogram::empty(spec.clone());
    let mut batch = vec![0u64; spec.len()];
    let mut in_batch = 0u64;
    let mut accepted = 0u64;
    let mut moduli = Vec::new();
    for s in 0..sweeps {
        accepted += sweep(&mut points, step, &mut rng);
        for &z in &points {
            if let Some(b) = spec.bin(z) {
                batch[b] += 1;
            }
        }
        in_batch += 1;
        if let Some(every) = cfg.moduli_every {
            if (s + 1) % every == 0 {
                moduli.extend(points.iter().map(|z| z.norm()));
            }
        }
        if in_batch as usize == cfg.batch_size || s + 1 == sweeps {
            for (a, b) in hist.counts.iter_mut().zip(&batch) {
                *a += b;
            }
            hist.sweeps += in_batch;
            hist.batches.push((in_batch, std::mem::replace(&mut batch, vec![0; spec.len()])));
            in_batch = 0;
        }
    }
    ChainOutput {
        histogram: hist,
        accepted,
        proposed: (sweeps * n) as u64,
        step,
        moduli,
    }
}

/// Runs `cfg.chains` independent chains concurrently and merges them in
/// chain order. Chain `i` uses stream `i` of the ChaCha generator seeded by
/// `cfg.seed`.
pub fn run_mcmc(cfg: &EnsembleConfig) -> Result<McmcRun> {
    cfg.validate()?;
    let per = cfg.sweeps / cfg.chains;
    let rem = cfg.sweeps % cfg.chains;
    let outputs: Vec<ChainOutput> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.chains)
            .map(|i| {
                let sweeps = per + usize::from(i < rem);
                scope.spawn(move || run_chain(cfg, i, sweeps))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("chain thread panicked")).collect()
    });
    let mut histogram = IntensityHistogram::empty(cfg.histogram.clone());
    let (mut acc, mut prop) = (0u64, 0u64);
    let mut steps = Vec::with_capacity(outputs.len());
    let mut moduli = Vec::new();
    for out in outputs {
        histogram.merge(&out.histogram)?;
        acc += out.accepted;
        prop += out.proposed;
        steps.push(out.step);
        moduli.extend(out.moduli);
    }
    let acceptance = acc as f64 / prop.max(1) as f64;
    let mut warnings = Vec::new();
    if !(ACCEPTANCE_BAND.0..=ACCEPTANCE_BAND.1).contains(&acceptance) {
        warnings.push(format!(
            "acceptance rate {acceptance:.3} outside [{}, {}]",
            ACCEPTANCE_BAND.0, ACCEPTANCE_BAND.1
        ));
    }
    Ok(McmcRun {
        histogram,
        acceptance,
        steps,
        warnings,
        moduli,
    })
}

/// Inverse-CDF table for the density `∝ exp(g(t))`, `t = ln r`.
struct ModulusTable {
    t: Vec<f64>,
    cdf: Vec<f64>,
}

impl ModulusTable {
    fn new(coeffs: &[f64], c: f64, n: usize, j: usize) -> Result<Self> {
        let s = 2.0 * j as f64 + 2.0 * c + 2.0;
        let nf = n as f64;
        let g = |t: f64| s * t - nf * radial_eval(coeffs, t.exp());
        let dg = |t: f64| {
            let r = t.exp();
            s - nf * r * radial_derivative(coeffs, r)
        };
        let peak = find_peak(&dg)?;
        let g_max = g(peak);
        let lo = find_cutoff(&g, peak, g_max, -1.0)?;
        let hi = find_cutoff(&g, peak, g_max, 1.0)?;
        debug_assert!(g(lo) <= g_max - LOG_CUTOFF + 1e-6);
        let h = (hi - lo) / (SAMPLER_TABLE - 1) as f64;
        let t: Vec<f64> = (0..SAMPLER_TABLE).map(|i| lo + h * i as f64).collect();
        let f: Vec<f64> = t.iter().map(|&x| (g(x) - g_max).exp()).collect();
        let mut cdf = Vec::with_capacity(SAMPLER_TABLE);
        cdf.push(0.0);
        for i in 1..SAMPLER_TABLE {
            cdf.push(cdf[i - 1] + 0.5 * h * (f[i - 1] + f[i]));
        }
        let total = cdf[SAMPLER_TABLE - 1];
        cdf.iter_mut().for_each(|v| *v /= total);
        Ok(Self { t, cdf })
    }

    fn sample(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&v| v < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        (self.t[i - 1] + w * (self.t[i] - self.t[i - 1])).exp()
    }
}

/// `draws × n` moduli: row `d` holds independent `r_j`, `j < n`, with
/// density `∝ r^{2j+2c+1} e^{-nQ(r)}`, which is the law of the moduli of a
/// rotation-invariant determinantal ensemble.
pub fn sample_radial_exact(q: &MacroscopicPotential, n: usize, seed: u64, draws: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !q.spectators().is_empty() {
        return Err(Error::InvalidParameter("exact sampling needs h = 0".into()));
    }
    let coeffs = q
        .radial_coeffs()
        .ok_or_else(|| Error::InvalidParameter("exact sampling needs a radial potential".into()))?;
    let tables = (0..n)
        .map(|j| ModulusTable::new(coeffs, q.c(), n, j))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..draws)
        .map(|_| tables.iter().map(|t| t.sample(rng.random::<f64>())).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_kernel::{annulus_mean, finite_moments};
    use crate::potentials::Spectator;

    fn ginibre(c: f64) -> MacroscopicPotential {
        MacroscopicPotential::radial(vec![1.0], c).unwrap()
    }

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&[cx(1.0, 0.0)], &ginibre(0.0)), 1.0);
        let h2 = energy(&[cx(1.0, 0.0), cx(-1.0, 0.0)], &ginibre(0.0));
        assert!((h2 - (4.0 - 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((h2 - 2.6137).abs() < 1e-4);
        assert_eq!(energy(&[cx(0.0, 0.0)], &ginibre(1.0)), f64::INFINITY);
        assert!(energy(&[cx(1e-300, 0.0)], &ginibre(1.0)) > 1e3);
        assert_eq!(energy(&[cx(0.0, 0.0)], &ginibre(-0.5)), f64::INFINITY);
        assert_eq!(energy(&[cx(0.5, 0.5), cx(0.5, 0.5)], &ginibre(0.0)), f64::INFINITY);
        // c = 0 imposes nothing at the origin
        assert_eq!(energy(&[cx(0.0, 0.0)], &ginibre(0.0)), 0.0);
        let sp = ginibre(0.0)
            .with_spectators(vec![Spectator {
                position: cx(2.0, 0.0),
                charge: 0.5,
            }])
            .unwrap();
        assert_eq!(energy(&[cx(2.0, 0.0)], &sp), f64::INFINITY);
        assert!((energy(&[cx(1.0, 0.0)], &sp) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incremental_energy_matches_full() {
        let pot = MacroscopicPotential::radial(vec![1.0, 0.2], 0.7)
            .unwrap()
            .with_spectators(vec![Spectator {
                position: cx(1.5, -0.3),
                charge: 0.4,
            }])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut pts: Vec<Complex64> = (0..12).map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        for _ in 0..500 {
            let i = rng.random_range(0..pts.len());
            let z = pts[i] + cx(rng.sample(StandardNormal), rng.sample(StandardNormal)) * 0.2;
            let before = energy(&pts, &pot);
            let d = delta_energy(&pts, i, z, &pot);
            let old = pts[i];
            pts[i] = z;
            let after = energy(&pts, &pot);
            assert!((after - before - d).abs() < 1e-9, "{} vs {d}", after - before);
            if rng.random::<f64>() < 0.5 {
                pts[i] = old;
            }
        }
    }

    fn small_cfg(n: usize, pot: MacroscopicPotential, spec: HistogramSpec, sweeps: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            sweeps,
            burn_in: 500,
            seed,
            batch_size: 500,
            ..EnsembleConfig::new(n, pot, spec)
        }
    }

    #[test]
    fn seed_determinism() {
        let mut cfg = small_cfg(5, ginibre(0.0), HistogramSpec::Radial { r_max: 1.5, bins: 10 }, 2_000, 42);
        cfg.chains = 3;
        cfg.moduli_every = Some(10);
        let a = run_mcmc(&cfg).unwrap();
        let b = run_mcmc(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 43;
        assert_ne!(run_mcmc(&cfg).unwrap().histogram, a.histogram);
    }

    #[test]
    fn single_particle_density_at_origin() {
        // R_1(0) = 1 / ∫ e^{-|ζ|^2} dA = 1
        let spec = HistogramSpec::Radial { r_max: 0.2, bins: 1 };
        let mut cfg = small_cfg(1, ginibre(0.0), spec, 100_000, 11);
        cfg.batch_size = 2_000;
        let run = run_mcmc(&cfg).unwrap();
        let exact = 1.0 - (-0.04f64).exp();
        let est = run.histogram.intensities()[0] * 0.04;
        let se = run.histogram.std_errors()[0] * 0.04;
        assert!((est - exact).abs() < 3.0 * se, "{est} vs {exact} ± {se}");
        assert!(run.warnings.is_empty(), "{:?}", run.warnings);
    }

    #[test]
    fn two_particle_radial_intensity() {
        let spec = HistogramSpec::Radial { r_max: 2.0, bins: 8 };
        let mut cfg = small_cfg(2, ginibre(0.0), spec.clone(), 100_000, 5);
        cfg.chains = 2;
        cfg.batch_size = 1_000;
        let run = run_mcmc(&cfg).unwrap();
        let fk = finite_moments(&ginibre(0.0), 2).unwrap();
        let est = run.histogram.intensities();
        let se = run.histogram.std_errors();
        let edges = spec.radial_edges().unwrap();
        let misses = edges
            .iter()
            .enumerate()
            .filter(|&(b, &(lo, hi))| {
                let exact = annulus_mean(&fk, lo, hi).unwrap();
                (est[b] - exact).abs() > 3.0 * se[b].max(1e-12)
            })
            .count();
        assert!(misses <= 1, "{misses} bins outside 3σ");
    }

    #[test]
    fn depletion_at_charge() {
        let spec = HistogramSpec::Radial { r_max: 1.2, bins: 24 };
        let cfg = small_cfg(16, ginibre(1.0), spec, 5_000, 3);
        let v = run_mcmc(&cfg).unwrap().histogram.intensities();
        let bulk = v[6..14].iter().sum::<f64>() / 8.0;
        assert!(v[0] < 0.5 * bulk, "{} vs {bulk}", v[0]);
    }

    #[test]
    fn distant_spectator_is_neutral_near_origin() {
        let spec = HistogramSpec::Radial { r_max: 0.5, bins: 1 };
        let base = small_cfg(8, ginibre(0.0), spec.clone(), 40_000, 9);
        let with = EnsembleConfig {
            potential: ginibre(0.0)
                .with_spectators(vec![Spectator {
                    position: cx(2.0, 0.0),
                    charge: 0.5,
                }])
                .unwrap(),
            seed: 10,
            ..base.clone()
        };
        let a = run_mcmc(&base).unwrap().histogram;
        let b = run_mcmc(&with).unwrap().histogram;
        let (va, vb) = (a.intensities()[0], b.intensities()[0]);
        let se = (a.std_errors()[0].powi(2) + b.std_errors()[0].powi(2)).sqrt();
        assert!((va - vb).abs() < 3.0 * se, "{va} vs {vb} ± {se}");
    }

    #[test]
    fn histogram_merge_is_order_independent_in_totals() {
        let spec = HistogramSpec::Radial { r_max: 1.0, bins: 2 };
        let mut a = IntensityHistogram::empty(spec.clone());
        a.counts = vec![3, 4];
        a.sweeps = 2;
        a.batches = vec![(2, vec![3, 4])];
        let mut b = IntensityHistogram::empty(spec.clone());
        b.counts = vec![1, 0];
        b.sweeps = 1;
        b.batches = vec![(1, vec![1, 0])];
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.counts, ba.counts);
        assert_eq!(ab.intensities(), ba.intensities());
        assert!(ab.merge(&IntensityHistogram::empty(HistogramSpec::Radial { r_max: 2.0, bins: 2 })).is_err());
    }

    #[test]
    fn rescale_examples() {
        let spec = HistogramSpec::Radial { r_max: 1.0, bins: 4 };
        let mut h = IntensityHistogram::empty(spec.clone());
        // uniform intensity n = 16 on the unit disk
        h.sweeps = 10;
        h.counts = spec.areas().iter().map(|a| (160.0 * a).round() as u64).collect();
        h.batches = vec![(10, h.counts.clone())];
        let same = rescaled_histogram(&h, 1.0).unwrap();
        assert_eq!(same.spec, spec);
        assert_eq!(same.values, h.intensities());
        let rn = 0.5;
        let t = rescaled_histogram(&h, rn).unwrap();
        for v in &t.values {
            assert!((v - 16.0 * rn * rn).abs() < 1e-12);
        }
        assert_eq!(t.spec, HistogramSpec::Radial { r_max: 2.0, bins: 4 });
        assert!(rescaled_histogram(&h, 0.0).is_err());
    }

    #[test]
    fn grid_bins_and_areas() {
        let spec = HistogramSpec::Grid {
            x: (-1.0, 1.0),
            y: (-1.0, 1.0),
            nx: 4,
            ny: 2,
        };
        assert_eq!(spec.bin(cx(-0.9, -0.9)), Some(0));
        assert_eq!(spec.bin(cx(0.9, 0.9)), Some(7));
        assert_eq!(spec.bin(cx(1.0, 0.0)), None);
        let total: f64 = spec.areas().iter().sum();
        assert!((total - 4.0 / std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(spec.centers()[5], cx(-0.25, 0.5));
    }

    #[test]
    fn exact_sampler_gamma_means() {
        // n r_j^2 ~ Gamma(j + 1) for Q = r^2, c = 0
        let draws = 40_000;
        let s = sample_radial_exact(&ginibre(0.0), 1, 1, draws).unwrap();
        let m = s.iter().map(|d| d[0] * d[0]).sum::<f64>() / draws as f64;
        assert!((m - 1.0).abs() < 3.0 / (draws as f64).sqrt() * 1.0 * 1.5);
        let s = sample_radial_exact(&ginibre(0.0), 2, 2, draws).unwrap();
        let m = s.iter().map(|d| d[0] * d[0] + d[1] * d[1]).sum::<f64>() / draws as f64;
        // 1/2 + 2/2; variance 1/4 + 2/4
        assert!((m - 1.5).abs() < 3.0 * (0.75f64 / draws as f64).sqrt() * 1.5);
    }

    #[test]
    fn exact_sampler_rejects_non_radial() {
        let sp = ginibre(0.0)
            .with_spectators(vec![Spectator {
                position: cx(2.0, 0.0),
                charge: 0.5,
            }])
            .unwrap();
        assert!(sample_radial_exact(&sp, 3, 0, 10).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(3, ginibre(0.0), HistogramSpec::Radial { r_max: 1.0, bins: 3 }, 1_000, 0);
        cfg.step = 0.0;
        assert!(run_mcmc(&cfg).is_err());
        cfg.step = 0.3;
        cfg.n = 0;
        assert!(run_mcmc(&cfg).is_err());
        cfg.n = 3;
        cfg.histogram = HistogramSpec::Radial { r_max: -1.0, bins: 3 };
        assert!(run_mcmc(&cfg).is_err());
    }
}
