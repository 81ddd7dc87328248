//! Equilibrium measure, modulus and microscopic scale for radial
//! potentials `Q(r) = sum q_m r^{2m}` whose droplet is a disk.
//!
//! With `Δ = ∂∂̄` and `dA = dx dy / π` the equilibrium mass of the disk of
//! radius `r` is `r Q'(r) / 2`. The charge `c` at the origin counts as a
//! point mass `-c/n` of `σ_n`, so the microscopic scale solves
//! `n r Q'(r) / 2 = 1 + c`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::potentials::{
    canonical_decompose, detect_k, radial_laplacian, radial_mass, HomogeneousHermitianPoly, MacroscopicPotential,
};
use crate::stats::linear_fit;

const BISECTION_STEPS: usize = 200;
const MONOTONE_SCAN: usize = 1000;
const TAU_POINTS: usize = 512;

fn radial_coeffs(q: &MacroscopicPotential) -> Result<&[f64]> {
    q.radial_coeffs()
        .ok_or_else(|| Error::InvalidParameter("equilibrium data needs a radial potential".into()))
}

/// Root of the increasing function `f` with `f(0) < 0`, by bracketed bisection.
fn increasing_root<F: Fn(f64) -> f64>(f: F, what: &str) -> Result<f64> {
    let mut hi = 1.0;
    let mut grow = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 200 || !hi.is_finite() {
            return Err(Error::NoRoot(format!("{what}: no sign change up to r = {hi:e}")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Radius of the disk droplet: the root of `R Q'(R) / 2 = 1`.
pub fn droplet_radius(q: &MacroscopicPotential) -> Result<f64> {
    let coeffs = radial_coeffs(q)?;
    let radius = increasing_root(|r| radial_mass(coeffs, r) - 1.0, "droplet radius")?;
    // disk droplet needs r Q'(r) increasing, i.e. ΔQ > 0, on (0, R]
    for i in 1..=MONOTONE_SCAN {
        let r = radius * i as f64 / MONOTONE_SCAN as f64;
        if radial_laplacian(coeffs, r) <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "ΔQ({r:.6}) <= 0 inside the candidate droplet; the droplet is not a disk"
            )));
        }
    }
    Ok(radius)
}

/// `τ_0` with `τ_0^{-2k} = (1/2πk) ∫ ΔQ_0(e^{iθ}) dθ`.
pub fn modulus_tau0(q0: &HomogeneousHermitianPoly) -> Result<f64> {
    let k = q0.k();
    let lap = q0.poly().laplacian();
    let h = 2.0 * PI / TAU_POINTS as f64;
    let integral: f64 = (0..TAU_POINTS)
        .map(|i| lap.eval(num_complex::Complex64::from_polar(1.0, i as f64 * h)))
        .sum::<f64>()
        * h;
    let inv = integral / (2.0 * PI * k as f64);
    if !(inv > 0.0) {
        return Err(Error::NotPositiveDefinite(format!("mean of ΔQ_0 on the circle is {inv:e}")));
    }
    Ok(inv.powf(-1.0 / (2.0 * k as f64)))
}

/// `r_n` solving `n r Q'(r) / 2 = 1 + c`.
pub fn microscopic_scale(q: &MacroscopicPotential, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let coeffs = radial_coeffs(q)?;
    let target = (1.0 + q.c()) / n as f64;
    let rn = increasing_root(|r| radial_mass(coeffs, r) - target, "microscopic scale")?;
    let radius = droplet_radius(q)?;
    if rn >= radius {
        return Err(Error::InvalidParameter(format!(
            "r_n = {rn:.6} lies outside the droplet (R = {radius:.6}); n = {n} is too small"
        )));
    }
    Ok(rn)
}

/// Droplet, density and scales of a radial potential.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumData {
    pub droplet_radius: f64,
    pub tau0: f64,
    pub k: u32,
    pub c: f64,
    coeffs: Vec<f64>,
}

impl EquilibriumData {
    pub fn new(q: &MacroscopicPotential) -> Result<Self> {
        let coeffs = radial_coeffs(q)?.to_vec();
        let k = detect_k(q)?;
        let dec = canonical_decompose(q, k)?;
        Ok(Self {
            droplet_radius: droplet_radius(q)?,
            tau0: modulus_tau0(dec.q0())?,
            k,
            c: q.c(),
            coeffs,
        })
    }

    /// Density `ΔQ` of the equilibrium measure.
    pub fn density(&self, r: f64) -> f64 {
        if r <= self.droplet_radius {
            radial_laplacian(&self.coeffs, r)
        } else {
            0.0
        }
    }

    /// Equilibrium mass of the disk of radius `r`.
    pub fn mass(&self, r: f64) -> f64 {
        radial_mass(&self.coeffs, r.min(self.droplet_radius))
    }

    /// Leading-order scale `τ_0 (1 + c)^{1/2k} n^{-1/2k}`.
    pub fn asymptotic_scale(&self, n: usize) -> f64 {
        let e = 1.0 / (2.0 * self.k as f64);
        self.tau0 * (1.0 + self.c).powf(e) * (n as f64).powf(-e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroscaleEntry {
    pub n: usize,
    pub rn: f64,
    /// `r_n n^{1/2k} / (τ_0 (1+c)^{1/2k}) - 1`.
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroscaleReport {
    pub k: u32,
    pub tau0: f64,
    pub entries: Vec<MicroscaleEntry>,
    /// Smallest `C` with `|e_n| <= C n^{-1/2k}` over the list.
    pub fitted_c: f64,
    /// Least-squares slope of `ln|e_n|` against `ln n`, when defined.
    pub decay_exponent: Option<f64>,
    /// Deviations vanish to rounding (homogeneous `Q`).
    pub exact: bool,
}

impl MicroscaleReport {
    /// Whether the deviations decay at least like `n^{-1/2k}`.
    pub fn rate_satisfied(&self) -> bool {
        self.exact || self.decay_exponent.is_some_and(|s| s <= -1.0 / (2.0 * self.k as f64) + 0.05)
    }
}

pub fn microscale_asymptotic_check(q: &MacroscopicPotential, n_list: &[usize]) -> Result<MicroscaleReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty n list".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n list must be increasing".into()));
    }
    let eq = EquilibriumData::new(q)?;
    let e = 1.0 / (2.0 * eq.k as f64);
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let rn = microscopic_scale(q, n)?;
        entries.push(MicroscaleEntry {
            n,
            rn,
            rel_dev: rn / eq.asymptotic_scale(n) - 1.0,
        });
    }
    let fitted_c = entries.iter().map(|en| en.rel_dev.abs() * (en.n as f64).powf(e)).fold(0.0, f64::max);
    let exact = entries.iter().all(|en| en.rel_dev.abs() < 1e-12);
    let decay_exponent = if exact || entries.len() < 2 {
        None
    } else {
        let x: Vec<f64> = entries.iter().map(|en| (en.n as f64).ln()).collect();
        let y: Vec<f64> = entries.iter().map(|en| en.rel_dev.abs().ln()).collect();
        Some(linear_fit(&x, &y)?.0)
    };
    Ok(MicroscaleReport {
        k: eq.k,
        tau0: eq.tau0,
        entries,
        fitted_c,
        decay_exponent,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn radial(q: Vec<f64>, c: f64) -> MacroscopicPotential {
        MacroscopicPotential::radial(q, c).unwrap()
    }

    #[test]
    fn droplet_examples() {
        assert!((droplet_radius(&radial(vec![1.0], 0.0)).unwrap() - 1.0).abs() < 1e-12);
        let r4 = droplet_radius(&radial(vec![0.0, 1.0], 0.0)).unwrap();
        assert!((r4 - 2f64.powf(-0.25)).abs() < 1e-12);
        let r = droplet_radius(&radial(vec![1.0, 1.0], 0.0)).unwrap();
        assert!((r * r + 2.0 * r.powi(4) - 1.0).abs() < 1e-12);
        assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn droplet_shrinks_with_amplitude() {
        let q = radial(vec![1.0, 0.5], 0.0);
        let r1 = droplet_radius(&q).unwrap();
        let r2 = droplet_radius(&q.scaled(1.7)).unwrap();
        assert!(r2 < r1);
    }

    #[test]
    fn non_disk_droplet_rejected() {
        // ΔQ = 1 - 8r^2 + 9r^4 dips below zero near r = 0.6
        let q = radial(vec![1.0, -2.0, 1.0], 0.0);
        assert!(droplet_radius(&q).is_err());
    }

    #[test]
    fn tau0_examples() {
        let q0 = HomogeneousHermitianPoly::radial(1, 1.0).unwrap();
        assert!((modulus_tau0(&q0).unwrap() - 1.0).abs() < 1e-14);
        for k in 1..=4u32 {
            let q0 = HomogeneousHermitianPoly::radial(k, 1.0).unwrap();
            let expect = (k as f64).powf(-1.0 / (2.0 * k as f64));
            assert!((modulus_tau0(&q0).unwrap() - expect).abs() < 1e-13);
        }
        let q0 = HomogeneousHermitianPoly::from_terms(
            2,
            [(1, 1, Complex64::new(1.0, 0.0)), (2, 0, Complex64::new(0.3, 0.0))],
        )
        .unwrap();
        assert!((modulus_tau0(&q0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn microscale_examples() {
        for &n in &[4usize, 100, 12345] {
            let r = microscopic_scale(&radial(vec![1.0], 0.0), n).unwrap();
            assert!((r - (n as f64).powf(-0.5)).abs() < 1e-12);
            let r = microscopic_scale(&radial(vec![1.0], 1.0), n).unwrap();
            assert!((r - (2.0 / n as f64).sqrt()).abs() < 1e-12);
        }
        let r = microscopic_scale(&radial(vec![0.0, 1.0], 0.0), 16).unwrap();
        assert!((r - (1.0f64 / 32.0).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn microscale_outside_droplet() {
        assert!(microscopic_scale(&radial(vec![1.0], 1.0), 1).is_err());
        assert!(microscopic_scale(&radial(vec![1.0], 0.0), 0).is_err());
    }

    #[test]
    fn homogeneous_microscale_is_exact() {
        for k in 1..=3usize {
            let mut q = vec![0.0; k];
            q[k - 1] = 1.3;
            let pot = radial(q, 0.7);
            let rep = microscale_asymptotic_check(&pot, &[10, 100, 1000]).unwrap();
            assert!(rep.exact, "k={k}");
            assert!(rep.rate_satisfied());
        }
    }

    #[test]
    fn quartic_correction_decays() {
        let rep = microscale_asymptotic_check(&radial(vec![1.0, 1.0], 0.0), &[100, 400, 1600, 6400]).unwrap();
        let e: Vec<f64> = rep.entries.iter().map(|x| x.rel_dev.abs()).collect();
        for w in e.windows(2) {
            assert!((w[1] / w[0] - 0.25).abs() < 0.02, "{w:?}");
        }
        assert!(rep.rate_satisfied());
    }
}
