//! Finite-n polynomial kernels of radial potentials and their microscopic
//! rescaling.
//!
//! For radial `Q` the monomials are orthogonal in `L^2(e^{-n V_n} dA)`, so
//! the one-point intensity is `sum_{j<n} |ζ|^{2j+2c} e^{-nQ} / m_j^{(n)}`
//! with `m_j^{(n)} = 2 ∫_0^∞ r^{2j+2c+1} e^{-nQ(r)} dr`.

use num_complex::Complex64;

use crate::equilibrium::microscopic_scale;
use crate::error::{Error, Result};
use crate::potentials::{
    canonical_decompose, detect_k, normalization_factor, radial_derivative, radial_eval, MacroscopicPotential,
};
use crate::quad::{integrate, log_integral_concave};
use crate::radial_bergman::{bergman_function_r0, moments};
use crate::special_fn::damped_series;

const MOMENT_REL_TOL: f64 = 1e-14;

/// Log-norms of `1, ζ, ..., ζ^{n-1}` under `e^{-n V_n} dA`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteKernel {
    n: usize,
    c: f64,
    coeffs: Vec<f64>,
    log_norms: Vec<f64>,
}

impl FiniteKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn log_norms(&self) -> &[f64] {
        &self.log_norms
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `nQ(r)`.
    pub fn n_q(&self, r: f64) -> f64 {
        self.n as f64 * radial_eval(&self.coeffs, r)
    }
}

/// Computes `ln m_j^{(n)}`, `j < n`, by quadrature in `t = ln r` where the
/// integrand `exp((2j + 2c + 2) t - nQ(e^t))` is log-concave.
pub fn finite_moments(q: &MacroscopicPotential, n: usize) -> Result<FiniteKernel> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !q.spectators().is_empty() {
        return Err(Error::InvalidParameter("exact finite kernels need h = 0 (no spectator charges)".into()));
    }
    let coeffs = q
        .radial_coeffs()
        .ok_or_else(|| Error::InvalidParameter("finite kernels need a radial potential".into()))?
        .to_vec();
    let c = q.c();
    let nf = n as f64;
    let log_norms = (0..n)
        .map(|j| {
            let s = 2.0 * j as f64 + 2.0 * c + 2.0;
            let g = |t: f64| s * t - nf * radial_eval(&coeffs, t.exp());
            let dg = |t: f64| {
                let r = t.exp();
                s - nf * r * radial_derivative(&coeffs, r)
            };
            log_integral_concave(g, dg, MOMENT_REL_TOL)
                .map(|v| v + std::f64::consts::LN_2)
                .map_err(|e| Error::Quadrature(format!("moment j = {j}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FiniteKernel { n, c, coeffs, log_norms })
}

fn intensity_at_radius(fk: &FiniteKernel, r: f64) -> Result<f64> {
    if r == 0.0 {
        return if fk.c > 0.0 {
            Ok(0.0)
        } else if fk.c == 0.0 {
            Ok((-fk.log_norms[0]).exp())
        } else {
            Err(Error::Divergent(format!("intensity is infinite at 0 for c = {}", fk.c)))
        };
    }
    let ln_r = r.ln();
    let nq = fk.n_q(r);
    damped_series(|j| (2.0 * j as f64 + 2.0 * fk.c) * ln_r - nq - fk.log_norms[j], Some(fk.n))
}

/// One-point intensity `k_n(ζ, ζ) e^{-n V_n(ζ)}`.
pub fn intensity(fk: &FiniteKernel, zeta: Complex64) -> Result<f64> {
    intensity_at_radius(fk, zeta.norm())
}

/// `R_n(z) = r_n^2 R_n(r_n z)`.
pub fn rescaled_intensity(fk: &FiniteKernel, z: Complex64, rn: f64) -> Result<f64> {
    if !(rn > 0.0) {
        return Err(Error::InvalidParameter(format!("r_n must be positive, got {rn}")));
    }
    Ok(rn * rn * intensity_at_radius(fk, rn * z.norm())?)
}

/// `∫_{lo <= |ζ| <= hi} R_n dA`, by quadrature in `s = r^{2c+2}` which
/// removes the power singularity at the origin.
pub fn annulus_mass(fk: &FiniteKernel, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::InvalidParameter(format!("bad annulus [{lo}, {hi}]")));
    }
    let p = 2.0 * fk.c + 2.0;
    // ∫ 2 r R(r) dr = ∫ (2/p) R(r) / r^{2c} ds with r = s^{1/p}
    let f = |s: f64| {
        if s == 0.0 {
            return if fk.c == 0.0 { 2.0 / p * (-fk.log_norms[0]).exp() } else { 0.0 };
        }
        let r = s.powf(1.0 / p);
        let ln_r = r.ln();
        let nq = fk.n_q(r);
        let v = damped_series(|j| 2.0 * j as f64 * ln_r - nq - fk.log_norms[j], Some(fk.n)).unwrap_or(f64::NAN);
        2.0 / p * v
    };
    let (slo, shi) = (lo.powf(p), hi.powf(p));
    // split into panels so the plateau edge is resolved
    let pieces = 16;
    let mut total = 0.0;
    for i in 0..pieces {
        let a = slo + (shi - slo) * i as f64 / pieces as f64;
        let b = slo + (shi - slo) * (i + 1) as f64 / pieces as f64;
        total += integrate(f, a, b, 1e-13, 0.0)?;
    }
    Ok(total)
}

/// Radius beyond which the intensity is negligible (`< e^{-80}` of its scale).
pub fn outer_cutoff(fk: &FiniteKernel) -> f64 {
    let mut r = 1.0;
    let j = fk.n - 1;
    // the outermost monomial dominates the tail
    let tail = |r: f64| (2.0 * j as f64 + 2.0 * fk.c + 2.0) * r.ln() - fk.n_q(r) - fk.log_norms[j];
    while tail(r) > -80.0 || r < 1.0 {
        r *= 1.25;
        if r > 1e6 {
            break;
        }
    }
    r
}

/// `∫_C R_n dA`, which equals `n`.
pub fn total_mass(fk: &FiniteKernel) -> Result<f64> {
    annulus_mass(fk, 0.0, outer_cutoff(fk))
}

/// Mean intensity over the annulus `lo <= |ζ| <= hi` (area in `dA` units).
pub fn annulus_mean(fk: &FiniteKernel, lo: f64, hi: f64) -> Result<f64> {
    Ok(annulus_mass(fk, lo, hi)? / (hi * hi - lo * lo))
}

/// Parameters of the limiting Bergman function: `k`, `c` and the amplitude
/// `(1+c)/k` of the normalized `Q_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroLimit {
    pub k: u32,
    pub c: f64,
    pub amplitude: f64,
}

impl MicroLimit {
    pub fn of(q: &MacroscopicPotential) -> Result<Self> {
        let k = detect_k(q)?;
        let dec = canonical_decompose(q, k)?;
        let lambda = normalization_factor(dec.q0(), q.c());
        let amplitude = lambda
            * dec
                .q0()
                .radial_amplitude()
                .ok_or_else(|| Error::InvalidParameter("limit comparison needs a radial Q_0".into()))?;
        Ok(Self { k, c: q.c(), amplitude })
    }

    pub fn r0(&self, r: f64) -> Result<f64> {
        bergman_function_r0(self.k, self.c, self.amplitude, r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub rn: f64,
    /// `R_n` on the grid.
    pub values: Vec<f64>,
    pub sup_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub limit: MicroLimit,
    pub grid: Vec<f64>,
    pub r0: Vec<f64>,
    pub entries: Vec<ConvergenceEntry>,
    /// First `n` from which the sup-errors decrease along the list.
    pub decreasing_from: Option<usize>,
    /// For homogeneous `Q`: whether `R_n` equals the truncated `R_0` series to 1e-12.
    pub truncated_series_identity: Option<bool>,
}

/// Compares `R_n` with the limiting Bergman function on a grid of `|z|`.
pub fn convergence_report(q: &MacroscopicPotential, n_list: &[usize], z_grid: &[f64]) -> Result<ConvergenceReport> {
    if n_list.is_empty() || z_grid.is_empty() {
        return Err(Error::InvalidParameter("n list and grid must be nonempty".into()));
    }
    if q.c() < 0.0 {
        if let Some(z) = z_grid.iter().find(|&&z| z == 0.0) {
            return Err(Error::Divergent(format!(
                "grid point |z| = {z} is rejected: R_n and R_0 are infinite at 0 for c = {} < 0",
                q.c()
            )));
        }
    }
    let limit = MicroLimit::of(q)?;
    let r0 = z_grid.iter().map(|&z| limit.r0(z)).collect::<Result<Vec<f64>>>()?;
    let homogeneous = q.radial_coeffs().is_some_and(|c| c.iter().filter(|v| **v != 0.0).count() == 1);
    let mut identity = homogeneous.then_some(true);
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let rn = microscopic_scale(q, n)?;
        let fk = finite_moments(q, n)?;
        let values = z_grid
            .iter()
            .map(|&z| rescaled_intensity(&fk, Complex64::new(z, 0.0), rn))
            .collect::<Result<Vec<f64>>>()?;
        let sup_error = values.iter().zip(&r0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if homogeneous {
            let table = moments(limit.k, limit.c, limit.amplitude, n - 1)?;
            for (&z, &v) in z_grid.iter().zip(&values) {
                let t = table.truncated_density(z, n)?;
                if (t - v).abs() > 1e-12 * (1.0 + t.abs()) {
                    identity = Some(false);
                }
            }
        }
        entries.push(ConvergenceEntry { n, rn, values, sup_error });
    }
    let decreasing_from = (0..entries.len())
        .find(|&i| entries[i..].windows(2).all(|w| w[1].sup_error < w[0].sup_error || w[1].sup_error < 1e-14))
        .map(|i| entries[i].n);
    Ok(ConvergenceReport {
        limit,
        grid: z_grid.to_vec(),
        r0,
        entries,
        decreasing_from,
        truncated_series_identity: identity,
    })
}
