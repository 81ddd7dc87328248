//! Bergman function of the radial microscopic potential
//! `V_0 = a|z|^{2k} - 2c log|z|`.
//!
//! The monomials `z^j` are orthogonal for a radial weight, so
//! `L_0(z, w) = sum_j (z conj(w))^j / m_j` with closed-form norms
//! `m_j = a^{-(j+c+1)/k} Γ((j+c+1)/k) / k`.

use crate::error::{Error, Result};
use crate::special_fn::{damped_series, log_gamma, ml_kernel_scaled};
use crate::stats::{least_squares, linear_fit};

/// `|rel_err|` below which a decay point is rounding-dominated.
pub const REL_ERR_FLOOR: f64 = 1e-13;
/// Window of `a r^{2k}` where the decay is measured.
pub const DECAY_WINDOW: (f64, f64) = (1.0, 30.0);

fn check_params(k: u32, c: f64, a: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(c > -1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("c must exceed -1, got {c}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude must be positive, got {a}")));
    }
    Ok(())
}

/// `ln m_j` for the radial weight `|z|^{2c} e^{-a|z|^{2k}}`.
pub fn log_moment(k: u32, c: f64, a: f64, j: usize) -> f64 {
    let kf = k as f64;
    let s = (j as f64 + c + 1.0) / kf;
    // s > 0 whenever c > -1
    -s * a.ln() - kf.ln() + log_gamma(s).expect("positive argument")
}

/// Weighted monomial norms `m_j`, `j = 0..=J`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    k: u32,
    c: f64,
    amplitude: f64,
    log_moments: Vec<f64>,
}

impl MomentTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn log_moments(&self) -> &[f64] {
        &self.log_moments
    }

    pub fn len(&self) -> usize {
        self.log_moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_moments.is_empty()
    }

    pub fn moment(&self, j: usize) -> f64 {
        self.log_moments[j].exp()
    }

    /// `sum_{j<n} r^{2j+2c} e^{-a r^{2k}} / m_j`, the Bergman function of the
    /// degree-`< n` polynomial subspace. `n` may not exceed the table length.
    pub fn truncated_density(&self, r: f64, n: usize) -> Result<f64> {
        if n > self.len() {
            return Err(Error::InvalidParameter(format!("table holds {} moments, asked for {n}", self.len())));
        }
        if r == 0.0 {
            return origin_value(self.c, self.log_moments[0]);
        }
        let ln_r = r.ln();
        let damping = self.amplitude * r.powi(2 * self.k as i32);
        let c = self.c;
        damped_series(|j| (2.0 * j as f64 + 2.0 * c) * ln_r - damping - self.log_moments[j], Some(n))
    }
}

fn origin_value(c: f64, log_m0: f64) -> Result<f64> {
    if c > 0.0 {
        Ok(0.0)
    } else if c == 0.0 {
        Ok((-log_m0).exp())
    } else {
        Err(Error::Divergent(format!("R_0(0) is infinite for c = {c} < 0")))
    }
}

pub fn moments(k: u32, c: f64, a: f64, j_max: usize) -> Result<MomentTable> {
    check_params(k, c, a)?;
    let log_moments = (0..=j_max).map(|j| log_moment(k, c, a, j)).collect();
    Ok(MomentTable {
        k,
        c,
        amplitude: a,
        log_moments,
    })
}

/// `R_0(r) = sum_j r^{2j+2c} e^{-a r^{2k}} / m_j`.
///
/// Uses the scaling law `R_0^{(a)}(r) = a^{1/k} R_0^{(1)}(a^{1/(2k)} r)`.
pub fn bergman_function_r0(k: u32, c: f64, a: f64, r: f64) -> Result<f64> {
    check_params(k, c, a)?;
    let kf = k as f64;
    let v = ml_kernel_scaled(k, c, a.powf(1.0 / (2.0 * kf)) * r)?;
    Ok(a.powf(1.0 / kf) * v)
}

/// `ΔQ_0(r) = a k^2 r^{2k-2}`.
pub fn laplacian_q0(k: u32, a: f64, r: f64) -> f64 {
    a * (k * k) as f64 * r.powi(2 * k as i32 - 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayPoint {
    pub r: f64,
    /// `a r^{2k}`, the abscissa of the fit.
    pub u: f64,
    pub r0: f64,
    pub delta_q0: f64,
    pub rel_err: f64,
    pub used: bool,
}

/// Fit of `ln|R_0/ΔQ_0 - 1|` over the usable points.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub k: u32,
    pub c: f64,
    pub amplitude: f64,
    pub points: Vec<DecayPoint>,
    /// All relative errors under the rounding floor.
    pub identically_zero: bool,
    /// Plain least-squares slope against `a r^{2k}`.
    pub plain_slope: Option<f64>,
    /// Slope against `a r^{2k}` with `ln r` as a second regressor, which
    /// absorbs the power-law prefactor of the error.
    pub slope: Option<f64>,
    /// Fitted power of `r` in the relative error (joint fit).
    pub prefactor_exponent: Option<f64>,
    /// Fitted decay constant, `-slope`.
    pub alpha: Option<f64>,
    /// Whether every used relative error has the same sign.
    pub sign_consistent: bool,
}

/// Measures how fast `R_0` approaches `ΔQ_0` along the grid.
pub fn thm1_decay_report(k: u32, c: f64, a: f64, r_grid: &[f64]) -> Result<DecayReport> {
    check_params(k, c, a)?;
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter("empty radius grid".into()));
    }
    if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radius grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let r0 = bergman_function_r0(k, c, a, r)?;
        let dq = laplacian_q0(k, a, r);
        let rel_err = r0 / dq - 1.0;
        let u = a * r.powi(2 * k as i32);
        let in_window = u >= DECAY_WINDOW.0 && u <= DECAY_WINDOW.1;
        points.push(DecayPoint {
            r,
            u,
            r0,
            delta_q0: dq,
            rel_err,
            used: in_window && rel_err.abs() >= REL_ERR_FLOOR,
        });
    }
    let used: Vec<&DecayPoint> = points.iter().filter(|p| p.used).collect();
    let in_window = points.iter().filter(|p| p.u >= DECAY_WINDOW.0 && p.u <= DECAY_WINDOW.1).count();
    let identically_zero = used.is_empty() && in_window > 0;
    let sign_consistent = used.windows(2).all(|w| w[0].rel_err.signum() == w[1].rel_err.signum());
    let mut report = DecayReport {
        k,
        c,
        amplitude: a,
        points: points.clone(),
        identically_zero,
        plain_slope: None,
        slope: None,
        prefactor_exponent: None,
        alpha: None,
        sign_consistent,
    };
    if identically_zero {
        return Ok(report);
    }
    if used.len() < 4 {
        return Err(Error::Fit(format!(
            "only {} usable points with a r^(2k) in [{}, {}]",
            used.len(),
            DECAY_WINDOW.0,
            DECAY_WINDOW.1
        )));
    }
    let u: Vec<f64> = used.iter().map(|p| p.u).collect();
    let ln_r: Vec<f64> = used.iter().map(|p| p.r.ln()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.rel_err.abs().ln()).collect();
    let (plain, _) = linear_fit(&u, &y)?;
    let joint = least_squares(&[&u, &ln_r], &y)?;
    report.plain_slope = Some(plain);
    report.slope = Some(joint[0]);
    report.prefactor_exponent = Some(joint[1]);
    report.alpha = Some(-joint[0]);
    Ok(report)
}
