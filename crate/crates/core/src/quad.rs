//! Adaptive Gauss-Legendre quadrature and a log-domain integrator for
//! sharply peaked, log-concave integrands on the half line.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Tricomi initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule on [a, b].
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: &mut F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel rule shared by the adaptive integrators.
pub fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(64))
}

const MAX_DEPTH: usize = 60;
const MAX_PANELS: usize = 20_000;

/// Adaptive panel integration of `f` over `[a, b]`: a panel is accepted
/// when the rule on the whole panel and on its two halves agree within
/// `max(abs_tol, rel_tol * |total estimate|)` scaled by the panel's share
/// of the interval.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let rule = panel_rule();
    let whole = rule.apply(&mut f, a, b);
    let scale_guess = whole.abs();
    let width = (b - a).abs();
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut total: f64 = 0.0;
    let mut comp = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::Quadrature(format!("panel budget exhausted on [{a}, {b}]")));
        }
        let mid = 0.5 * (lo + hi);
        let left = rule.apply(&mut f, lo, mid);
        let right = rule.apply(&mut f, mid, hi);
        let refined = left + right;
        if !refined.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand on [{lo}, {hi}]")));
        }
        let tol = abs_tol.max(rel_tol * scale_guess.max(total.abs())) * ((hi - lo).abs() / width).max(1e-3);
        if (refined - est).abs() <= tol || depth >= MAX_DEPTH {
            if depth >= MAX_DEPTH && (refined - est).abs() > tol {
                return Err(Error::Quadrature(format!("no convergence near [{lo}, {hi}]")));
            }
            let y = refined - comp;
            let t = total + y;
            comp = (t - total) - y;
            total = t;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// Drop (in natural-log units) below the peak at which a log-concave
/// integrand is truncated; e^-80 is far below double precision.
pub(crate) const LOG_CUTOFF: f64 = 80.0;

/// Returns `ln ∫ exp(g(t)) dt` over the real line for a concave `g`
/// with a finite maximum. `g_prime` is the derivative used to locate the
/// peak. The integral is evaluated as `g_max + ln ∫ exp(g - g_max)`.
pub fn log_integral_concave<G, D>(g: G, g_prime: D, rel_tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let peak = find_peak(&g_prime)?;
    let g_max = g(peak);
    if !g_max.is_finite() {
        return Err(Error::Quadrature(format!("log-integrand not finite at its peak t={peak}")));
    }
    let lo = find_cutoff(&g, peak, g_max, -1.0)?;
    let hi = find_cutoff(&g, peak, g_max, 1.0)?;
    let h = |t: f64| (g(t) - g_max).exp();
    let left = integrate(h, lo, peak, rel_tol, 0.0)?;
    let right = integrate(h, peak, hi, rel_tol, 0.0)?;
    Ok(g_max + (left + right).ln())
}

pub(crate) fn find_peak<D: Fn(f64) -> f64>(g_prime: &D) -> Result<f64> {
    // g' is decreasing; bracket its sign change
    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while g_prime(lo) <= 0.0 {
        lo = 2.0 * lo - 1.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::Quadrature("peak search escaped to -inf".into()));
        }
    }
    steps = 0;
    while g_prime(hi) >= 0.0 {
        hi = 2.0 * hi + 1.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::Quadrature("peak search escaped to +inf".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_prime(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + mid.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub(crate) fn find_cutoff<G: Fn(f64) -> f64>(g: &G, peak: f64, g_max: f64, dir: f64) -> Result<f64> {
    let target = g_max - LOG_CUTOFF;
    let mut step = 1.0;
    let mut far = peak + dir * step;
    let mut steps = 0;
    while g(far) > target {
        step *= 2.0;
        far = peak + dir * step;
        steps += 1;
        if steps > 200 || !far.is_finite() {
            return Err(Error::Quadrature("integrand tail does not decay".into()));
        }
    }
    let (mut near, mut far) = (peak, far);
    for _ in 0..100 {
        let mid = 0.5 * (near + far);
        if g(mid) > target {
            near = mid;
        } else {
            far = mid;
        }
    }
    Ok(far)
}

/// Gauss rule with `n` nodes for the weight `v^c e^{-v^k}` on `(0, ∞)`.
///
/// Recurrence coefficients come from a Lanczos run (with full
/// reorthogonalization) on a trapezoid discretization in `t = ln v`, which
/// converges spectrally for these integrands. Nodes are eigenvalues of the
/// Jacobi matrix; weights are Christoffel numbers `1 / Σ p_j(v)^2`, which
/// keep full relative accuracy in the far tail.
pub fn gauss_power_exponential(k: u32, c: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 || !(c > -1.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need k >= 1, c > -1, n >= 1 (k={k}, c={c}, n={n})")));
    }
    let kf = k as f64;
    let log_f = |j: f64| move |t: f64| (j + c + 1.0) * t - (kf * t).exp();
    let peak = |j: f64| ((j + c + 1.0) / kf).ln() / kf;
    let top = (2 * n) as f64;
    let (g_lo, g_hi) = (log_f(0.0), log_f(top));
    let (p_lo, p_hi) = (peak(0.0), peak(top));
    let lo = find_cutoff(&g_lo, p_lo, g_lo(p_lo), -1.0)?;
    let hi = find_cutoff(&g_hi, p_hi, g_hi(p_hi), 1.0)?;
    let h = 0.02 / kf;
    let m = ((hi - lo) / h).ceil() as usize + 1;
    let x: Vec<f64> = (0..m).map(|i| (lo + i as f64 * h).exp()).collect();
    let sw: Vec<f64> = (0..m).map(|i| (0.5 * g_lo(lo + i as f64 * h)).exp() * h.sqrt()).collect();
    let mu0: f64 = sw.iter().map(|v| v * v).sum();

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    basis.push(sw.iter().map(|v| v / mu0.sqrt()).collect());
    for j in 0..n {
        let q = &basis[j];
        let mut r: Vec<f64> = q.iter().zip(&x).map(|(a, b)| a * b).collect();
        alpha[j] = r.iter().zip(q).map(|(a, b)| a * b).sum();
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = r.iter().zip(b).map(|(u, v)| u * v).sum();
                r.iter_mut().zip(b).for_each(|(u, v)| *u -= d * v);
            }
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if j + 1 < n {
            if !(norm > 0.0) {
                return Err(Error::Quadrature("Lanczos breakdown in Gauss rule construction".into()));
            }
            beta[j + 1] = norm;
            basis.push(r.into_iter().map(|v| v / norm).collect());
        }
    }

    let jacobi = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[j]
        } else if j + 1 == i {
            beta[i]
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| a.total_cmp(b));
    let weights = nodes
        .iter()
        .map(|&v| {
            // orthonormal recurrence, p_0 = 1/sqrt(mu0)
            let (mut prev, mut cur) = (0.0, 1.0 / mu0.sqrt());
            let mut sum = cur * cur;
            for j in 0..n - 1 {
                let next = ((v - alpha[j]) * cur - beta[j] * prev) / beta[j + 1];
                prev = cur;
                cur = next;
                sum += cur * cur;
            }
            1.0 / sum
        })
        .collect();
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_exponential_rule_matches_gamma_moments() {
        for &(k, c) in &[(1u32, 0.0), (1, 2.5), (2, -0.5), (3, 0.7), (2, -0.9)] {
            let n = 30;
            let (v, w) = gauss_power_exponential(k, c, n).unwrap();
            for j in 0..2 * n {
                let exact = (crate::special_fn::log_gamma((j as f64 + c + 1.0) / k as f64).unwrap()).exp() / k as f64;
                let got: f64 = v.iter().zip(&w).map(|(x, wt)| wt * x.powi(j as i32)).sum();
                assert!((got / exact - 1.0).abs() < 1e-12, "k={k} c={c} j={j}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn laguerre_nodes() {
        // two-point rule for e^{-v}: nodes 2 -+ sqrt(2)
        let (v, w) = gauss_power_exponential(1, 0.0, 2).unwrap();
        assert!((v[0] - (2.0 - 2f64.sqrt())).abs() < 1e-13 && (v[1] - (2.0 + 2f64.sqrt())).abs() < 1e-13);
        assert!((w[0] + w[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // degree 19 is the limit for a 10-point rule
        let mut f = |x: f64| x.powi(18) + 3.0 * x.powi(7);
        let v = rule.apply(&mut f, -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-15);
        let wsum: f64 = GaussLegendre::new(64).weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // narrow Gaussian of width 1e-3 inside [0, 1]
        let s = 1e-3;
        let v = integrate(|x: f64| (-(x - 0.3).powi(2) / (2.0 * s * s)).exp(), 0.0, 1.0, 1e-13, 0.0).unwrap();
        let exact = s * (2.0 * std::f64::consts::PI).sqrt();
        assert!((v / exact - 1.0).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn log_integral_of_gamma_density() {
        // ∫ exp(a t - e^t) dt = Gamma(a)
        let a = 37.5;
        let v = log_integral_concave(|t| a * t - t.exp(), |t| a - t.exp(), 1e-14).unwrap();
        let exact = crate::special_fn::log_gamma(a).unwrap();
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }
}
