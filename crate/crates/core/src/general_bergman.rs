//! Truncated Bergman kernels for non-radial homogeneous `Q_0`.
//!
//! The moment matrix of the monomials factors into an exact radial gamma
//! integral and an angular integral of the trigonometric polynomial
//! `q(θ) = Q_0(e^{iθ})`, evaluated by the periodic trapezoid rule. The
//! kernel of the span of `1, z, ..., z^{N-1}` is then
//! `L(z, w) = p(w)^H A^{-1} p(z)` with `p(z) = (z^i)`.
//!
//! The kernel is not built from `A` directly. The same measure is
//! discretized by a product cubature (angular trapezoid times a radial Gauss
//! rule) that reproduces `A`, and the weighted Vandermonde matrix of that
//! cubature is QR-factored. Its `R` satisfies `R^H R = conj(A)` while carrying only
//! the square root of the condition number of `A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potentials::MicroscopicPotential;
use crate::quad::gauss_power_exponential;
use crate::special_fn::log_gamma;

pub const DEFAULT_ANGULAR_POINTS: usize = 512;
pub const DEFAULT_TRUNCATION: usize = 48;
/// Largest accepted condition number of the unit-diagonal moment matrix.
pub const MAX_CONDITION: f64 = 1e24;

/// Gram matrix `A_ij = ∫ z^i conj(z)^j |z|^{2c} e^{-Q_0} dA`, `0 <= i, j < N`.
#[derive(Debug, Clone)]
pub struct MomentMatrix {
    entries: DMatrix<Complex64>,
    scales: Vec<f64>,
    angular_points: usize,
    degree: u32,
    c: f64,
    ln_q: Vec<f64>,
}

impl MomentMatrix {
    pub fn order(&self) -> usize {
        self.scales.len()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// `s_i = sqrt(A_ii)`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn angular_points(&self) -> usize {
        self.angular_points
    }

    /// `A_ij / (s_i s_j)`, unit diagonal.
    pub fn scaled(&self) -> DMatrix<Complex64> {
        let s = &self.scales;
        DMatrix::from_fn(self.order(), self.order(), |i, j| self.entries[(i, j)] / (s[i] * s[j]))
    }
}

pub fn moment_matrix(p: &MicroscopicPotential, n: usize) -> Result<MomentMatrix> {
    moment_matrix_with(p, n, DEFAULT_ANGULAR_POINTS)
}

/// Moment matrix with an `m`-point angular trapezoid rule.
pub fn moment_matrix_with(p: &MicroscopicPotential, n: usize, m: usize) -> Result<MomentMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("truncation order must be at least 1".into()));
    }
    if m < 4 {
        return Err(Error::InvalidParameter("need at least 4 angular points".into()));
    }
    let two_k = p.q0().degree() as f64;
    let c = p.c();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let thetas: Vec<f64> = (0..m).map(|i| i as f64 * h).collect();
    let ln_q: Vec<f64> = thetas.iter().map(|&t| p.q0().on_circle(t).ln()).collect();
    if ln_q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite("Q_0 vanishes on the unit circle".into()));
    }
    let mut entries = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let s = (i + j) as f64 + 2.0 * c + 2.0;
            let e = s / two_k;
            let radial = log_gamma(e)? - two_k.ln();
            let shift = (i as f64) - (j as f64);
            // mean over the circle of e^{i(i-j)θ} q^{-s/2k}, times e^{radial}
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, lq) in thetas.iter().zip(&ln_q) {
                acc += Complex64::from_polar((radial - e * lq).exp(), shift * t);
            }
            let v = acc * (2.0 / m as f64);
            entries[(i, j)] = v;
            entries[(j, i)] = v.conj();
        }
        entries[(i, i)].im = 0.0;
    }
    let scales: Vec<f64> = (0..n).map(|i| entries[(i, i)].re.sqrt()).collect();
    if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::NotPositiveDefinite("moment matrix has a non-positive diagonal".into()));
    }
    Ok(MomentMatrix {
        entries,
        scales,
        angular_points: m,
        degree: p.q0().degree(),
        c,
        ln_q,
    })
}

/// Reproducing kernel of the polynomials of degree `< N` in `L^2(μ_0)`,
/// held as a lower factor `L` with `L L^H` the unit-diagonal moment matrix.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    factor: DMatrix<Complex64>,
    scales: Vec<f64>,
    condition: f64,
}

pub fn truncated_kernel(a: &MomentMatrix) -> Result<TruncatedKernel> {
    let n = a.order();
    let m = a.angular_points;
    let k = a.degree / 2;
    let kf = k as f64;
    let (nodes, weights) = gauss_power_exponential(k, a.c, n / 2 + 2)?;
    // node z = sqrt(v) q^{-1/2k} e^{iθ}, weight w q^{-(c+1)/k} / m
    let rows = m * nodes.len();
    let mut v = DMatrix::from_element(rows, n, Complex64::new(0.0, 0.0));
    for (t, lq) in a.ln_q.iter().enumerate() {
        let theta = 2.0 * std::f64::consts::PI * t as f64 / m as f64;
        for (l, (x, w)) in nodes.iter().zip(&weights).enumerate() {
            let ln_r = 0.5 * (x.ln() - lq / kf);
            let ln_w = 0.5 * (w.ln() - (a.c + 1.0) * lq / kf - (m as f64).ln());
            for i in 0..n {
                let mag = (ln_w + i as f64 * ln_r - a.scales[i].ln()).exp();
                v[(t * nodes.len() + l, i)] = Complex64::from_polar(mag, i as f64 * theta);
            }
        }
    }
    let r = v.qr().r();
    let sv = r.singular_values();
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(lo > 0.0) || (0..n).any(|i| !(r[(i, i)].norm() > 0.0)) {
        return Err(Error::NotPositiveDefinite("scaled moment matrix is singular".into()));
    }
    let condition = (hi / lo).powi(2);
    if condition > MAX_CONDITION {
        return Err(Error::NotPositiveDefinite(format!(
            "scaled moment matrix condition number {condition:.3e} exceeds {MAX_CONDITION:.3e}"
        )));
    }
    Ok(TruncatedKernel {
        // R^H R is conj(A), so A = R^T conj(R)
        factor: r.transpose(),
        scales: a.scales().to_vec(),
        condition,
    })
}

impl TruncatedKernel {
    pub fn order(&self) -> usize {
        self.scales.len()
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Components of `L^{-1} (z^i / s_i) · exp(log_weight)`, i.e. the values
    /// at `z` of an orthonormal basis times the square root of the weight.
    fn orthonormal_values(&self, z: Complex64, log_weight: f64) -> DVector<Complex64> {
        let n = self.order();
        let r = z.norm();
        let theta = z.arg();
        let ln_r = r.ln();
        let rhs = DVector::from_fn(n, |i, _| {
            let mag = if r == 0.0 {
                if i == 0 {
                    (log_weight - self.scales[0].ln()).exp()
                } else {
                    0.0
                }
            } else {
                (i as f64 * ln_r + log_weight - self.scales[i].ln()).exp()
            };
            Complex64::from_polar(mag, i as f64 * theta)
        });
        self.factor
            .solve_lower_triangular(&rhs)
            .expect("factor has a nonzero diagonal")
    }

    /// `L^{(N)}(z, w)`.
    pub fn kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        let yz = self.orthonormal_values(z, 0.0);
        let yw = self.orthonormal_values(w, 0.0);
        yw.dotc(&yz)
    }

    /// `L^{(N)}(z, z)`.
    pub fn diagonal(&self, z: Complex64) -> f64 {
        self.orthonormal_values(z, 0.0).norm_squared()
    }

    /// `G` with `L^{(N)}(z, w) = sum G_ij z^i conj(w)^j`, i.e. `conj(A^{-1})`.
    pub fn coefficient_matrix(&self) -> DMatrix<Complex64> {
        let n = self.order();
        let linv = self
            .factor
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("factor has a nonzero diagonal");
        let sinv = linv.adjoint() * linv;
        DMatrix::from_fn(n, n, |i, j| (sinv[(i, j)] / (self.scales[i] * self.scales[j])).conj())
    }

    /// Contribution of the highest-degree orthonormal polynomial to the
    /// Bergman density at `z`; large values flag truncation error.
    pub fn tail_indicator(&self, p: &MicroscopicPotential, z: Complex64) -> Result<f64> {
        let y = self.orthonormal_values(z, damping_log(p, z)?);
        Ok(y[self.order() - 1].norm_sqr())
    }
}

fn damping_log(p: &MicroscopicPotential, z: Complex64) -> Result<f64> {
    let r = z.norm();
    if r == 0.0 {
        return if p.c() < 0.0 {
            Err(Error::Divergent(format!("density is infinite at 0 for c = {}", p.c())))
        } else if p.c() > 0.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Ok(0.0)
        };
    }
    Ok(0.5 * (2.0 * p.c() * r.ln() - p.q0().eval(z)))
}

/// `L^{(N)}(z, z) |z|^{2c} e^{-Q_0(z)}` with the weight folded into each
/// orthonormal component before squaring.
pub fn bergman_density(tk: &TruncatedKernel, p: &MicroscopicPotential, z: Complex64) -> Result<f64> {
    let lw = damping_log(p, z)?;
    if lw == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok(tk.orthonormal_values(z, lw).norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::HomogeneousHermitianPoly;
    use crate::radial_bergman;

    fn kappa_potential(kappa: f64, c: f64) -> MicroscopicPotential {
        let q0 = HomogeneousHermitianPoly::from_terms(
            2,
            [(1, 1, Complex64::new(1.0, 0.0)), (2, 0, Complex64::new(kappa, 0.0))],
        )
        .unwrap();
        MicroscopicPotential::new(q0, c).unwrap()
    }

    #[test]
    fn radial_moment_matrix_is_diagonal_gamma() {
        for &(k, c) in &[(1u32, 0.0), (2, 0.5), (3, -0.4)] {
            let p = MicroscopicPotential::radial(k, c, 1.0).unwrap();
            let a = moment_matrix(&p, 12).unwrap();
            let t = radial_bergman::moments(k, c, 1.0, 11).unwrap();
            for i in 0..12 {
                for j in 0..12 {
                    let v = a.entry(i, j);
                    if i == j {
                        assert!((v.re / t.moment(i) - 1.0).abs() < 1e-12, "k={k} i={i}");
                    } else {
                        assert!(v.norm() <= 1e-12 * a.scales()[i] * a.scales()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn angular_resolution_self_convergence() {
        let p = kappa_potential(0.3, 0.0);
        let a = moment_matrix_with(&p, 4, 256).unwrap();
        let b = moment_matrix_with(&p, 4, 512).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((a.entry(i, j) - b.entry(i, j)).norm() < 1e-12);
            }
        }
        // 1 and z^2 are coupled by the z^2 term of Q_0
        assert!(a.entry(0, 2).norm() > 1e-3);
        assert!(a.entry(0, 1).norm() < 1e-14);
    }

    #[test]
    fn radial_kernel_coefficients_are_reciprocal_moments() {
        let p = MicroscopicPotential::radial(2, 0.5, 1.0).unwrap();
        let tk = truncated_kernel(&moment_matrix(&p, 10).unwrap()).unwrap();
        let g = tk.coefficient_matrix();
        let t = radial_bergman::moments(2, 0.5, 1.0, 9).unwrap();
        for j in 0..10 {
            assert!((g[(j, j)].re * t.moment(j) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn order_one_kernel_is_constant() {
        let p = kappa_potential(0.3, 0.2);
        let a = moment_matrix(&p, 1).unwrap();
        let tk = truncated_kernel(&a).unwrap();
        let expect = 1.0 / a.entry(0, 0).re;
        for z in [Complex64::new(0.0, 0.0), Complex64::new(0.7, -1.1)] {
            assert!((tk.diagonal(z) - expect).abs() < 1e-14 * expect);
        }
    }

    #[test]
    fn reproducing_property() {
        let p = kappa_potential(0.25, 0.5);
        let a = moment_matrix(&p, 8).unwrap();
        let tk = truncated_kernel(&a).unwrap();
        let g = tk.coefficient_matrix();
        let z = Complex64::new(0.4, 0.9);
        // <L(., z), z^l> = sum_ij G_ij conj(z)^j A_il
        for l in 0..8 {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..8 {
                for j in 0..8 {
                    acc += g[(i, j)] * z.conj().powu(j as u32) * a.entry(i, l);
                }
            }
            let expect = z.conj().powu(l as u32);
            assert!((acc - expect).norm() < 1e-10 * (1.0 + expect.norm()), "l={l}");
        }
    }

    #[test]
    fn density_at_origin() {
        let p = kappa_potential(0.3, 0.0);
        let a = moment_matrix(&p, 6).unwrap();
        let tk = truncated_kernel(&a).unwrap();
        let g = tk.coefficient_matrix();
        let v = bergman_density(&tk, &p, Complex64::new(0.0, 0.0)).unwrap();
        assert!((v - g[(0, 0)].re).abs() < 1e-13);
        let p = kappa_potential(0.3, 0.5);
        let tk = truncated_kernel(&moment_matrix(&p, 6).unwrap()).unwrap();
        assert_eq!(bergman_density(&tk, &p, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        let p = kappa_potential(0.3, -0.5);
        let tk = truncated_kernel(&moment_matrix(&p, 6).unwrap()).unwrap();
        assert!(matches!(bergman_density(&tk, &p, Complex64::new(0.0, 0.0)), Err(Error::Divergent(_))));
    }

    #[test]
    fn radial_density_matches_closed_form() {
        let p = MicroscopicPotential::radial(1, 0.5, 1.0).unwrap();
        let tk = truncated_kernel(&moment_matrix(&p, 60).unwrap()).unwrap();
        for &r in &[0.2, 1.0, 2.0] {
            let z = Complex64::from_polar(r, 0.7);
            let v = bergman_density(&tk, &p, z).unwrap();
            let w = radial_bergman::bergman_function_r0(1, 0.5, 1.0, r).unwrap();
            assert!((v - w).abs() < 1e-10, "r={r}: {v} vs {w}");
        }
    }

    #[test]
    fn factor_reproduces_scaled_moments() {
        for (p, n) in [(kappa_potential(0.3, 0.0), 12), (kappa_potential(0.2, -0.6), 9)] {
            let a = moment_matrix(&p, n).unwrap();
            let tk = truncated_kernel(&a).unwrap();
            let g = &tk.factor * tk.factor.adjoint();
            let s = a.scaled();
            assert!((g - s).norm() < 1e-12);
        }
        let q0 = crate::potentials::HomogeneousHermitianPoly::from_terms(
            4,
            [(2, 2, Complex64::new(1.0, 0.0)), (3, 1, Complex64::new(0.1, 0.2)), (4, 0, Complex64::new(0.15, 0.0))],
        )
        .unwrap();
        let p = MicroscopicPotential::new(q0, 0.4).unwrap();
        let a = moment_matrix(&p, 10).unwrap();
        let tk = truncated_kernel(&a).unwrap();
        assert!((&tk.factor * tk.factor.adjoint() - a.scaled()).norm() < 1e-12);
    }

    #[test]
    fn kappa_density_converges_and_increases() {
        let p = kappa_potential(0.3, 0.0);
        let z = Complex64::new(1.2, 0.5);
        let mut prev = 0.0;
        for n in [16, 32, 48, 64] {
            let tk = truncated_kernel(&moment_matrix(&p, n).unwrap()).unwrap();
            let v = bergman_density(&tk, &p, z).unwrap();
            assert!(v >= prev - 1e-12 && v <= 1.0 + 1e-9, "n={n}: {v}");
            prev = v;
        }
        assert!((prev - 1.0).abs() < 1e-7, "{prev}");
    }
}
