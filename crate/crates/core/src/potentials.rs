//! Microscopic and macroscopic potentials.
//!
//! Potentials are polynomial data: a [`HermitianPoly`] stores the
//! coefficients `a_ij` of `z^i conj(z)^j` with `a_ij = conj(a_ji)` so that
//! its values on the diagonal are real. Conventions throughout the crate:
//! `Δ = ∂∂̄` (a quarter of the usual Laplacian) and `dA = dx dy / π`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hermitian-symmetry tolerance when checking user data.
const HERMITIAN_TOL: f64 = 1e-12;
/// A homogeneous form is positive definite when its minimum on the unit circle exceeds this.
pub const PD_THRESHOLD: f64 = 1e-10;
const ANGULAR_SCAN: usize = 512;

/// Evaluates `z^i conj(z)^j`.
pub fn monomial(z: Complex64, i: u32, j: u32) -> Complex64 {
    z.powu(i) * z.conj().powu(j)
}

/// Polynomial `sum a_ij z^i conj(z)^j` with Hermitian coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HermitianPoly {
    coeffs: BTreeMap<(u32, u32), Complex64>,
}

impl HermitianPoly {
    /// Builds from `(i, j, a_ij)` triples. A missing partner `(j, i)` is
    /// filled with the conjugate; a present one must match it.
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, Complex64)>,
    {
        let mut given: BTreeMap<(u32, u32), Complex64> = BTreeMap::new();
        for (i, j, a) in terms {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidParameter(format!("non-finite coefficient at ({i}, {j})")));
            }
            *given.entry((i, j)).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        let mut coeffs = BTreeMap::new();
        for (&(i, j), &a) in &given {
            match given.get(&(j, i)) {
                Some(&b) => {
                    if (a - b.conj()).norm() > HERMITIAN_TOL * (1.0 + a.norm()) {
                        return Err(Error::InvalidParameter(format!(
                            "coefficients ({i},{j}) and ({j},{i}) are not conjugate"
                        )));
                    }
                    coeffs.insert((i, j), a);
                }
                None => {
                    coeffs.insert((i, j), a);
                    coeffs.insert((j, i), a.conj());
                }
            }
        }
        for ((i, j), a) in coeffs.iter_mut() {
            if i == j {
                a.im = 0.0;
            }
        }
        coeffs.retain(|_, a| a.norm() != 0.0);
        Ok(Self { coeffs })
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, Complex64)> + '_ {
        self.coeffs.iter().map(|(&(i, j), &a)| (i, j, a))
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.coeffs.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_degree(&self) -> u32 {
        self.coeffs.keys().map(|(i, j)| i + j).max().unwrap_or(0)
    }

    /// Real value on the diagonal.
    pub fn eval(&self, z: Complex64) -> f64 {
        self.terms().map(|(i, j, a)| (a * monomial(z, i, j)).re).sum()
    }

    /// Polarization `sum a_ij z^i conj(w)^j`.
    pub fn polarize(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.terms().map(|(i, j, a)| a * z.powu(i) * w.conj().powu(j)).sum()
    }

    /// `Δ = ∂∂̄` applied coefficientwise.
    pub fn laplacian(&self) -> HermitianPoly {
        let coeffs = self
            .terms()
            .filter(|&(i, j, _)| i > 0 && j > 0)
            .map(|(i, j, a)| ((i - 1, j - 1), a * (i * j) as f64))
            .collect();
        HermitianPoly { coeffs }
    }

    pub fn scaled(&self, lambda: f64) -> HermitianPoly {
        HermitianPoly {
            coeffs: self.coeffs.iter().map(|(&k, &a)| (k, a * lambda)).collect(),
        }
    }

    /// Terms of total degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> HermitianPoly {
        HermitianPoly {
            coeffs: self.coeffs.iter().filter(|(&(i, j), _)| i + j == d).map(|(&k, &a)| (k, a)).collect(),
        }
    }

    fn minus(&self, other: &HermitianPoly) -> HermitianPoly {
        let mut coeffs = self.coeffs.clone();
        for (&k, &a) in &other.coeffs {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) -= a;
        }
        coeffs.retain(|_, a| a.norm() != 0.0);
        HermitianPoly { coeffs }
    }
}

/// A [`HermitianPoly`] whose terms all have total degree `2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousHermitianPoly {
    degree: u32,
    poly: HermitianPoly,
}

impl HomogeneousHermitianPoly {
    pub fn new(degree: u32, poly: HermitianPoly) -> Result<Self> {
        if degree == 0 || degree % 2 != 0 {
            return Err(Error::InvalidParameter(format!("degree must be even and positive, got {degree}")));
        }
        if let Some((i, j, _)) = poly.terms().find(|&(i, j, _)| i + j != degree) {
            return Err(Error::InvalidParameter(format!("term ({i},{j}) is not of degree {degree}")));
        }
        Ok(Self { degree, poly })
    }

    pub fn from_terms<I>(degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, Complex64)>,
    {
        Self::new(degree, HermitianPoly::from_terms(terms)?)
    }

    /// `amplitude * |z|^{2k}`.
    pub fn radial(k: u32, amplitude: f64) -> Result<Self> {
        Self::from_terms(2 * k, [(k, k, Complex64::new(amplitude, 0.0))])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn k(&self) -> u32 {
        self.degree / 2
    }

    pub fn poly(&self) -> &HermitianPoly {
        &self.poly
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.poly.coeff(i, j)
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.poly.eval(z)
    }

    /// `Q_0(e^{iθ})`.
    pub fn on_circle(&self, theta: f64) -> f64 {
        self.poly.terms().map(|(i, j, a)| (a * Complex64::from_polar(1.0, (i as f64 - j as f64) * theta)).re).sum()
    }

    fn on_circle_derivatives(&self, theta: f64) -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (i, j, a) in self.poly.terms() {
            let m = i as f64 - j as f64;
            let e = a * Complex64::from_polar(1.0, m * theta);
            d1 += (e * Complex64::new(0.0, m)).re;
            d2 -= m * m * e.re;
        }
        (d1, d2)
    }

    /// Minimum of `Q_0` on the unit circle as `(θ, value)`: a 512-point scan
    /// refined by safeguarded Newton steps on the derivative.
    pub fn min_on_circle(&self) -> (f64, f64) {
        let h = 2.0 * PI / ANGULAR_SCAN as f64;
        let (best, _) = (0..ANGULAR_SCAN)
            .map(|i| (i, self.on_circle(i as f64 * h)))
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        let (mut lo, mut hi) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
        let mut theta = best as f64 * h;
        for _ in 0..100 {
            let (d1, d2) = self.on_circle_derivatives(theta);
            if d1.abs() < 1e-15 {
                break;
            }
            if d1 > 0.0 {
                hi = theta;
            } else {
                lo = theta;
            }
            let newton = if d2 > 0.0 { theta - d1 / d2 } else { f64::NAN };
            theta = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        let theta = theta.rem_euclid(2.0 * PI);
        (theta, self.on_circle(theta))
    }

    /// Derivative of `θ ↦ Q_0(e^{iθ})`.
    pub fn circle_derivative(&self, theta: f64) -> f64 {
        self.on_circle_derivatives(theta).0
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_on_circle().1 > PD_THRESHOLD
    }

    /// `Δ^k Q_0(0) = (k!)^2 a_kk`.
    pub fn laplacian_power_at_origin(&self) -> f64 {
        let k = self.k();
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        fact * fact * self.coeff(k, k).re
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            degree: self.degree,
            poly: self.poly.scaled(lambda),
        }
    }

    /// `Some(a)` when the form is `a |z|^{2k}`.
    pub fn radial_amplitude(&self) -> Option<f64> {
        let k = self.k();
        let a = self.coeff(k, k).re;
        let only_diag = self.poly.terms().all(|(i, j, _)| i == k && j == k);
        (only_diag && a > 0.0).then_some(a)
    }
}

/// `V_0 = Q_0 - 2c log|z|` with `Q_0` positive definite and homogeneous of degree `2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroscopicPotential {
    q0: HomogeneousHermitianPoly,
    c: f64,
}

impl MicroscopicPotential {
    pub fn new(q0: HomogeneousHermitianPoly, c: f64) -> Result<Self> {
        if !(c > -1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("c must exceed -1, got {c}")));
        }
        let (theta, min) = q0.min_on_circle();
        if min <= PD_THRESHOLD {
            return Err(Error::NotPositiveDefinite(format!(
                "Q_0 has minimum {min:.3e} on the unit circle at θ = {theta:.6}"
            )));
        }
        Ok(Self { q0, c })
    }

    /// `|z|^{2k}` scaled by `amplitude`.
    pub fn radial(k: u32, c: f64, amplitude: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!("amplitude must be positive, got {amplitude}")));
        }
        Self::new(HomogeneousHermitianPoly::radial(k, amplitude)?, c)
    }

    pub fn k(&self) -> u32 {
        self.q0.k()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn q0(&self) -> &HomogeneousHermitianPoly {
        &self.q0
    }

    /// `κ = ∂^{2k} Q_0(0) / (2k)!`, the coefficient of `z^{2k}`.
    pub fn kappa(&self) -> Complex64 {
        self.q0.coeff(self.q0.degree(), 0)
    }

    /// Whether `∂^{2k} Q_0(0) = 0`.
    pub fn has_no_pure_term(&self) -> bool {
        self.kappa().norm() == 0.0
    }

    /// `V_0(z)`; `+∞` at the origin when `c > 0`, `-∞` when `c < 0`.
    pub fn eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        if r == 0.0 {
            return if self.c > 0.0 {
                f64::INFINITY
            } else if self.c < 0.0 {
                f64::NEG_INFINITY
            } else {
                0.0
            };
        }
        self.q0.eval(z) - 2.0 * self.c * r.ln()
    }

    /// `ΔQ_0(z)`.
    pub fn laplacian_q0(&self, z: Complex64) -> f64 {
        self.q0.poly().laplacian().eval(z)
    }

    pub fn radial_amplitude(&self) -> Option<f64> {
        self.q0.radial_amplitude()
    }
}

/// Moves the `z^{2k}` terms out of `Q_0`: returns `Q̃_0 = Q_0 - 2 Re(κ z^{2k})`
/// and `κ`. The Bergman densities of the two potentials coincide.
pub fn kappa_shift(p: &MicroscopicPotential) -> Result<(MicroscopicPotential, Complex64)> {
    let kappa = p.kappa();
    let d = p.q0.degree();
    let poly = HermitianPoly::from_terms(p.q0.poly().terms().filter(|&(i, j, _)| !((i == d && j == 0) || (i == 0 && j == d))))?;
    let shifted = HomogeneousHermitianPoly::new(d, poly)?;
    let (theta, min) = shifted.min_on_circle();
    if min <= PD_THRESHOLD {
        return Err(Error::NotPositiveDefinite(format!(
            "shifted Q_0 has minimum {min:.3e} at θ = {theta:.6}"
        )));
    }
    Ok((MicroscopicPotential { q0: shifted, c: p.c }, kappa))
}

/// A fixed logarithmic charge `2 c_j log|ζ - a_j|` in `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectator {
    pub position: Complex64,
    pub charge: f64,
}

/// How the smooth part `Q` of a macroscopic potential is given.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialShape {
    /// `Q(r) = sum_{m>=1} q_m r^{2m}`; element `m - 1` holds `q_m`.
    Radial(Vec<f64>),
    /// Hermitian Taylor coefficients about 0.
    Hermitian(HermitianPoly),
}

/// `V_n = Q - 2(c/n) log|ζ| - h/n` with `h = sum 2 c_j log|ζ - a_j|`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroscopicPotential {
    shape: PotentialShape,
    c: f64,
    spectators: Vec<Spectator>,
}

impl MacroscopicPotential {
    pub fn radial(coeffs: Vec<f64>, c: f64) -> Result<Self> {
        Self::new(PotentialShape::Radial(coeffs), c, Vec::new())
    }

    pub fn hermitian(poly: HermitianPoly, c: f64) -> Result<Self> {
        Self::new(PotentialShape::Hermitian(poly), c, Vec::new())
    }

    pub fn new(shape: PotentialShape, c: f64, spectators: Vec<Spectator>) -> Result<Self> {
        if !(c > -1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("c must exceed -1, got {c}")));
        }
        match &shape {
            PotentialShape::Radial(q) => {
                if q.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("non-finite radial coefficient".into()));
                }
                match q.iter().rposition(|&v| v != 0.0) {
                    Some(top) if q[top] > 0.0 => {}
                    Some(_) => return Err(Error::InvalidParameter("leading radial coefficient must be positive".into())),
                    None => return Err(Error::InvalidParameter("radial potential is identically zero".into())),
                }
            }
            PotentialShape::Hermitian(p) => {
                if p.coeff(0, 0).norm() != 0.0 {
                    return Err(Error::InvalidParameter("Q(0) must vanish".into()));
                }
                let top = p.max_degree();
                if top == 0 {
                    return Err(Error::InvalidParameter("potential is identically zero".into()));
                }
                let lead = HomogeneousHermitianPoly::new(top, p.homogeneous_part(top))
                    .map_err(|_| Error::InvalidParameter("top-degree part must be of even degree".into()))?;
                if !lead.is_positive_definite() {
                    return Err(Error::InvalidParameter("top-degree part is not positive definite".into()));
                }
            }
        }
        for (idx, s) in spectators.iter().enumerate() {
            if !(s.charge > -1.0) {
                return Err(Error::InvalidParameter(format!("spectator charge must exceed -1, got {}", s.charge)));
            }
            if s.position.norm() == 0.0 || !s.position.norm().is_finite() {
                return Err(Error::InvalidParameter("spectator must sit at a finite nonzero point".into()));
            }
            if spectators[..idx].iter().any(|t| t.position == s.position) {
                return Err(Error::InvalidParameter("spectator positions must be distinct".into()));
            }
        }
        Ok(Self { shape, c, spectators })
    }

    pub fn with_spectators(mut self, spectators: Vec<Spectator>) -> Result<Self> {
        self.spectators = spectators;
        Self::new(self.shape, self.c, self.spectators)
    }

    pub fn shape(&self) -> &PotentialShape {
        &self.shape
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn spectators(&self) -> &[Spectator] {
        &self.spectators
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.shape, PotentialShape::Radial(_))
    }

    pub fn radial_coeffs(&self) -> Option<&[f64]> {
        match &self.shape {
            PotentialShape::Radial(q) => Some(q),
            PotentialShape::Hermitian(_) => None,
        }
    }

    /// Hermitian Taylor coefficients (radial `q_m` become `a_mm`).
    pub fn taylor(&self) -> HermitianPoly {
        match &self.shape {
            PotentialShape::Radial(q) => HermitianPoly::from_terms(
                q.iter().enumerate().map(|(i, &v)| (i as u32 + 1, i as u32 + 1, Complex64::new(v, 0.0))),
            )
            .expect("radial coefficients are Hermitian"),
            PotentialShape::Hermitian(p) => p.clone(),
        }
    }

    /// `Q(ζ)`.
    pub fn q(&self, z: Complex64) -> f64 {
        match &self.shape {
            PotentialShape::Radial(q) => radial_eval(q, z.norm()),
            PotentialShape::Hermitian(p) => p.eval(z),
        }
    }

    /// `h(ζ) = sum 2 c_j log|ζ - a_j|`.
    pub fn h(&self, z: Complex64) -> f64 {
        self.spectators.iter().map(|s| 2.0 * s.charge * (z - s.position).norm().ln()).sum()
    }

    /// `λ Q` with spectators and `c` unchanged.
    pub fn scaled(&self, lambda: f64) -> Self {
        let shape = match &self.shape {
            PotentialShape::Radial(q) => PotentialShape::Radial(q.iter().map(|v| v * lambda).collect()),
            PotentialShape::Hermitian(p) => PotentialShape::Hermitian(p.scaled(lambda)),
        };
        Self {
            shape,
            c: self.c,
            spectators: self.spectators.clone(),
        }
    }
}

/// `Q(r) = sum q_m r^{2m}` with `q[m-1] = q_m`.
pub fn radial_eval(q: &[f64], r: f64) -> f64 {
    let r2 = r * r;
    q.iter().rev().fold(0.0, |acc, &v| (acc + v) * r2)
}

/// `Q'(r)`.
pub fn radial_derivative(q: &[f64], r: f64) -> f64 {
    q.iter().enumerate().map(|(i, &v)| 2.0 * (i + 1) as f64 * v * r.powi(2 * i as i32 + 1)).sum()
}

/// `ΔQ(r) = sum m^2 q_m r^{2m-2}`.
pub fn radial_laplacian(q: &[f64], r: f64) -> f64 {
    q.iter().enumerate().map(|(i, &v)| ((i + 1) * (i + 1)) as f64 * v * r.powi(2 * i as i32)).sum()
}

/// `∫_{|ζ|<=r} ΔQ dA = r Q'(r) / 2 = sum m q_m r^{2m}`.
pub fn radial_mass(q: &[f64], r: f64) -> f64 {
    q.iter().enumerate().map(|(i, &v)| (i + 1) as f64 * v * r.powi(2 * i as i32 + 2)).sum()
}

/// The order `k` of vanishing of `ΔQ` at the origin, plus one.
pub fn detect_k(q: &MacroscopicPotential) -> Result<u32> {
    match q.shape() {
        PotentialShape::Radial(coeffs) => {
            let m = coeffs
                .iter()
                .position(|&v| v != 0.0)
                .ok_or_else(|| Error::InvalidParameter("radial potential is identically zero".into()))?;
            if coeffs[m] < 0.0 {
                return Err(Error::IndefiniteLeadingPart(format!("q_{} = {} < 0", m + 1, coeffs[m])));
            }
            Ok(m as u32 + 1)
        }
        PotentialShape::Hermitian(p) => {
            let lap = p.laplacian();
            let d = lap
                .terms()
                .map(|(i, j, _)| i + j)
                .min()
                .ok_or_else(|| Error::InvalidParameter("ΔQ vanishes identically".into()))?;
            if d % 2 == 1 {
                return Err(Error::IndefiniteLeadingPart(format!("leading part of ΔQ has odd degree {d}")));
            }
            let lead = lap.homogeneous_part(d);
            let positive = if d == 0 {
                lead.coeff(0, 0).re > PD_THRESHOLD
            } else {
                HomogeneousHermitianPoly::new(d, lead)?.is_positive_definite()
            };
            if !positive {
                return Err(Error::IndefiniteLeadingPart(format!(
                    "degree-{d} part of ΔQ is not positive definite"
                )));
            }
            Ok(d / 2 + 1)
        }
    }
}

/// `Q = Q_0 + Re H + Q_1` about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition {
    k: u32,
    q0: HomogeneousHermitianPoly,
    h_coeffs: Vec<Complex64>,
    q1: HermitianPoly,
}

impl CanonicalDecomposition {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn q0(&self) -> &HomogeneousHermitianPoly {
        &self.q0
    }

    /// Coefficients of `H(ζ) = sum_m h_m ζ^m`, `m = 0..=2k`.
    pub fn h_coeffs(&self) -> &[Complex64] {
        &self.h_coeffs
    }

    pub fn q1(&self) -> &HermitianPoly {
        &self.q1
    }

    pub fn h(&self, z: Complex64) -> Complex64 {
        self.h_coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    pub fn reconstruct(&self, z: Complex64) -> f64 {
        self.q0.eval(z) + self.h(z).re + self.q1.eval(z)
    }

    /// The microscopic potential `Q_0 - 2c log|z|`.
    pub fn microscopic(&self, c: f64) -> Result<MicroscopicPotential> {
        MicroscopicPotential::new(self.q0.clone(), c)
    }
}

/// Splits the Taylor data of `Q` into the homogeneous `Q_0` (mixed terms of
/// degree `2k`), the holomorphic part `H` with `h_m = 2 ∂^m Q(0) / m!`, and
/// the remainder `Q_1`.
pub fn canonical_decompose(q: &MacroscopicPotential, k: u32) -> Result<CanonicalDecomposition> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let taylor = q.taylor();
    let top = 2 * k;
    if let Some((i, j, _)) = taylor.terms().find(|&(i, j, _)| i > 0 && j > 0 && i + j < top) {
        return Err(Error::InvalidParameter(format!(
            "mixed term ({i},{j}) of degree below {top}: ΔQ does not vanish to order {}",
            top - 2
        )));
    }
    let mut h_coeffs = vec![Complex64::new(0.0, 0.0); top as usize + 1];
    for (m, h) in h_coeffs.iter_mut().enumerate().skip(1) {
        // ∂^m Q(0) / m! is the coefficient of ζ^m
        *h = 2.0 * taylor.coeff(m as u32, 0);
    }
    let pure_and_mixed_low = HermitianPoly::from_terms(
        taylor.terms().filter(|&(i, j, _)| i + j <= top && (i == 0 || j == 0)),
    )?;
    let q0_poly = HermitianPoly::from_terms(taylor.terms().filter(|&(i, j, _)| i + j == top && i > 0 && j > 0))?;
    let q0 = HomogeneousHermitianPoly::new(top, q0_poly)?;
    let q1 = taylor.minus(&pure_and_mixed_low).minus(q0.poly());
    let (theta, min) = q0.min_on_circle();
    if min <= PD_THRESHOLD {
        return Err(Error::NotPositiveDefinite(format!(
            "Q_0 of the decomposition has minimum {min:.3e} at θ = {theta:.6}"
        )));
    }
    Ok(CanonicalDecomposition { k, q0, h_coeffs, q1 })
}

/// Rescales `Q` by `λ = (1 + c) k [(k-1)!]^2 / Δ^k Q_0(0)`, which makes the
/// rescaled `Q_0` satisfy `Δ^k Q_0(0) / (k [(k-1)!]^2) = 1 + c`.
pub fn normalize_potential(q: &MacroscopicPotential, k: u32) -> Result<(MacroscopicPotential, f64)> {
    let dec = canonical_decompose(q, k)?;
    let lambda = normalization_factor(dec.q0(), q.c());
    Ok((q.scaled(lambda), lambda))
}

/// The `λ` of [`normalize_potential`] for a given `Q_0`.
pub fn normalization_factor(q0: &HomogeneousHermitianPoly, c: f64) -> f64 {
    let k = q0.k();
    let fact: f64 = (1..k).map(|i| i as f64).product();
    (1.0 + c) * k as f64 * fact * fact / q0.laplacian_power_at_origin()
}

/// On-disk potential description (TOML).
///
/// ```toml
/// kind = "radial"            # or "hermitian"
/// k = 1                      # optional, detected when absent
/// c = 0.0
/// radial_coeffs = [1.0, 1.0] # q_1, q_2, ...: Q(r) = sum q_m r^(2m)
/// hermitian_coeffs = [[1, 1, 1.0, 0.0], [2, 0, 0.3, 0.0]]  # [i, j, re, im]
/// spectators = [[2.0, 0.0, 0.5]]                           # [re, im, c_j]
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: String,
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub radial_coeffs: Option<Vec<f64>>,
    #[serde(default)]
    pub hermitian_coeffs: Option<Vec<[f64; 4]>>,
    #[serde(default)]
    pub spectators: Vec<[f64; 3]>,
}

impl PotentialConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_potential(&self) -> Result<MacroscopicPotential> {
        let shape = match (self.kind.as_str(), &self.radial_coeffs, &self.hermitian_coeffs) {
            ("radial", Some(q), None) => PotentialShape::Radial(q.clone()),
            ("hermitian", None, Some(h)) => {
                let mut terms = Vec::with_capacity(h.len());
                for t in h {
                    let (i, j) = (t[0], t[1]);
                    if i < 0.0 || j < 0.0 || i.fract() != 0.0 || j.fract() != 0.0 {
                        return Err(Error::Config(format!("exponents must be nonnegative integers, got ({i}, {j})")));
                    }
                    terms.push((i as u32, j as u32, Complex64::new(t[2], t[3])));
                }
                PotentialShape::Hermitian(HermitianPoly::from_terms(terms).map_err(|e| Error::Config(e.to_string()))?)
            }
            ("radial", _, _) => return Err(Error::Config("kind = \"radial\" needs radial_coeffs only".into())),
            ("hermitian", _, _) => return Err(Error::Config("kind = \"hermitian\" needs hermitian_coeffs only".into())),
            (other, _, _) => return Err(Error::Config(format!("unknown kind {other:?}"))),
        };
        let spectators = self
            .spectators
            .iter()
            .map(|s| Spectator {
                position: Complex64::new(s[0], s[1]),
                charge: s[2],
            })
            .collect();
        let pot = MacroscopicPotential::new(shape, self.c, spectators).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(k) = self.k {
            let detected = detect_k(&pot).map_err(|e| Error::Config(e.to_string()))?;
            if detected != k {
                return Err(Error::Config(format!("declared k = {k} but the potential has k = {detected}")));
            }
        }
        Ok(pot)
    }
}
