//! Real-argument log-gamma and Mittag-Leffler evaluation.
//!
//! Everything here works on the positive real axis. The Mittag-Leffler
//! series is only safe for moderate arguments; the Bergman function of
//! the Mittag-Leffler potential is evaluated in damped form by
//! [`ml_kernel_scaled`] so that the `exp(x^k)` growth never materializes.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_741_8;

/// `zeta(k) - 1` for `k = 2..=40`.
const ZETA_MINUS_ONE: [f64; 39] = [
    6.449_340_668_482_264_364_7e-1,
    2.020_569_031_595_942_854e-1,
    8.232_323_371_113_819_151_6e-2,
    3.692_775_514_336_992_633_1e-2,
    1.734_306_198_444_913_971_5e-2,
    8.349_277_381_922_826_839_8e-3,
    4.077_356_197_944_339_378_7e-3,
    2.008_392_826_082_214_417_9e-3,
    9.945_751_278_180_853_371_5e-4,
    4.941_886_041_194_645_587_0e-4,
    2.460_865_533_080_482_986_4e-4,
    1.227_133_475_784_891_467_5e-4,
    6.124_813_505_870_482_925_9e-5,
    3.058_823_630_702_049_355_2e-5,
    1.528_225_940_865_187_173_3e-5,
    7.637_197_637_899_762_273_6e-6,
    3.817_293_264_999_839_856_5e-6,
    1.908_212_716_553_938_925_7e-6,
    9.539_620_338_727_961_131_5e-7,
    4.769_329_867_878_064_631_2e-7,
    2.384_505_027_277_329_900_0e-7,
    1.192_199_259_653_110_730_7e-7,
    5.960_818_905_125_947_961_2e-8,
    2.980_350_351_465_228_018_6e-8,
    1.490_155_482_836_504_123_5e-8,
    7.450_711_789_835_429_492_0e-9,
    3.725_334_024_788_457_054_8e-9,
    1.862_659_723_513_049_006_4e-9,
    9.313_274_324_196_681_828_7e-10,
    4.656_629_065_033_784_073_0e-10,
    2.328_311_833_676_505_492e-10,
    1.164_155_017_270_051_977_6e-10,
    5.820_772_087_902_700_889_3e-11,
    2.910_385_044_497_099_686_9e-11,
    1.455_192_189_104_198_423_6e-11,
    7.275_959_835_057_481_014_5e-12,
    3.637_979_547_378_651_190_2e-12,
    1.818_989_650_307_065_947_7e-12,
    9.094_947_840_263_889_282_9e-13,
];

/// `B_{2m} / (2m (2m - 1))`, m = 1..=8.
const STIRLING: [f64; 8] = [
    8.333_333_333_333_333_333_3e-2,
    -2.777_777_777_777_777_777_8e-3,
    7.936_507_936_507_936_507_9e-4,
    -5.952_380_952_380_952_381_0e-4,
    8.417_508_417_508_417_508_4e-4,
    -1.917_526_917_526_917_526_9e-3,
    6.410_256_410_256_410_256_4e-3,
    -2.955_065_359_477_124_183_0e-2,
];

/// `ln Gamma(2 + eps) = (1 - gamma) eps + sum_{k>=2} (-1)^k (zeta(k) - 1) eps^k / k`,
/// used for `|eps| <= 0.5`.
fn ln_gamma_two_plus(eps: f64) -> f64 {
    let mut acc = 0.0;
    // Horner from the highest power down
    for (i, z) in ZETA_MINUS_ONE.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if (i + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = (acc + sign * z / k) * eps;
    }
    (acc + (1.0 - EULER_GAMMA)) * eps
}

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Near the zeros at 1 and 2 a Taylor series in `zeta(k) - 1` keeps the
/// result accurate in the relative sense; large arguments use the
/// Stirling series.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x < 0.5 {
        // Gamma(x) = Gamma(x + 1) / x
        return Ok(ln_gamma_one_plus(x) - x.ln());
    }
    if x < 1.5 {
        return Ok(ln_gamma_one_plus(x - 1.0));
    }
    if x < 2.5 {
        return Ok(ln_gamma_two_plus(x - 2.0));
    }
    if x < 10.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y >= 2.5 {
            y -= 1.0;
            prod *= y;
        }
        return Ok(prod.ln() + ln_gamma_two_plus(y - 2.0));
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING.iter().rev() {
        series = series * inv2 + c;
    }
    Ok((x - 0.5) * x.ln() - x + HALF_LN_2PI + series * inv)
}

fn ln_gamma_one_plus(eps: f64) -> f64 {
    // ln Gamma(1 + eps) = ln Gamma(2 + eps) - ln(1 + eps)
    ln_gamma_two_plus(eps) - eps.ln_1p()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Relative size below which a term counts as negligible.
pub const TAIL_EPS: f64 = 1e-18;
/// Consecutive negligible (and decreasing) terms required before stopping.
pub const TAIL_RUN: usize = 20;
const MAX_TERMS: usize = 50_000_000;

/// Sums `exp(log_term(j))` for `j = 0, 1, ...` until the tail is
/// negligible. The terms must be unimodal in `j`; summation stops once
/// [`TAIL_RUN`] consecutive decreasing terms each fall below
/// [`TAIL_EPS`] times the running sum. `limit` caps the number of terms
/// (exclusive upper index) for finite sums.
pub fn damped_series<F>(mut log_term: F, limit: Option<usize>) -> Result<f64>
where
    F: FnMut(usize) -> f64,
{
    let cap = limit.unwrap_or(MAX_TERMS);
    let mut sum = CompensatedSum::new();
    let mut prev = f64::NEG_INFINITY;
    let mut run = 0usize;
    let ln_eps = TAIL_EPS.ln();
    for j in 0..cap {
        let lt = log_term(j);
        if lt.is_nan() {
            return Err(Error::Domain(format!("NaN term at index {j}")));
        }
        sum.add(lt.exp());
        let s = sum.value();
        if !s.is_finite() {
            return Err(Error::Overflow(format!("series exceeds f64 range at index {j}")));
        }
        if lt < prev && s > 0.0 && lt - s.ln() < ln_eps {
            run += 1;
            if run >= TAIL_RUN {
                return Ok(sum.value());
            }
        } else {
            run = 0;
        }
        prev = lt;
    }
    if limit.is_some() {
        Ok(sum.value())
    } else {
        Err(Error::SeriesLimit(cap))
    }
}

/// Mittag-Leffler parameters `(a, b)`: `E_{a,b}(x) = sum_j x^j / Gamma(a j + b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    a: f64,
    b: f64,
}

impl MLParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Mittag-Leffler parameters must be positive, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b })
    }

    /// Parameters `(1/k, (1+c)/k)` of the Mittag-Leffler potential.
    pub fn for_potential(k: u32, c: f64) -> Result<Self> {
        if k == 0 || !(c > -1.0) {
            return Err(Error::InvalidParameter(format!("need k >= 1 and c > -1, got k={k}, c={c}")));
        }
        Self::new(1.0 / k as f64, (1.0 + c) / k as f64)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Plain-series Mittag-Leffler function `E_{a,b}(x)` for `x >= 0`.
///
/// Returns [`Error::Overflow`] once a term or the sum leaves the f64 range;
/// callers needing large arguments should use the damped forms.
pub fn mittag_leffler(p: MLParams, x: f64) -> Result<f64> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::Domain(format!("mittag_leffler requires finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((-log_gamma(p.b)?).exp());
    }
    let ln_x = x.ln();
    let mut gamma_err = None;
    let value = damped_series(
        |j| {
            let arg = p.a * j as f64 + p.b;
            match log_gamma(arg) {
                Ok(lg) => j as f64 * ln_x - lg,
                Err(e) => {
                    gamma_err = Some(e);
                    f64::NAN
                }
            }
        },
        None,
    );
    if let Some(e) = gamma_err {
        return Err(e);
    }
    let value = value?;
    if !value.is_finite() {
        return Err(Error::Overflow(format!("E_{{{},{}}}({x})", p.a, p.b)));
    }
    Ok(value)
}

/// Bergman function `R_0(r) = r^{2c} e^{-r^{2k}} k E_{1/k,(1+c)/k}(r^2)` of
/// the Mittag-Leffler potential `|z|^{2k} - 2c log|z|`, summed as
/// `sum_j exp((2j + 2c) ln r - r^{2k} - ln m_j)` so that every term is at
/// most one.
pub fn ml_kernel_scaled(k: u32, c: f64, r: f64) -> Result<f64> {
    if k == 0 || !(c > -1.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("need k >= 1 and c > -1, got k={k}, c={c}")));
    }
    if !(r >= 0.0) || r.is_infinite() {
        return Err(Error::Domain(format!("radius must be finite and >= 0, got {r}")));
    }
    let kf = k as f64;
    let ln_k = kf.ln();
    if r == 0.0 {
        return if c > 0.0 {
            Ok(0.0)
        } else if c == 0.0 {
            // 1/m_0 = k / Gamma(1/k)
            Ok((ln_k - log_gamma(1.0 / kf)?).exp())
        } else {
            Err(Error::Divergent(format!("R_0(0) is infinite for c = {c} < 0")))
        };
    }
    let ln_r = r.ln();
    let damping = r.powi(2 * k as i32);
    damped_series(
        |j| {
            let jf = j as f64;
            // ln m_j = ln Gamma((j + c + 1)/k) - ln k; argument is > 0
            let ln_m = log_gamma((jf + c + 1.0) / kf).unwrap_or(f64::NAN) - ln_k;
            (2.0 * jf + 2.0 * c) * ln_r - damping - ln_m
        },
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_gamma_special_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.572_364_942_924_700_1).abs() < 1e-15);
        // Gamma(5) = 24
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn log_gamma_recurrence_across_branches() {
        for &x in &[0.3, 0.49, 0.51, 1.2, 1.49, 1.51, 2.4, 2.6, 9.9, 10.1, 42.0] {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + f64::ln(x);
            assert!((lhs - rhs).abs() <= 2e-15 * (1.0 + lhs.abs()), "x={x}");
        }
    }

    #[test]
    fn mittag_leffler_exp_case() {
        let p = MLParams::new(1.0, 1.0).unwrap();
        let e = mittag_leffler(p, 1.0).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-15);
        assert!((mittag_leffler(p, 0.0).unwrap() - 1.0).abs() < 1e-16);
    }

    #[test]
    fn mittag_leffler_at_zero_is_reciprocal_gamma() {
        let p = MLParams::new(0.5, 0.5).unwrap();
        let expected = 1.0 / std::f64::consts::PI.sqrt();
        assert!((mittag_leffler(p, 0.0).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn mittag_leffler_overflow_is_signalled() {
        let p = MLParams::new(0.5, 0.5).unwrap();
        assert!(matches!(mittag_leffler(p, 40.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn bad_params_rejected() {
        assert!(MLParams::new(0.0, 1.0).is_err());
        assert!(MLParams::new(1.0, -1.0).is_err());
        assert!(ml_kernel_scaled(0, 0.0, 1.0).is_err());
        assert!(ml_kernel_scaled(1, -1.0, 1.0).is_err());
        assert!(mittag_leffler(MLParams::new(1.0, 1.0).unwrap(), -1.0).is_err());
    }

    #[test]
    fn ml_kernel_scaled_examples() {
        assert!((ml_kernel_scaled(1, 0.0, 3.2).unwrap() - 1.0).abs() < 1e-12);
        let v = ml_kernel_scaled(1, 1.0, 1.0).unwrap();
        assert!((v - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
        assert!((ml_kernel_scaled(2, 0.0, 2.0).unwrap() - 16.0).abs() < 1e-4);
    }

    #[test]
    fn ml_kernel_scaled_at_origin() {
        assert_eq!(ml_kernel_scaled(1, 0.5, 0.0).unwrap(), 0.0);
        let m0 = std::f64::consts::PI.sqrt() / 2.0;
        assert!((ml_kernel_scaled(2, 0.0, 0.0).unwrap() - 1.0 / m0).abs() < 1e-14);
        assert!(matches!(ml_kernel_scaled(1, -0.5, 0.0), Err(Error::Divergent(_))));
    }

    #[test]
    fn ml_kernel_scaled_far_out_does_not_overflow() {
        // a r^{2k} ~ 2500, far beyond where E(r^2) itself is representable
        let v = ml_kernel_scaled(1, 0.3, 50.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e-17, 1e-17, -1.0].into_iter().collect();
        assert!((s.value() - 2e-17).abs() < 1e-30);
    }
}
