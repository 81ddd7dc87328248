//! Small statistics helpers: least-squares fits, the two-sample
//! Kolmogorov-Smirnov test and batch-means standard errors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least squares of `y` on the columns of `regressors` plus an
/// intercept. Returns the coefficients followed by the intercept.
pub fn least_squares(regressors: &[&[f64]], y: &[f64]) -> Result<Vec<f64>> {
    let n = y.len();
    let p = regressors.len() + 1;
    if n < p {
        return Err(Error::Fit(format!("{n} points cannot determine {p} parameters")));
    }
    if regressors.iter().any(|x| x.len() != n) {
        return Err(Error::Fit("regressor length mismatch".into()));
    }
    let design = DMatrix::from_fn(n, p, |i, j| if j + 1 == p { 1.0 } else { regressors[j][i] });
    let rhs = DVector::from_column_slice(y);
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Fit("design matrix is rank deficient".into()));
    }
    let sol = svd.solve(&rhs, 1e-14 * smax).map_err(|e| Error::Fit(e.to_string()))?;
    Ok(sol.iter().copied().collect())
}

/// Slope and intercept of the least-squares line through `(x, y)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let coef = least_squares(&[x], y)?;
    Ok((coef[0], coef[1]))
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.to_vec();
    let mut b: Vec<f64> = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic p-value of a two-sample KS statistic for sample sizes `n1`, `n2`.
pub fn ks_pvalue(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 as f64 * n2 as f64) / (n1 + n2) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    kolmogorov_survival(lambda)
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean and standard error of the mean from batch means.
pub fn batch_mean_se(batches: &[f64]) -> (f64, f64) {
    let b = batches.len();
    let m = mean(batches);
    if b < 2 {
        return (m, f64::NAN);
    }
    let var = batches.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
    (m, (var / b as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -1.5 * v + 2.0).collect();
        let (s, c) = linear_fit(&x, &y).unwrap();
        assert!((s + 1.5).abs() < 1e-13 && (c - 2.0).abs() < 1e-13);
    }

    #[test]
    fn two_regressor_fit() {
        let u: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let l: Vec<f64> = u.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = u.iter().zip(&l).map(|(a, b)| -a + 3.0 * b + 0.5).collect();
        let coef = least_squares(&[&u, &l], &y).unwrap();
        assert!((coef[0] + 1.0).abs() < 1e-12);
        assert!((coef[1] - 3.0).abs() < 1e-11);
        assert!(least_squares(&[&u, &u], &y).is_err());
    }

    #[test]
    fn ks_identical_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_statistic(&a, &a), 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert_eq!(ks_statistic(&a, &b), 1.0);
        assert!(ks_pvalue(1.0, 100, 100) < 1e-10);
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
    }
}
