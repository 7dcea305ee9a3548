//! Small empirical-distribution helpers shared by the Monte Carlo checks.

use alloc::vec::Vec;

/// Sorts a copy ascending (NaN-free input assumed).
pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let a = sorted(a);
    let b = sorted(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
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

/// One-sample Kolmogorov–Smirnov statistic against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> f64 {
    let v = sorted(values);
    let n = v.len() as f64;
    v.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

/// Critical value of the two-sample KS statistic at `level`, asymptotic form
/// `c(level)·sqrt((na + nb)/(na·nb))`.
pub fn ks_two_sample_critical(level: f64, na: usize, nb: usize) -> f64 {
    let c = crate::math::sqrt(-0.5 * crate::math::ln(level / 2.0));
    let (na, nb) = (na as f64, nb as f64);
    c * crate::math::sqrt((na + nb) / (na * nb))
}

/// Sample mean and its standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, crate::math::sqrt(var / n))
}

/// Binomial standard error of a proportion estimated from `n` trials.
pub fn proportion_se(p: f64, n: usize) -> f64 {
    crate::math::sqrt(p * (1.0 - p) / n as f64)
}
