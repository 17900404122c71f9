//! Shared statistical test machinery: goodness-of-fit tests and moment
//! comparisons against closed-form distributions from statrs, which keeps
//! the oracles independent of the crate's own samplers and CDFs.

#![allow(dead_code)]

use statrs::distribution::ContinuousCDF;

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &mut [f64], cdf: F) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi.max(lo));
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let n = n as f64;
    let lambda = d * (n.sqrt() + 0.12 + 0.11 / n.sqrt());
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Assert a sample passes a KS test against `cdf` at the given significance.
pub fn assert_ks<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, alpha: f64, what: &str) {
    let mut s = sample.to_vec();
    let d = ks_statistic(&mut s, cdf);
    let p = ks_pvalue(d, sample.len());
    assert!(
        p > alpha,
        "{what}: KS test rejected (D = {d:.5}, p = {p:.2e} <= {alpha:.0e})"
    );
}

/// Chi-square goodness-of-fit p-value for observed counts vs expected.
pub fn chi_square_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (observed.len() - 1) as f64;
    let chi = statrs::distribution::ChiSquared::new(df).unwrap();
    1.0 - chi.cdf(stat)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Assert the sample mean lies within `k` Monte Carlo standard errors of the
/// target, using the *target* sd for the standard error.
pub fn assert_mean_within(sample: &[f64], target_mean: f64, target_sd: f64, k: f64, what: &str) {
    let m = mean(sample);
    let se = target_sd / (sample.len() as f64).sqrt();
    let z = (m - target_mean) / se;
    assert!(
        z.abs() < k,
        "{what}: mean {m:.5} vs {target_mean:.5} (z = {z:.2}, se = {se:.2e})"
    );
}

/// z-score of a sample mean against a target, with the standard error
/// inflated by the autocorrelation-based effective sample size.
pub fn ess_adjusted_z(sample: &[f64], target_mean: f64, target_sd: f64) -> f64 {
    let ess = cmiscreen::ess(sample).max(1.0);
    let se = target_sd / ess.sqrt();
    (mean(sample) - target_mean) / se
}

pub fn beta_cdf(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    let dist = statrs::distribution::Beta::new(a, b).unwrap();
    move |x| dist.cdf(x)
}

/// Gamma CDF in shape-rate form.
pub fn gamma_cdf(shape: f64, rate: f64) -> impl Fn(f64) -> f64 {
    let dist = statrs::distribution::Gamma::new(shape, rate).unwrap();
    move |x| dist.cdf(x)
}

pub fn normal_cdf(mean: f64, sd: f64) -> impl Fn(f64) -> f64 {
    let dist = statrs::distribution::Normal::new(mean, sd).unwrap();
    move |x| dist.cdf(x)
}

/// Inverse-gamma CDF with scale parameter `scale` (density x^{-a-1}e^{-scale/x}).
pub fn inverse_gamma_cdf(shape: f64, scale: f64) -> impl Fn(f64) -> f64 {
    let dist = statrs::distribution::InverseGamma::new(shape, scale).unwrap();
    move |x| dist.cdf(x)
}

/// Truncated standard normal CDF on (a, b), computed on whichever tail
/// avoids cancellation so it stays exact even 8+ sd from the mean.
pub fn truncated_normal_cdf(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    // lower-tail Phi and upper-tail Q via erfc, both accurate to ~1e-300
    fn phi(x: f64) -> f64 {
        0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
    }
    fn q(x: f64) -> f64 {
        0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
    }
    move |x| {
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        if a >= 0.0 {
            // upper-tail interval: work with survival functions
            let qa = q(a);
            let qb = if b == f64::INFINITY { 0.0 } else { q(b) };
            (qa - q(x)) / (qa - qb)
        } else if b <= 0.0 {
            let fa = if a == f64::NEG_INFINITY { 0.0 } else { phi(a) };
            (phi(x) - fa) / (phi(b) - fa)
        } else {
            let fa = if a == f64::NEG_INFINITY { 0.0 } else { phi(a) };
            let fb = if b == f64::INFINITY { 1.0 } else { phi(b) };
            (phi(x) - fa) / (fb - fa)
        }
    }
}
