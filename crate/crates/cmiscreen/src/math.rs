//! Scalar numeric kernels: normal density/CDF/quantile and stable
//! log-space reductions. Everything here is pure and allocation-free.

pub const LN_2PI: f64 = 1.837_877_066_409_345_4;

/// Log density of N(mean, sd^2) at x.
#[inline]
pub fn log_normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * LN_2PI
}

/// Standard normal CDF, accurate in the lower tail (down to ~1e-300).
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// CDF of N(mean, sd^2) at x.
#[inline]
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    std_normal_cdf((x - mean) / sd)
}

/// log Phi(x), finite for all finite x.
///
/// Uses erfc directly while it does not underflow and switches to the
/// asymptotic expansion of the Mills ratio for the far lower tail.
pub fn log_std_normal_cdf(x: f64) -> f64 {
    if x > -37.0 {
        let p = std_normal_cdf(x);
        if p > 0.0 {
            return p.ln();
        }
    }
    // log Q(-x) with -x large: Q(t) = phi(t)/t * (1 - 1/t^2 + 3/t^4 - 15/t^6 + 105/t^8)
    let t = -x;
    let t2 = t * t;
    let series = 1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2)
        + 105.0 / (t2 * t2 * t2 * t2);
    -0.5 * t2 - t.ln() - 0.5 * LN_2PI + series.ln()
}

/// ln(1 - e^x) for x < 0.
#[inline]
pub fn log1mexp(x: f64) -> f64 {
    debug_assert!(x <= 0.0);
    if x < -std::f64::consts::LN_2 {
        (-x.exp()).ln_1p()
    } else {
        (-x.exp_m1()).ln()
    }
}

/// log{Phi((hi-mean)/sd) - Phi((lo-mean)/sd)} without cancellation in the tails.
///
/// `lo` may be -inf and `hi` may be +inf; requires lo < hi.
pub fn log_normal_cdf_diff(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if a == f64::NEG_INFINITY {
        return log_std_normal_cdf(b);
    }
    if b == f64::INFINITY {
        return log_std_normal_cdf(-a);
    }
    if b <= 0.0 {
        // both in the lower tail
        let lb = log_std_normal_cdf(b);
        let la = log_std_normal_cdf(a);
        lb + log1mexp((la - lb).min(0.0))
    } else if a >= 0.0 {
        // mirror to the lower tail
        let la = log_std_normal_cdf(-a);
        let lb = log_std_normal_cdf(-b);
        la + log1mexp((lb - la).min(0.0))
    } else {
        // straddles zero: both CDF values are mid-range
        (std_normal_cdf(b) - std_normal_cdf(a)).ln()
    }
}

/// Canonical log-sum-exp: sorts the terms by value before reducing so the
/// result is invariant, bit for bit, under any permutation of the inputs.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NEG_INFINITY,
        1 => values[0],
        _ => {
            let mut sorted = values.to_vec();
            sorted.sort_by(|x, y| x.total_cmp(y));
            let max = *sorted.last().unwrap();
            if max == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let sum: f64 = sorted.iter().map(|&v| (v - max).exp()).sum();
            max + sum.ln()
        }
    }
}

/// log of the arithmetic mean of exp(values), with the same exactness
/// property as [`log_sum_exp`] when all inputs are equal: the division by n
/// happens before the final log, so a constant input returns that constant.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NEG_INFINITY,
        1 => values[0],
        n => {
            let mut sorted = values.to_vec();
            sorted.sort_by(|x, y| x.total_cmp(y));
            let max = *sorted.last().unwrap();
            if max == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            let sum: f64 = sorted.iter().map(|&v| (v - max).exp()).sum();
            max + (sum / n as f64).ln()
        }
    }
}

/// Standard normal quantile (Wichura's AS241, double precision).
///
/// Relative accuracy ~1e-15 over the full representable range of p,
/// including subnormal tail probabilities.
pub fn std_normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&PPND16_A, r) / poly(&PPND16_B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        poly(&PPND16_C, r) / poly(&PPND16_D, r)
    } else {
        r -= 5.0;
        poly(&PPND16_E, r) / poly(&PPND16_F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

#[allow(clippy::excessive_precision)]
const PPND16_A: [f64; 8] = [
    3.3871328727963666080,
    133.14166789178437745,
    1971.5909503065514427,
    13731.693765509461125,
    45921.953931549871457,
    67265.770927008700853,
    33430.575583588128105,
    2509.0809287301226727,
];
#[allow(clippy::excessive_precision)]
const PPND16_B: [f64; 8] = [
    1.0,
    42.313330701600911252,
    687.18700749205790830,
    5394.1960214247511077,
    21213.794301586595867,
    39307.895800092710610,
    28729.085735721942674,
    5226.4952788528545610,
];
#[allow(clippy::excessive_precision)]
const PPND16_C: [f64; 8] = [
    1.42343711074968357734,
    4.63033784615654529590,
    5.76949722146069140550,
    3.64784832476320460504,
    1.27045825245236838258,
    0.241780725177450611770,
    0.0227238449892691845833,
    7.74545014278341407640e-4,
];
#[allow(clippy::excessive_precision)]
const PPND16_D: [f64; 8] = [
    1.0,
    2.05319162663775882187,
    1.67638483018380384940,
    0.689767334985100004550,
    0.148103976427480074590,
    0.0151986665636164571966,
    5.47593808499534494600e-4,
    1.05075007164441684324e-9,
];
#[allow(clippy::excessive_precision)]
const PPND16_E: [f64; 8] = [
    6.65790464350110377720,
    5.46378491116411436990,
    1.78482653991729133580,
    0.296560571828504891230,
    0.0265321895265761230930,
    0.00124266094738807843860,
    2.71155556874348757815e-5,
    2.01033439929228813265e-7,
];
#[allow(clippy::excessive_precision)]
const PPND16_F: [f64; 8] = [
    1.0,
    0.599832206555887937690,
    0.136929880922735805310,
    0.0148753612908506148525,
    7.86869131145613259100e-4,
    1.84631831751005468180e-5,
    1.42151175831644588870e-7,
    2.04426310338993978564e-15,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-300, 1e-20, 1e-10, 0.001, 0.3, 0.5, 0.7, 0.999, 1.0 - 1e-10] {
            let x = std_normal_quantile(p);
            let back = std_normal_cdf(x);
            assert!(
                (back - p).abs() <= 1e-12 * p.max(1e-12),
                "p={p} x={x} back={back}"
            );
        }
        assert_eq!(std_normal_quantile(0.5), 0.0);
    }

    #[test]
    fn log_cdf_matches_direct_in_body() {
        for &x in &[-8.0, -3.0, -1.0, 0.0, 1.5, 6.0] {
            let direct = std_normal_cdf(x).ln();
            assert!((log_std_normal_cdf(x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn log_cdf_far_tail_finite_and_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..40 {
            let x = -60.0 + i as f64;
            let v = log_std_normal_cdf(x);
            assert!(v.is_finite());
            assert!(v > prev, "monotone at {x}");
            prev = v;
        }
        // asymptotic branch vs. known value: log Phi(-40) = -804.60844201375379
        let v = log_std_normal_cdf(-40.0);
        assert!((v - (-804.608_442_013_753_8)).abs() < 1e-6, "{v}");
    }

    #[test]
    fn cdf_diff_tails() {
        // straddling
        let d = log_normal_cdf_diff(-1.0, 1.0, 0.0, 1.0);
        assert!((d.exp() - 0.682_689_492_137_085_9).abs() < 1e-12);
        // deep lower tail: ratio of consecutive tail masses stays sane
        let d1 = log_normal_cdf_diff(-12.0, -11.0, 0.0, 1.0);
        let expected = std_normal_cdf(-11.0) - std_normal_cdf(-12.0);
        assert!((d1 - expected.ln()).abs() < 1e-9);
        // mirrored upper tail equals lower tail by symmetry
        let d2 = log_normal_cdf_diff(11.0, 12.0, 0.0, 1.0);
        assert!((d1 - d2).abs() < 1e-12);
        // half-infinite
        assert!((log_normal_cdf_diff(f64::NEG_INFINITY, 0.0, 0.0, 1.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((log_normal_cdf_diff(0.0, f64::INFINITY, 0.0, 1.0) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn lse_permutation_bit_exact() {
        let v = [-1.3, 2.0, -700.0, 0.1, 2.0];
        let a = log_sum_exp(&v);
        let w = [2.0, -700.0, 2.0, -1.3, 0.1];
        let b = log_sum_exp(&w);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn lse_single_passthrough_and_neg_inf() {
        assert_eq!(log_sum_exp(&[-3.25]).to_bits(), (-3.25f64).to_bits());
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn lme_constant_input_exact() {
        let c = -1.234_567_890_123_456_7;
        let v = vec![c; 500];
        assert_eq!(log_mean_exp(&v).to_bits(), c.to_bits());
    }
}
