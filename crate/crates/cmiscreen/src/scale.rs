//! Measurement-scale support: log cut-points for counts, boundary-inflated
//! percentage kernels, and the observed-scale likelihood factors built from
//! normal CDF differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{log_normal_cdf_diff, log_normal_pdf, log_std_normal_cdf};

/// Measurement scale of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleKind {
    Continuous,
    Count,
    Percentage,
}

/// Scale tag for one column. `log_transform` applies only to positive
/// continuous columns, which are analyzed on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub kind: ScaleKind,
    #[serde(default)]
    pub log_transform: bool,
}

impl ColumnScale {
    pub fn continuous() -> Self {
        ColumnScale {
            kind: ScaleKind::Continuous,
            log_transform: false,
        }
    }

    pub fn count() -> Self {
        ColumnScale {
            kind: ScaleKind::Count,
            log_transform: false,
        }
    }

    pub fn percentage() -> Self {
        ColumnScale {
            kind: ScaleKind::Percentage,
            log_transform: false,
        }
    }

    /// Check a raw observed value against this scale.
    pub fn validate_value(&self, v: f64, column: &str) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::invalid(column, format!("non-finite value {v}")));
        }
        match self.kind {
            ScaleKind::Count => {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::invalid(
                        column,
                        format!("count values must be non-negative integers, got {v}"),
                    ));
                }
            }
            ScaleKind::Percentage => {
                if !(0.0..=100.0).contains(&v) {
                    return Err(Error::invalid(
                        column,
                        format!("percentage values must lie in [0, 100], got {v}"),
                    ));
                }
            }
            ScaleKind::Continuous => {
                if self.log_transform && v <= 0.0 {
                    return Err(Error::invalid(
                        column,
                        format!("log-transformed column requires positive values, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Cut-point a_l for counts: a_0 = -inf, a_l = log(l) for l >= 1.
#[inline]
pub fn count_cutpoint(l: f64) -> f64 {
    debug_assert!(l >= 0.0);
    if l == 0.0 {
        f64::NEG_INFINITY
    } else {
        l.ln()
    }
}

/// Half-open latent bracket (a_v, a_{v+1}] of a count value v >= 0.
pub fn count_bracket(v: f64) -> Result<(f64, f64)> {
    if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
        return Err(Error::invalid(
            "count",
            format!("bracket requires a non-negative integer, got {v}"),
        ));
    }
    Ok((count_cutpoint(v), count_cutpoint(v + 1.0)))
}

/// Map a latent value to its count: the unique v with a_v < latent <= a_{v+1}.
///
/// Equivalent to taking the largest integer strictly below exp(latent).
pub fn count_from_latent(latent: f64) -> f64 {
    if latent <= 0.0 {
        return 0.0;
    }
    let z = latent.exp();
    (z.ceil() - 1.0).max(0.0)
}

/// Observed-scale log kernel factor log f(x_j | mu, tau) for one column.
///
/// Counts use the CDF difference over their latent bracket, percentages put
/// point masses at the 0/100 boundaries and a density in the interior, and
/// continuous columns use the plain normal density.
pub fn kernel_log_likelihood(value: f64, scale: ColumnScale, mu: f64, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Err(Error::invalid("kernel", format!("tau must be > 0, got {tau}")));
    }
    match scale.kind {
        ScaleKind::Continuous => Ok(log_normal_pdf(value, mu, tau)),
        ScaleKind::Count => {
            let (lo, hi) = count_bracket(value)?;
            Ok(log_normal_cdf_diff(lo, hi, mu, tau))
        }
        ScaleKind::Percentage => {
            if value == 0.0 {
                Ok(log_std_normal_cdf((0.0 - mu) / tau))
            } else if value == 100.0 {
                Ok(log_std_normal_cdf((mu - 100.0) / tau))
            } else if value > 0.0 && value < 100.0 {
                Ok(log_normal_pdf(value, mu, tau))
            } else {
                Err(Error::invalid(
                    "kernel",
                    format!("percentage value {value} outside [0, 100]"),
                ))
            }
        }
    }
}

/// Probability-space kernel factor; see [`kernel_log_likelihood`].
pub fn kernel_likelihood(value: f64, scale: ColumnScale, mu: f64, tau: f64) -> Result<f64> {
    kernel_log_likelihood(value, scale, mu, tau).map(f64::exp)
}

/// log f(y | x, theta) for a count response: the normal CDF difference over
/// the bracket (a_y, a_{y+1}] with the regression mean and sd.
pub fn response_log_likelihood_count(y: f64, mean: f64, sigma: f64) -> Result<f64> {
    let (lo, hi) = count_bracket(y)?;
    Ok(log_normal_cdf_diff(lo, hi, mean, sigma))
}

/// Probability-space count response likelihood.
pub fn response_likelihood(y: f64, mean: f64, sigma: f64) -> Result<f64> {
    response_log_likelihood_count(y, mean, sigma).map(f64::exp)
}
