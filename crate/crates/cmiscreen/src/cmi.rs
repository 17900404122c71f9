//! Conditional mutual information over the empirical measure: per-predictor
//! draws from a fitted mixture state, the marginal mutual-information
//! variant, Monte Carlo marginalization of single predictors, posterior
//! summarization and the selection rule.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::{log_mean_exp, log_normal_pdf, log_sum_exp};
use crate::model::{design_dot, log_kernel, log_response, ModelState};
use crate::scale::{count_from_latent, ScaleKind};

/// Which dependence summary a trace holds: conditional mutual information
/// of each predictor given the rest, or pairwise mutual information with
/// the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CmiMode {
    Conditional,
    Marginal,
}

impl std::fmt::Display for CmiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmiMode::Conditional => write!(f, "conditional"),
            CmiMode::Marginal => write!(f, "marginal"),
        }
    }
}

/// Saved-iteration x predictor matrix of dependence draws (nats). Negative
/// entries are expected at finite sample sizes.
#[derive(Debug, Clone)]
pub struct CmiTrace {
    pub draws: Array2<f64>,
    pub mode: CmiMode,
}

/// Posterior summary for one predictor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictorSummary {
    /// 1-based predictor index, matching trace column order.
    pub index: usize,
    pub name: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub prob_positive: f64,
    pub selected: bool,
}

/// Screening decisions for every predictor, sorted by descending posterior
/// mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub mode: CmiMode,
    pub threshold: f64,
    pub ci_level: f64,
    pub predictors: Vec<PredictorSummary>,
}

impl ScreeningReport {
    pub fn selected_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .predictors
            .iter()
            .filter(|s| s.selected)
            .map(|s| s.index)
            .collect();
        out.sort_unstable();
        out
    }
}

struct Engine<'a> {
    state: &'a ModelState,
    data: &'a Dataset,
    n_mc: usize,
    analytic: bool,
}

impl<'a> Engine<'a> {
    fn new(state: &'a ModelState, data: &'a Dataset, n_mc: usize) -> Result<Self> {
        if state.p() != data.p() {
            return Err(Error::DimensionMismatch(format!(
                "state has {} predictors, data has {}",
                state.p(),
                data.p()
            )));
        }
        if n_mc == 0 {
            return Err(Error::Config("n_mc must be >= 1".into()));
        }
        Ok(Engine {
            state,
            data,
            n_mc,
            analytic: data.all_continuous(),
        })
    }

    fn response_value(&self, i: usize) -> Result<f64> {
        if self.data.y_missing(i) {
            self.state
                .y_filled
                .get(i)
                .copied()
                .ok_or_else(|| Error::Schema("missing response without imputation state".into()))
        } else {
            Ok(self.data.y_value(i))
        }
    }

    /// Observed-scale design value of a kernel draw for column j: push the
    /// latent through the rounding/censoring map, then standardize.
    #[inline]
    fn design_of_draw(&self, j: usize, latent: f64) -> f64 {
        let cols = self.data.model_columns();
        let obs = match cols.predictors[j].scale.kind {
            ScaleKind::Continuous => latent,
            ScaleKind::Count => count_from_latent(latent),
            ScaleKind::Percentage => latent.clamp(0.0, 100.0),
        };
        cols.design_value(j, obs)
    }

    /// Per-record dependence terms for the requested predictor columns.
    /// `mc_seed` controls the marginalization draws; the analytic Gaussian
    /// path consumes no randomness.
    fn run(&self, mode: CmiMode, mc_seed: u64, targets: &[usize]) -> Result<Vec<f64>> {
        let p = self.state.p();
        let h = self.state.h();
        let n = self.data.n();
        for &j in targets {
            if j >= p {
                return Err(Error::DimensionMismatch(format!("predictor index {j} out of range")));
            }
        }
        if n == 0 {
            return Err(Error::Schema("empty dataset".into()));
        }
        let cols = self.data.model_columns();
        let mut rng = ChaCha12Rng::seed_from_u64(mc_seed);
        let mut sums = vec![0.0; targets.len()];

        let mut kappa = Array2::<f64>::zeros((h, p));
        let mut ksum = vec![0.0; h];
        let mut dot = vec![0.0; h];
        let mut resp = vec![0.0; h];
        let mut scratch_a = vec![0.0; h];
        let mut scratch_b = vec![0.0; h];
        // standard-normal draws shared across components, keyed by column
        let mut z = Array2::<f64>::zeros((p, self.n_mc));
        let mut mc_vals = vec![0.0; self.n_mc];

        for i in 0..n {
            if !self.analytic {
                for j in 0..p {
                    for m in 0..self.n_mc {
                        z[(j, m)] = rng.sample(rand_distr::StandardNormal);
                    }
                }
            }
            let y = self.response_value(i)?;
            let design_row = self.data.design_row(i);
            let design = design_row.as_slice().expect("design rows are contiguous");
            for hh in 0..h {
                let mut acc = self.state.log_pi[hh];
                for j in 0..p {
                    let k = log_kernel(self.state, cols, hh, j, self.data.x_value(i, j))?;
                    kappa[(hh, j)] = k;
                    acc += k;
                }
                ksum[hh] = acc;
                dot[hh] = design_dot(self.state, hh, design);
                resp[hh] = log_response(self.state, cols, hh, y, dot[hh])?;
            }

            match mode {
                CmiMode::Conditional => {
                    // shared terms log f(y, x) and log f(x)
                    for hh in 0..h {
                        scratch_a[hh] = ksum[hh] + resp[hh];
                    }
                    let log_joint = log_sum_exp(&scratch_a);
                    let log_x = log_sum_exp(&ksum);
                    for (ti, &j) in targets.iter().enumerate() {
                        let mut term = 0.0;
                        let mut rtilde0 = 0.0;
                        for hh in 0..h {
                            let rtilde = self.marginalized_response(
                                i, j, hh, y, dot[hh], design, &z, &mut mc_vals,
                            )?;
                            if h == 1 {
                                rtilde0 = rtilde;
                            } else {
                                let base = ksum[hh] - kappa[(hh, j)];
                                scratch_a[hh] = base;
                                scratch_b[hh] = base + rtilde;
                            }
                        }
                        if h == 1 {
                            // the kernel factors cancel algebraically for a
                            // single component; cancel them structurally so
                            // exact independence gives an exact zero
                            term += resp[0] - rtilde0;
                        } else {
                            let log_x_minus_j = log_sum_exp(&scratch_a);
                            let log_y_x_minus_j = log_sum_exp(&scratch_b);
                            term += (log_joint - log_y_x_minus_j) - (log_x - log_x_minus_j);
                        }
                        if !term.is_finite() {
                            return Err(non_finite_term(
                                i,
                                j,
                                &[log_joint, log_x],
                            ));
                        }
                        sums[ti] += term;
                    }
                }
                CmiMode::Marginal => {
                    // log f(y): response factor with every predictor
                    // integrated out of the regression
                    let mut rall = vec![0.0; h];
                    for hh in 0..h {
                        rall[hh] = self.fully_marginalized_response(i, y, hh, &z, &mut mc_vals)?;
                    }
                    for hh in 0..h {
                        scratch_a[hh] = self.state.log_pi[hh] + rall[hh];
                    }
                    let log_y = log_sum_exp(&scratch_a);
                    for (ti, &j) in targets.iter().enumerate() {
                        let mut term = 0.0;
                        let mut rj0 = 0.0;
                        for hh in 0..h {
                            let rj = self.marginalized_response_except(
                                i, j, hh, y, design, &z, &mut mc_vals,
                            )?;
                            if h == 1 {
                                rj0 = rj;
                            } else {
                                let base = self.state.log_pi[hh] + kappa[(hh, j)];
                                scratch_a[hh] = base;
                                scratch_b[hh] = base + rj;
                            }
                        }
                        if h == 1 {
                            term += rj0 - rall[0];
                        } else {
                            let log_xj = log_sum_exp(&scratch_a);
                            let log_y_xj = log_sum_exp(&scratch_b);
                            term += log_y_xj - log_y - log_xj;
                        }
                        if !term.is_finite() {
                            return Err(non_finite_term(i, j, &[log_y]));
                        }
                        sums[ti] += term;
                    }
                }
            }
        }
        for s in sums.iter_mut() {
            *s /= n as f64;
        }
        Ok(sums)
    }

    /// log of the response factor with predictor j integrated out of the
    /// regression for component hh. Spiked coefficients short-circuit to the
    /// plain response factor, which also makes the exact-independence zero
    /// bit-exact.
    #[allow(clippy::too_many_arguments)]
    fn marginalized_response(
        &self,
        i: usize,
        j: usize,
        hh: usize,
        y: f64,
        dot_full: f64,
        design: &[f64],
        z: &Array2<f64>,
        mc_vals: &mut [f64],
    ) -> Result<f64> {
        let cols = self.data.model_columns();
        let b = self.state.beta[(hh, j + 1)];
        if b == 0.0 {
            return log_response(self.state, cols, hh, y, dot_full);
        }
        let meta = &cols.predictors[j];
        if self.analytic {
            let mu_design = (self.state.mu[(hh, j)] - meta.design_mean) / meta.design_sd;
            let shifted = dot_full + b * (mu_design - design[j + 1]);
            let tau_design2 = self.state.tau2[(hh, j)] / (meta.design_sd * meta.design_sd);
            let var = self.state.sigma2[hh] + b * b * tau_design2;
            Ok(log_normal_pdf(y, shifted, var.sqrt()))
        } else {
            let mu = self.state.mu[(hh, j)];
            let tau = self.state.tau2[(hh, j)].sqrt();
            for m in 0..self.n_mc {
                let latent = mu + tau * z[(j, m)];
                let d = self.design_of_draw(j, latent);
                let shifted = dot_full + b * (d - design[j + 1]);
                mc_vals[m] = log_response(self.state, cols, hh, y, shifted)?;
            }
            let _ = i;
            Ok(log_mean_exp(mc_vals))
        }
    }

    /// log of the response factor with *every* predictor integrated out.
    fn fully_marginalized_response(
        &self,
        i: usize,
        y: f64,
        hh: usize,
        z: &Array2<f64>,
        mc_vals: &mut [f64],
    ) -> Result<f64> {
        let cols = self.data.model_columns();
        let p = self.state.p();
        if self.analytic {
            let mut mean = self.state.beta[(hh, 0)];
            let mut var = self.state.sigma2[hh];
            for j in 0..p {
                let b = self.state.beta[(hh, j + 1)];
                let meta = &cols.predictors[j];
                mean += b * ((self.state.mu[(hh, j)] - meta.design_mean) / meta.design_sd);
                var += b * b * (self.state.tau2[(hh, j)] / (meta.design_sd * meta.design_sd));
            }
            Ok(log_normal_pdf(y, mean, var.sqrt()))
        } else {
            for m in 0..self.n_mc {
                let mut acc = self.state.beta[(hh, 0)];
                for j in 0..p {
                    let b = self.state.beta[(hh, j + 1)];
                    if b == 0.0 {
                        continue;
                    }
                    let latent =
                        self.state.mu[(hh, j)] + self.state.tau2[(hh, j)].sqrt() * z[(j, m)];
                    acc += b * self.design_of_draw(j, latent);
                }
                mc_vals[m] = log_response(self.state, cols, hh, y, acc)?;
            }
            let _ = i;
            Ok(log_mean_exp(mc_vals))
        }
    }

    /// log of the response factor with every predictor except j integrated
    /// out; j keeps its observed design value.
    #[allow(clippy::too_many_arguments)]
    fn marginalized_response_except(
        &self,
        i: usize,
        j: usize,
        hh: usize,
        y: f64,
        design: &[f64],
        z: &Array2<f64>,
        mc_vals: &mut [f64],
    ) -> Result<f64> {
        let cols = self.data.model_columns();
        let p = self.state.p();
        if self.analytic {
            let mut mean = self.state.beta[(hh, 0)];
            let mut var = self.state.sigma2[hh];
            for k in 0..p {
                let b = self.state.beta[(hh, k + 1)];
                if k == j {
                    mean += b * design[k + 1];
                } else {
                    let meta = &cols.predictors[k];
                    mean += b * ((self.state.mu[(hh, k)] - meta.design_mean) / meta.design_sd);
                    var += b * b * (self.state.tau2[(hh, k)] / (meta.design_sd * meta.design_sd));
                }
            }
            Ok(log_normal_pdf(y, mean, var.sqrt()))
        } else {
            for m in 0..self.n_mc {
                let mut acc = self.state.beta[(hh, 0)];
                for k in 0..p {
                    let b = self.state.beta[(hh, k + 1)];
                    if b == 0.0 {
                        continue;
                    }
                    if k == j {
                        acc += b * design[k + 1];
                    } else {
                        let latent =
                            self.state.mu[(hh, k)] + self.state.tau2[(hh, k)].sqrt() * z[(k, m)];
                        acc += b * self.design_of_draw(k, latent);
                    }
                }
                mc_vals[m] = log_response(self.state, cols, hh, y, acc)?;
            }
            let _ = i;
            Ok(log_mean_exp(mc_vals))
        }
    }
}

fn non_finite_term(record: usize, j: usize, shared: &[f64]) -> Error {
    Error::numeric(
        0,
        format!(
            "non-finite dependence term at record {record}, predictor {} (shared log-densities: {shared:?})",
            j + 1
        ),
    )
}

/// One conditional mutual information draw for predictor column `j`
/// (0-based), averaging the four-term log ratio over the empirical measure.
pub fn zeta_draw(
    state: &ModelState,
    data: &Dataset,
    j: usize,
    n_mc: usize,
    mc_seed: u64,
) -> Result<f64> {
    let engine = Engine::new(state, data, n_mc)?;
    Ok(engine.run(CmiMode::Conditional, mc_seed, &[j])?[0])
}

/// Conditional mutual information draws for all predictors, sharing the
/// per-record joint and x-marginal terms across columns.
pub fn zeta_all(state: &ModelState, data: &Dataset, n_mc: usize, mc_seed: u64) -> Result<Vec<f64>> {
    let engine = Engine::new(state, data, n_mc)?;
    let targets: Vec<usize> = (0..data.p()).collect();
    engine.run(CmiMode::Conditional, mc_seed, &targets)
}

/// One marginal mutual-information draw for predictor column `j`.
pub fn marginal_mi_draw(
    state: &ModelState,
    data: &Dataset,
    j: usize,
    n_mc: usize,
    mc_seed: u64,
) -> Result<f64> {
    let engine = Engine::new(state, data, n_mc)?;
    Ok(engine.run(CmiMode::Marginal, mc_seed, &[j])?[0])
}

/// Dependence draws for every predictor in the requested mode; this is the
/// per-saved-iteration computation of a chain.
pub fn zeta_row(
    state: &ModelState,
    data: &Dataset,
    mode: CmiMode,
    n_mc: usize,
    mc_seed: u64,
) -> Result<Vec<f64>> {
    let engine = Engine::new(state, data, n_mc)?;
    let targets: Vec<usize> = (0..data.p()).collect();
    engine.run(mode, mc_seed, &targets)
}

/// Monte Carlo estimate of log f(y_i, x_{i,-j}): per component, predictor j
/// is integrated out of the response factor with `n_mc` kernel draws. The
/// estimator is unbiased in probability space before the log.
pub fn mc_marginalize_xj<R: Rng + ?Sized>(
    state: &ModelState,
    data: &Dataset,
    record: usize,
    j: usize,
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    let engine = Engine::new(state, data, n_mc)?;
    if j >= data.p() || record >= data.n() {
        return Err(Error::DimensionMismatch("record or predictor out of range".into()));
    }
    let cols = data.model_columns();
    let y = engine.response_value(record)?;
    let design_row = data.design_row(record);
    let design = design_row.as_slice().expect("design rows are contiguous");
    let mut zcol = Array2::<f64>::zeros((data.p(), n_mc));
    for m in 0..n_mc {
        zcol[(j, m)] = rng.sample(rand_distr::StandardNormal);
    }
    let mut mc_vals = vec![0.0; n_mc];
    let mut comps = Vec::with_capacity(state.h());
    // force the Monte Carlo route even for Gaussian models; the analytic
    // form lives in model::eval_log_marginal_y_xminusj_analytic
    let mc_engine = Engine {
        analytic: false,
        ..engine
    };
    for hh in 0..state.h() {
        let mut base = state.log_pi[hh];
        for k in 0..data.p() {
            if k == j {
                continue;
            }
            base += log_kernel(state, cols, hh, k, data.x_value(record, k))?;
        }
        let dot = design_dot(state, hh, design);
        let rtilde =
            mc_engine.marginalized_response(record, j, hh, y, dot, design, &zcol, &mut mc_vals)?;
        comps.push(base + rtilde);
    }
    Ok(log_sum_exp(&comps))
}

/// Sample autocorrelation up to `max_lag` (clamped to len - 1); lag 0 is 1.
/// A zero-variance column returns 1 at lag 0 and 0 elsewhere.
pub fn autocorrelation(col: &[f64], max_lag: usize) -> Vec<f64> {
    let n = col.len();
    let max_lag = max_lag.min(n.saturating_sub(1));
    if n == 0 {
        return vec![];
    }
    let mean = col.iter().sum::<f64>() / n as f64;
    let c0: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let mut acf = Vec::with_capacity(max_lag + 1);
    acf.push(1.0);
    if c0 == 0.0 {
        acf.resize(max_lag + 1, 0.0);
        return acf;
    }
    for k in 1..=max_lag {
        let ck: f64 = (0..n - k)
            .map(|t| (col[t] - mean) * (col[t + k] - mean))
            .sum::<f64>()
            / n as f64;
        acf.push(ck / c0);
    }
    acf
}

/// Effective sample size by Geyer's initial monotone positive sequence.
/// A zero-variance column reports its full length.
pub fn ess(col: &[f64]) -> f64 {
    let n = col.len();
    if n < 4 {
        return n as f64;
    }
    let acf = autocorrelation(col, (n - 1).min(1000));
    let mut tau = 0.0;
    let mut prev = f64::INFINITY;
    let mut m = 0;
    loop {
        let r0 = if 2 * m < acf.len() { acf[2 * m] } else { 0.0 };
        let r1 = if 2 * m + 1 < acf.len() { acf[2 * m + 1] } else { 0.0 };
        let mut gamma = r0 + r1;
        if gamma <= 0.0 || 2 * m >= acf.len() {
            break;
        }
        gamma = gamma.min(prev);
        tau += 2.0 * gamma;
        prev = gamma;
        m += 1;
    }
    let tau = (tau - 1.0).max(1e-12);
    (n as f64 / tau).min(n as f64)
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Summarize a trace into per-predictor posterior means, equal-tailed
/// credible intervals, positive-probability estimates and selection flags.
pub fn summarize(
    trace: &CmiTrace,
    names: &[String],
    threshold: f64,
    ci_level: f64,
) -> Result<ScreeningReport> {
    let rows = trace.draws.nrows();
    let p = trace.draws.ncols();
    if rows == 0 || p == 0 {
        return Err(Error::EmptyTrace);
    }
    if names.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {p} trace columns",
            names.len()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) || !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::Config(
            "threshold and CI level must lie strictly inside (0, 1)".into(),
        ));
    }
    let tail = (1.0 - ci_level) / 2.0;
    let mut predictors = Vec::with_capacity(p);
    for j in 0..p {
        let col: Vec<f64> = trace.draws.column(j).to_vec();
        let mean = col.iter().sum::<f64>() / rows as f64;
        let mut sorted = col.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let ci_low = quantile_sorted(&sorted, tail);
        let ci_high = quantile_sorted(&sorted, 1.0 - tail);
        debug_assert!(ci_low <= ci_high);
        let prob_positive = col.iter().filter(|&&v| v > 0.0).count() as f64 / rows as f64;
        predictors.push(PredictorSummary {
            index: j + 1,
            name: names[j].clone(),
            mean,
            ci_low,
            ci_high,
            prob_positive,
            selected: prob_positive > threshold,
        });
    }
    predictors.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.index.cmp(&b.index)));
    Ok(ScreeningReport {
        mode: trace.mode,
        threshold,
        ci_level,
        predictors,
    })
}

/// Default predictor names x1..xp for traces without an attached manifest.
pub fn default_names(p: usize) -> Vec<String> {
    (0..p).map(|j| format!("x{}", j + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetOptions, RawTable};
    use crate::scale::ColumnScale;

    fn continuous_dataset(y: Vec<f64>, x_cols: Vec<Vec<f64>>) -> Dataset {
        let table = RawTable {
            response_name: "y".into(),
            response_scale: ColumnScale::continuous(),
            y: y.into_iter().map(Some).collect(),
            predictor_names: (0..x_cols.len()).map(|j| format!("x{}", j + 1)).collect(),
            scales: vec![ColumnScale::continuous(); x_cols.len()],
            x: x_cols,
        };
        Dataset::prepare(
            &table,
            DatasetOptions {
                normalize: false,
                standardize_design: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn single_record_marginal_mi_is_half_log_two() {
        let data = continuous_dataset(vec![0.0], vec![vec![0.0]]);
        let st = ModelState::single_component(&[0.0, 1.0], 1.0, &[0.0], &[1.0]).unwrap();
        let v = marginal_mi_draw(&st, &data, 0, 8, 1).unwrap();
        assert!((v - 0.346_573_590_279_972_65).abs() < 1e-12, "{v}");
        // with p = 1 the conditioning set is empty, so the conditional draw
        // must agree
        let c = zeta_draw(&st, &data, 0, 8, 1).unwrap();
        assert!((c - v).abs() < 1e-12);
    }

    #[test]
    fn independence_gives_exact_zero() {
        let data = continuous_dataset(
            vec![0.3, -1.2, 0.8, 2.0],
            vec![vec![0.1, 0.2, -0.5, 1.0], vec![1.5, -0.3, 0.0, 0.7]],
        );
        // beta_2 = 0: predictor 2 is conditionally independent of y
        let st =
            ModelState::single_component(&[0.4, 0.9, 0.0], 0.7, &[0.0, 0.5], &[1.0, 2.0]).unwrap();
        let v = zeta_draw(&st, &data, 1, 64, 9).unwrap();
        assert_eq!(v.to_bits(), 0.0f64.to_bits());

        // all slopes zero: the whole vector is exactly zero, in both modes
        let st0 =
            ModelState::single_component(&[0.4, 0.0, 0.0], 0.7, &[0.0, 0.5], &[1.0, 2.0]).unwrap();
        let zetas = zeta_all(&st0, &data, 16, 3).unwrap();
        assert!(zetas.iter().all(|&v| v == 0.0), "{zetas:?}");
        for j in 0..2 {
            assert_eq!(marginal_mi_draw(&st0, &data, j, 16, 3).unwrap(), 0.0);
        }
    }

    #[test]
    fn non_finite_terms_name_the_record() {
        // a record so extreme the response density underflows to -inf
        let data = continuous_dataset(vec![0.0, 1e200], vec![vec![0.1, 0.2]]);
        let st = ModelState::single_component(&[0.0, 1.0], 1.0, &[0.0], &[1.0]).unwrap();
        let err = zeta_draw(&st, &data, 0, 4, 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("record 1"), "{msg}");
    }

    #[test]
    fn zeta_all_matches_individual_draws_bit_exactly() {
        let data = continuous_dataset(
            vec![0.3, -1.2, 0.8],
            vec![vec![0.1, 0.2, -0.5], vec![1.5, -0.3, 0.0]],
        );
        let mut st = ModelState::with_dims(3, 2, 0).unwrap();
        st.set_sticks(vec![0.3, 0.6, 1.0]).unwrap();
        for hh in 0..3 {
            st.beta[(hh, 0)] = 0.1 * hh as f64;
            st.beta[(hh, 1)] = 0.5 + hh as f64 * 0.2;
            st.beta[(hh, 2)] = -0.4;
            st.sigma2[hh] = 0.5 + 0.3 * hh as f64;
            for j in 0..2 {
                st.mu[(hh, j)] = hh as f64 - 1.0 + j as f64;
                st.tau2[(hh, j)] = 0.7 + 0.1 * (hh + j) as f64;
            }
        }
        let all = zeta_all(&st, &data, 32, 77).unwrap();
        for j in 0..2 {
            let single = zeta_draw(&st, &data, j, 32, 77).unwrap();
            assert_eq!(all[j].to_bits(), single.to_bits(), "column {j}");
        }
    }

    #[test]
    fn mc_marginalize_constant_in_draw_count_when_spiked() {
        let data = continuous_dataset(vec![0.5, 1.0], vec![vec![0.2, -0.4], vec![0.9, 0.1]]);
        let st =
            ModelState::single_component(&[0.2, 0.7, 0.0], 1.1, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let mut vals = Vec::new();
        for &n_mc in &[1usize, 7, 500] {
            let mut rng = ChaCha12Rng::seed_from_u64(5);
            vals.push(mc_marginalize_xj(&st, &data, 0, 1, n_mc, &mut rng).unwrap());
        }
        assert_eq!(vals[0].to_bits(), vals[1].to_bits());
        assert_eq!(vals[0].to_bits(), vals[2].to_bits());
    }

    #[test]
    fn autocorrelation_basics() {
        let col: Vec<f64> = (0..1000)
            .map(|i| ((i * 2654435761u64 as usize) % 1000) as f64 / 1000.0)
            .collect();
        let acf = autocorrelation(&col, 10);
        assert_eq!(acf[0], 1.0);
        assert!(acf[1].abs() < 0.1);

        let constant = vec![2.5; 50];
        let acf = autocorrelation(&constant, 5);
        assert_eq!(acf, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ar1_autocorrelation_and_ess() {
        use rand::SeedableRng;
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let n = 20_000;
        let phi = 0.8;
        let mut col = Vec::with_capacity(n);
        let mut prev = 0.0;
        for _ in 0..n {
            let eps: f64 = rng.sample(rand_distr::StandardNormal);
            prev = phi * prev + eps;
            col.push(prev);
        }
        let acf = autocorrelation(&col, 5);
        assert!((acf[1] - 0.8).abs() < 0.05, "lag-1 = {}", acf[1]);
        // AR(1) integrated autocorrelation time = (1+phi)/(1-phi) = 9
        let e = ess(&col);
        let expected = n as f64 / 9.0;
        assert!(
            e > expected * 0.6 && e < expected * 1.6,
            "ess = {e}, expected ~{expected}"
        );
    }

    #[test]
    fn summarize_flags_and_ordering() {
        let mut draws = Array2::zeros((4, 2));
        for r in 0..4 {
            draws[(r, 0)] = 0.5 + r as f64 * 0.01;
            draws[(r, 1)] = if r % 2 == 0 { 0.2 } else { -0.2 };
        }
        let trace = CmiTrace {
            draws,
            mode: CmiMode::Conditional,
        };
        let report = summarize(&trace, &default_names(2), 0.95, 0.90).unwrap();
        assert_eq!(report.predictors[0].index, 1);
        assert!(report.predictors[0].selected);
        assert!((report.predictors[0].prob_positive - 1.0).abs() < 1e-15);
        assert!(!report.predictors[1].selected);
        assert!((report.predictors[1].prob_positive - 0.5).abs() < 1e-15);
        assert!(report.predictors[1].ci_low <= report.predictors[1].ci_high);
        assert_eq!(report.selected_indices(), vec![1]);
    }

    #[test]
    fn summarize_rejects_empty() {
        let trace = CmiTrace {
            draws: Array2::zeros((0, 2)),
            mode: CmiMode::Conditional,
        };
        assert!(matches!(
            summarize(&trace, &default_names(2), 0.95, 0.9),
            Err(Error::EmptyTrace)
        ));
    }
}
