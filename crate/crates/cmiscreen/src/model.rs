//! The encompassing mixture model: truncated stick-breaking state, priors,
//! and pure observed-scale density evaluations (joint, predictor marginals,
//! and the closed-form Gaussian response marginalization).

use ndarray::Array2;

use crate::data::{Dataset, ModelColumns};
use crate::error::{Error, Result};
use crate::math::{log_normal_pdf, log_sum_exp};
use crate::scale::{kernel_log_likelihood, response_log_likelihood_count, ScaleKind};

/// Prior configuration for the sampler.
///
/// Kernel-location and kernel-variance priors are per predictor so that both
/// the fixed N(0,1)/IG(1.5, 1/2) configuration and the empirical-statistics
/// configuration fit the same structure.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    /// Truncation level H.
    pub h: usize,
    pub alpha0_shape: f64,
    pub alpha0_rate: f64,
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
    pub mu_prior_mean: Vec<f64>,
    pub mu_prior_var: Vec<f64>,
    pub tau2_shape: f64,
    pub tau2_scale: Vec<f64>,
    pub p0_a: f64,
    pub p0_b: f64,
    pub lambda2_shape: f64,
    pub lambda2_scale: f64,
}

pub const DEFAULT_TRUNCATION: usize = 20;

impl Hyperparams {
    /// Fixed priors for pre-normalized data: mu ~ N(0,1), tau^2 ~ IG(1.5, 1/2),
    /// sigma^2 ~ IG(1.5, 1/2).
    pub fn standard(p: usize) -> Self {
        Hyperparams {
            h: DEFAULT_TRUNCATION,
            alpha0_shape: 0.25,
            alpha0_rate: 0.25,
            sigma2_shape: 1.5,
            sigma2_scale: 0.5,
            mu_prior_mean: vec![0.0; p],
            mu_prior_var: vec![1.0; p],
            tau2_shape: 1.5,
            tau2_scale: vec![0.5; p],
            p0_a: 4.75,
            p0_b: 0.25,
            lambda2_shape: 0.5,
            lambda2_scale: 0.5,
        }
    }

    /// Priors built from per-column sample statistics: mu_j ~ N(mean_j, s_j^2),
    /// tau_j^2 ~ IG(1.5, s_j^2/2), sigma^2 ~ IG(1.5, s_y^2/2).
    pub fn empirical(data: &Dataset) -> Self {
        let cols = data.model_columns();
        Hyperparams {
            h: DEFAULT_TRUNCATION,
            alpha0_shape: 0.25,
            alpha0_rate: 0.25,
            sigma2_shape: 1.5,
            sigma2_scale: cols.response_prior_var / 2.0,
            mu_prior_mean: cols.predictors.iter().map(|c| c.prior_mean).collect(),
            mu_prior_var: cols.predictors.iter().map(|c| c.prior_var).collect(),
            tau2_shape: 1.5,
            tau2_scale: cols.predictors.iter().map(|c| c.prior_var / 2.0).collect(),
            p0_a: 4.75,
            p0_b: 0.25,
            lambda2_shape: 0.5,
            lambda2_scale: 0.5,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.h < 2 {
            return Err(Error::Config(format!("truncation H must be >= 2, got {}", self.h)));
        }
        if self.mu_prior_mean.len() != p || self.mu_prior_var.len() != p || self.tau2_scale.len() != p
        {
            return Err(Error::DimensionMismatch(format!(
                "hyperparameters sized for {} predictors, data has {p}",
                self.mu_prior_mean.len()
            )));
        }
        let positives = [
            self.alpha0_shape,
            self.alpha0_rate,
            self.sigma2_shape,
            self.sigma2_scale,
            self.tau2_shape,
            self.p0_a,
            self.p0_b,
            self.lambda2_shape,
            self.lambda2_scale,
        ];
        if positives.iter().any(|&v| !(v > 0.0) || !v.is_finite())
            || self.mu_prior_var.iter().any(|&v| !(v > 0.0))
            || self.tau2_scale.iter().any(|&v| !(v > 0.0))
        {
            return Err(Error::Config("all prior scale parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Stick-breaking weights: pi_h = V_h prod_{l<h} (1 - V_l), renormalized.
pub fn stick_break(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::DimensionMismatch("empty stick vector".into()));
    }
    for (h, &val) in v.iter().enumerate() {
        if !(0.0..=1.0).contains(&val) {
            return Err(Error::invalid("sticks", format!("V_{} = {val} outside [0,1]", h + 1)));
        }
    }
    if *v.last().unwrap() != 1.0 {
        return Err(Error::invalid("sticks", "last stick must equal 1"));
    }
    let mut pi = Vec::with_capacity(v.len());
    let mut remaining = 1.0;
    for &vh in v {
        pi.push(vh * remaining);
        remaining *= 1.0 - vh;
    }
    let total: f64 = pi.iter().sum();
    if total > 0.0 {
        for w in pi.iter_mut() {
            *w /= total;
        }
    }
    Ok(pi)
}

/// Full sampler state for one chain.
#[derive(Debug, Clone)]
pub struct ModelState {
    /// Stick fractions V_1..V_H with V_H = 1.
    pub v: Vec<f64>,
    /// log(1 - V_h), carried exactly alongside the sticks: when alpha0 is
    /// small, 1 - V_h can sit far below the resolution of f64 near one, and
    /// the concentration update needs the exact logarithm.
    pub log1m_v: Vec<f64>,
    /// Mixture weights derived from the sticks.
    pub pi: Vec<f64>,
    pub log_pi: Vec<f64>,
    pub alpha0: f64,
    /// H x (p+1) regression coefficients; column 0 is the intercept. Spiked
    /// coefficients are exact zeros.
    pub beta: Array2<f64>,
    pub sigma2: Vec<f64>,
    /// H x p kernel locations.
    pub mu: Array2<f64>,
    /// H x p kernel variances.
    pub tau2: Array2<f64>,
    /// H x (p+1) slab variances (intercept column included).
    pub lambda2: Array2<f64>,
    pub p0: f64,
    /// Cluster assignments, one per record.
    pub s: Vec<usize>,
    /// Observed-scale response with missing cells filled by imputation.
    pub y_filled: Vec<f64>,
    /// Latent response values (meaningful for count responses).
    pub y_star: Vec<f64>,
    /// n x p latent kernel values; equals the observed value for continuous
    /// and interior-percentage cells.
    pub x_star: Array2<f64>,
}

impl ModelState {
    /// Neutral state: uniform weights, zero coefficients, unit variances.
    pub fn with_dims(h: usize, p: usize, n: usize) -> Result<Self> {
        if h == 0 || p == 0 {
            return Err(Error::DimensionMismatch("H and p must be positive".into()));
        }
        let mut v: Vec<f64> = (0..h).map(|i| 1.0 / (h - i) as f64).collect();
        *v.last_mut().unwrap() = 1.0;
        let pi = stick_break(&v)?;
        let log_pi = pi.iter().map(|w| w.ln()).collect();
        let log1m_v = v.iter().map(|&vh| (-vh).ln_1p()).collect();
        Ok(ModelState {
            v,
            log1m_v,
            pi,
            log_pi,
            alpha0: 1.0,
            beta: Array2::zeros((h, p + 1)),
            sigma2: vec![1.0; h],
            mu: Array2::zeros((h, p)),
            tau2: Array2::from_elem((h, p), 1.0),
            lambda2: Array2::from_elem((h, p + 1), 1.0),
            p0: 0.95,
            s: vec![0; n],
            y_filled: vec![0.0; n],
            y_star: vec![0.0; n],
            x_star: Array2::zeros((n, p)),
        })
    }

    /// One-component state for factorization tests: `beta` has length p+1.
    pub fn single_component(beta: &[f64], sigma2: f64, mu: &[f64], tau2: &[f64]) -> Result<Self> {
        let p = mu.len();
        if beta.len() != p + 1 || tau2.len() != p {
            return Err(Error::DimensionMismatch("single_component sizes".into()));
        }
        let mut st = ModelState::with_dims(1, p, 0)?;
        for (j, &b) in beta.iter().enumerate() {
            st.beta[(0, j)] = b;
        }
        st.sigma2[0] = sigma2;
        for j in 0..p {
            st.mu[(0, j)] = mu[j];
            st.tau2[(0, j)] = tau2[j];
        }
        Ok(st)
    }

    pub fn h(&self) -> usize {
        self.pi.len()
    }

    pub fn p(&self) -> usize {
        self.mu.ncols()
    }

    /// Replace the sticks and recompute weights.
    pub fn set_sticks(&mut self, v: Vec<f64>) -> Result<()> {
        if v.len() != self.h() {
            return Err(Error::DimensionMismatch(format!(
                "{} sticks for H = {}",
                v.len(),
                self.h()
            )));
        }
        let pi = stick_break(&v)?;
        self.log_pi = pi.iter().map(|w| w.ln()).collect();
        self.pi = pi;
        self.log1m_v = v.iter().map(|&vh| (-vh).ln_1p()).collect();
        self.v = v;
        Ok(())
    }

    /// Replace the sticks from exact log-scale pieces: per stick h this
    /// takes (V_h, log V_h, log(1 - V_h)). Weights are assembled in log
    /// space so extreme sticks keep full precision, then renormalized.
    pub fn set_sticks_from_logs(
        &mut self,
        v: Vec<f64>,
        log_v: &[f64],
        log1m_v: Vec<f64>,
    ) -> Result<()> {
        let h = self.h();
        if v.len() != h || log_v.len() != h || log1m_v.len() != h {
            return Err(Error::DimensionMismatch("stick log pieces".into()));
        }
        let mut log_pi = Vec::with_capacity(h);
        let mut prefix = 0.0;
        for hh in 0..h {
            log_pi.push(log_v[hh] + prefix);
            prefix += log1m_v[hh];
        }
        let mut pi: Vec<f64> = log_pi.iter().map(|&l| l.exp()).collect();
        let total: f64 = pi.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid("sticks", format!("weight mass {total}")));
        }
        let log_total = total.ln();
        for (w, l) in pi.iter_mut().zip(log_pi.iter_mut()) {
            *w /= total;
            *l -= log_total;
        }
        self.v = v;
        self.log1m_v = log1m_v;
        self.pi = pi;
        self.log_pi = log_pi;
        Ok(())
    }

    /// Relabel components. Only the quantities that enter density
    /// evaluations are permuted; the stick representation is rebuilt from
    /// the permuted weights.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let h = self.h();
        if perm.len() != h {
            return Err(Error::DimensionMismatch("permutation length".into()));
        }
        let mut out = self.clone();
        for (new_h, &old_h) in perm.iter().enumerate() {
            out.pi[new_h] = self.pi[old_h];
            out.log_pi[new_h] = self.log_pi[old_h];
            out.sigma2[new_h] = self.sigma2[old_h];
            for j in 0..=self.p() {
                out.beta[(new_h, j)] = self.beta[(old_h, j)];
                out.lambda2[(new_h, j)] = self.lambda2[(old_h, j)];
            }
            for j in 0..self.p() {
                out.mu[(new_h, j)] = self.mu[(old_h, j)];
                out.tau2[(new_h, j)] = self.tau2[(old_h, j)];
            }
        }
        // rebuild sticks from the permuted weights
        let mut remaining = 1.0;
        for hh in 0..h {
            out.v[hh] = if remaining > 0.0 { (out.pi[hh] / remaining).clamp(0.0, 1.0) } else { 1.0 };
            remaining -= out.pi[hh];
        }
        out.v[h - 1] = 1.0;
        out.log1m_v = out.v.iter().map(|&vh| (-vh).ln_1p()).collect();
        for si in out.s.iter_mut() {
            *si = perm.iter().position(|&o| o == *si).unwrap_or(*si);
        }
        Ok(out)
    }

    /// Check the structural invariants the sampler maintains.
    pub fn validate(&self) -> Result<()> {
        let h = self.h();
        if self.v.len() != h || self.sigma2.len() != h || self.log_pi.len() != h {
            return Err(Error::DimensionMismatch("state component arrays".into()));
        }
        let total: f64 = self.pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.pi.iter().any(|&w| w < 0.0) {
            return Err(Error::invalid("pi", format!("weights sum to {total}")));
        }
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return Err(Error::invalid("p0", format!("{} outside (0,1)", self.p0)));
        }
        if self.sigma2.iter().any(|&v| !(v > 0.0))
            || self.tau2.iter().any(|&v| !(v > 0.0))
            || self.lambda2.iter().any(|&v| !(v > 0.0))
        {
            return Err(Error::invalid("variance", "non-positive variance in state"));
        }
        Ok(())
    }
}

/// Regression design dot product for component `h`; `design` includes the
/// intercept slot. Accumulation order is fixed (ascending index) so results
/// are reproducible.
#[inline]
pub(crate) fn design_dot(state: &ModelState, h: usize, design: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (k, d) in design.iter().enumerate() {
        acc += state.beta[(h, k)] * d;
    }
    acc
}

/// Observed-scale log response factor log f(y | x, theta_h).
#[inline]
pub(crate) fn log_response(
    state: &ModelState,
    cols: &ModelColumns,
    h: usize,
    y: f64,
    dot: f64,
) -> Result<f64> {
    let sd = state.sigma2[h].sqrt();
    match cols.response.kind {
        ScaleKind::Continuous => Ok(log_normal_pdf(y, dot, sd)),
        ScaleKind::Count => response_log_likelihood_count(y, dot, sd),
        ScaleKind::Percentage => Err(Error::Schema("percentage response".into())),
    }
}

/// Observed-scale log kernel factor log f(x_j | theta_h).
#[inline]
pub(crate) fn log_kernel(
    state: &ModelState,
    cols: &ModelColumns,
    h: usize,
    j: usize,
    value: f64,
) -> Result<f64> {
    kernel_log_likelihood(
        value,
        cols.predictors[j].scale,
        state.mu[(h, j)],
        state.tau2[(h, j)].sqrt(),
    )
}

fn check_record(state: &ModelState, cols: &ModelColumns, x: &[f64]) -> Result<()> {
    if x.len() != state.p() || cols.p() != state.p() {
        return Err(Error::DimensionMismatch(format!(
            "record has {} predictors, state has {}",
            x.len(),
            state.p()
        )));
    }
    Ok(())
}

fn design_from_record(cols: &ModelColumns, x: &[f64]) -> Vec<f64> {
    let mut d = Vec::with_capacity(x.len() + 1);
    d.push(1.0);
    for (j, &v) in x.iter().enumerate() {
        d.push(cols.design_value(j, v));
    }
    d
}

/// log f(y, x) under the mixture, reduced with the canonical log-sum-exp.
pub fn eval_log_joint(state: &ModelState, cols: &ModelColumns, y: f64, x: &[f64]) -> Result<f64> {
    check_record(state, cols, x)?;
    let design = design_from_record(cols, x);
    let mut comps = Vec::with_capacity(state.h());
    for h in 0..state.h() {
        let mut acc = state.log_pi[h];
        for (j, &v) in x.iter().enumerate() {
            acc += log_kernel(state, cols, h, j, v)?;
        }
        acc += log_response(state, cols, h, y, design_dot(state, h, &design))?;
        comps.push(acc);
    }
    Ok(log_sum_exp(&comps))
}

/// log f(x) or, with `drop = Some(j)`, log f(x_{-j}): dropping a predictor
/// removes exactly its kernel factor from every component.
pub fn eval_log_marginal_x(
    state: &ModelState,
    cols: &ModelColumns,
    x: &[f64],
    drop: Option<usize>,
) -> Result<f64> {
    check_record(state, cols, x)?;
    if let Some(j) = drop {
        if j >= state.p() {
            return Err(Error::DimensionMismatch(format!("drop index {j} out of range")));
        }
    }
    let mut comps = Vec::with_capacity(state.h());
    for h in 0..state.h() {
        let mut acc = state.log_pi[h];
        for (j, &v) in x.iter().enumerate() {
            if drop == Some(j) {
                continue;
            }
            acc += log_kernel(state, cols, h, j, v)?;
        }
        comps.push(acc);
    }
    Ok(log_sum_exp(&comps))
}

/// Closed-form log f(y, x_{-j}) for the all-continuous Gaussian model:
/// integrating x_j out of component h turns the response factor into a
/// normal with mean shifted to the kernel location and variance inflated by
/// beta_j^2 tau_j^2 (on the standardized design scale).
pub fn eval_log_marginal_y_xminusj_analytic(
    state: &ModelState,
    cols: &ModelColumns,
    y: f64,
    x: &[f64],
    j: usize,
) -> Result<f64> {
    check_record(state, cols, x)?;
    if j >= state.p() {
        return Err(Error::DimensionMismatch(format!("index {j} out of range")));
    }
    if !cols.all_continuous() {
        return Err(Error::Schema(
            "analytic marginalization requires an all-continuous model".into(),
        ));
    }
    let mut design = design_from_record(cols, x);
    let mut comps = Vec::with_capacity(state.h());
    for h in 0..state.h() {
        let mut acc = state.log_pi[h];
        for (k, &v) in x.iter().enumerate() {
            if k == j {
                continue;
            }
            acc += log_kernel(state, cols, h, k, v)?;
        }
        let meta = &cols.predictors[j];
        let mu_design = (state.mu[(h, j)] - meta.design_mean) / meta.design_sd;
        let saved = design[j + 1];
        design[j + 1] = mu_design;
        let dot = design_dot(state, h, &design);
        design[j + 1] = saved;
        let b = state.beta[(h, j + 1)];
        let tau_design2 = state.tau2[(h, j)] / (meta.design_sd * meta.design_sd);
        let var = state.sigma2[h] + b * b * tau_design2;
        acc += log_normal_pdf(y, dot, var.sqrt());
        comps.push(acc);
    }
    Ok(log_sum_exp(&comps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stick_break_examples() {
        assert_eq!(stick_break(&[1.0, 0.5, 1.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let pi = stick_break(&[0.5, 0.5, 1.0]).unwrap();
        assert_eq!(pi, vec![0.5, 0.25, 0.25]);
        let pi = stick_break(&[0.2, 0.3, 1.0]).unwrap();
        assert!((pi[0] - 0.2).abs() < 1e-15);
        assert!((pi[1] - 0.24).abs() < 1e-15);
        assert!((pi[2] - 0.56).abs() < 1e-15);
        assert!(stick_break(&[0.5, 1.1, 1.0]).is_err());
        assert!(stick_break(&[0.5, 0.5, 0.9]).is_err());
        assert!(stick_break(&[]).is_err());
    }

    #[test]
    fn joint_single_component() {
        let cols = ModelColumns::continuous_identity(1);
        let st = ModelState::single_component(&[0.0, 0.0], 1.0, &[0.0], &[1.0]).unwrap();
        let v = eval_log_joint(&st, &cols, 0.0, &[0.0]).unwrap();
        assert!((v - (-1.837_877_066_409_345_5)).abs() < 1e-12);

        // kernel mean x'beta = 1 at record (1,1): log phi(0) + log phi(1)
        let st = ModelState::single_component(&[0.0, 1.0], 1.0, &[0.0], &[1.0]).unwrap();
        let v = eval_log_joint(&st, &cols, 1.0, &[1.0]).unwrap();
        assert!((v - (-2.337_877_066_409_345_4)).abs() < 1e-12);
    }

    #[test]
    fn joint_duplicate_component_invariance() {
        let cols = ModelColumns::continuous_identity(1);
        let single = ModelState::single_component(&[0.0, 0.3], 1.3, &[0.4], &[0.8]).unwrap();
        let mut double = ModelState::with_dims(2, 1, 0).unwrap();
        double.set_sticks(vec![0.5, 1.0]).unwrap();
        for h in 0..2 {
            double.beta[(h, 0)] = 0.0;
            double.beta[(h, 1)] = 0.3;
            double.sigma2[h] = 1.3;
            double.mu[(h, 0)] = 0.4;
            double.tau2[(h, 0)] = 0.8;
        }
        let a = eval_log_joint(&single, &cols, 0.7, &[-0.2]).unwrap();
        let b = eval_log_joint(&double, &cols, 0.7, &[-0.2]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn marginal_x_examples() {
        let cols = ModelColumns::continuous_identity(2);
        let st =
            ModelState::single_component(&[0.0, 0.0, 0.0], 1.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let v = eval_log_marginal_x(&st, &cols, &[0.0, 0.0], None).unwrap();
        assert!((v - (-1.837_877_066_409_345_5)).abs() < 1e-12);
        let v = eval_log_marginal_x(&st, &cols, &[0.0, 0.0], Some(1)).unwrap();
        assert!((v - (-0.918_938_533_204_672_7)).abs() < 1e-12);

        let cols1 = ModelColumns::continuous_identity(1);
        let mut st2 = ModelState::with_dims(2, 1, 0).unwrap();
        st2.set_sticks(vec![0.3, 1.0]).unwrap();
        st2.mu[(0, 0)] = 0.0;
        st2.mu[(1, 0)] = 1.0;
        let v = eval_log_marginal_x(&st2, &cols1, &[0.0], None).unwrap();
        assert!((v - (-1.241_113_419_267_037)).abs() < 1e-12);
    }

    #[test]
    fn analytic_marginal_gaussian_convolution() {
        let cols = ModelColumns::continuous_identity(1);
        let st = ModelState::single_component(&[0.0, 1.0], 1.0, &[0.0], &[1.0]).unwrap();
        let v = eval_log_marginal_y_xminusj_analytic(&st, &cols, 0.0, &[123.0], 0).unwrap();
        // y ~ N(0, 1 + 1) after integrating x out: log phi_sqrt2(0)
        assert!((v - (-1.265_512_123_484_645_4)).abs() < 1e-12);
    }

    #[test]
    fn analytic_marginal_with_zero_coefficient_drops_the_kernel_factor() {
        // beta_j = 0 decouples x_j: the marginal equals the joint minus the
        // j-th kernel factor, with the response variance unchanged
        let cols = ModelColumns::continuous_identity(2);
        let st =
            ModelState::single_component(&[0.3, 0.0, -0.7], 1.3, &[0.2, -0.4], &[0.9, 1.5])
                .unwrap();
        let y = 0.45;
        let x = [1.1, -0.2];
        let marginal = eval_log_marginal_y_xminusj_analytic(&st, &cols, y, &x, 0).unwrap();
        let joint = eval_log_joint(&st, &cols, y, &x).unwrap();
        let kernel0 = crate::scale::kernel_log_likelihood(
            x[0],
            crate::scale::ColumnScale::continuous(),
            0.2,
            0.9f64.sqrt(),
        )
        .unwrap();
        assert!((marginal - (joint - kernel0)).abs() < 1e-12);
    }

    #[test]
    fn analytic_marginal_rejects_mixed() {
        let mut cols = ModelColumns::continuous_identity(1);
        cols.predictors[0].scale = crate::scale::ColumnScale::count();
        let st = ModelState::single_component(&[0.0, 1.0], 1.0, &[0.0], &[1.0]).unwrap();
        assert!(eval_log_marginal_y_xminusj_analytic(&st, &cols, 0.0, &[1.0], 0).is_err());
    }

    #[test]
    fn joint_normalizes_by_quadrature() {
        // H=2, p=1 Gaussian state: integrate exp(log joint) over a wide grid
        let cols = ModelColumns::continuous_identity(1);
        let mut st = ModelState::with_dims(2, 1, 0).unwrap();
        st.set_sticks(vec![0.4, 1.0]).unwrap();
        st.beta[(0, 0)] = 0.5;
        st.beta[(0, 1)] = 1.0;
        st.beta[(1, 0)] = -0.3;
        st.sigma2 = vec![0.8, 1.4];
        st.mu[(0, 0)] = -0.5;
        st.mu[(1, 0)] = 1.0;
        st.tau2[(0, 0)] = 0.6;
        st.tau2[(1, 0)] = 1.1;
        let lo = -12.0;
        let hi = 12.0;
        let m = 241;
        let step = (hi - lo) / (m as f64 - 1.0);
        let mut total = 0.0;
        for iy in 0..m {
            let y = lo + iy as f64 * step;
            for ix in 0..m {
                let x = lo + ix as f64 * step;
                let w = |k: usize| if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
                total += w(iy) * w(ix) * eval_log_joint(&st, &cols, y, &[x]).unwrap().exp();
            }
        }
        total *= step * step;
        assert!((total - 1.0).abs() < 1e-3, "integral = {total}");
    }

    #[test]
    fn hyperparams_validate() {
        let hp = Hyperparams::standard(3);
        assert!(hp.validate(3).is_ok());
        assert!(hp.validate(2).is_err());
        let mut bad = Hyperparams::standard(3);
        bad.h = 1;
        assert!(bad.validate(3).is_err());
        let mut bad = Hyperparams::standard(3);
        bad.tau2_scale[1] = 0.0;
        assert!(bad.validate(3).is_err());
    }
}
