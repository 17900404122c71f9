//! Blocked Gibbs sampler for the truncated stick-breaking mixture: stick and
//! concentration updates, cluster assignments, conjugate kernel and
//! regression updates with spike-and-slab coefficients, response imputation,
//! latent refreshes, and chain orchestration with trace capture.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};

use crate::cmi::{autocorrelation, ess, zeta_row, CmiMode, CmiTrace};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::math::log_normal_pdf;
use crate::model::{design_dot, log_kernel, log_response, Hyperparams, ModelState};
use crate::scale::{count_bracket, count_from_latent, ScaleKind};
use crate::truncnorm::sample_truncated_normal;

/// Chain schedule. `kept` counts post-burn iterations; every `thin`-th of
/// them contributes a saved draw, so the trace has `kept / thin` rows.
#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub kept: usize,
    pub thin: usize,
    pub seed: u64,
    /// Monte Carlo draws used to integrate one predictor out of the
    /// response factor when no closed form exists.
    pub n_mc_marginal: usize,
    pub mode: CmiMode,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burn_in: 5000,
            kept: 10_000,
            thin: 10,
            seed: 0,
            n_mc_marginal: 500,
            mode: CmiMode::Conditional,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 || self.kept < self.thin {
            return Err(Error::Config(format!(
                "need kept >= thin >= 1, got kept={} thin={}",
                self.kept, self.thin
            )));
        }
        if self.n_mc_marginal == 0 {
            return Err(Error::Config("n_mc_marginal must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of rows the saved trace will have.
    pub fn trace_rows(&self) -> usize {
        self.kept / self.thin
    }
}

/// Per-predictor mixing summaries for the saved trace.
#[derive(Debug, Clone)]
pub struct ColumnDiagnostics {
    pub autocorrelation: Vec<f64>,
    pub ess: f64,
}

/// Everything a finished chain reports.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub trace: CmiTrace,
    pub diagnostics: Vec<ColumnDiagnostics>,
    /// Cluster occupancy histogram at each saved iteration.
    pub occupancy: Vec<Vec<u32>>,
}

const VARIANCE_FLOOR: f64 = 1e-300;

/// One chain: owns its state and RNG stream; the dataset is shared and
/// immutable. All step methods implement exact full conditionals.
pub struct Sampler<'a> {
    data: &'a Dataset,
    hp: &'a Hyperparams,
    state: ModelState,
    rng: ChaCha12Rng,
}

impl<'a> Sampler<'a> {
    /// Initialize a chain: uniform assignments, zero coefficients, prior-mean
    /// variances and locations, uniform weights, latents drawn from their
    /// truncated priors, missing responses imputed once.
    pub fn new(data: &'a Dataset, hp: &'a Hyperparams, seed: u64) -> Result<Self> {
        hp.validate(data.p())?;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let h = hp.h;
        let p = data.p();
        let n = data.n();
        let mut state = ModelState::with_dims(h, p, n)?;

        state.alpha0 = hp.alpha0_shape / hp.alpha0_rate;
        state.p0 = hp.p0_a / (hp.p0_a + hp.p0_b);
        let sigma2_init = hp.sigma2_scale / (hp.sigma2_shape - 1.0);
        for hh in 0..h {
            state.sigma2[hh] = sigma2_init;
            for j in 0..p {
                state.mu[(hh, j)] = hp.mu_prior_mean[j];
                state.tau2[(hh, j)] = hp.tau2_scale[j] / (hp.tau2_shape - 1.0);
            }
        }
        for si in state.s.iter_mut() {
            *si = rng.random_range(0..h);
        }

        let mut sampler = Sampler {
            data,
            hp,
            state,
            rng,
        };
        sampler.init_response_and_latents()?;
        Ok(sampler)
    }

    /// Rebuild a sampler around existing state and RNG (used when the data
    /// changes between sweeps, e.g. joint-distribution tests).
    pub fn from_parts(
        data: &'a Dataset,
        hp: &'a Hyperparams,
        state: ModelState,
        rng: ChaCha12Rng,
    ) -> Result<Self> {
        hp.validate(data.p())?;
        if state.p() != data.p() || state.s.len() != data.n() {
            return Err(Error::DimensionMismatch("state does not match dataset".into()));
        }
        Ok(Sampler {
            data,
            hp,
            state,
            rng,
        })
    }

    pub fn into_parts(self) -> (ModelState, ChaCha12Rng) {
        (self.state, self.rng)
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut ModelState {
        &mut self.state
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }

    fn init_response_and_latents(&mut self) -> Result<()> {
        let data = self.data;
        let count_response = data.model_columns().response.kind == ScaleKind::Count;
        for i in 0..data.n() {
            if data.y_missing(i) {
                self.impute_one(i)?;
            } else {
                self.state.y_filled[i] = data.y_value(i);
            }
        }
        if count_response {
            self.refresh_response_latents()?;
        } else {
            self.state.y_star.copy_from_slice(&self.state.y_filled);
        }
        for j in 0..data.p() {
            for i in 0..data.n() {
                self.state.x_star[(i, j)] = data.x_value(i, j);
            }
        }
        self.refresh_predictor_latents()?;
        Ok(())
    }

    fn occupancy_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.state.h()];
        for &si in &self.state.s {
            counts[si] += 1;
        }
        counts
    }

    /// Members of each cluster, in record order.
    fn members_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.state.h()];
        for (i, &si) in self.state.s.iter().enumerate() {
            members[si].push(i);
        }
        members
    }

    /// Regression target for record i: latent for count responses, filled
    /// observed value otherwise.
    #[inline]
    fn target(&self, i: usize) -> f64 {
        if self.data.model_columns().response.kind == ScaleKind::Count {
            self.state.y_star[i]
        } else {
            self.state.y_filled[i]
        }
    }

    /// Draw (V, log V, log(1-V)) for V ~ Be(a, b) through the two-Gamma
    /// construction, with the b-shaped Gamma boosted into log space
    /// (Gamma(b) = Gamma(b+1) * U^{1/b}). When b is tiny, 1 - V lies far
    /// below the f64 resolution near one; the exact log(1 - V) is what the
    /// concentration update needs.
    fn draw_beta_logged(&mut self, a: f64, b: f64) -> Result<(f64, f64, f64)> {
        let ga = Gamma::new(a, 1.0)
            .map_err(|e| Error::numeric(0, format!("Beta({a},{b}) numerator: {e}")))?;
        let gb = Gamma::new(b + 1.0, 1.0)
            .map_err(|e| Error::numeric(0, format!("Beta({a},{b}) denominator: {e}")))?;
        for _ in 0..64 {
            let g1 = ga.sample(&mut self.rng);
            let g2_boost = gb.sample(&mut self.rng);
            let u: f64 = self.rng.random();
            if !(g1 > 0.0) || !(g2_boost > 0.0) || !(u > 0.0) {
                continue;
            }
            let lg1 = g1.ln();
            let lg2 = g2_boost.ln() + u.ln() / b;
            // log(g1 + g2) without leaving log space
            let (hi, lo) = if lg1 >= lg2 { (lg1, lg2) } else { (lg2, lg1) };
            let lsum = hi + (lo - hi).exp().ln_1p();
            let log_v = lg1 - lsum;
            let log1m_v = lg2 - lsum;
            return Ok((log_v.exp().min(1.0), log_v, log1m_v));
        }
        Err(Error::numeric(0, format!("Beta({a},{b}) draw kept degenerating")))
    }

    /// Step 1: V_h ~ Be(1 + n_h, alpha0 + sum_{l>h} n_l); V_H = 1.
    pub fn update_sticks(&mut self) -> Result<()> {
        let h = self.state.h();
        let counts = self.occupancy_counts();
        let mut tail: f64 = counts.iter().sum::<usize>() as f64;
        let mut v = vec![1.0; h];
        let mut log_v = vec![0.0; h];
        let mut log1m_v = vec![f64::NEG_INFINITY; h];
        for hh in 0..h - 1 {
            let nh = counts[hh] as f64;
            tail -= nh;
            let a = 1.0 + nh;
            let b = self.state.alpha0 + tail;
            let (vv, lv, l1m) = self.draw_beta_logged(a, b)?;
            v[hh] = vv;
            log_v[hh] = lv;
            log1m_v[hh] = l1m;
        }
        self.state.set_sticks_from_logs(v, &log_v, log1m_v)
    }

    /// Step 2: alpha0 ~ Gamma(a + H - 1, b - sum log(1 - V_h)), rate form,
    /// using the exact stick logarithms carried in the state.
    pub fn update_alpha0(&mut self) -> Result<()> {
        let h = self.state.h();
        let mut log_terms = 0.0;
        for hh in 0..h - 1 {
            let l = self.state.log1m_v[hh];
            if !l.is_finite() {
                return Err(Error::numeric(0, format!("stick V_{} reached 1", hh + 1)));
            }
            log_terms += l;
        }
        let shape = self.hp.alpha0_shape + (h - 1) as f64;
        let rate = self.hp.alpha0_rate - log_terms;
        let draw = Gamma::new(shape, 1.0 / rate)
            .map_err(|e| Error::numeric(0, format!("alpha0 Gamma: {e}")))?
            .sample(&mut self.rng);
        self.state.alpha0 = draw.max(VARIANCE_FLOOR);
        Ok(())
    }

    /// Step 3: s_i from the categorical with log weights
    /// log pi_h + log f(y_i | x_i, theta_h) + sum_j log f(x_ij | theta_h),
    /// all on the observed scale.
    pub fn update_assignments(&mut self) -> Result<()> {
        let data = self.data;
        let cols = data.model_columns();
        let h = self.state.h();
        let mut logw = vec![0.0; h];
        let mut probs = vec![0.0; h];
        for i in 0..data.n() {
            let design = data.design_row(i);
            let design = design.as_slice().expect("design rows are contiguous");
            let y = self.state.y_filled[i];
            for hh in 0..h {
                let mut acc = self.state.log_pi[hh];
                for j in 0..data.p() {
                    acc += log_kernel(&self.state, cols, hh, j, data.x_value(i, j))?;
                }
                acc += log_response(&self.state, cols, hh, y, design_dot(&self.state, hh, design))?;
                logw[hh] = acc;
            }
            let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if max == f64::NEG_INFINITY {
                return Err(Error::numeric(
                    0,
                    format!("record {i}: all assignment weights are zero"),
                ));
            }
            let mut total = 0.0;
            for hh in 0..h {
                probs[hh] = (logw[hh] - max).exp();
                total += probs[hh];
            }
            let u: f64 = self.rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut chosen = h - 1;
            for hh in 0..h {
                cum += probs[hh];
                if u < cum {
                    chosen = hh;
                    break;
                }
            }
            self.state.s[i] = chosen;
        }
        Ok(())
    }

    /// Step 4: conjugate normal update of the kernel locations, using the
    /// latent kernel values.
    pub fn update_mu(&mut self) -> Result<()> {
        let members = self.members_by_cluster();
        for hh in 0..self.state.h() {
            let nh = members[hh].len() as f64;
            for j in 0..self.state.p() {
                let tau2 = self.state.tau2[(hh, j)];
                let prior_var = self.hp.mu_prior_var[j];
                let sum_x: f64 = members[hh].iter().map(|&i| self.state.x_star[(i, j)]).sum();
                let post_var = 1.0 / (nh / tau2 + 1.0 / prior_var);
                let post_mean = post_var * (sum_x / tau2 + self.hp.mu_prior_mean[j] / prior_var);
                let draw = Normal::new(post_mean, post_var.sqrt())
                    .map_err(|e| Error::numeric(0, format!("mu Normal: {e}")))?
                    .sample(&mut self.rng);
                self.state.mu[(hh, j)] = draw;
            }
        }
        Ok(())
    }

    /// Step 5: tau_jh^2 ~ IG((n_h + 3)/2, (sum (x*_ij - mu_jh)^2 + s_j^2)/2).
    pub fn update_tau2(&mut self) -> Result<()> {
        let members = self.members_by_cluster();
        for hh in 0..self.state.h() {
            let nh = members[hh].len() as f64;
            for j in 0..self.state.p() {
                let mu = self.state.mu[(hh, j)];
                let ss: f64 = members[hh]
                    .iter()
                    .map(|&i| {
                        let d = self.state.x_star[(i, j)] - mu;
                        d * d
                    })
                    .sum();
                let shape = self.hp.tau2_shape + nh / 2.0;
                let scale = self.hp.tau2_scale[j] + ss / 2.0;
                self.state.tau2[(hh, j)] = self.draw_inverse_gamma(shape, scale)?;
            }
        }
        Ok(())
    }

    /// Step 6: sigma_h^2 ~ IG((n_h + 3)/2, (sum residual^2 + s_y^2)/2) with
    /// residuals on the standardized design and the latent response where
    /// the response is count-scaled.
    pub fn update_sigma2(&mut self) -> Result<()> {
        let members = self.members_by_cluster();
        for hh in 0..self.state.h() {
            let nh = members[hh].len() as f64;
            let ss: f64 = members[hh]
                .iter()
                .map(|&i| {
                    let design = self.data.design_row(i);
                    let dot = design_dot(
                        &self.state,
                        hh,
                        design.as_slice().expect("design rows are contiguous"),
                    );
                    let r = self.target(i) - dot;
                    r * r
                })
                .sum();
            let shape = self.hp.sigma2_shape + nh / 2.0;
            let scale = self.hp.sigma2_scale + ss / 2.0;
            self.state.sigma2[hh] = self.draw_inverse_gamma(shape, scale)?;
        }
        Ok(())
    }

    /// Step 7: spike-and-slab update of beta_jh, one coefficient at a time
    /// (h ascending, then j = 0..p ascending), conditioning on all others.
    pub fn update_beta_spike_slab(&mut self) -> Result<()> {
        let members = self.members_by_cluster();
        let p = self.state.p();
        for hh in 0..self.state.h() {
            let sigma2 = self.state.sigma2[hh];
            // current residuals for this cluster's members
            let mut resid: Vec<f64> = members[hh]
                .iter()
                .map(|&i| {
                    let design = self.data.design_row(i);
                    self.target(i)
                        - design_dot(
                            &self.state,
                            hh,
                            design.as_slice().expect("design rows are contiguous"),
                        )
                })
                .collect();
            for j in 0..=p {
                let old = self.state.beta[(hh, j)];
                let lambda2 = self.state.lambda2[(hh, j)];
                let mut sum_d2 = 0.0;
                let mut sum_dpr = 0.0;
                for (&i, r) in members[hh].iter().zip(&resid) {
                    let d = self.data.design_row(i)[j];
                    sum_d2 += d * d;
                    sum_dpr += d * (r + old * d);
                }
                let slab_var = 1.0 / (sum_d2 / sigma2 + 1.0 / lambda2);
                let slab_mean = slab_var * (sum_dpr / sigma2);
                // p_hat = {1 + (1-p0)/p0 * N(0|0,lambda^2)/N(0|mean,var)}^{-1}
                let lw = ((1.0 - self.state.p0) / self.state.p0).ln()
                    + log_normal_pdf(0.0, 0.0, lambda2.sqrt())
                    - log_normal_pdf(0.0, slab_mean, slab_var.sqrt());
                let p_hat = 1.0 / (1.0 + lw.exp());
                let u: f64 = self.rng.random();
                let new = if u < p_hat {
                    0.0
                } else {
                    Normal::new(slab_mean, slab_var.sqrt())
                        .map_err(|e| Error::numeric(0, format!("beta Normal: {e}")))?
                        .sample(&mut self.rng)
                };
                if new != old {
                    for (&i, r) in members[hh].iter().zip(resid.iter_mut()) {
                        let d = self.data.design_row(i)[j];
                        *r += (old - new) * d;
                    }
                }
                self.state.beta[(hh, j)] = new;
            }
        }
        Ok(())
    }

    /// Step 8: lambda_jh^2 ~ IG({1(beta != 0) + 1}/2, (beta^2 + 1)/2),
    /// intercept column included.
    pub fn update_lambda2(&mut self) -> Result<()> {
        for hh in 0..self.state.h() {
            for j in 0..=self.state.p() {
                let beta = self.state.beta[(hh, j)];
                let shape = self.hp.lambda2_shape + if beta != 0.0 { 0.5 } else { 0.0 };
                let scale = self.hp.lambda2_scale + beta * beta / 2.0;
                self.state.lambda2[(hh, j)] = self.draw_inverse_gamma(shape, scale)?;
            }
        }
        Ok(())
    }

    /// Step 9: p0 ~ Be(4.75 + #zeros, 0.25 + #nonzeros) over all H(p+1)
    /// coefficients.
    pub fn update_p0(&mut self) -> Result<()> {
        let zeros = self.state.beta.iter().filter(|&&b| b == 0.0).count() as f64;
        let nonzeros = self.state.beta.len() as f64 - zeros;
        let draw = Beta::new(self.hp.p0_a + zeros, self.hp.p0_b + nonzeros)
            .map_err(|e| Error::numeric(0, format!("p0 Beta: {e}")))?
            .sample(&mut self.rng);
        self.state.p0 = draw.clamp(1e-12, 1.0 - 1e-12);
        Ok(())
    }

    fn impute_one(&mut self, i: usize) -> Result<()> {
        let hh = self.state.s[i];
        let design = self.data.design_row(i);
        let dot = design_dot(
            &self.state,
            hh,
            design.as_slice().expect("design rows are contiguous"),
        );
        let sd = self.state.sigma2[hh].sqrt();
        let z: f64 = self.rng.sample(rand_distr::StandardNormal);
        let draw = dot + sd * z;
        match self.data.model_columns().response.kind {
            ScaleKind::Count => {
                self.state.y_filled[i] = count_from_latent(draw);
                self.state.y_star[i] = draw;
            }
            _ => {
                self.state.y_filled[i] = draw;
                self.state.y_star[i] = draw;
            }
        }
        Ok(())
    }

    /// Step 10: impute missing responses from N(x'beta_{s_i}, sigma_{s_i}^2),
    /// mapping through the count cut-points where the response is a count.
    pub fn impute_missing_response(&mut self) -> Result<()> {
        for i in 0..self.data.n() {
            if self.data.y_missing(i) {
                self.impute_one(i)?;
            }
        }
        Ok(())
    }

    fn refresh_response_latents(&mut self) -> Result<()> {
        for i in 0..self.data.n() {
            let (lo, hi) = count_bracket(self.state.y_filled[i])?;
            let hh = self.state.s[i];
            let design = self.data.design_row(i);
            let dot = design_dot(
                &self.state,
                hh,
                design.as_slice().expect("design rows are contiguous"),
            );
            self.state.y_star[i] =
                sample_truncated_normal(&mut self.rng, dot, self.state.sigma2[hh].sqrt(), lo, hi)?;
        }
        Ok(())
    }

    fn refresh_predictor_latents(&mut self) -> Result<()> {
        let cols = self.data.model_columns().clone();
        for j in 0..self.data.p() {
            match cols.predictors[j].scale.kind {
                ScaleKind::Continuous => {}
                ScaleKind::Count => {
                    for i in 0..self.data.n() {
                        let (lo, hi) = count_bracket(self.data.x_value(i, j))?;
                        let hh = self.state.s[i];
                        self.state.x_star[(i, j)] = sample_truncated_normal(
                            &mut self.rng,
                            self.state.mu[(hh, j)],
                            self.state.tau2[(hh, j)].sqrt(),
                            lo,
                            hi,
                        )?;
                    }
                }
                ScaleKind::Percentage => {
                    for i in 0..self.data.n() {
                        let v = self.data.x_value(i, j);
                        let (lo, hi) = if v == 0.0 {
                            (f64::NEG_INFINITY, 0.0)
                        } else if v == 100.0 {
                            (100.0, f64::INFINITY)
                        } else {
                            continue;
                        };
                        let hh = self.state.s[i];
                        self.state.x_star[(i, j)] = sample_truncated_normal(
                            &mut self.rng,
                            self.state.mu[(hh, j)],
                            self.state.tau2[(hh, j)].sqrt(),
                            lo,
                            hi,
                        )?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Step 11: refresh the latent response and predictor values from their
    /// bracket-truncated normals. Interior percentages and continuous
    /// predictors keep the observed value.
    pub fn update_latents(&mut self) -> Result<()> {
        if self.data.model_columns().response.kind == ScaleKind::Count {
            self.refresh_response_latents()?;
        } else {
            self.state.y_star.copy_from_slice(&self.state.y_filled);
        }
        self.refresh_predictor_latents()
    }

    /// One full iteration: Steps 1-11 in order.
    pub fn sweep(&mut self) -> Result<()> {
        self.update_sticks()?;
        self.update_alpha0()?;
        self.update_assignments()?;
        self.update_mu()?;
        self.update_tau2()?;
        self.update_sigma2()?;
        self.update_beta_spike_slab()?;
        self.update_lambda2()?;
        self.update_p0()?;
        self.impute_missing_response()?;
        self.update_latents()?;
        Ok(())
    }

    fn draw_inverse_gamma(&mut self, shape: f64, scale: f64) -> Result<f64> {
        let gamma = Gamma::new(shape, 1.0 / scale)
            .map_err(|e| Error::numeric(0, format!("IG({shape},{scale}): {e}")))?;
        // re-draw the probability-zero underflow rather than return log(0)
        for _ in 0..64 {
            let g = gamma.sample(&mut self.rng);
            let draw = 1.0 / g;
            if draw.is_finite() && draw >= VARIANCE_FLOOR {
                return Ok(draw);
            }
        }
        Err(Error::numeric(0, format!("inverse-gamma({shape},{scale}) kept underflowing")))
    }
}

/// Run one chain end to end: Steps 1-11 every iteration, the conditional
/// mutual information row (Step 12) on saved iterations only.
pub fn run_chain(data: &Dataset, hp: &Hyperparams, cfg: &ChainConfig) -> Result<ChainOutput> {
    cfg.validate()?;
    let mut sampler = Sampler::new(data, hp, cfg.seed)?;
    let rows = cfg.trace_rows();
    let p = data.p();
    let mut draws = Array2::zeros((rows, p));
    let mut occupancy = Vec::with_capacity(rows);
    let total = cfg.burn_in + cfg.kept;
    let mut row = 0;
    for iter in 0..total {
        sampler.sweep().map_err(|e| at_iteration(iter, e))?;
        if iter >= cfg.burn_in && (iter - cfg.burn_in + 1) % cfg.thin == 0 && row < rows {
            let mc_seed: u64 = sampler.rng.random();
            let z = zeta_row(&sampler.state, data, cfg.mode, cfg.n_mc_marginal, mc_seed)
                .map_err(|e| at_iteration(iter, e))?;
            for (j, v) in z.iter().enumerate() {
                draws[(row, j)] = *v;
            }
            let mut hist = vec![0u32; sampler.state.h()];
            for &si in &sampler.state.s {
                hist[si] += 1;
            }
            occupancy.push(hist);
            row += 1;
        }
    }
    let trace = CmiTrace {
        draws,
        mode: cfg.mode,
    };
    let max_lag = rows.saturating_sub(1).min(100);
    let diagnostics = (0..p)
        .map(|j| {
            let col: Vec<f64> = trace.draws.column(j).to_vec();
            ColumnDiagnostics {
                autocorrelation: autocorrelation(&col, max_lag),
                ess: ess(&col),
            }
        })
        .collect();
    Ok(ChainOutput {
        trace,
        diagnostics,
        occupancy,
    })
}

fn at_iteration(iter: usize, e: Error) -> Error {
    match e {
        Error::Numeric { message, .. } => Error::Numeric {
            iteration: iter,
            message,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetOptions, RawTable};
    use crate::scale::ColumnScale;

    fn gaussian_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..p)
            .map(|_| {
                (0..n)
                    .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                    .collect()
            })
            .collect();
        let y: Vec<Option<f64>> = (0..n)
            .map(|i| Some(x[0][i] + 0.5 * rng.sample::<f64, _>(rand_distr::StandardNormal)))
            .collect();
        let table = RawTable {
            response_name: "y".into(),
            response_scale: ColumnScale::continuous(),
            y,
            predictor_names: (0..p).map(|j| format!("x{}", j + 1)).collect(),
            scales: vec![ColumnScale::continuous(); p],
            x,
        };
        Dataset::prepare(&table, DatasetOptions::default()).unwrap()
    }

    #[test]
    fn trace_bookkeeping() {
        let data = gaussian_dataset(12, 2, 1);
        let mut hp = Hyperparams::standard(2);
        hp.h = 3;
        let cfg = ChainConfig {
            burn_in: 0,
            kept: 10,
            thin: 5,
            seed: 4,
            n_mc_marginal: 10,
            mode: CmiMode::Conditional,
        };
        let out = run_chain(&data, &hp, &cfg).unwrap();
        assert_eq!(out.trace.draws.nrows(), 2);
        assert_eq!(out.trace.draws.ncols(), 2);
        assert_eq!(out.occupancy.len(), 2);
    }

    #[test]
    fn same_seed_same_trace() {
        let data = gaussian_dataset(15, 2, 2);
        let mut hp = Hyperparams::standard(2);
        hp.h = 4;
        let cfg = ChainConfig {
            burn_in: 5,
            kept: 20,
            thin: 2,
            seed: 42,
            n_mc_marginal: 25,
            mode: CmiMode::Conditional,
        };
        let a = run_chain(&data, &hp, &cfg).unwrap();
        let b = run_chain(&data, &hp, &cfg).unwrap();
        assert_eq!(a.trace.draws.len(), b.trace.draws.len());
        for (x, y) in a.trace.draws.iter().zip(b.trace.draws.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn occupancy_is_conserved() {
        let data = gaussian_dataset(30, 2, 3);
        let mut hp = Hyperparams::standard(2);
        hp.h = 5;
        let mut sampler = Sampler::new(&data, &hp, 7).unwrap();
        for _ in 0..50 {
            sampler.sweep().unwrap();
            let total: usize = sampler.occupancy_counts().iter().sum();
            assert_eq!(total, 30);
            sampler.state().validate().unwrap();
        }
    }

    #[test]
    fn spike_draws_are_exact_zeros() {
        let data = gaussian_dataset(20, 2, 4);
        let mut hp = Hyperparams::standard(2);
        hp.h = 3;
        let mut sampler = Sampler::new(&data, &hp, 11).unwrap();
        let mut saw_zero = false;
        for _ in 0..30 {
            sampler.sweep().unwrap();
            for &b in sampler.state().beta.iter() {
                if b == 0.0 {
                    saw_zero = true;
                    assert_eq!(b.to_bits(), 0.0f64.to_bits());
                }
            }
        }
        assert!(saw_zero);
    }

    #[test]
    fn assignments_error_when_every_component_has_zero_likelihood() {
        let data = gaussian_dataset(6, 1, 21);
        let mut hp = Hyperparams::standard(1);
        hp.h = 3;
        let mut sampler = Sampler::new(&data, &hp, 5).unwrap();
        sampler.state_mut().y_filled[0] = 1e200;
        let err = sampler.update_assignments().unwrap_err();
        assert!(err.to_string().contains("record 0"), "{err}");
    }

    #[test]
    fn p0_posterior_arithmetic_h2_p1() {
        // all H(p+1) = 4 coefficients zero: Be(4.75 + 4, 0.25), mean 8.75/9
        let data = gaussian_dataset(6, 1, 22);
        let mut hp = Hyperparams::standard(1);
        hp.h = 2;
        let mut sampler = Sampler::new(&data, &hp, 9).unwrap();
        let base = sampler.state().clone();
        let mut mean_zero = 0.0;
        let mut mean_dense = 0.0;
        let reps = 20_000;
        for _ in 0..reps {
            *sampler.state_mut() = base.clone();
            sampler.update_p0().unwrap();
            mean_zero += sampler.state().p0;
            let mut dense = base.clone();
            dense.beta.iter_mut().for_each(|b| *b = 0.3);
            *sampler.state_mut() = dense;
            sampler.update_p0().unwrap();
            mean_dense += sampler.state().p0;
        }
        mean_zero /= reps as f64;
        mean_dense /= reps as f64;
        // Be(8.75, 0.25) mean = 0.97222; Be(4.75, 4.25) mean = 0.52778
        assert!((mean_zero - 8.75 / 9.0).abs() < 0.002, "{mean_zero}");
        assert!((mean_dense - 4.75 / 9.0).abs() < 0.004, "{mean_dense}");
    }

    #[test]
    fn empty_chain_sticks_follow_prior_shape() {
        // no data rows at all is not allowed, but empty *clusters* reduce to
        // the prior: force everything into cluster 0 and check the tail stick
        let data = gaussian_dataset(8, 1, 5);
        let mut hp = Hyperparams::standard(1);
        hp.h = 3;
        let mut sampler = Sampler::new(&data, &hp, 13).unwrap();
        for si in sampler.state_mut().s.iter_mut() {
            *si = 0;
        }
        sampler.state_mut().alpha0 = 2.0;
        // V_2 has no members at or after it: Be(1, alpha0)
        let mut draws = Vec::new();
        let base = sampler.state().clone();
        for _ in 0..4000 {
            *sampler.state_mut() = base.clone();
            sampler.update_sticks().unwrap();
            draws.push(sampler.state().v[1]);
        }
        let mean: f64 = draws.iter().sum::<f64>() / draws.len() as f64;
        // Be(1,2) mean = 1/3, sd ~ 0.2357; 4000 draws -> se ~ 0.0037
        assert!((mean - 1.0 / 3.0).abs() < 0.015, "mean = {mean}");
    }
}
