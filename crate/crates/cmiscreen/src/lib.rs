//! Screening predictors for conditional dependence with a response by
//! fitting one encompassing Bayesian nonparametric mixture model and
//! summarizing, per predictor, the posterior of its conditional mutual
//! information with the response given the remaining predictors.
//!
//! The pieces:
//!
//! - [`data`]: mixed-scale datasets (continuous / count / inflated
//!   percentage), response missingness, standardization.
//! - [`model`]: the truncated stick-breaking mixture of regressions and its
//!   observed-scale density evaluations.
//! - [`gibbs`]: the blocked Gibbs sampler and chain orchestration.
//! - [`cmi`]: conditional and marginal mutual-information draws over the
//!   empirical measure, posterior summaries and the selection rule.
//! - [`sim`]: synthetic benchmark generators and evaluation metrics.
//! - [`io`]: CSV/JSON file formats and run manifests.

pub mod cmi;
pub mod data;
pub mod error;
pub mod gibbs;
pub mod io;
pub mod math;
pub mod model;
pub mod scale;
pub mod sim;
pub mod truncnorm;

pub use cmi::{
    autocorrelation, default_names, ess, marginal_mi_draw, mc_marginalize_xj, summarize, zeta_all,
    zeta_draw, zeta_row, CmiMode, CmiTrace, PredictorSummary, ScreeningReport,
};
pub use data::{ColumnMeta, Dataset, DatasetOptions, ModelColumns, RawTable};
pub use error::{Error, Result};
pub use gibbs::{run_chain, ChainConfig, ChainOutput, ColumnDiagnostics, Sampler};
pub use model::{
    eval_log_joint, eval_log_marginal_x, eval_log_marginal_y_xminusj_analytic, stick_break,
    Hyperparams, ModelState, DEFAULT_TRUNCATION,
};
pub use scale::{
    count_bracket, count_cutpoint, count_from_latent, kernel_likelihood, kernel_log_likelihood,
    response_likelihood, ColumnScale, ScaleKind,
};
pub use sim::{
    confusion_metrics, derive_seed, generate, quantile_grid, roc_auc, run_benchmark,
    BenchmarkConfig, BenchmarkResult, ConfusionRates, GeneratedData, Metrics, SimCase,
    SimulationSpec,
};
pub use truncnorm::sample_truncated_normal;
