//! Observed data: a response column with an optional missing mask plus a
//! complete predictor matrix, each column tagged with a measurement scale.
//! Preparation applies log transforms, computes per-column standardization
//! and the empirical statistics the priors are built from, and assembles the
//! fixed regression design matrix.

use ndarray::{Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::scale::{ColumnScale, ScaleKind};

/// Per-predictor metadata derived at load time.
#[derive(Debug, Clone, Copy)]
pub struct ColumnMeta {
    pub scale: ColumnScale,
    /// Mean of the design-scale values (log(v + 0.5) for counts).
    pub design_mean: f64,
    /// Standard deviation of the design-scale values.
    pub design_sd: f64,
    /// Empirical prior location for the kernel mean.
    pub prior_mean: f64,
    /// Empirical prior spread s_j^2 for the kernel mean and variance.
    pub prior_var: f64,
}

/// Column structure shared by density evaluation and the sampler.
#[derive(Debug, Clone)]
pub struct ModelColumns {
    pub response: ColumnScale,
    pub predictors: Vec<ColumnMeta>,
    /// Empirical prior scale s_y^2 for the response variance.
    pub response_prior_var: f64,
}

impl ModelColumns {
    /// All-continuous layout with identity design transform and unit prior
    /// spreads; the configuration used by synthetic-model tests.
    pub fn continuous_identity(p: usize) -> Self {
        ModelColumns {
            response: ColumnScale::continuous(),
            predictors: vec![
                ColumnMeta {
                    scale: ColumnScale::continuous(),
                    design_mean: 0.0,
                    design_sd: 1.0,
                    prior_mean: 0.0,
                    prior_var: 1.0,
                };
                p
            ],
            response_prior_var: 1.0,
        }
    }

    pub fn p(&self) -> usize {
        self.predictors.len()
    }

    pub fn all_continuous(&self) -> bool {
        self.response.kind == ScaleKind::Continuous
            && self
                .predictors
                .iter()
                .all(|c| c.scale.kind == ScaleKind::Continuous)
    }

    /// Design-scale value of predictor `j` (standardized; counts enter the
    /// regression through log(v + 0.5)).
    #[inline]
    pub fn design_value(&self, j: usize, value: f64) -> f64 {
        let c = &self.predictors[j];
        let raw = match c.scale.kind {
            ScaleKind::Count => (value + 0.5).ln(),
            _ => value,
        };
        (raw - c.design_mean) / c.design_sd
    }
}

/// Column-major observation table before preparation.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub response_name: String,
    pub response_scale: ColumnScale,
    pub y: Vec<Option<f64>>,
    pub predictor_names: Vec<String>,
    pub scales: Vec<ColumnScale>,
    pub x: Vec<Vec<f64>>,
}

/// Preparation switches.
#[derive(Debug, Clone, Copy)]
pub struct DatasetOptions {
    /// z-score continuous columns (including a continuous response) before
    /// any other processing. This is the convention for the synthetic
    /// benchmarks; observational data is usually analyzed as-is with
    /// empirical priors instead.
    pub normalize: bool,
    /// Standardize regression design columns to mean zero and unit sd.
    /// Disabled only by tests that want the design to be the raw values.
    pub standardize_design: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            normalize: false,
            standardize_design: true,
        }
    }
}

/// A validated dataset with derived design matrix and column statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    response_name: String,
    predictor_names: Vec<String>,
    /// Analysis-scale response (log applied when flagged); NaN where missing.
    y: Vec<f64>,
    y_missing: Vec<bool>,
    /// n x p analysis-scale predictors.
    x: Array2<f64>,
    /// n x (p+1) design matrix; column 0 is the intercept.
    design: Array2<f64>,
    columns: ModelColumns,
}

fn mean_and_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, var)
}

impl Dataset {
    /// Validate a raw table and derive the model-facing representation.
    pub fn prepare(table: &RawTable, opts: DatasetOptions) -> Result<Self> {
        let n = table.y.len();
        let p = table.x.len();
        if table.predictor_names.len() != p || table.scales.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} predictor columns but {} names and {} scales",
                p,
                table.predictor_names.len(),
                table.scales.len()
            )));
        }
        if p == 0 {
            return Err(Error::Schema("at least one predictor is required".into()));
        }
        for (name, col) in table.predictor_names.iter().zip(&table.x) {
            if col.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column `{name}` has {} rows, response has {n}",
                    col.len()
                )));
            }
        }
        if n < 2 && opts.standardize_design {
            return Err(Error::Schema("need at least two records".into()));
        }
        match table.response_scale.kind {
            ScaleKind::Continuous | ScaleKind::Count => {}
            ScaleKind::Percentage => {
                return Err(Error::Schema(
                    "percentage-scaled responses are not supported".into(),
                ));
            }
        }

        // Response: validate observed cells, apply the log transform.
        let mut y = Vec::with_capacity(n);
        let mut y_missing = Vec::with_capacity(n);
        let mut y_observed = Vec::new();
        for (i, cell) in table.y.iter().enumerate() {
            match cell {
                None => {
                    y.push(f64::NAN);
                    y_missing.push(true);
                }
                Some(v) => {
                    table
                        .response_scale
                        .validate_value(*v, &table.response_name)
                        .map_err(|e| match e {
                            Error::InvalidValue { column, message } => Error::InvalidValue {
                                column,
                                message: format!("row {i}: {message}"),
                            },
                            other => other,
                        })?;
                    let t = if table.response_scale.log_transform
                        && table.response_scale.kind == ScaleKind::Continuous
                    {
                        v.ln()
                    } else {
                        *v
                    };
                    y.push(t);
                    y_missing.push(false);
                    y_observed.push(t);
                }
            }
        }
        if y_observed.is_empty() {
            return Err(Error::Schema("response column is entirely missing".into()));
        }

        // Predictors: validate, log-transform, collect analysis values.
        let mut x = Array2::zeros((n, p));
        for (j, col) in table.x.iter().enumerate() {
            let name = &table.predictor_names[j];
            let scale = table.scales[j];
            for (i, &v) in col.iter().enumerate() {
                if v.is_nan() {
                    return Err(Error::invalid(name.clone(), format!("missing cell at row {i}")));
                }
                scale.validate_value(v, name).map_err(|e| match e {
                    Error::InvalidValue { column, message } => Error::InvalidValue {
                        column,
                        message: format!("row {i}: {message}"),
                    },
                    other => other,
                })?;
                let t = if scale.log_transform && scale.kind == ScaleKind::Continuous {
                    v.ln()
                } else {
                    v
                };
                x[(i, j)] = t;
            }
        }

        // Optional normalization of continuous columns (benchmark convention).
        if opts.normalize {
            for j in 0..p {
                if table.scales[j].kind == ScaleKind::Continuous {
                    let col: Vec<f64> = (0..n).map(|i| x[(i, j)]).collect();
                    let (m, var) = mean_and_var(&col);
                    let sd = var.sqrt();
                    if sd <= 1e-12 * (1.0 + m.abs()) {
                        return Err(Error::invalid(
                            table.predictor_names[j].clone(),
                            "constant column",
                        ));
                    }
                    for i in 0..n {
                        x[(i, j)] = (x[(i, j)] - m) / sd;
                    }
                }
            }
            if table.response_scale.kind == ScaleKind::Continuous {
                let (m, var) = mean_and_var(&y_observed);
                let sd = var.sqrt();
                if sd <= 1e-12 * (1.0 + m.abs()) {
                    return Err(Error::invalid(table.response_name.clone(), "constant response"));
                }
                for v in y.iter_mut().chain(y_observed.iter_mut()) {
                    if !v.is_nan() {
                        *v = (*v - m) / sd;
                    }
                }
            }
        }

        // Per-column design statistics and empirical prior statistics.
        let mut metas = Vec::with_capacity(p);
        for j in 0..p {
            let scale = table.scales[j];
            let design_raw: Vec<f64> = (0..n)
                .map(|i| match scale.kind {
                    ScaleKind::Count => (x[(i, j)] + 0.5).ln(),
                    _ => x[(i, j)],
                })
                .collect();
            let (mean, var) = mean_and_var(&design_raw);
            let sd = var.sqrt();
            let (design_mean, design_sd) = if opts.standardize_design {
                if sd <= 1e-12 * (1.0 + mean.abs()) {
                    return Err(Error::invalid(
                        table.predictor_names[j].clone(),
                        "constant column",
                    ));
                }
                (mean, sd)
            } else {
                (0.0, 1.0)
            };
            metas.push(ColumnMeta {
                scale,
                design_mean,
                design_sd,
                prior_mean: mean,
                prior_var: var,
            });
        }

        let response_prior_var = {
            let vals: Vec<f64> = y
                .iter()
                .zip(&y_missing)
                .filter(|(_, m)| !**m)
                .map(|(v, _)| match table.response_scale.kind {
                    ScaleKind::Count => (v + 0.5).ln(),
                    _ => *v,
                })
                .collect();
            let (m, var) = mean_and_var(&vals);
            if opts.standardize_design && var.sqrt() <= 1e-12 * (1.0 + m.abs()) {
                return Err(Error::invalid(table.response_name.clone(), "constant response"));
            }
            if var > 0.0 {
                var
            } else {
                1.0
            }
        };

        let columns = ModelColumns {
            response: table.response_scale,
            predictors: metas,
            response_prior_var,
        };

        let mut design = Array2::zeros((n, p + 1));
        for i in 0..n {
            design[(i, 0)] = 1.0;
            for j in 0..p {
                design[(i, j + 1)] = columns.design_value(j, x[(i, j)]);
            }
        }

        Ok(Dataset {
            response_name: table.response_name.clone(),
            predictor_names: table.predictor_names.clone(),
            y,
            y_missing,
            x,
            design,
            columns,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.columns.p()
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    /// Analysis-scale response; NaN where missing.
    pub fn y_value(&self, i: usize) -> f64 {
        self.y[i]
    }

    pub fn y_missing(&self, i: usize) -> bool {
        self.y_missing[i]
    }

    pub fn n_missing(&self) -> usize {
        self.y_missing.iter().filter(|m| **m).count()
    }

    /// Analysis-scale predictor value.
    #[inline]
    pub fn x_value(&self, i: usize, j: usize) -> f64 {
        self.x[(i, j)]
    }

    pub fn x_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.x.row(i)
    }

    /// Fixed standardized design row (intercept first).
    #[inline]
    pub fn design_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.design.row(i)
    }

    pub fn model_columns(&self) -> &ModelColumns {
        &self.columns
    }

    pub fn all_continuous(&self) -> bool {
        self.columns.all_continuous()
    }

    /// Rebuild the raw table from analysis-scale values. Log transforms have
    /// already been applied, so the scale tags drop their transform flag.
    pub fn to_raw_table(&self) -> RawTable {
        RawTable {
            response_name: self.response_name.clone(),
            response_scale: ColumnScale {
                log_transform: false,
                ..self.columns.response
            },
            y: self
                .y
                .iter()
                .zip(&self.y_missing)
                .map(|(v, m)| if *m { None } else { Some(*v) })
                .collect(),
            predictor_names: self.predictor_names.clone(),
            scales: self
                .columns
                .predictors
                .iter()
                .map(|c| ColumnScale {
                    log_transform: false,
                    ..c.scale
                })
                .collect(),
            x: (0..self.p())
                .map(|j| (0..self.n()).map(|i| self.x[(i, j)]).collect())
                .collect(),
        }
    }

    /// z-score every continuous column (including a continuous response).
    pub fn normalized(&self) -> Result<Dataset> {
        let table = self.to_raw_table();
        Dataset::prepare(
            &table,
            DatasetOptions {
                normalize: true,
                standardize_design: true,
            },
        )
    }

    /// Add independent N(0, sigma_star^2) noise to a continuous response.
    pub fn with_noisy_response(&self, sigma_star: f64, seed: u64) -> Result<Dataset> {
        if self.columns.response.kind != ScaleKind::Continuous {
            return Err(Error::Schema(
                "response noise requires a continuous response".into(),
            ));
        }
        if sigma_star < 0.0 {
            return Err(Error::Config(format!("noise sd must be >= 0, got {sigma_star}")));
        }
        let mut table = self.to_raw_table();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        for cell in table.y.iter_mut() {
            let eps: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma_star;
            if let Some(v) = cell {
                *v += eps;
            }
        }
        Dataset::prepare(
            &table,
            DatasetOptions {
                normalize: false,
                standardize_design: true,
            },
        )
    }
}
