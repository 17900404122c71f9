//! File formats: schema-driven CSV ingestion, trace/report/metrics
//! serialization and run manifests. Numeric CSV cells use 17 significant
//! digits so round trips are lossless; every writer goes through
//! write-then-rename so failures leave no partial files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::cmi::{CmiMode, CmiTrace, ScreeningReport};
use crate::data::{Dataset, DatasetOptions, RawTable};
use crate::error::{Error, Result};
use crate::scale::{ColumnScale, ScaleKind};
use crate::sim::BenchmarkResult;

/// Role of a column in the schema file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Response,
    Predictor,
}

/// One schema entry; unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaColumn {
    pub name: String,
    pub role: ColumnRole,
    pub kind: ScaleKind,
    #[serde(default)]
    pub log_transform: bool,
}

/// Schema document mapping every CSV column to a scale and role.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaFile {
    pub columns: Vec<SchemaColumn>,
}

impl SchemaFile {
    pub fn validate(&self) -> Result<()> {
        let responses = self
            .columns
            .iter()
            .filter(|c| c.role == ColumnRole::Response)
            .count();
        if responses != 1 {
            return Err(Error::Schema(format!(
                "schema must declare exactly one response column, found {responses}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.name.clone()) {
                return Err(Error::Schema(format!("duplicate schema column `{}`", c.name)));
            }
            if c.log_transform && c.kind != ScaleKind::Continuous {
                return Err(Error::Schema(format!(
                    "column `{}`: log_transform applies only to continuous columns",
                    c.name
                )));
            }
        }
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<&SchemaColumn> {
        self.columns.iter().find(|c| c.name == name)
    }
}

/// Schema describing an in-memory table (used by `simulate` so the written
/// dataset and schema always agree).
pub fn schema_for_table(table: &RawTable) -> SchemaFile {
    let mut columns = vec![SchemaColumn {
        name: table.response_name.clone(),
        role: ColumnRole::Response,
        kind: table.response_scale.kind,
        log_transform: table.response_scale.log_transform,
    }];
    for (name, scale) in table.predictor_names.iter().zip(&table.scales) {
        columns.push(SchemaColumn {
            name: name.clone(),
            role: ColumnRole::Predictor,
            kind: scale.kind,
            log_transform: scale.log_transform,
        });
    }
    SchemaFile { columns }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write bytes to `path` atomically (write sibling temp file, then rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_schema(path: &Path) -> Result<SchemaFile> {
    let text = fs::read_to_string(path)?;
    let schema: SchemaFile = serde_json::from_str(&text)?;
    schema.validate()?;
    Ok(schema)
}

pub fn write_schema(path: &Path, schema: &SchemaFile) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(schema)?.as_bytes())
}

/// Read a headered CSV against a schema. Row order is preserved; empty
/// response cells become missing values; empty predictor cells are errors.
pub fn read_table_csv(path: &Path, schema: &SchemaFile) -> Result<RawTable> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.trim().to_string()).collect();
    for h in &headers {
        if schema.lookup(h).is_none() {
            return Err(Error::Schema(format!("data column `{h}` is missing from the schema")));
        }
    }
    for c in &schema.columns {
        if !headers.iter().any(|h| h == &c.name) {
            return Err(Error::Schema(format!("schema column `{}` is absent from the data", c.name)));
        }
    }
    let response_idx = headers
        .iter()
        .position(|h| schema.lookup(h).map(|c| c.role) == Some(ColumnRole::Response))
        .expect("validated above");

    let predictor_idx: Vec<usize> =
        (0..headers.len()).filter(|&i| i != response_idx).collect();
    let mut y = Vec::new();
    let mut x: Vec<Vec<f64>> = vec![Vec::new(); predictor_idx.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Schema(format!(
                "row {row}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        let cell = record[response_idx].trim();
        if cell.is_empty() {
            y.push(None);
        } else {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::invalid(headers[response_idx].clone(), format!("row {row}: `{cell}`")))?;
            y.push(Some(v));
        }
        for (k, &ci) in predictor_idx.iter().enumerate() {
            let cell = record[ci].trim();
            if cell.is_empty() {
                return Err(Error::invalid(
                    headers[ci].clone(),
                    format!("row {row}: missing predictor cell"),
                ));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::invalid(headers[ci].clone(), format!("row {row}: `{cell}`")))?;
            x[k].push(v);
        }
    }
    let response = schema.lookup(&headers[response_idx]).expect("validated");
    let mut predictor_names = Vec::new();
    let mut scales = Vec::new();
    for &ci in &predictor_idx {
        let col = schema.lookup(&headers[ci]).expect("validated");
        predictor_names.push(col.name.clone());
        scales.push(ColumnScale {
            kind: col.kind,
            log_transform: col.log_transform,
        });
    }
    Ok(RawTable {
        response_name: response.name.clone(),
        response_scale: ColumnScale {
            kind: response.kind,
            log_transform: response.log_transform,
        },
        y,
        predictor_names,
        scales,
        x,
    })
}

/// Write a raw table as CSV: response column first, predictors in order.
pub fn write_table_csv(path: &Path, table: &RawTable) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec![table.response_name.clone()];
        header.extend(table.predictor_names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..table.y.len() {
            let mut row = Vec::with_capacity(header.len());
            row.push(match table.y[i] {
                Some(v) => fmt_f64(v),
                None => String::new(),
            });
            for col in &table.x {
                row.push(fmt_f64(col[i]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Load and prepare a dataset in one step.
pub fn load_csv_with_schema(
    data_path: &Path,
    schema_path: &Path,
    opts: DatasetOptions,
) -> Result<Dataset> {
    let schema = read_schema(schema_path)?;
    let table = read_table_csv(data_path, &schema)?;
    Dataset::prepare(&table, opts)
}

fn trace_prefix(mode: CmiMode) -> &'static str {
    match mode {
        CmiMode::Conditional => "zeta",
        CmiMode::Marginal => "mi",
    }
}

/// Trace CSV: one row per saved iteration, columns zeta_1..zeta_p (or
/// mi_1..mi_p in marginal mode).
pub fn write_trace_csv(path: &Path, trace: &CmiTrace) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let p = trace.draws.ncols();
        let header: Vec<String> = (1..=p)
            .map(|j| format!("{}_{j}", trace_prefix(trace.mode)))
            .collect();
        w.write_record(&header)?;
        for row in trace.draws.rows() {
            let rec: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

pub fn read_trace_csv(path: &Path) -> Result<CmiTrace> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|s| s.to_string()).collect();
    if headers.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mode = if headers[0].starts_with("mi_") {
        CmiMode::Marginal
    } else if headers[0].starts_with("zeta_") {
        CmiMode::Conditional
    } else {
        return Err(Error::Schema(format!(
            "unrecognized trace header `{}`",
            headers[0]
        )));
    };
    let p = headers.len();
    let mut values: Vec<f64> = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        if record.len() != p {
            return Err(Error::Schema(format!("trace row {rows} has {} fields", record.len())));
        }
        for cell in record.iter() {
            values.push(
                cell.trim()
                    .parse()
                    .map_err(|_| Error::Schema(format!("bad trace value `{cell}`")))?,
            );
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::EmptyTrace);
    }
    let draws = Array2::from_shape_vec((rows, p), values)
        .map_err(|e| Error::Schema(format!("trace shape: {e}")))?;
    Ok(CmiTrace { draws, mode })
}

/// Run provenance written next to every artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    #[serde(default)]
    pub response: Option<String>,
    #[serde(default)]
    pub predictors: Option<Vec<String>>,
    pub wall_time_secs: f64,
}

impl Manifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        Manifest {
            tool: "cmiscreen".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            response: None,
            predictors: None,
            wall_time_secs: 0.0,
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(manifest)?.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Screening report as JSON.
pub fn write_report_json(path: &Path, report: &ScreeningReport) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(report)?.as_bytes())
}

/// Screening report as CSV (same ordering as the JSON: descending mean).
pub fn write_report_csv(path: &Path, report: &ScreeningReport) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record([
            "index",
            "name",
            "mean",
            "ci_low",
            "ci_high",
            "prob_positive",
            "selected",
        ])?;
        for s in &report.predictors {
            w.write_record([
                s.index.to_string(),
                s.name.clone(),
                fmt_f64(s.mean),
                fmt_f64(s.ci_low),
                fmt_f64(s.ci_high),
                fmt_f64(s.prob_positive),
                s.selected.to_string(),
            ])?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

pub fn write_metrics_json(path: &Path, result: &BenchmarkResult) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(result)?.as_bytes())
}

/// ROC points for external plotting.
pub fn write_roc_csv(path: &Path, roc: &[(f64, f64)]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["fpr", "tpr"])?;
        for (fpr, tpr) in roc {
            w.write_record([fmt_f64(*fpr), fmt_f64(*tpr)])?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Per-replication metric rows for external aggregation.
pub fn write_replication_csv(path: &Path, result: &BenchmarkResult) -> Result<()> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["rep", "type1", "type2", "ppv", "npv", "accuracy", "selected"])?;
        for d in &result.per_dataset {
            w.write_record([
                d.rep.to_string(),
                opt(d.rates.type1),
                opt(d.rates.type2),
                opt(d.rates.ppv),
                opt(d.rates.npv),
                fmt_f64(d.rates.accuracy),
                d.selected
                    .iter()
                    .map(|j| j.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            ])?;
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

/// Long-format autocorrelation table (predictor, lag, acf).
pub fn write_acf_csv(path: &Path, names: &[String], acfs: &[Vec<f64>]) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["predictor", "lag", "acf"])?;
        for (name, acf) in names.iter().zip(acfs) {
            for (lag, v) in acf.iter().enumerate() {
                w.write_record([name.clone(), lag.to_string(), fmt_f64(*v)])?;
            }
        }
        w.flush()?;
    }
    write_atomic(path, &buf)
}

pub fn write_truth_json(path: &Path, truth: &BTreeSet<usize>) -> Result<()> {
    let v: Vec<usize> = truth.iter().copied().collect();
    write_atomic(path, serde_json::to_string_pretty(&v)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use tempfile::TempDir;

    fn toy_table() -> RawTable {
        RawTable {
            response_name: "y".into(),
            response_scale: ColumnScale::count(),
            y: vec![Some(0.0), Some(4.0), None, Some(2.0)],
            predictor_names: vec!["x1".into(), "x2".into()],
            scales: vec![ColumnScale::continuous(), ColumnScale::percentage()],
            x: vec![
                vec![0.123_456_789_012_345_68, -4.0, 2.5e-17, 1.0],
                vec![0.0, 100.0, 55.5, 3.25],
            ],
        }
    }

    #[test]
    fn table_round_trip_is_exact() {
        let dir = TempDir::new().unwrap();
        let data = dir.path().join("d.csv");
        let schema_path = dir.path().join("s.json");
        let table = toy_table();
        write_table_csv(&data, &table).unwrap();
        write_schema(&schema_path, &schema_for_table(&table)).unwrap();
        let schema = read_schema(&schema_path).unwrap();
        let back = read_table_csv(&data, &schema).unwrap();
        assert_eq!(back.response_name, "y");
        assert_eq!(back.y.len(), 4);
        assert_eq!(back.y[2], None);
        for j in 0..2 {
            for i in 0..4 {
                assert_eq!(back.x[j][i].to_bits(), table.x[j][i].to_bits());
            }
        }
        let d1 = Dataset::prepare(&table, DatasetOptions::default()).unwrap();
        let d2 = Dataset::prepare(&back, DatasetOptions::default()).unwrap();
        for i in 0..4 {
            for j in 0..2 {
                assert_eq!(d1.x_value(i, j).to_bits(), d2.x_value(i, j).to_bits());
            }
        }
    }

    #[test]
    fn schema_errors() {
        let dir = TempDir::new().unwrap();
        let data = dir.path().join("d.csv");
        let table = toy_table();
        write_table_csv(&data, &table).unwrap();
        // schema missing a data column
        let mut schema = schema_for_table(&table);
        schema.columns.retain(|c| c.name != "x2");
        let err = read_table_csv(&data, &schema).unwrap_err();
        assert!(err.to_string().contains("x2"), "{err}");
        // unknown keys rejected
        let bad = r#"{"columns": [{"name": "y", "role": "response", "kind": "count", "bogus": 1}]}"#;
        assert!(serde_json::from_str::<SchemaFile>(bad).is_err());
        // two responses rejected
        let mut schema = schema_for_table(&table);
        schema.columns[1].role = ColumnRole::Response;
        assert!(schema.validate().is_err());
    }

    #[test]
    fn trace_round_trip() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = CmiTrace {
            draws: array![[0.1, -0.25], [1e-18, 3.5]],
            mode: CmiMode::Conditional,
        };
        write_trace_csv(&path, &trace).unwrap();
        let back = read_trace_csv(&path).unwrap();
        assert_eq!(back.mode, CmiMode::Conditional);
        for (a, b) in trace.draws.iter().zip(back.draws.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }

        let marginal = CmiTrace {
            draws: array![[0.5]],
            mode: CmiMode::Marginal,
        };
        write_trace_csv(&path, &marginal).unwrap();
        assert_eq!(read_trace_csv(&path).unwrap().mode, CmiMode::Marginal);
    }

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, b"{}").unwrap();
        let names: Vec<String> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        assert_eq!(names, vec!["out.json".to_string()]);
    }
}
