//! Versioned CSV tables and the `fit.json` record.
//!
//! Every CSV starts with a schema line `# pdcov:<kind>:v1`, optionally
//! followed by `;key=value` metadata, then a mandatory header row. Files
//! without a schema line are read as version 1 of the expected kind so that
//! hand-made data can be used directly; a schema line of another kind or an
//! unknown version is rejected.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::covpipe::{CovPointSet, CovarianceFit, SpatialField};
use crate::data::RegressionDataset;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorSpec, FittedEstimator};
use crate::idea::{IdeaRecord, IdeaTrace};
use crate::kernels::{KernelFamily, KernelSpec, PseudoDataset};
use crate::modelselect::{CvCell, CvResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const FIT_SCHEMA: &str = "pdcov-fit/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Regression,
    Field,
    Curve,
    Trace,
    Cv,
    CovPoints,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Regression => "regression",
            TableKind::Field => "field",
            TableKind::Curve => "curve",
            TableKind::Trace => "trace",
            TableKind::Cv => "cv",
            TableKind::CovPoints => "covpoints",
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed numeric table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub meta: Vec<(String, String)>,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(kind: TableKind, headers: &[&str]) -> Self {
        Table {
            kind,
            meta: Vec::new(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    fn schema_line(&self) -> String {
        let mut s = format!("# pdcov:{}:v{SCHEMA_VERSION}", self.kind);
        for (k, v) in &self.meta {
            s.push_str(&format!(";{k}={v}"));
        }
        s
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = self.schema_line();
        out.push('\n');
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output"));
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Parses `text` as a table of the expected kind. `path` is only used in
    /// error messages.
    pub fn parse(text: &str, expected: TableKind, path: &Path) -> Result<Self> {
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            message,
        };
        let mut meta = Vec::new();
        let body = match text.strip_prefix('#') {
            Some(rest) => {
                let (line, body) = rest.split_once('\n').unwrap_or((rest, ""));
                meta = parse_schema_line(line.trim(), expected).map_err(bad)?;
                body
            }
            None => text,
        };
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| bad(format!("unreadable header row: {e}")))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() || headers.iter().all(String::is_empty) {
            return Err(bad("missing header row".into()));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 1;
            let rec = rec.map_err(|e| bad(format!("data row {line}: {e}")))?;
            let row = rec
                .iter()
                .zip(&headers)
                .map(|(cell, name)| {
                    cell.parse::<f64>()
                        .map_err(|_| bad(format!("data row {line}, column '{name}': '{cell}' is not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Table {
            kind: expected,
            meta,
            headers,
            rows,
        })
    }

    pub fn read(path: &Path, expected: TableKind) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, expected, path)
    }
}

fn parse_schema_line(line: &str, expected: TableKind) -> std::result::Result<Vec<(String, String)>, String> {
    let mut parts = line.split(';');
    let head = parts.next().unwrap_or("").trim();
    let fields: Vec<&str> = head.split(':').collect();
    if fields.len() != 3 || fields[0] != "pdcov" {
        return Err(format!("unrecognized schema line '# {line}'"));
    }
    if fields[1] != expected.name() {
        return Err(format!("expected a '{expected}' table, found '{}'", fields[1]));
    }
    match fields[2].strip_prefix('v').and_then(|v| v.parse::<u32>().ok()) {
        Some(SCHEMA_VERSION) => {}
        Some(v) => return Err(format!("unsupported {expected} schema version {v}")),
        None => return Err(format!("malformed schema version '{}'", fields[2])),
    }
    parts
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| format!("malformed schema metadata '{kv}'"))
        })
        .collect()
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Headers `x1..xd` followed by `last`; radial data uses `r` instead.
fn coordinate_headers(dim: usize, radial_name: Option<&str>, last: &str) -> Vec<String> {
    let mut h: Vec<String> = match radial_name {
        Some(r) => vec![r.to_string()],
        None => (1..=dim).map(|i| format!("x{i}")).collect(),
    };
    h.push(last.to_string());
    h
}

/// Checks that `headers` are `x1..xd,last` (or `r,last` when allowed) and
/// returns `d`.
fn check_coordinate_headers(headers: &[String], last: &str, allow_r: bool, path: &Path) -> Result<usize> {
    let dim = headers.len().saturating_sub(1);
    let ok = dim >= 1
        && (headers == coordinate_headers(dim, None, last)
            || (allow_r && dim == 1 && headers == coordinate_headers(1, Some("r"), last)));
    if !ok {
        let want = if allow_r { format!("r,{last} or x1,..,xd,{last}") } else { format!("x1,..,xd,{last}") };
        return Err(format_err(path, format!("header '{}' does not match {want}", headers.join(","))));
    }
    Ok(dim)
}

fn split_rows(rows: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(rows.len() * dim);
    let mut y = Vec::with_capacity(rows.len());
    for row in rows {
        x.extend_from_slice(&row[..dim]);
        y.push(row[dim]);
    }
    (x, y)
}

pub fn regression_table(data: &RegressionDataset) -> Table {
    let headers = coordinate_headers(data.dim(), (data.dim() == 1).then_some("r"), "y");
    Table {
        kind: TableKind::Regression,
        meta: Vec::new(),
        headers,
        rows: (0..data.len())
            .map(|j| {
                let mut row = data.input(j).to_vec();
                row.push(data.y()[j]);
                row
            })
            .collect(),
    }
}

pub fn write_regression(path: &Path, data: &RegressionDataset) -> Result<()> {
    regression_table(data).write(path)
}

pub fn read_regression(path: &Path) -> Result<RegressionDataset> {
    let t = Table::read(path, TableKind::Regression)?;
    let dim = check_coordinate_headers(&t.headers, "y", true, path)?;
    let (x, y) = split_rows(&t.rows, dim);
    RegressionDataset::new(dim, x, y).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_field(path: &Path, field: &SpatialField) -> Result<()> {
    let mut t = Table {
        kind: TableKind::Field,
        meta: Vec::new(),
        headers: coordinate_headers(field.dim(), None, "z"),
        rows: Vec::with_capacity(field.len()),
    };
    for i in 0..field.len() {
        let mut row = field.location(i).to_vec();
        row.push(field.values()[i]);
        t.rows.push(row);
    }
    t.write(path)
}

pub fn read_field(path: &Path) -> Result<SpatialField> {
    let t = Table::read(path, TableKind::Field)?;
    let dim = check_coordinate_headers(&t.headers, "z", false, path)?;
    let (x, z) = split_rows(&t.rows, dim);
    SpatialField::new(dim, x, z).map_err(|e| format_err(path, e.to_string()))
}

pub fn write_cov_points(path: &Path, points: &CovPointSet) -> Result<()> {
    let mut t = Table::new(TableKind::CovPoints, &["r", "c"]);
    t.meta.push(("diagonal_variance".into(), points.diagonal_variance.to_string()));
    t.rows = points.distances.iter().zip(&points.products).map(|(r, c)| vec![*r, *c]).collect();
    t.write(path)
}

pub fn read_cov_points(path: &Path) -> Result<CovPointSet> {
    let t = Table::read(path, TableKind::CovPoints)?;
    if t.headers != ["r", "c"] {
        return Err(format_err(path, format!("header '{}' does not match r,c", t.headers.join(","))));
    }
    let dv = t
        .meta("diagonal_variance")
        .ok_or_else(|| format_err(path, "schema line lacks diagonal_variance"))?;
    let dv: f64 = dv
        .parse()
        .map_err(|_| format_err(path, format!("diagonal_variance '{dv}' is not a number")))?;
    let (r, c) = split_rows(&t.rows, 1);
    CovPointSet::new(r, c, dv).map_err(|e| format_err(path, e.to_string()))
}

/// Fitted curve on a grid, with the reference curve when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub r: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    pub fit: Vec<f64>,
}

pub fn write_curve(path: &Path, curve: &Curve) -> Result<()> {
    let mut t = match curve.truth {
        Some(_) => Table::new(TableKind::Curve, &["r", "truth", "fit"]),
        None => Table::new(TableKind::Curve, &["r", "fit"]),
    };
    for (i, (r, f)) in curve.r.iter().zip(&curve.fit).enumerate() {
        t.rows.push(match &curve.truth {
            Some(truth) => vec![*r, truth[i], *f],
            None => vec![*r, *f],
        });
    }
    t.write(path)
}

pub fn read_curve(path: &Path) -> Result<Curve> {
    let t = Table::read(path, TableKind::Curve)?;
    match t.headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["r", "fit"] | ["r", "truth", "fit"] => {}
        _ => {
            return Err(format_err(
                path,
                format!("header '{}' does not match r,fit or r,truth,fit", t.headers.join(",")),
            ))
        }
    }
    Ok(Curve {
        r: t.column("r").expect("checked"),
        truth: t.column("truth"),
        fit: t.column("fit").expect("checked"),
    })
}

const TRACE_HEADERS: [&str; 6] = ["iter", "obj_min", "obj_selected_max", "obj_mean", "obj_max", "d_kl"];

/// Trace rows; with several outer iterations the `iter` column restarts.
pub fn write_trace(path: &Path, traces: &[IdeaTrace]) -> Result<()> {
    let mut t = Table::new(TableKind::Trace, &TRACE_HEADERS);
    let converged: Vec<String> = traces.iter().map(|t| t.converged.to_string()).collect();
    t.meta.push(("converged".into(), converged.join(",")));
    for tr in traces {
        for r in &tr.records {
            t.rows.push(vec![r.iter as f64, r.obj_min, r.obj_selected_max, r.obj_mean, r.obj_max, r.d_kl]);
        }
    }
    t.write(path)
}

pub fn read_trace(path: &Path) -> Result<Vec<IdeaRecord>> {
    let t = Table::read(path, TableKind::Trace)?;
    if t.headers != TRACE_HEADERS {
        return Err(format_err(
            path,
            format!("header '{}' does not match {}", t.headers.join(","), TRACE_HEADERS.join(",")),
        ));
    }
    t.rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            if !(r[0] >= 0.0 && r[0].fract() == 0.0) {
                return Err(format_err(path, format!("data row {}, column 'iter': not a count", i + 1)));
            }
            Ok(IdeaRecord {
                iter: r[0] as usize,
                obj_min: r[1],
                obj_selected_max: r[2],
                obj_mean: r[3],
                obj_max: r[4],
                d_kl: r[5],
            })
        })
        .collect()
}

pub fn write_cv(path: &Path, cv: &CvResult) -> Result<()> {
    let mut t = Table::new(TableKind::Cv, &["h", "m", "mean_mse"]);
    t.meta.push(("chosen_h".into(), cv.chosen_h.to_string()));
    t.meta.push(("chosen_m".into(), cv.chosen_m.to_string()));
    t.rows = cv.cells.iter().map(|c| vec![c.h, c.m as f64, c.mean_mse]).collect();
    t.write(path)
}

pub fn read_cv(path: &Path) -> Result<Vec<CvCell>> {
    let t = Table::read(path, TableKind::Cv)?;
    if t.headers != ["h", "m", "mean_mse"] {
        return Err(format_err(path, format!("header '{}' does not match h,m,mean_mse", t.headers.join(","))));
    }
    Ok(t.rows.iter().map(|r| CvCell { h: r[0], m: r[1] as usize, mean_mse: r[2] }).collect())
}

/// Convergence summary stored alongside a fit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    /// IDEA iterations per outer step (one entry for plain regression).
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub final_objective: Option<f64>,
    /// `σ̂²` sequence of a covariance fit; empty for regression.
    pub sigma2_history: Vec<f64>,
}

impl TraceSummary {
    pub fn from_traces(traces: &[IdeaTrace]) -> Self {
        TraceSummary {
            iterations: traces.iter().map(IdeaTrace::iterations).collect(),
            converged: traces.iter().map(|t| t.converged).collect(),
            final_objective: traces.last().and_then(IdeaTrace::final_objective),
            sigma2_history: Vec::new(),
        }
    }

    pub fn from_cov_fit(fit: &CovarianceFit) -> Self {
        TraceSummary {
            sigma2_history: fit.sigma2_history.clone(),
            ..Self::from_traces(&fit.traces)
        }
    }
}

/// Everything needed to re-evaluate a fitted estimator without refitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub schema: String,
    pub kind: EstimatorKind,
    pub kernel: KernelFamily,
    pub h: f64,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<Vec<f64>>,
    pub pseudo_dim: usize,
    pub pseudo: Vec<f64>,
    pub sigma2: f64,
    pub trace: TraceSummary,
    /// Settings that produced the fit, as given by the caller.
    pub config: serde_json::Value,
    /// SHA-256 of the compact JSON encoding of `config`.
    pub config_hash: String,
}

impl FitRecord {
    pub fn new(fit: &FittedEstimator, trace: TraceSummary, config: serde_json::Value) -> Self {
        FitRecord {
            schema: FIT_SCHEMA.to_string(),
            kind: fit.spec.kind,
            kernel: fit.spec.kernel.family,
            h: fit.spec.kernel.h,
            dim: fit.spec.dim,
            bandwidth: fit.spec.bandwidth.clone(),
            pseudo_dim: fit.pseudo.dim(),
            pseudo: fit.pseudo.values().to_vec(),
            sigma2: fit.sigma2,
            trace,
            config_hash: config_hash(&config),
            config,
        }
    }

    pub fn estimator(&self) -> Result<FittedEstimator> {
        let spec = EstimatorSpec {
            kind: self.kind,
            kernel: KernelSpec::new(self.kernel, self.h)?,
            dim: self.dim,
            bandwidth: self.bandwidth.clone(),
        };
        let pseudo = if self.pseudo_dim == 1 {
            PseudoDataset::new(self.pseudo.clone())?
        } else {
            PseudoDataset::vectors(self.pseudo_dim, self.pseudo.clone())?
        };
        FittedEstimator::new(spec, pseudo, self.sigma2)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fit record serializes");
        s.push('\n');
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let rec: FitRecord =
            serde_json::from_str(&text).map_err(|e| format_err(path, format!("invalid fit record: {e}")))?;
        if rec.schema != FIT_SCHEMA {
            return Err(format_err(path, format!("unsupported fit schema '{}'", rec.schema)));
        }
        rec.estimator().map_err(|e| format_err(path, e.to_string()))?;
        Ok(rec)
    }
}

pub fn config_hash(config: &serde_json::Value) -> String {
    sha256_hex(serde_json::to_string(config).expect("json value serializes").as_bytes())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
