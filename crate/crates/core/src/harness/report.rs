//! Long-format result rows and their CSV / JSON / wide renderings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

use super::config::OutputFormat;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub experiment: String,
    /// Parameter tuple, `k=v` pairs joined by `;`.
    pub params: String,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub q25: Option<f64>,
    pub q50: Option<f64>,
    pub q75: Option<f64>,
    pub n: usize,
    pub config_digest: String,
    /// Wall time; kept out of the CSV so reruns are byte-identical.
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl ResultRow {
    pub fn new(experiment: &str, params: String, statistic: &str, value: f64, digest: &str) -> Self {
        ResultRow {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.into(),
            params,
            statistic: statistic.into(),
            value,
            stderr: None,
            q25: None,
            q50: None,
            q75: None,
            n: 1,
            config_digest: digest.into(),
            runtime_ms: 0,
        }
    }

    /// Mean with stderr and quartiles of a per-path sample.
    pub fn summary(experiment: &str, params: String, statistic: &str, samples: &[f64], digest: &str) -> Self {
        let mut r = Self::new(experiment, params, statistic, stats::mean(samples), digest);
        r.n = samples.len();
        if samples.len() > 1 {
            r.stderr = Some(stats::stderr(samples));
        }
        r.q25 = Some(stats::quantile(samples, 0.25));
        r.q50 = Some(stats::median(samples));
        r.q75 = Some(stats::quantile(samples, 0.75));
        r
    }
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (&a.experiment, &a.params, &a.statistic).cmp(&(&b.experiment, &b.params, &b.statistic))
    });
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io { path: path.to_path_buf(), source: e }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io { path: path.to_path_buf(), source }
}

fn render_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(Path::new("<csv>"), e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
}

fn render_wide(rows: &[ResultRow]) -> Result<String> {
    let stats: Vec<&str> = {
        let mut s: Vec<&str> = rows.iter().map(|r| r.statistic.as_str()).collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let mut table: BTreeMap<(&str, &str), BTreeMap<&str, f64>> = BTreeMap::new();
    for r in rows {
        table.entry((&r.experiment, &r.params)).or_default().insert(&r.statistic, r.value);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment", "params"];
    header.extend(&stats);
    let werr = |e: csv::Error| csv_err(Path::new("<csv>"), e);
    w.write_record(&header).map_err(werr)?;
    for ((exp, params), vals) in &table {
        let mut rec = vec![exp.to_string(), params.to_string()];
        rec.extend(stats.iter().map(|s| vals.get(s).map_or(String::new(), |v| v.to_string())));
        w.write_record(&rec).map_err(werr)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
}

/// Render rows (sorted canonically first).
pub fn render(rows: &[ResultRow], format: OutputFormat) -> Result<String> {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    if let Some(bad) = rows.iter().find(|r| !r.value.is_finite()) {
        return Err(Error::Numeric(format!("non-finite value for {} / {} / {}", bad.experiment, bad.params, bad.statistic)));
    }
    match format {
        OutputFormat::Csv => render_csv(&rows),
        OutputFormat::Json => serde_json::to_string_pretty(&rows)
            .map(|s| s + "\n")
            .map_err(|e| Error::Numeric(e.to_string())),
        OutputFormat::Wide => render_wide(&rows),
    }
}

pub fn write_rows(rows: &[ResultRow], format: OutputFormat, path: &Path) -> Result<()> {
    let text = render(rows, format)?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// Read a long-format CSV (or JSON, by extension) back into rows.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        return serde_json::from_str(&text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidData, e),
        });
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    rdr.deserialize().map(|r| r.map_err(|e| csv_err(path, e))).collect()
}
