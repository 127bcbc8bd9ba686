//! Experiment configuration: flat `key=value` files, validation, digest.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::digest;
use crate::geometry::{ManifoldModel, ModelKind};
use crate::penalized::TimeGrid;
use crate::reflected::Monitoring;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    Penalization1d,
    SpDistance,
    LocalTime,
    Projection,
    Transport,
    DampedNorm,
    EpsCauchy,
    FaLp,
    TangentialUcp,
    NormalPart,
    Representation,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 11] = [
        ExperimentKind::Penalization1d,
        ExperimentKind::SpDistance,
        ExperimentKind::LocalTime,
        ExperimentKind::Projection,
        ExperimentKind::Transport,
        ExperimentKind::DampedNorm,
        ExperimentKind::EpsCauchy,
        ExperimentKind::FaLp,
        ExperimentKind::TangentialUcp,
        ExperimentKind::NormalPart,
        ExperimentKind::Representation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Penalization1d => "penalization-1d",
            ExperimentKind::SpDistance => "sp-distance",
            ExperimentKind::LocalTime => "local-time",
            ExperimentKind::Projection => "projection",
            ExperimentKind::Transport => "transport",
            ExperimentKind::DampedNorm => "damped-norm",
            ExperimentKind::EpsCauchy => "eps-cauchy",
            ExperimentKind::FaLp => "fa-lp",
            ExperimentKind::TangentialUcp => "tangential-ucp",
            ExperimentKind::NormalPart => "normal-part",
            ExperimentKind::Representation => "representation",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::arg(format!("unknown experiment kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    /// One row per parameter tuple, one column per statistic.
    Wide,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "wide" => Ok(OutputFormat::Wide),
            other => Err(Error::arg(format!("unknown format {other:?} (csv, json, wide)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub model: ManifoldModel,
    pub horizon: f64,
    pub steps: usize,
    pub a_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    /// Contact threshold; `None` means √Δt.
    pub eta: Option<f64>,
    pub n_paths: usize,
    pub p: Vec<f64>,
    pub seed: u64,
    /// Start point; `None` picks a per-model default near the boundary.
    pub x0: Option<Vec<f64>>,
    pub monitoring: Monitoring,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: ExperimentKind::SpDistance,
            model: ManifoldModel::half_line(),
            horizon: 1.0,
            steps: 1000,
            a_grid: vec![0.1, 0.05, 0.025, 0.0125],
            eps_grid: vec![0.2, 0.1, 0.05, 0.025],
            eta: None,
            n_paths: 100,
            p: vec![2.0],
            seed: 1,
            x0: None,
            monitoring: Monitoring::Nodes,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::arg(format!("{key}: cannot parse {v:?}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

fn monitoring_name(m: Monitoring) -> &'static str {
    match m {
        Monitoring::Nodes => "nodes",
        Monitoring::BridgeMinimum => "bridge-min",
    }
}

impl ExperimentConfig {
    /// Apply one `key=value` setting. Keys mirror the CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().trim_start_matches("--") {
            "kind" | "experiment" => self.kind = v.parse()?,
            "model" => self.model = v.parse()?,
            "T" | "horizon" => self.horizon = parse_num(key, v)?,
            "steps" | "N" => self.steps = parse_num(key, v)?,
            "a" | "a-grid" | "a_grid" => self.a_grid = parse_list(key, v)?,
            "eps-grid" | "eps_grid" => self.eps_grid = parse_list(key, v)?,
            "eta" => self.eta = if v == "auto" { None } else { Some(parse_num(key, v)?) },
            "paths" | "n_paths" => self.n_paths = parse_num(key, v)?,
            "p" => self.p = parse_list(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "x0" => self.x0 = if v == "auto" { None } else { Some(parse_list(key, v)?) },
            "monitoring" => {
                self.monitoring = match v {
                    "nodes" => Monitoring::Nodes,
                    "bridge-min" => Monitoring::BridgeMinimum,
                    _ => return Err(Error::arg(format!("unknown monitoring {v:?} (nodes, bridge-min)"))),
                }
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            other => return Err(Error::arg(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Parse a flat `key=value` text; `#` starts a comment.
    pub fn parse_text(text: &str, base: ExperimentConfig) -> Result<Self> {
        let mut cfg = base;
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("line {}: expected key=value", n + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::parse_text(&text, Self::default())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        for (name, g) in [("a", &self.a_grid), ("eps", &self.eps_grid)] {
            if g.is_empty() {
                return Err(Error::arg(format!("{name} grid is empty")));
            }
            if g.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::arg(format!("{name} grid must be positive")));
            }
            if g.windows(2).any(|w| w[1] >= w[0]) {
                return Err(Error::arg(format!("{name} grid must be strictly decreasing")));
            }
        }
        if self.p.is_empty() || self.p.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::arg("p exponents must be positive and nonempty"));
        }
        if self.n_paths < 2 {
            return Err(Error::arg("need at least two paths"));
        }
        if let Some(eta) = self.eta {
            if !(eta >= 0.0) {
                return Err(Error::arg("eta must be ≥ 0"));
            }
        }
        let x0 = self.start_point();
        // boundary starts are fine for reflected-only kinds; the penalized
        // integrator rejects them itself
        self.model.check_point(&x0)?;
        Ok(())
    }

    pub fn start_point(&self) -> Vec<f64> {
        if let Some(x) = &self.x0 {
            return x.clone();
        }
        match self.model.kind() {
            ModelKind::HalfLine => vec![0.5],
            ModelKind::HalfSpace(d) => {
                let mut x = vec![0.0; d];
                x[d - 1] = 0.5;
                x
            }
            ModelKind::FlatDisk => vec![0.5, 0.0],
            ModelKind::SphericalCap(t0) => ManifoldModel::point_from_polar(t0 - (t0 / 4.0).min(0.1), 0.0),
        }
    }

    /// Canonical (key, value) pairs; output location and format excluded.
    pub fn canonical_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", self.kind.to_string()),
            ("model", self.model.to_string()),
            ("T", format!("{}", self.horizon)),
            ("steps", self.steps.to_string()),
            ("a_grid", fmt_list(&self.a_grid)),
            ("eps_grid", fmt_list(&self.eps_grid)),
            ("eta", self.eta.map_or("auto".into(), |e| format!("{e}"))),
            ("paths", self.n_paths.to_string()),
            ("p", fmt_list(&self.p)),
            ("seed", self.seed.to_string()),
            ("x0", fmt_list(&self.start_point())),
            ("monitoring", monitoring_name(self.monitoring).into()),
        ]
    }

    pub fn digest(&self) -> String {
        digest(&self.canonical_pairs())
    }

    /// Round-trippable `key=value` text.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.canonical_pairs() {
            s.push_str(k);
            s.push('=');
            s.push_str(&v);
            s.push('\n');
        }
        s
    }
}
