//! Command-line front end (`penreflect simulate|sweep|verify|report`).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::penalized::{integrate_penalized, DriverPath};
use crate::reflected::{integrate_reflected, ReflectOptions};
use crate::rng::path_seed;

use super::config::{ExperimentConfig, ExperimentKind, OutputFormat};
use super::experiments::run_experiment;
use super::report::{read_rows, render};

#[derive(Parser, Debug)]
#[command(name = "penreflect", version, about = "Penalized and reflected Brownian motion experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dump one reflected (or, with --a, penalized) path.
    Simulate(Common),
    /// Run a convergence experiment and write its long-format table.
    Sweep {
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the representation-formula checks (or another kind via --kind).
    Verify {
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-render a stored table in another format.
    Report {
        input: PathBuf,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "T")]
    pub horizon: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long = "a-grid")]
    pub a_grid: Option<String>,
    #[arg(long = "eps-grid")]
    pub eps_grid: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub paths: Option<String>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub x0: Option<String>,
    #[arg(long)]
    pub monitoring: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
}

impl Common {
    pub fn to_config(&self, kind: Option<&str>) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let flags: [(&str, &Option<String>); 13] = [
            ("kind", &kind.map(str::to_string)),
            ("model", &self.model),
            ("T", &self.horizon),
            ("steps", &self.steps),
            ("a", &self.a),
            ("a-grid", &self.a_grid),
            ("eps-grid", &self.eps_grid),
            ("eta", &self.eta),
            ("paths", &self.paths),
            ("p", &self.p),
            ("seed", &self.seed),
            ("x0", &self.x0),
            ("monitoring", &self.monitoring),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if let Some(f) = &self.format {
            cfg.set("format", f)?;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io { path: p.to_path_buf(), source: e }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io { path: PathBuf::from("<stdout>"), source: e }),
    }
}

/// Path dump: one row per node with time, coordinates, R and the local time.
fn simulate(common: &Common) -> Result<String> {
    let cfg = common.to_config(None)?;
    cfg.validate()?;
    let grid = cfg.grid()?;
    let x0 = cfg.start_point();
    let driver = DriverPath::generate(path_seed(cfg.seed, 0), grid, cfg.model.frame_count());
    let (points, r, l, da) = if common.a.is_some() {
        let p = integrate_penalized(&cfg.model, cfg.a_grid[0], &x0, &driver, grid)?;
        (p.points, p.r_values, p.l_a, p.ambient)
    } else {
        let opts = ReflectOptions { eta: cfg.eta, monitoring: cfg.monitoring };
        let p = integrate_reflected(&cfg.model, &x0, &driver, grid, opts)?;
        (p.points, p.r_values, p.l, p.ambient)
    };
    let mut header = vec!["t".to_string()];
    header.extend((0..da).map(|k| format!("x{k}")));
    header.extend(["r".to_string(), "l".to_string()]);
    match cfg.format {
        OutputFormat::Json => {
            let nodes: Vec<serde_json::Value> = (0..r.len())
                .map(|i| {
                    serde_json::json!({
                        "t": grid.time(i),
                        "x": &points[i * da..(i + 1) * da],
                        "r": r[i],
                        "l": l[i],
                    })
                })
                .collect();
            let doc = serde_json::json!({ "model": cfg.model.to_string(), "config_digest": cfg.digest(), "nodes": nodes });
            serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| Error::Numeric(e.to_string()))
        }
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let werr = |e: csv::Error| Error::Numeric(e.to_string());
            w.write_record(&header).map_err(werr)?;
            for i in 0..r.len() {
                let mut rec = vec![grid.time(i).to_string()];
                rec.extend(points[i * da..(i + 1) * da].iter().map(|v| v.to_string()));
                rec.push(r[i].to_string());
                rec.push(l[i].to_string());
                w.write_record(&rec).map_err(werr)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
        }
    }
}

fn experiment(kind: Option<&str>, default: ExperimentKind, common: &Common) -> Result<()> {
    let mut cfg = common.to_config(kind)?;
    if kind.is_none() && common.config.is_none() {
        cfg.kind = default;
    }
    let rows = run_experiment(&cfg)?;
    emit(&render(&rows, cfg.format)?, cfg.out.as_deref())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let text = simulate(&common)?;
            emit(&text, common.out.as_deref())
        }
        Command::Sweep { kind, common } => experiment(kind.as_deref(), ExperimentKind::SpDistance, &common),
        Command::Verify { kind, common } => experiment(kind.as_deref(), ExperimentKind::Representation, &common),
        Command::Report { input, format, out } => {
            let rows = read_rows(&input)?;
            let fmt: OutputFormat = format.as_deref().unwrap_or("csv").parse()?;
            emit(&render(&rows, fmt)?, out.as_deref())
        }
    }
}

/// Parse `args`, run, and map the outcome to a process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
