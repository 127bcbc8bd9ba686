//! Experiment kinds. Every kind fans out over drivers with rayon, collects
//! per-path statistics in path order and summarises them into rows, so the
//! output does not depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;

use crate::damped::{
    damped_eps, damped_limit_state, damped_penalized, norm_bound_violation, normal_lp_gap, normal_part_formula_check,
    sup_gap, tangential_gap,
};
use crate::error::{Error, Result};
use crate::estimators::{
    bismut_gradient_mc, image_kernel_oracle, martingale_check, neumann_heat_mc, one_form_mc, profile,
    weak_derivative_check, ImageKernelSolution, KernelKind, LineCurve, MCEstimate, McSettings, OneForm, ScalarField,
};
use crate::geometry::ModelKind;
use crate::penalized::{integrate_penalized, DriverPath, PenalizedPath};
use crate::reflected::{integrate_reflected, ReflectOptions, ReflectedPath};
use crate::rng::path_seed;
use crate::skorohod1d::{derivative_flow_penalized, first_hit_zero, penalized_path_1d, skorohod_map, Scheme1d};
use crate::transport::{frame_gap, parallel_transport, TransportFrame};

use super::config::{ExperimentConfig, ExperimentKind};
use super::metrics::{local_time_tv, projection_gap, sup_distance};
use super::report::{sort_rows, ResultRow};

/// Threshold above which a node-wise bound excess counts as a violation.
pub const BOUND_SLACK: f64 = 1e-6;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let start = Instant::now();
    let mut rows = match cfg.kind {
        ExperimentKind::Penalization1d => penalization_1d(cfg)?,
        ExperimentKind::SpDistance => sp_distance_rows(cfg)?,
        ExperimentKind::LocalTime => local_time_rows(cfg)?,
        ExperimentKind::Projection => projection_rows(cfg)?,
        ExperimentKind::Transport => transport_rows(cfg)?,
        ExperimentKind::DampedNorm => damped_norm_rows(cfg)?,
        ExperimentKind::EpsCauchy => eps_cauchy_rows(cfg)?,
        ExperimentKind::FaLp => fa_lp_rows(cfg)?,
        ExperimentKind::TangentialUcp => tangential_rows(cfg)?,
        ExperimentKind::NormalPart => normal_part_rows(cfg)?,
        ExperimentKind::Representation => representation_rows(cfg)?,
    };
    let ms = start.elapsed().as_millis() as u64;
    for r in &mut rows {
        r.runtime_ms = ms;
    }
    sort_rows(&mut rows);
    Ok(rows)
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    digest: String,
    x0: Vec<f64>,
}

impl Ctx<'_> {
    fn params(&self, extra: &str) -> String {
        if extra.is_empty() {
            format!("model={}", self.cfg.model)
        } else {
            format!("model={};{extra}", self.cfg.model)
        }
    }

    fn summary(&self, extra: &str, stat: &str, samples: &[f64]) -> ResultRow {
        ResultRow::summary(self.cfg.kind.name(), self.params(extra), stat, samples, &self.digest)
    }

    fn scalar(&self, extra: &str, stat: &str, value: f64, n: usize) -> ResultRow {
        let mut r = ResultRow::new(self.cfg.kind.name(), self.params(extra), stat, value, &self.digest);
        r.n = n;
        r
    }

    fn opts(&self) -> ReflectOptions {
        ReflectOptions { eta: self.cfg.eta, monitoring: self.cfg.monitoring }
    }

    fn driver(&self, i: usize) -> Result<DriverPath> {
        let grid = self.cfg.grid()?;
        Ok(DriverPath::generate(path_seed(self.cfg.seed, i as u64), grid, self.cfg.model.frame_count()))
    }

    fn reflected(&self, driver: &DriverPath) -> Result<ReflectedPath> {
        integrate_reflected(&self.cfg.model, &self.x0, driver, driver.grid(), self.opts())
    }

    fn penalized(&self, a: f64, driver: &DriverPath) -> Result<PenalizedPath> {
        integrate_penalized(&self.cfg.model, a, &self.x0, driver, driver.grid())
    }

    /// Per-path closure over path indices; results in index order.
    fn per_path<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.cfg.n_paths).into_par_iter().map(f).collect()
    }
}

fn ctx(cfg: &ExperimentConfig) -> Ctx<'_> {
    Ctx { cfg, digest: cfg.digest(), x0: cfg.start_point() }
}

/// Column `k` of a per-path × per-parameter table.
fn column(table: &[Vec<f64>], k: usize) -> Vec<f64> {
    table.iter().map(|row| row[k]).collect()
}

fn a_param(a: f64) -> String {
    format!("a={a}")
}

fn p_stat(base: &str, p: f64) -> String {
    format!("{base}_p{p}")
}

fn penalization_1d(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if cfg.model.kind() != ModelKind::HalfLine {
        return Err(Error::Unsupported("penalization-1d runs on the half-line".into()));
    }
    let c = ctx(cfg);
    let x = c.x0[0];
    let dt = cfg.grid()?.dt();
    let na = cfg.a_grid.len();
    // per path: [sup |X^a − X|; a] ++ [∫|V^a − 1_{t<τ}|; a]
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let f = drv.component_path(0);
        let sol = skorohod_map(x, &f)?;
        let tau = first_hit_zero(&sol);
        let ref_vals = sol.reflected.values();
        let mut out = vec![0.0; 2 * na];
        for (k, &a) in cfg.a_grid.iter().enumerate() {
            let xa = penalized_path_1d(a, x, &f, Scheme1d { bridge_seed: drv.seed(), ..Scheme1d::default() })?;
            out[k] = xa.values().iter().zip(ref_vals).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let va = derivative_flow_penalized(a, &xa)?;
            let times = va.times();
            out[na + k] = (0..va.len() - 1)
                .map(|j| {
                    let ind = if times[j] < tau { 1.0 } else { 0.0 };
                    (va.values()[j] - ind).abs() * dt
                })
                .sum();
        }
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        rows.push(c.summary(&a_param(a), "sup_abs_diff", &column(&table, k)));
        rows.push(c.summary(&a_param(a), "derivative_l1", &column(&table, na + k)));
    }
    Ok(rows)
}

fn sp_distance_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let da = cfg.model.ambient_dim();
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let refl = c.reflected(&drv)?;
        cfg.a_grid
            .iter()
            .map(|&a| sup_distance(&c.penalized(a, &drv)?.points, &refl.points, da))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::new();
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        let sup = column(&table, k);
        rows.push(c.summary(&a_param(a), "sup_dist", &sup));
        for &p in &cfg.p {
            let sp: Vec<f64> = sup.iter().map(|s| s.powf(p)).collect();
            rows.push(c.summary(&a_param(a), &p_stat("sp", p), &sp));
        }
    }
    Ok(rows)
}

fn local_time_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let na = cfg.a_grid.len();
    // per path: sup gaps, then TVs, then 2L_T
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let refl = c.reflected(&drv)?;
        let mut out = vec![0.0; 2 * na + 1];
        for (k, &a) in cfg.a_grid.iter().enumerate() {
            let pen = c.penalized(a, &drv)?;
            let m = local_time_tv(&refl.l, &pen.l_a)?;
            out[k] = m.sup_gap;
            out[na + k] = m.tv;
            out[2 * na] = m.two_lt;
        }
        Ok(out)
    })?;
    let two_lt = column(&table, 2 * na);
    let mean_two_lt = crate::stats::mean(&two_lt);
    let mut rows = vec![c.summary("", "two_lt", &two_lt)];
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        rows.push(c.summary(&a_param(a), "sup_gap", &column(&table, k)));
        let tv = column(&table, na + k);
        rows.push(c.scalar(&a_param(a), "tv_ratio", crate::stats::mean(&tv) / mean_two_lt, tv.len()));
        rows.push(c.summary(&a_param(a), "tv", &tv));
    }
    Ok(rows)
}

fn projection_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let refl = c.reflected(&drv)?;
        cfg.a_grid
            .iter()
            .map(|&a| projection_gap(&cfg.model, &c.penalized(a, &drv)?.points, &refl.points))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(cfg
        .a_grid
        .iter()
        .enumerate()
        .map(|(k, &a)| c.summary(&a_param(a), "projection_gap", &column(&table, k)))
        .collect())
}

fn unit_vector(d: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[k] = 1.0;
    v
}

fn transport_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let v = unit_vector(cfg.model.dim(), 0);
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let refl = c.reflected(&drv)?;
        let pr = parallel_transport(&cfg.model, &refl)?;
        cfg.a_grid
            .iter()
            .map(|&a| {
                let pa = parallel_transport(&cfg.model, &c.penalized(a, &drv)?)?;
                Ok(frame_gap(&pa, &pr, &v))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(cfg
        .a_grid
        .iter()
        .enumerate()
        .map(|(k, &a)| c.summary(&a_param(a), "transport_gap", &column(&table, k)))
        .collect())
}

fn damped_pen(c: &Ctx<'_>, a: f64, drv: &DriverPath) -> Result<(PenalizedPath, crate::damped::DampedState)> {
    let pen = c.penalized(a, drv)?;
    let frame = parallel_transport(&c.cfg.model, &pen)?;
    let st = damped_penalized(&c.cfg.model, &pen, &frame)?;
    Ok((pen, st))
}

fn damped_norm_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        cfg.a_grid
            .iter()
            .map(|&a| {
                let (pen, st) = damped_pen(&c, a, &drv)?;
                Ok(norm_bound_violation(&cfg.model, &pen, &st))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::new();
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        let col = column(&table, k);
        rows.push(c.scalar(&a_param(a), "max_excess", col.iter().copied().fold(f64::NEG_INFINITY, f64::max), col.len()));
        let bad = col.iter().filter(|&&v| v > BOUND_SLACK).count();
        rows.push(c.scalar(&a_param(a), "violating_paths", bad as f64, col.len()));
    }
    Ok(rows)
}

fn limit_reference(c: &Ctx<'_>, drv: &DriverPath) -> Result<(ReflectedPath, TransportFrame, crate::damped::DampedState)> {
    let refl = c.reflected(drv)?;
    let frame = parallel_transport(&c.cfg.model, &refl)?;
    let st = damped_limit_state(&c.cfg.model, &refl, &frame, refl.eta)?;
    Ok((refl, frame, st))
}

fn eps_cauchy_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let ne = cfg.eps_grid.len();
    // per path: ne − 1 consecutive gaps, then finest-vs-limit gap
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let (refl, frame, limit) = limit_reference(&c, &drv)?;
        let states = cfg
            .eps_grid
            .iter()
            .map(|&e| damped_eps(&cfg.model, &refl, &frame, e, refl.eta))
            .collect::<Result<Vec<_>>>()?;
        let mut out: Vec<f64> = states.windows(2).map(|s| sup_gap(&s[0], &s[1])).collect();
        out.push(sup_gap(&states[ne - 1], &limit));
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for k in 0..ne - 1 {
        let p = format!("eps={}->{}", cfg.eps_grid[k], cfg.eps_grid[k + 1]);
        rows.push(c.summary(&p, "cauchy_gap", &column(&table, k)));
    }
    rows.push(c.summary(&format!("eps={}->0", cfg.eps_grid[ne - 1]), "limit_gap", &column(&table, ne - 1)));
    Ok(rows)
}

fn fa_lp_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let dt = cfg.grid()?.dt();
    let np = cfg.p.len();
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let (_, _, limit) = limit_reference(&c, &drv)?;
        let mut out = Vec::with_capacity(cfg.a_grid.len() * np);
        for &a in &cfg.a_grid {
            let (_, st) = damped_pen(&c, a, &drv)?;
            out.extend(cfg.p.iter().map(|&p| normal_lp_gap(&st, &limit, p, dt)));
        }
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        for (j, &p) in cfg.p.iter().enumerate() {
            rows.push(c.summary(&a_param(a), &p_stat("f_lp", p), &column(&table, k * np + j)));
        }
    }
    Ok(rows)
}

fn tangential_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let na = cfg.a_grid.len();
    let table = c.per_path(|i| {
        let drv = c.driver(i)?;
        let (_, _, limit) = limit_reference(&c, &drv)?;
        let mut out = vec![0.0; 2 * na];
        for (k, &a) in cfg.a_grid.iter().enumerate() {
            let (_, st) = damped_pen(&c, a, &drv)?;
            out[k] = tangential_gap(&st, &limit);
            out[na + k] = sup_gap(&st, &limit);
        }
        Ok(out)
    })?;
    let mut rows = Vec::new();
    for (k, &a) in cfg.a_grid.iter().enumerate() {
        rows.push(c.summary(&a_param(a), "tangential_gap", &column(&table, k)));
        rows.push(c.summary(&a_param(a), "full_gap", &column(&table, na + k)));
    }
    Ok(rows)
}

fn normal_part_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let c = ctx(cfg);
    let vals = c.per_path(|i| {
        let drv = c.driver(i)?;
        let (refl, frame, limit) = limit_reference(&c, &drv)?;
        normal_part_formula_check(&cfg.model, &refl, &frame, &limit, refl.eta)
    })?;
    Ok(vec![c.summary("", "formula_defect", &vals)])
}

/// One estimate against its oracle: estimate, oracle and z-score rows.
fn estimate_rows(c: &Ctx<'_>, name: &str, est: &MCEstimate, oracle: f64) -> Vec<ResultRow> {
    let mut e = c.scalar(name, "estimate", est.mean[0], est.n_paths);
    e.stderr = Some(est.stderr[0]);
    vec![
        e,
        c.scalar(name, "oracle", oracle, 1),
        c.scalar(name, "z_score", est.z_score(oracle), est.n_paths),
    ]
}

/// The five representation-formula checks on a half-space, with the
/// image-kernel solution for the `gauss` profile of the normal coordinate.
fn representation_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    if !cfg.model.is_flat_half_space() {
        return Err(Error::Unsupported("representation checks need a half-space with closed-form oracles".into()));
    }
    let c = ctx(cfg);
    let m = &cfg.model;
    let d = m.dim();
    let x = &c.x0;
    let s = McSettings { horizon: cfg.horizon, steps: cfg.steps, n_paths: cfg.n_paths, seed: cfg.seed };
    let prof = profile("gauss")?;
    let f = ScalarField::named(m, "gauss")?;
    let sol = ImageKernelSolution { profile: prof, horizon: cfg.horizon };
    let en = unit_vector(d, d - 1);
    let grad_oracle = sol.normal_derivative(0.0, x[d - 1])?;

    let mut rows = Vec::new();
    let heat = neumann_heat_mc(m, &f, &s, x)?;
    let heat_oracle = image_kernel_oracle(KernelKind::Neumann, cfg.horizon, x[d - 1], &prof.value)?;
    rows.extend(estimate_rows(&c, "check=neumann_heat", &heat, heat_oracle));

    let phi = OneForm::exact(&f);
    rows.extend(estimate_rows(&c, "check=one_form", &one_form_mc(m, &phi, &s, x, &en)?, grad_oracle));
    rows.extend(estimate_rows(&c, "check=bismut", &bismut_gradient_mc(m, &f, &s, x, &en)?, grad_oracle));
    rows.extend(estimate_rows(&c, "check=martingale", &martingale_check(m, &sol, &s, x, &en)?, 0.0));
    let curve = LineCurve { base: x.clone(), direction: en };
    rows.extend(estimate_rows(&c, "check=weak_derivative", &weak_derivative_check(m, &f, &curve, 0.0, 0.2, &s)?, 0.0));
    Ok(rows)
}
