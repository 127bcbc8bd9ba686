//! Reference reflected Brownian motion with boundary local time, and the
//! excursion structure of its distance to the boundary.
//!
//! Flat models solve the normal coordinate exactly with the Skorohod map; the
//! curved ones take an Euler step and project back along the normal, the push
//! distance being the local-time increment.

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, MAX_AMBIENT};
use crate::penalized::{check_driver, DriverPath, TimeGrid};
use crate::rng::keyed_uniform;
use crate::skorohod1d::{skorohod_map, RealPath};

/// Tag mixed into the bridge-minimum keys so they never collide with the
/// bisection bridges.
const BRIDGE_MIN_TAG: u64 = 0xB41D_6E00;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monitoring {
    /// Boundary visits are checked at the grid nodes only (piecewise-linear driver).
    Nodes,
    /// Each step also inserts an exact sample of the Brownian-bridge minimum
    /// of the normal driver, removing the O(√Δt) missed-visit bias. Flat models only.
    BridgeMinimum,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectOptions {
    /// Contact threshold; `None` means √Δt.
    pub eta: Option<f64>,
    pub monitoring: Monitoring,
}

impl Default for ReflectOptions {
    fn default() -> Self {
        ReflectOptions { eta: None, monitoring: Monitoring::Nodes }
    }
}

#[derive(Clone, Debug)]
pub struct ReflectedPath {
    pub grid: TimeGrid,
    pub ambient: usize,
    pub points: Vec<f64>,
    pub r_values: Vec<f64>,
    pub l: Vec<f64>,
    /// L increased on the step into the node.
    pub pushed: Vec<bool>,
    pub boundary_flags: Vec<bool>,
    pub eta: f64,
}

impl ReflectedPath {
    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn len(&self) -> usize {
        self.r_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_values.is_empty()
    }

    /// Contact flags for threshold η: R < η, on the boundary, or pushed.
    pub fn contact_flags(&self, eta: f64) -> Vec<bool> {
        self.r_values
            .iter()
            .zip(&self.pushed)
            .map(|(&r, &p)| p || r < eta || r <= 0.0)
            .collect()
    }
}

pub fn default_eta(grid: TimeGrid) -> f64 {
    grid.dt().sqrt()
}

pub fn integrate_reflected(
    model: &ManifoldModel,
    x0: &[f64],
    driver: &DriverPath,
    grid: TimeGrid,
    opts: ReflectOptions,
) -> Result<ReflectedPath> {
    model.check_point(x0)?;
    check_driver(model, driver, grid)?;
    let eta = opts.eta.unwrap_or_else(|| default_eta(grid));
    if !(eta >= 0.0) {
        return Err(Error::arg(format!("contact threshold must be ≥ 0, got {eta}")));
    }
    let mut path = if model.is_flat_half_space() {
        reflect_flat(model, x0, driver, grid, opts.monitoring)?
    } else {
        if opts.monitoring == Monitoring::BridgeMinimum {
            return Err(Error::Unsupported("bridge-minimum monitoring on a curved model".into()));
        }
        reflect_projected(model, x0, driver, grid)
    };
    path.boundary_flags = path.contact_flags(eta);
    path.eta = eta;
    Ok(path)
}

/// Normal driver with the sampled per-step bridge minima inserted at midpoints.
pub fn bridge_refined_driver(driver: &DriverPath, component: usize) -> RealPath {
    let grid = driver.grid();
    let dt = grid.dt();
    let n = grid.steps();
    let mut times = Vec::with_capacity(2 * n + 1);
    let mut values = Vec::with_capacity(2 * n + 1);
    times.push(0.0);
    values.push(0.0);
    let mut f = 0.0;
    for i in 0..n {
        let next = f + driver.increment(i)[component];
        let u = keyed_uniform(&[driver.seed(), i as u64, BRIDGE_MIN_TAG, component as u64]);
        let spread = next - f;
        let m = 0.5 * (f + next - (spread * spread - 2.0 * dt * u.ln()).sqrt());
        times.push(grid.time(i) + 0.5 * dt);
        values.push(m);
        times.push(grid.time(i + 1));
        values.push(next);
        f = next;
    }
    RealPath::new(times, values).expect("refined grid is increasing")
}

fn reflect_flat(
    model: &ManifoldModel,
    x0: &[f64],
    driver: &DriverPath,
    grid: TimeGrid,
    monitoring: Monitoring,
) -> Result<ReflectedPath> {
    let d = model.dim();
    let n = grid.steps();
    let (g, h) = match monitoring {
        Monitoring::Nodes => {
            let s = skorohod_map(x0[d - 1], &driver.component_path(0))?;
            (s.reflected.values().to_vec(), s.local_time.values().to_vec())
        }
        Monitoring::BridgeMinimum => {
            let s = skorohod_map(x0[d - 1], &bridge_refined_driver(driver, 0))?;
            let pick = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
            (pick(s.reflected.values()), pick(s.local_time.values()))
        }
    };
    let mut points = Vec::with_capacity((n + 1) * d);
    let mut x = [0.0; MAX_AMBIENT];
    x[..d].copy_from_slice(x0);
    x[d - 1] = g[0];
    points.extend_from_slice(&x[..d]);
    for i in 0..n {
        let db = driver.increment(i);
        for k in 0..d - 1 {
            x[k] += db[k + 1];
        }
        x[d - 1] = g[i + 1];
        points.extend_from_slice(&x[..d]);
    }
    let mut pushed = Vec::with_capacity(n + 1);
    pushed.push(false);
    pushed.extend(h.windows(2).map(|w| w[1] > w[0]));
    Ok(ReflectedPath {
        grid,
        ambient: d,
        points,
        r_values: g,
        l: h,
        pushed,
        boundary_flags: Vec::new(),
        eta: 0.0,
    })
}

fn reflect_projected(model: &ManifoldModel, x0: &[f64], driver: &DriverPath, grid: TimeGrid) -> ReflectedPath {
    let da = model.ambient_dim();
    let m = model.frame_count();
    let n = grid.steps();
    let mut points = Vec::with_capacity((n + 1) * da);
    let mut r_values = Vec::with_capacity(n + 1);
    let mut l = Vec::with_capacity(n + 1);
    let mut pushed = Vec::with_capacity(n + 1);
    let mut x = [0.0; MAX_AMBIENT];
    x[..da].copy_from_slice(x0);
    let mut lt = 0.0;
    points.extend_from_slice(&x[..da]);
    r_values.push(model.signed_distance(&x[..da]).max(0.0));
    l.push(0.0);
    pushed.push(false);
    let mut v = [0.0; MAX_AMBIENT];
    let mut y = [0.0; MAX_AMBIENT];
    for i in 0..n {
        let frame = model.frame_at(&x[..da]);
        frame.combine(&driver.increment(i)[..m], &mut v);
        model.exp_into(&x[..da], &v[..da], &mut y);
        let r = model.signed_distance(&y[..da]);
        let push = r < 0.0;
        if push {
            model.nearest_boundary_point_into(&y[..da], &mut x);
            lt += -r;
        } else {
            x = y;
        }
        points.extend_from_slice(&x[..da]);
        r_values.push(if push { 0.0 } else { r });
        l.push(lt);
        pushed.push(push);
    }
    ReflectedPath { grid, ambient: da, points, r_values, l, pushed, boundary_flags: Vec::new(), eta: 0.0 }
}

// -------------------------------------------------------------------------
// excursions

/// Maximal run of non-contact nodes, with its flanking nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Excursion {
    /// Last node of the preceding contact run, or 0 for the initial segment.
    pub left: usize,
    /// First node of the next contact run, or the final node if the path
    /// does not return.
    pub right: usize,
    pub from_boundary: bool,
    pub returns: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcursionSet {
    pub intervals: Vec<Excursion>,
    pub epsilon: f64,
    /// Right ends of the returning excursions of duration ≥ ε.
    pub right_ends: Vec<usize>,
}

impl ExcursionSet {
    pub fn is_right_end(&self, i: usize) -> bool {
        self.right_ends.binary_search(&i).is_ok()
    }
}

/// Excursions of duration ≥ ε for the contact threshold η. The initial
/// segment before the first contact counts as an excursion; the final segment
/// without a return is listed but contributes no right end.
pub fn excursions(path: &ReflectedPath, epsilon: f64, eta: f64) -> ExcursionSet {
    excursions_from_flags(&path.contact_flags(eta), path.grid.dt(), epsilon)
}

pub fn excursions_from_flags(flags: &[bool], dt: f64, epsilon: f64) -> ExcursionSet {
    let n = flags.len();
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < n {
        if flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && !flags[i] {
            i += 1;
        }
        let from_boundary = start > 0;
        let left = if from_boundary { start - 1 } else { 0 };
        let returns = i < n;
        let right = if returns { i } else { n - 1 };
        let duration = (right - left) as f64 * dt;
        if duration >= epsilon - 1e-9 * dt {
            intervals.push(Excursion { left, right, from_boundary, returns });
        }
    }
    let right_ends = intervals.iter().filter(|e| e.returns).map(|e| e.right).collect();
    ExcursionSet { intervals, epsilon, right_ends }
}

/// α_t: latest contact node ≤ `index`, `None` before the first contact.
pub fn last_contact(path: &ReflectedPath, index: usize, eta: f64) -> Option<usize> {
    let flags = path.contact_flags(eta);
    (0..=index.min(flags.len() - 1)).rev().find(|&j| flags[j])
}
