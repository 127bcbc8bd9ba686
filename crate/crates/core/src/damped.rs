//! Damped parallel transport in transported-frame coordinates.
//!
//! With `P_i` the transport frame, `w_i = P_iᵀ W_i` is a d × d matrix and
//! `n_i = P_iᵀ ν(Y_i)`. Between jumps all three variants share
//!
//! ```text
//! w ← w − ½ ric w Δt − 𝔰 w ΔL
//! ```
//!
//! with `ric`, `𝔰` the Ricci and shape operators pulled back to the frame.
//! The penalized variant additionally damps the normal row by the exact factor
//! `e^{−∫c_a}`; the jump variants erase it at selected nodes.

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, MAX_AMBIENT};
use crate::linalg::{identity, spectral_norm};
use crate::penalized::PenalizedPath;
use crate::reflected::{excursions, last_contact, ReflectedPath};
use crate::transport::TransportFrame;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DampedVariant {
    Penalized(f64),
    EpsJump(f64),
    Limit,
}

#[derive(Clone, Debug)]
pub struct DampedState {
    pub variant: DampedVariant,
    pub dim: usize,
    /// (N+1) × d × d, row-major per node.
    w: Vec<f64>,
    /// (N+1) × d.
    normals: Vec<f64>,
    /// Nodes at which the normal row was erased.
    pub jumps: Vec<usize>,
}

impl DampedState {
    pub fn len(&self) -> usize {
        self.normals.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    #[inline]
    pub fn w(&self, i: usize) -> &[f64] {
        let s = self.dim * self.dim;
        &self.w[i * s..(i + 1) * s]
    }

    #[inline]
    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.dim..(i + 1) * self.dim]
    }

    /// f_i = n_iᵀ w_i (one entry per column of w).
    pub fn f(&self, i: usize) -> Vec<f64> {
        let (d, w, n) = (self.dim, self.w(i), self.normal(i));
        (0..d).map(|c| (0..d).map(|r| n[r] * w[r * d + c]).sum()).collect()
    }

    /// w_iᵀ = w_i − n_i ⊗ f_i.
    pub fn w_tangential(&self, i: usize) -> Vec<f64> {
        let d = self.dim;
        let f = self.f(i);
        let n = self.normal(i);
        let mut t = self.w(i).to_vec();
        for r in 0..d {
            for c in 0..d {
                t[r * d + c] -= n[r] * f[c];
            }
        }
        t
    }

    /// w_i v.
    pub fn apply(&self, i: usize, v: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d];
        crate::linalg::matvec(self.w(i), d, d, v, &mut out);
        out
    }

    /// Operator norm of w_i.
    pub fn op_norm(&self, i: usize) -> f64 {
        spectral_norm(self.w(i), self.dim, self.dim)
    }
}

/// Per-node pulled-back geometry along a path.
struct FrameGeometry {
    d: usize,
    normals: Vec<f64>,
    ric: Vec<f64>,
    shape: Vec<f64>,
}

fn pull_back_operator(
    frame: &TransportFrame,
    i: usize,
    x: &[f64],
    op: impl Fn(&[f64], &[f64], &mut [f64]),
    out: &mut [f64],
) {
    let (da, d) = (frame.ambient, frame.dim);
    let p = frame.at(i);
    let mut col = [0.0; MAX_AMBIENT];
    let mut img = [0.0; MAX_AMBIENT];
    let mut back = [0.0; MAX_AMBIENT];
    for c in 0..d {
        for r in 0..da {
            col[r] = p[r * d + c];
        }
        op(x, &col[..da], &mut img[..da]);
        frame.pull_back(i, &img[..da], &mut back[..d]);
        for r in 0..d {
            out[r * d + c] = back[r];
        }
    }
}

fn frame_geometry(model: &ManifoldModel, points: &[f64], frame: &TransportFrame) -> Result<FrameGeometry> {
    let (da, d) = (model.ambient_dim(), model.dim());
    let n = points.len() / da;
    if frame.len() != n || frame.ambient != da || frame.dim != d {
        return Err(Error::arg("transport frame does not match the path"));
    }
    let mut normals = vec![0.0; n * d];
    let mut ric = vec![0.0; n * d * d];
    let mut shape = vec![0.0; n * d * d];
    let mut g = [0.0; MAX_AMBIENT];
    if model.is_flat_half_space() {
        // constant frame, constant normal, no curvature
        model.grad_r_into(&points[..da], &mut g);
        frame.pull_back(0, &g[..da], &mut normals[..d]);
        for i in 1..n {
            normals.copy_within(0..d, i * d);
        }
        return Ok(FrameGeometry { d, normals, ric, shape });
    }
    for i in 0..n {
        let x = &points[i * da..(i + 1) * da];
        model.grad_r_into(x, &mut g);
        frame.pull_back(i, &g[..da], &mut normals[i * d..(i + 1) * d]);
        pull_back_operator(frame, i, x, |x, w, o| model.ricci_into(x, w, o), &mut ric[i * d * d..(i + 1) * d * d]);
        pull_back_operator(frame, i, x, |x, w, o| model.shape_into(x, w, o), &mut shape[i * d * d..(i + 1) * d * d]);
    }
    Ok(FrameGeometry { d, normals, ric, shape })
}

impl FrameGeometry {
    fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.d..(i + 1) * self.d]
    }
    fn ric(&self, i: usize) -> &[f64] {
        &self.ric[i * self.d * self.d..(i + 1) * self.d * self.d]
    }
    fn shape(&self, i: usize) -> &[f64] {
        &self.shape[i * self.d * self.d..(i + 1) * self.d * self.d]
    }
}

/// w ← w − ½Δt ric w − ΔL s w.
fn continuous_step(w: &[f64], ric: &[f64], s: &[f64], dt: f64, dl: f64, d: usize, out: &mut [f64]) {
    for r in 0..d {
        for c in 0..d {
            let mut acc = w[r * d + c];
            for k in 0..d {
                acc -= (0.5 * dt * ric[r * d + k] + dl * s[r * d + k]) * w[k * d + c];
            }
            out[r * d + c] = acc;
        }
    }
}

/// w ← w − θ n nᵀ w.
fn damp_normal(w: &mut [f64], n: &[f64], theta: f64, d: usize) {
    if theta == 0.0 {
        return;
    }
    for c in 0..d {
        let f: f64 = (0..d).map(|r| n[r] * w[r * d + c]).sum();
        for r in 0..d {
            w[r * d + c] -= theta * n[r] * f;
        }
    }
}

pub fn damped_penalized(model: &ManifoldModel, path: &PenalizedPath, frame: &TransportFrame) -> Result<DampedState> {
    let geo = frame_geometry(model, &path.points, frame)?;
    let d = geo.d;
    let n = path.len();
    let dt = path.grid.dt();
    let mut w = Vec::with_capacity(n * d * d);
    w.extend_from_slice(&identity(d));
    let mut next = vec![0.0; d * d];
    for i in 0..n - 1 {
        let cur = &w[i * d * d..(i + 1) * d * d];
        let dl = path.l_a[i + 1] - path.l_a[i];
        continuous_step(cur, geo.ric(i), geo.shape(i), dt, dl, d, &mut next);
        let dc = path.c_a_integral[i + 1] - path.c_a_integral[i];
        damp_normal(&mut next, geo.normal(i), -(-dc).exp_m1(), d);
        w.extend_from_slice(&next);
    }
    Ok(DampedState { variant: DampedVariant::Penalized(path.a), dim: d, w, normals: geo.normals, jumps: Vec::new() })
}

fn damped_with_jumps(
    model: &ManifoldModel,
    path: &ReflectedPath,
    frame: &TransportFrame,
    variant: DampedVariant,
    jump: impl Fn(usize) -> bool,
) -> Result<DampedState> {
    let geo = frame_geometry(model, &path.points, frame)?;
    let d = geo.d;
    let n = path.len();
    let dt = path.grid.dt();
    let mut w = Vec::with_capacity(n * d * d);
    let mut jumps = Vec::new();
    let mut first = identity(d);
    if jump(0) {
        damp_normal(&mut first, geo.normal(0), 1.0, d);
        jumps.push(0);
    }
    w.extend_from_slice(&first);
    let mut next = vec![0.0; d * d];
    for i in 0..n - 1 {
        let cur = &w[i * d * d..(i + 1) * d * d];
        let dl = path.l[i + 1] - path.l[i];
        continuous_step(cur, geo.ric(i), geo.shape(i + 1), dt, dl, d, &mut next);
        if jump(i + 1) {
            damp_normal(&mut next, geo.normal(i + 1), 1.0, d);
            jumps.push(i + 1);
        }
        w.extend_from_slice(&next);
    }
    Ok(DampedState { variant, dim: d, w, normals: geo.normals, jumps })
}

/// W^ε: the normal row is erased at the right ends of excursions of length ≥ ε.
pub fn damped_eps(
    model: &ManifoldModel,
    path: &ReflectedPath,
    frame: &TransportFrame,
    epsilon: f64,
    eta: f64,
) -> Result<DampedState> {
    if !(epsilon > 0.0) {
        return Err(Error::arg(format!("ε must be positive, got {epsilon}")));
    }
    let ex = excursions(path, epsilon, eta);
    damped_with_jumps(model, path, frame, DampedVariant::EpsJump(epsilon), |i| ex.is_right_end(i))
}

/// The ε → 0 limit: the normal row is erased at every contact node.
pub fn damped_limit_state(
    model: &ManifoldModel,
    path: &ReflectedPath,
    frame: &TransportFrame,
    eta: f64,
) -> Result<DampedState> {
    let flags = path.contact_flags(eta);
    damped_with_jumps(model, path, frame, DampedVariant::Limit, |i| flags[i])
}

/// sup_i ‖w^A_i − w^B_i‖ (Frobenius).
pub fn sup_gap(a: &DampedState, b: &DampedState) -> f64 {
    (0..a.len().min(b.len()))
        .map(|i| crate::linalg::frob_dist(a.w(i), b.w(i)))
        .fold(0.0, f64::max)
}

/// sup_i ‖w^{A,T}_i − w^{B,T}_i‖.
pub fn tangential_gap(a: &DampedState, b: &DampedState) -> f64 {
    (0..a.len().min(b.len()))
        .map(|i| crate::linalg::frob_dist(&a.w_tangential(i), &b.w_tangential(i)))
        .fold(0.0, f64::max)
}

/// Left-point Σ_i |f^A_i − f^B_i|^p Δt over [0, T).
pub fn normal_lp_gap(a: &DampedState, b: &DampedState, p: f64, dt: f64) -> f64 {
    let n = a.len().min(b.len());
    (0..n - 1)
        .map(|i| {
            let (fa, fb) = (a.f(i), b.f(i));
            let e = crate::linalg::dist(&fa, &fb);
            e.powf(p) * dt
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct LimitReport {
    pub levels: Vec<f64>,
    pub finest: DampedState,
    pub limit: DampedState,
    /// Gaps between consecutive ε levels.
    pub gaps: Vec<f64>,
    /// Gap between the finest level and the limit variant.
    pub limit_gap: f64,
    /// Gap sequence nonincreasing (diagnostic, not an error).
    pub monotone: bool,
}

/// W^{ε_n} for ε_n = ε₀ 2^{−n}, n < levels, with the Cauchy gap sequence.
pub fn damped_limit(
    model: &ManifoldModel,
    path: &ReflectedPath,
    frame: &TransportFrame,
    eps0: f64,
    levels: usize,
    eta: f64,
) -> Result<LimitReport> {
    if levels < 2 {
        return Err(Error::arg("need at least two ε levels"));
    }
    let eps: Vec<f64> = (0..levels).map(|k| eps0 * 0.5f64.powi(k as i32)).collect();
    let states = eps
        .iter()
        .map(|&e| damped_eps(model, path, frame, e, eta))
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = states.windows(2).map(|s| sup_gap(&s[0], &s[1])).collect();
    let monotone = gaps.windows(2).all(|g| g[1] <= g[0] + 1e-12);
    let limit = damped_limit_state(model, path, frame, eta)?;
    let finest = states.into_iter().last().unwrap();
    let limit_gap = sup_gap(&finest, &limit);
    Ok(LimitReport { levels: eps, finest, limit, gaps, limit_gap, monotone })
}

/// sup over nodes of |f(t) − (r_t − r_{α_t})|, with r the discrete
/// f₀ − ½∫Ric(W, ν) dt + ∫⟨W, dν⟩ and r_{α_t} = 0 before the first contact.
pub fn normal_part_formula_check(
    model: &ManifoldModel,
    path: &ReflectedPath,
    frame: &TransportFrame,
    state: &DampedState,
    eta: f64,
) -> Result<f64> {
    if state.variant != DampedVariant::Limit {
        return Err(Error::arg("normal-part formula applies to the limit variant"));
    }
    let geo = frame_geometry(model, &path.points, frame)?;
    let d = geo.d;
    let n = path.len();
    let dt = path.grid.dt();
    let mut r = vec![vec![0.0; d]; n];
    // r_0 = ⟨W_0, ν⟩ before any erasure at node 0
    r[0] = geo.normal(0).to_vec();
    for i in 0..n - 1 {
        let w = state.w(i);
        let (n0, n1) = (geo.normal(i), geo.normal(i + 1));
        let ric = geo.ric(i);
        for c in 0..d {
            let mut inc = 0.0;
            for k in 0..d {
                inc += (n1[k] - n0[k]) * w[k * d + c];
                let ric_w: f64 = (0..d).map(|j| ric[k * d + j] * w[j * d + c]).sum();
                inc -= 0.5 * dt * n0[k] * ric_w;
            }
            r[i + 1][c] = r[i][c] + inc;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let f = state.f(i);
        let base = match last_contact(path, i, eta) {
            Some(a) => r[a].clone(),
            None => vec![0.0; d],
        };
        for c in 0..d {
            worst = worst.max((f[c] - (r[i][c] - base[c])).abs());
        }
    }
    Ok(worst)
}

/// Largest violation of |w_i|² ≤ exp(−∫Ric̲ dt − 2∫𝒮̲ dL^a) over the nodes
/// (negative when the bound holds everywhere).
pub fn norm_bound_violation(model: &ManifoldModel, path: &PenalizedPath, state: &DampedState) -> f64 {
    let dt = path.grid.dt();
    let mut log_bound: f64 = 0.0;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..path.len() {
        let nw = state.op_norm(i);
        worst = worst.max(nw * nw - log_bound.exp());
        if i + 1 < path.len() {
            let x = path.point(i);
            log_bound -= model.ricci_lower_bound(x) * dt;
            log_bound -= 2.0 * model.shape_lower_bound(x) * (path.l_a[i + 1] - path.l_a[i]);
        }
    }
    worst
}
