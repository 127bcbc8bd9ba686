//! Discrete parallel transport along nodal paths.
//!
//! `P_i` is stored as an `ambient × dim` matrix whose columns are the images
//! of an orthonormal basis of T_{Y_0}M, so `P_0` is the identity in that basis.
//! Flat models transport trivially. On the cap each step applies the exact
//! transport along the great-circle arc between consecutive nodes (a rotation
//! about Y_i × Y_{i+1}).

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, ModelKind};
use crate::linalg::{dist, dot, orthonormalize_columns};
use crate::penalized::{integrate_penalized, DriverPath, PenalizedPath, TimeGrid};
use crate::reflected::{integrate_reflected, ReflectOptions, ReflectedPath};

pub const DEFAULT_REORTHO_EVERY: usize = 64;

/// Anything with nodal points in the ambient coordinates of a model.
pub trait NodalPath {
    fn ambient(&self) -> usize;
    fn points(&self) -> &[f64];

    fn node_count(&self) -> usize {
        self.points().len() / self.ambient()
    }

    fn node(&self, i: usize) -> &[f64] {
        let a = self.ambient();
        &self.points()[i * a..(i + 1) * a]
    }
}

impl NodalPath for PenalizedPath {
    fn ambient(&self) -> usize {
        self.ambient
    }
    fn points(&self) -> &[f64] {
        &self.points
    }
}

impl NodalPath for ReflectedPath {
    fn ambient(&self) -> usize {
        self.ambient
    }
    fn points(&self) -> &[f64] {
        &self.points
    }
}

/// Bare point list, e.g. a closed loop for holonomy checks.
pub struct Points<'a> {
    pub ambient: usize,
    pub data: &'a [f64],
}

impl NodalPath for Points<'_> {
    fn ambient(&self) -> usize {
        self.ambient
    }
    fn points(&self) -> &[f64] {
        self.data
    }
}

#[derive(Clone, Debug)]
pub struct TransportFrame {
    pub ambient: usize,
    pub dim: usize,
    frames: Vec<f64>,
}

impl TransportFrame {
    pub fn len(&self) -> usize {
        self.frames.len() / (self.ambient * self.dim)
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    #[inline]
    pub fn at(&self, i: usize) -> &[f64] {
        let s = self.ambient * self.dim;
        &self.frames[i * s..(i + 1) * s]
    }

    /// P_i v for v in initial-frame coordinates.
    pub fn apply(&self, i: usize, v: &[f64], out: &mut [f64]) {
        crate::linalg::matvec(self.at(i), self.ambient, self.dim, v, out);
    }

    /// P_iᵀ u: ambient vector into frame coordinates.
    pub fn pull_back(&self, i: usize, u: &[f64], out: &mut [f64]) {
        crate::linalg::matvec_t(self.at(i), self.ambient, self.dim, u, out);
    }
}

pub fn parallel_transport<P: NodalPath + ?Sized>(model: &ManifoldModel, path: &P) -> Result<TransportFrame> {
    parallel_transport_with(model, path, None, DEFAULT_REORTHO_EVERY)
}

/// Transport with an explicit initial frame (default: the model's tangent
/// basis at the first node) and re-orthonormalization period.
pub fn parallel_transport_with<P: NodalPath + ?Sized>(
    model: &ManifoldModel,
    path: &P,
    initial: Option<&[f64]>,
    reortho_every: usize,
) -> Result<TransportFrame> {
    let (da, d) = (model.ambient_dim(), model.dim());
    if path.ambient() != da {
        return Err(Error::arg(format!("path has {} coordinates, model needs {da}", path.ambient())));
    }
    let n = path.node_count();
    if n == 0 {
        return Err(Error::arg("empty path"));
    }
    let p0 = match initial {
        Some(p) if p.len() == da * d => p.to_vec(),
        Some(_) => return Err(Error::arg("initial frame has the wrong shape")),
        None => model.tangent_basis(path.node(0)),
    };
    let mut frames = Vec::with_capacity(n * da * d);
    frames.extend_from_slice(&p0);
    if !matches!(model.kind(), ModelKind::SphericalCap(_)) {
        for _ in 1..n {
            frames.extend_from_slice(&p0);
        }
        return Ok(TransportFrame { ambient: da, dim: d, frames });
    }
    let mut cur = p0;
    let mut next = vec![0.0; da * d];
    let mut col = [0.0; 3];
    let mut out = [0.0; 3];
    for i in 1..n {
        let (x, y) = (path.node(i - 1), path.node(i));
        for j in 0..d {
            for r in 0..3 {
                col[r] = cur[r * d + j];
            }
            model.transport_step_into(x, y, &col, &mut out);
            for r in 0..3 {
                next[r * d + j] = out[r];
            }
        }
        if reortho_every > 0 && i % reortho_every == 0 {
            // project onto T_yM, then Gram–Schmidt
            for j in 0..d {
                let p: f64 = (0..3).map(|r| next[r * d + j] * y[r]).sum();
                for r in 0..3 {
                    next[r * d + j] -= p * y[r];
                }
            }
            orthonormalize_columns(&mut next, 3, d);
        }
        frames.extend_from_slice(&next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(TransportFrame { ambient: da, dim: d, frames })
}

/// sup_i ‖P^a_i v − P_i v‖ for each a, on paths coupled through `driver`.
pub fn transport_convergence_check(
    model: &ManifoldModel,
    a_list: &[f64],
    driver: &DriverPath,
    grid: TimeGrid,
    x0: &[f64],
    v: &[f64],
) -> Result<Vec<f64>> {
    if v.len() != model.dim() {
        return Err(Error::arg(format!("v needs {} frame coordinates", model.dim())));
    }
    let refl = integrate_reflected(model, x0, driver, grid, ReflectOptions::default())?;
    let pr = parallel_transport(model, &refl)?;
    a_list
        .iter()
        .map(|&a| {
            let pen = integrate_penalized(model, a, x0, driver, grid)?;
            let pa = parallel_transport(model, &pen)?;
            Ok(frame_gap(&pa, &pr, v))
        })
        .collect()
}

/// sup_i ‖A_i v − B_i v‖.
pub fn frame_gap(a: &TransportFrame, b: &TransportFrame, v: &[f64]) -> f64 {
    let mut ua = vec![0.0; a.ambient];
    let mut ub = vec![0.0; b.ambient];
    let mut sup: f64 = 0.0;
    for i in 0..a.len().min(b.len()) {
        a.apply(i, v, &mut ua);
        b.apply(i, v, &mut ub);
        sup = sup.max(dist(&ua, &ub));
    }
    sup
}

/// Largest |‖P_i v‖ − ‖v‖| over nodes and basis vectors v.
pub fn isometry_defect(frame: &TransportFrame) -> f64 {
    let (da, d) = (frame.ambient, frame.dim);
    let mut worst: f64 = 0.0;
    for i in 0..frame.len() {
        let p = frame.at(i);
        for j in 0..d {
            for k in 0..d {
                let g: f64 = (0..da).map(|r| p[r * d + j] * p[r * d + k]).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
    }
    worst
}

/// Signed rotation angle of the loop holonomy on the cap, measured in the
/// (e_θ, e_φ) frame at the loop's base point.
pub fn cap_holonomy_angle(model: &ManifoldModel, loop_points: &[f64]) -> Result<f64> {
    let path = Points { ambient: 3, data: loop_points };
    let n = path.node_count();
    let frame = parallel_transport(model, &path)?;
    if dist(path.node(0), path.node(n - 1)) > 1e-12 {
        return Err(Error::arg("loop is not closed"));
    }
    let basis = model.tangent_basis(path.node(0));
    let p = frame.at(n - 1);
    // image of e_θ expressed in (e_θ, e_φ)
    let img = [p[0], p[2], p[4]];
    let e_t = [basis[0], basis[2], basis[4]];
    let e_p = [basis[1], basis[3], basis[5]];
    Ok(dot(&img, &e_p).atan2(dot(&img, &e_t)))
}
