//! Built-in model manifolds with boundary.
//!
//! Points live in an ambient Euclidean space: the chart itself for the flat
//! models, and ℝ³ for the spherical cap (unit vectors with polar angle
//! θ ≤ θ₀ measured from the north pole). Tangent vectors are ambient vectors
//! as well; on the cap they are orthogonal to the base point. Working
//! ambiently avoids the coordinate singularity of (θ, φ) at the pole, which the
//! interior paths cross routinely.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::dot;

pub const MAX_AMBIENT: usize = 8;
pub const MAX_FRAMES: usize = 10;

const CAP_UNIT_TOL: f64 = 1e-9;
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelKind {
    HalfLine,
    HalfSpace(usize),
    FlatDisk,
    SphericalCap(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldModel {
    kind: ModelKind,
    dim: usize,
    ambient_dim: usize,
    tubular_radius: f64,
    frame_count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    pub base: Vec<f64>,
    pub components: Vec<f64>,
}

/// Frame fields σ₁..σ_m and the Stratonovich drift σ₀ at one point.
#[derive(Clone, Copy, Debug)]
pub struct Frame {
    pub count: usize,
    pub ambient: usize,
    pub fields: [[f64; MAX_AMBIENT]; MAX_FRAMES],
    pub drift: [f64; MAX_AMBIENT],
}

impl Frame {
    fn empty(count: usize, ambient: usize) -> Self {
        Frame {
            count,
            ambient,
            fields: [[0.0; MAX_AMBIENT]; MAX_FRAMES],
            drift: [0.0; MAX_AMBIENT],
        }
    }

    #[inline]
    pub fn field(&self, k: usize) -> &[f64] {
        &self.fields[k][..self.ambient]
    }

    /// Σ_k σ_k(x) dB^k.
    #[inline]
    pub fn combine(&self, db: &[f64], out: &mut [f64]) {
        out[..self.ambient].iter_mut().for_each(|v| *v = 0.0);
        for k in 0..self.count {
            let b = db[k];
            for (o, s) in out.iter_mut().zip(&self.fields[k][..self.ambient]) {
                *o += s * b;
            }
        }
    }
}

/// C^∞ step from 0 (u ≤ 0) to 1 (u ≥ 1).
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

impl ManifoldModel {
    pub fn new(kind: ModelKind) -> Result<Self> {
        let (dim, ambient_dim, tubular_radius, frame_count) = match kind {
            ModelKind::HalfLine => (1, 1, 1.0, 1),
            ModelKind::HalfSpace(d) => {
                if d == 0 || d > MAX_AMBIENT {
                    return Err(Error::arg(format!(
                        "half-space dimension must be in 1..={MAX_AMBIENT}, got {d}"
                    )));
                }
                (d, d, 1.0, d)
            }
            ModelKind::FlatDisk => (2, 2, 1.0 / 3.0, 4),
            ModelKind::SphericalCap(t0) => {
                if !(t0 > 0.0 && t0 < PI) {
                    return Err(Error::arg(format!("cap angle must lie in (0, π), got {t0}")));
                }
                (2, 3, t0 / 3.0, 5)
            }
        };
        Ok(ManifoldModel { kind, dim, ambient_dim, tubular_radius, frame_count })
    }

    pub fn half_line() -> Self {
        Self::new(ModelKind::HalfLine).unwrap()
    }

    pub fn half_space(d: usize) -> Result<Self> {
        Self::new(ModelKind::HalfSpace(d))
    }

    pub fn flat_disk() -> Self {
        Self::new(ModelKind::FlatDisk).unwrap()
    }

    pub fn spherical_cap(theta0: f64) -> Result<Self> {
        Self::new(ModelKind::SphericalCap(theta0))
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tubular_radius(&self) -> f64 {
        self.tubular_radius
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    /// Half-line and half-spaces: flat interior, flat boundary.
    pub fn is_flat_half_space(&self) -> bool {
        matches!(self.kind, ModelKind::HalfLine | ModelKind::HalfSpace(_))
    }

    /// Index of the normal coordinate on the flat half-space models.
    fn normal_axis(&self) -> usize {
        self.dim - 1
    }

    /// Cap point with polar angle `theta` and azimuth `phi`.
    pub fn point_from_polar(theta: f64, phi: f64) -> Vec<f64> {
        vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
    }

    /// (θ, φ) of a unit vector.
    pub fn polar_angles(x: &[f64]) -> (f64, f64) {
        let rho = x[0].hypot(x[1]);
        (rho.atan2(x[2]), x[1].atan2(x[0]))
    }

    // ---------------------------------------------------------------------
    // boundary distance and normal

    /// R(x) without domain checks; negative outside the manifold.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => x[self.normal_axis()],
            ModelKind::FlatDisk => 1.0 - x[0].hypot(x[1]),
            ModelKind::SphericalCap(t0) => {
                let rho = x[0].hypot(x[1]);
                t0 - rho.atan2(x[2])
            }
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim,
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if let ModelKind::SphericalCap(_) = self.kind {
            let n = dot(x, x).sqrt();
            if (n - 1.0).abs() > CAP_UNIT_TOL {
                return Err(Error::Domain(format!("cap point must be a unit vector, |x| = {n}")));
            }
        }
        let r = self.signed_distance(x);
        if r < -DOMAIN_TOL {
            return Err(Error::Domain(format!("point lies outside the manifold (R = {r})")));
        }
        Ok(())
    }

    pub fn boundary_distance(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.signed_distance(x).max(0.0))
    }

    /// ∇R(x) without checks. Zero at the disk centre and the cap pole, where
    /// R is not differentiable (both lie outside the tubular zone).
    #[inline]
    pub fn grad_r_into(&self, x: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => {
                out[..self.dim].iter_mut().for_each(|v| *v = 0.0);
                out[self.normal_axis()] = 1.0;
            }
            ModelKind::FlatDisk => {
                let r = x[0].hypot(x[1]);
                if r > 0.0 {
                    out[0] = -x[0] / r;
                    out[1] = -x[1] / r;
                } else {
                    out[0] = 0.0;
                    out[1] = 0.0;
                }
            }
            ModelKind::SphericalCap(_) => {
                let rho = x[0].hypot(x[1]);
                if rho > 0.0 {
                    // −e_θ
                    out[0] = -x[2] * x[0] / rho;
                    out[1] = -x[2] * x[1] / rho;
                    out[2] = rho;
                } else {
                    out[..3].iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
    }

    fn check_tubular(&self, x: &[f64]) -> Result<()> {
        self.check_point(x)?;
        let r = self.signed_distance(x);
        if r >= self.tubular_radius {
            return Err(Error::Range { r, limit: self.tubular_radius });
        }
        Ok(())
    }

    pub fn inward_normal(&self, x: &[f64]) -> Result<TangentVector> {
        self.check_tubular(x)?;
        let mut out = vec![0.0; self.ambient_dim];
        self.grad_r_into(x, &mut out);
        Ok(TangentVector { base: x.to_vec(), components: out })
    }

    // ---------------------------------------------------------------------
    // curvature

    /// 𝒮(w) = tangential part of −∇_w ν on the level set through x.
    #[inline]
    pub fn shape_into(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => {
                out[..self.dim].iter_mut().for_each(|v| *v = 0.0);
            }
            ModelKind::FlatDisk => {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    out[0] = 0.0;
                    out[1] = 0.0;
                    return;
                }
                // unit tangent to the circle of radius r
                let (tx, ty) = (-x[1] / r, x[0] / r);
                let c = (w[0] * tx + w[1] * ty) / r;
                out[0] = c * tx;
                out[1] = c * ty;
            }
            ModelKind::SphericalCap(_) => {
                let rho = x[0].hypot(x[1]);
                if rho == 0.0 {
                    out[..3].iter_mut().for_each(|v| *v = 0.0);
                    return;
                }
                let e_phi = [-x[1] / rho, x[0] / rho, 0.0];
                let cot = x[2] / rho;
                let c = cot * dot(&w[..3], &e_phi);
                out[0] = c * e_phi[0];
                out[1] = c * e_phi[1];
                out[2] = 0.0;
            }
        }
    }

    pub fn shape_operator(&self, x: &[f64], w: &[f64]) -> Result<TangentVector> {
        self.check_tubular(x)?;
        self.check_vector(w)?;
        let mut out = vec![0.0; self.ambient_dim];
        self.shape_into(x, w, &mut out);
        Ok(TangentVector { base: x.to_vec(), components: out })
    }

    /// Ric^♯(w); on the cap the tangential projection of w (K = 1, d = 2).
    #[inline]
    pub fn ricci_into(&self, x: &[f64], w: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::SphericalCap(_) => {
                let p = dot(&w[..3], &x[..3]);
                for i in 0..3 {
                    out[i] = w[i] - p * x[i];
                }
            }
            _ => out[..self.ambient_dim].iter_mut().for_each(|v| *v = 0.0),
        }
    }

    pub fn ricci(&self, x: &[f64], w: &[f64]) -> Result<TangentVector> {
        self.check_point(x)?;
        self.check_vector(w)?;
        let mut out = vec![0.0; self.ambient_dim];
        self.ricci_into(x, w, &mut out);
        Ok(TangentVector { base: x.to_vec(), components: out })
    }

    /// Smallest eigenvalue of 𝒮 on the level set through x.
    pub fn shape_lower_bound(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => 0.0,
            ModelKind::FlatDisk => {
                let r = x[0].hypot(x[1]);
                if r > 0.0 {
                    1.0 / r
                } else {
                    0.0
                }
            }
            ModelKind::SphericalCap(_) => {
                let rho = x[0].hypot(x[1]);
                if rho > 0.0 {
                    x[2] / rho
                } else {
                    0.0
                }
            }
        }
    }

    /// Smallest eigenvalue of Ric^♯.
    pub fn ricci_lower_bound(&self, _x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::SphericalCap(_) => 1.0,
            _ => 0.0,
        }
    }

    /// ‖∇ν‖² (Hilbert–Schmidt), the curvature term of the normal equation.
    pub fn normal_gradient_norm_sq(&self, x: &[f64]) -> f64 {
        let s = self.shape_lower_bound(x);
        // one curved direction in both curved models
        s * s
    }

    /// trace ∇²ν; for the rotationally symmetric models this is −‖∇ν‖² ν.
    pub fn normal_hessian_trace_into(&self, x: &[f64], out: &mut [f64]) {
        let k = self.normal_gradient_norm_sq(x);
        self.grad_r_into(x, out);
        out[..self.ambient_dim].iter_mut().for_each(|v| *v *= -k);
    }

    // ---------------------------------------------------------------------
    // frames

    /// Blending weights (√β, √(1−β)) with β = 1 on R ≤ δ₀ and 0 on R ≥ 2δ₀.
    pub fn blend(&self, r: f64) -> (f64, f64) {
        let d0 = self.tubular_radius;
        let psi = smooth_step((r - d0) / d0);
        let ang = FRAC_PI_2 * psi;
        (ang.cos(), ang.sin())
    }

    /// σ₁..σ_m and σ₀ at x. In the tubular zone σ₁ = ∇R and the remaining
    /// fields are orthogonal to it; Σ σ_k σ_kᵀ is the identity on T_xM and
    /// σ₀ = −½ Σ ∇_{σ_k} σ_k.
    pub fn frame_at(&self, x: &[f64]) -> Frame {
        let mut f = Frame::empty(self.frame_count, self.ambient_dim);
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => {
                let d = self.dim;
                f.fields[0][d - 1] = 1.0;
                for k in 1..d {
                    f.fields[k][k - 1] = 1.0;
                }
            }
            ModelKind::FlatDisk => {
                let r = x[0].hypot(x[1]);
                let (sb, sc) = self.blend(1.0 - r);
                if sb > 0.0 && r > 0.0 {
                    let (ux, uy) = (x[0] / r, x[1] / r);
                    f.fields[0][0] = -sb * ux;
                    f.fields[0][1] = -sb * uy;
                    f.fields[1][0] = -sb * uy;
                    f.fields[1][1] = sb * ux;
                    let c = sb * sb / (2.0 * r);
                    f.drift[0] = c * ux;
                    f.drift[1] = c * uy;
                }
                f.fields[2][0] = sc;
                f.fields[3][1] = sc;
            }
            ModelKind::SphericalCap(_) => {
                let rho = x[0].hypot(x[1]);
                let r = self.signed_distance(x);
                let (sb, sc) = self.blend(r);
                if sb > 0.0 && rho > 0.0 {
                    let e_theta = [x[2] * x[0] / rho, x[2] * x[1] / rho, -rho];
                    let e_phi = [-x[1] / rho, x[0] / rho, 0.0];
                    let cot = x[2] / rho;
                    for i in 0..3 {
                        f.fields[0][i] = -sb * e_theta[i];
                        f.fields[1][i] = sb * e_phi[i];
                        f.drift[i] = 0.5 * sb * sb * cot * e_theta[i];
                    }
                }
                if sc > 0.0 {
                    // gradient system: projections of the ambient axes
                    for j in 0..3 {
                        for i in 0..3 {
                            let pij = if i == j { 1.0 } else { 0.0 } - x[i] * x[j];
                            f.fields[2 + j][i] = sc * pij;
                        }
                    }
                }
            }
        }
        f
    }

    pub fn frame(&self, x: &[f64]) -> Result<(Vec<TangentVector>, TangentVector)> {
        self.check_point(x)?;
        let f = self.frame_at(x);
        let fields = (0..f.count)
            .map(|k| TangentVector { base: x.to_vec(), components: f.field(k).to_vec() })
            .collect();
        let drift = TangentVector { base: x.to_vec(), components: f.drift[..self.ambient_dim].to_vec() };
        Ok((fields, drift))
    }

    // ---------------------------------------------------------------------
    // moving around

    /// exp_x(v); addition on the flat models, great-circle step on the cap.
    #[inline]
    pub fn exp_into(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::SphericalCap(_) => {
                let p = dot(&v[..3], &x[..3]);
                let t = [v[0] - p * x[0], v[1] - p * x[1], v[2] - p * x[2]];
                let s = dot(&t, &t).sqrt();
                if s == 0.0 {
                    out[..3].copy_from_slice(&x[..3]);
                    return;
                }
                let (sn, cs) = s.sin_cos();
                for i in 0..3 {
                    out[i] = cs * x[i] + sn * t[i] / s;
                }
                let n = dot(&out[..3], &out[..3]).sqrt();
                out[..3].iter_mut().for_each(|v| *v /= n);
            }
            _ => {
                for i in 0..self.ambient_dim {
                    out[i] = x[i] + v[i];
                }
            }
        }
    }

    /// π(x): the boundary point reached along the normal geodesic through x.
    pub fn nearest_boundary_point_into(&self, x: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::HalfLine | ModelKind::HalfSpace(_) => {
                out[..self.dim].copy_from_slice(&x[..self.dim]);
                out[self.normal_axis()] = 0.0;
            }
            ModelKind::FlatDisk => {
                let r = x[0].hypot(x[1]);
                if r > 0.0 {
                    out[0] = x[0] / r;
                    out[1] = x[1] / r;
                } else {
                    out[0] = 1.0;
                    out[1] = 0.0;
                }
            }
            ModelKind::SphericalCap(t0) => {
                let rho = x[0].hypot(x[1]);
                let (c, s) = if rho > 0.0 { (x[0] / rho, x[1] / rho) } else { (1.0, 0.0) };
                let (st, ct) = t0.sin_cos();
                out[0] = st * c;
                out[1] = st * s;
                out[2] = ct;
            }
        }
    }

    pub fn nearest_boundary_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_tubular(x)?;
        let mut out = vec![0.0; self.ambient_dim];
        self.nearest_boundary_point_into(x, &mut out);
        Ok(out)
    }

    /// Orthonormal basis of T_xM as an `ambient × dim` matrix (columns).
    pub fn tangent_basis(&self, x: &[f64]) -> Vec<f64> {
        let (da, d) = (self.ambient_dim, self.dim);
        let mut b = vec![0.0; da * d];
        match self.kind {
            ModelKind::SphericalCap(_) => {
                let rho = x[0].hypot(x[1]);
                if rho > 1e-8 {
                    let e_theta = [x[2] * x[0] / rho, x[2] * x[1] / rho, -rho];
                    let e_phi = [-x[1] / rho, x[0] / rho, 0.0];
                    for i in 0..3 {
                        b[i * 2] = e_theta[i];
                        b[i * 2 + 1] = e_phi[i];
                    }
                } else {
                    // near the pole: project e_x, e_y and orthonormalize
                    for (j, axis) in [0usize, 1].iter().enumerate() {
                        for i in 0..3 {
                            let e = if i == *axis { 1.0 } else { 0.0 };
                            b[i * 2 + j] = e - x[i] * x[*axis];
                        }
                    }
                    crate::linalg::orthonormalize_columns(&mut b, 3, 2);
                }
            }
            _ => {
                for i in 0..d {
                    b[i * d + i] = 1.0;
                }
            }
        }
        b
    }

    /// Parallel transport of `v` along the minimizing geodesic from x to y.
    /// Exact on all built-in models: identity when flat, the rotation about
    /// x × y on the sphere.
    #[inline]
    pub fn transport_step_into(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) {
        match self.kind {
            ModelKind::SphericalCap(_) => {
                let k = [
                    x[1] * y[2] - x[2] * y[1],
                    x[2] * y[0] - x[0] * y[2],
                    x[0] * y[1] - x[1] * y[0],
                ];
                let s = dot(&k, &k).sqrt();
                if s == 0.0 {
                    out[..3].copy_from_slice(&v[..3]);
                    return;
                }
                let c = dot(&x[..3], &y[..3]);
                let u = [k[0] / s, k[1] / s, k[2] / s];
                let uv = dot(&u, &v[..3]);
                let cross = [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ];
                let (sn, cs) = (s, c);
                let norm = (sn * sn + cs * cs).sqrt();
                let (sn, cs) = (sn / norm, cs / norm);
                for i in 0..3 {
                    out[i] = v[i] * cs + cross[i] * sn + u[i] * uv * (1.0 - cs);
                }
            }
            _ => out[..self.ambient_dim].copy_from_slice(&v[..self.ambient_dim]),
        }
    }

    fn check_vector(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.ambient_dim {
            return Err(Error::Domain(format!(
                "expected {} vector components, got {}",
                self.ambient_dim,
                w.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ManifoldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::HalfLine => write!(f, "half-line"),
            ModelKind::HalfSpace(d) => write!(f, "half-space:d={d}"),
            ModelKind::FlatDisk => write!(f, "disk"),
            ModelKind::SphericalCap(t) => write!(f, "cap:theta0={t}"),
        }
    }
}

impl FromStr for ManifoldModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let param = |key: &str| -> Result<&str> {
            let p = params.ok_or_else(|| Error::arg(format!("model '{s}' needs {key}=...")))?;
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::arg(format!("malformed model parameter '{p}'")))?;
            if k.trim() != key {
                return Err(Error::arg(format!("unknown model parameter '{k}'")));
            }
            Ok(v.trim())
        };
        match name {
            "half-line" if params.is_none() => Ok(Self::half_line()),
            "disk" if params.is_none() => Ok(Self::flat_disk()),
            "half-space" => {
                let d = param("d")?
                    .parse::<usize>()
                    .map_err(|e| Error::arg(format!("bad dimension: {e}")))?;
                Self::half_space(d)
            }
            "cap" => {
                let t = param("theta0")?
                    .parse::<f64>()
                    .map_err(|e| Error::arg(format!("bad theta0: {e}")))?;
                Self::spherical_cap(t)
            }
            _ => Err(Error::arg(format!("unknown model '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for s in ["half-line", "half-space:d=3", "disk", "cap:theta0=1.0472"] {
            let m: ManifoldModel = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("half-space:d=0".parse::<ManifoldModel>().is_err());
        assert!("cap:theta0=4".parse::<ManifoldModel>().is_err());
        assert!("torus".parse::<ManifoldModel>().is_err());
        assert!("cap:d=1".parse::<ManifoldModel>().is_err());
    }

    #[test]
    fn boundary_distance_examples() {
        let h = ManifoldModel::half_space(2).unwrap();
        assert_eq!(h.boundary_distance(&[3.0, 0.7]).unwrap(), 0.7);
        assert_eq!(ManifoldModel::flat_disk().boundary_distance(&[0.0, 0.0]).unwrap(), 1.0);
        let c = ManifoldModel::spherical_cap(FRAC_PI_2).unwrap();
        let x = ManifoldModel::point_from_polar(PI / 4.0, 0.3);
        assert!((c.boundary_distance(&x).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!(h.boundary_distance(&[0.0, -0.1]).is_err());
        assert!(c.boundary_distance(&[0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn normal_examples() {
        let d = ManifoldModel::flat_disk();
        let n = d.inward_normal(&[0.9, 0.0]).unwrap();
        assert_eq!(n.components, vec![-1.0, 0.0]);
        assert!(d.inward_normal(&[0.1, 0.0]).is_err());
        let c = ManifoldModel::spherical_cap(PI / 3.0).unwrap();
        let x = ManifoldModel::point_from_polar(PI / 4.0, 0.0);
        let n = c.inward_normal(&x).unwrap();
        // −∂_θ at φ = 0 is (−cos θ, 0, sin θ)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((n.components[0] + s).abs() < 1e-15);
        assert!(n.components[1].abs() < 1e-15);
        assert!((n.components[2] - s).abs() < 1e-15);
    }

    #[test]
    fn ricci_examples() {
        let c = ManifoldModel::spherical_cap(1.0).unwrap();
        let x = ManifoldModel::point_from_polar(0.5, 1.0);
        let b = c.tangent_basis(&x);
        let w = [b[0], b[2], b[4]];
        let r = c.ricci(&x, &w).unwrap();
        for i in 0..3 {
            assert!((r.components[i] - w[i]).abs() < 1e-15);
        }
        let d = ManifoldModel::flat_disk();
        assert_eq!(d.ricci(&[0.2, 0.1], &[1.0, 2.0]).unwrap().components, vec![0.0, 0.0]);
    }

    #[test]
    fn blend_limits() {
        let d = ManifoldModel::flat_disk();
        assert_eq!(d.blend(0.1), (1.0, 0.0));
        let (a, b) = d.blend(0.9);
        assert!(a.abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
        let (a, b) = d.blend(0.5);
        assert!((a * a + b * b - 1.0).abs() < 1e-15);
    }
}
