//! Monte Carlo estimators for the heat semigroups on functions and 1-forms,
//! the gradient formula and its martingale and weak-derivative companions,
//! plus a method-of-images reference for the flat models.
//!
//! Flat models use bridge-minimum monitoring with contact threshold 0, so
//! the damped transport is exactly the indicator of "not yet hit" at the
//! nodes. Curved models fall back to node monitoring with η = √Δt.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::damped::{damped_limit_state, DampedState};
use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, ModelKind, MAX_AMBIENT};
use crate::linalg::dot;
use crate::penalized::{DriverPath, TimeGrid};
use crate::reflected::{integrate_reflected, Monitoring, ReflectOptions, ReflectedPath};
use crate::rng::path_seed;
use crate::stats;
use crate::transport::{parallel_transport, TransportFrame};

const COMPAT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MCEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_paths: usize,
    pub config_digest: String,
}

impl MCEstimate {
    fn scalar(samples: &[f64], digest: String) -> Self {
        MCEstimate {
            mean: vec![stats::mean(samples)],
            stderr: vec![stats::stderr(samples)],
            n_paths: samples.len(),
            config_digest: digest,
        }
    }

    /// |mean| in units of stderr (first component); 0/0 counts as 0.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.mean[0] - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr[0]
        }
    }
}

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A scalar function on the model with its ambient gradient.
#[derive(Clone)]
pub struct ScalarField {
    pub name: String,
    value: ValueFn,
    gradient: GradFn,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField({})", self.name)
    }
}

/// Profile h(R) with derivative, used to build fields from the boundary distance.
#[derive(Clone, Copy)]
pub struct Profile {
    pub value: fn(f64) -> f64,
    pub derivative: fn(f64) -> f64,
}

fn gauss(y: f64) -> f64 {
    (-y * y).exp()
}
fn gauss_d(y: f64) -> f64 {
    -2.0 * y * (-y * y).exp()
}
fn cosn(y: f64) -> f64 {
    (PI * y).cos()
}
fn cosn_d(y: f64) -> f64 {
    -PI * (PI * y).sin()
}
fn one(_: f64) -> f64 {
    1.0
}
fn zero(_: f64) -> f64 {
    0.0
}

/// Names accepted by [`ScalarField::named`].
pub const FIELD_NAMES: &[&str] = &["gauss", "cos-neumann", "const"];

pub fn profile(name: &str) -> Result<Profile> {
    match name {
        "gauss" => Ok(Profile { value: gauss, derivative: gauss_d }),
        "cos-neumann" => Ok(Profile { value: cosn, derivative: cosn_d }),
        "const" => Ok(Profile { value: one, derivative: zero }),
        _ => Err(Error::arg(format!("unknown field '{name}' (known: {})", FIELD_NAMES.join(", ")))),
    }
}

impl ScalarField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        ScalarField { name: name.into(), value: Arc::new(value), gradient: Arc::new(gradient) }
    }

    /// x ↦ h(R(x)).
    pub fn from_profile(model: &ManifoldModel, name: impl Into<String>, p: Profile) -> Self {
        let (mv, mg) = (model.clone(), model.clone());
        ScalarField::new(
            name,
            move |x| (p.value)(mv.signed_distance(x)),
            move |x, out| {
                let r = mg.signed_distance(x);
                mg.grad_r_into(x, out);
                let s = (p.derivative)(r);
                out[..mg.ambient_dim()].iter_mut().for_each(|v| *v *= s);
            },
        )
    }

    pub fn named(model: &ManifoldModel, name: &str) -> Result<Self> {
        Ok(Self::from_profile(model, name, profile(name)?))
    }

    pub fn constant(model: &ManifoldModel, c: f64) -> Self {
        let d = model.ambient_dim();
        ScalarField::new(format!("const={c}"), move |_| c, move |_, out| out[..d].iter_mut().for_each(|v| *v = 0.0))
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }

    /// Largest |⟨∇f, ν⟩| over sampled boundary points.
    pub fn neumann_violation(&self, model: &ManifoldModel) -> f64 {
        let mut g = [0.0; MAX_AMBIENT];
        let mut nu = [0.0; MAX_AMBIENT];
        let da = model.ambient_dim();
        boundary_samples(model)
            .iter()
            .map(|x| {
                self.gradient(x, &mut g);
                model.grad_r_into(x, &mut nu);
                dot(&g[..da], &nu[..da]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A 1-form given by its ambient covector field.
#[derive(Clone)]
pub struct OneForm {
    pub name: String,
    covector: GradFn,
}

impl std::fmt::Debug for OneForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "OneForm({})", self.name)
    }
}

impl OneForm {
    pub fn new(name: impl Into<String>, covector: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        OneForm { name: name.into(), covector: Arc::new(covector) }
    }

    /// du for a scalar field u.
    pub fn exact(u: &ScalarField) -> Self {
        let g = u.gradient.clone();
        OneForm { name: format!("d{}", u.name), covector: g }
    }

    pub fn zero(model: &ManifoldModel) -> Self {
        let d = model.ambient_dim();
        OneForm::new("0", move |_, out| out[..d].iter_mut().for_each(|v| *v = 0.0))
    }

    pub fn covector(&self, x: &[f64], out: &mut [f64]) {
        (self.covector)(x, out)
    }

    /// Absolute boundary condition: φ(ν) = 0 and dφ(ν, ·) = 0 on sampled
    /// boundary points, the latter by central differences (h = 1e−5) along
    /// the boundary-adapted frame. Returns the largest violation.
    pub fn absolute_violation(&self, model: &ManifoldModel) -> f64 {
        let da = model.ambient_dim();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        let mut nu = [0.0; MAX_AMBIENT];
        let mut c = [0.0; MAX_AMBIENT];
        for x in boundary_samples(model) {
            model.grad_r_into(&x, &mut nu);
            self.covector(&x, &mut c);
            worst = worst.max(dot(&c[..da], &nu[..da]).abs());
            // dφ(ν, e) = ∂_ν φ(e) − ∂_e φ(ν), flat models only (ambient = chart)
            if model.is_flat_half_space() || model.kind() == ModelKind::FlatDisk {
                let deriv = |dir: &[f64], probe: &[f64]| -> f64 {
                    let mut p = x.clone();
                    let mut q = x.clone();
                    for i in 0..da {
                        p[i] += h * dir[i];
                        q[i] -= h * dir[i];
                    }
                    let mut cp = [0.0; MAX_AMBIENT];
                    let mut cq = [0.0; MAX_AMBIENT];
                    self.covector(&p, &mut cp);
                    self.covector(&q, &mut cq);
                    (dot(&cp[..da], probe) - dot(&cq[..da], probe)) / (2.0 * h)
                };
                for k in 0..da {
                    let mut e = vec![0.0; da];
                    e[k] = 1.0;
                    let v = deriv(&nu[..da], &e) - deriv(&e, &nu[..da]);
                    worst = worst.max(v.abs());
                }
            }
        }
        worst
    }
}

fn boundary_samples(model: &ManifoldModel) -> Vec<Vec<f64>> {
    let k = 64;
    match model.kind() {
        ModelKind::HalfLine => vec![vec![0.0]],
        ModelKind::HalfSpace(d) => (0..k)
            .map(|j| {
                let mut x: Vec<f64> = (0..d).map(|i| ((j * 7 + i * 13) % 17) as f64 / 4.0 - 2.0).collect();
                x[d - 1] = 0.0;
                x
            })
            .collect(),
        ModelKind::FlatDisk => (0..k)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / k as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        ModelKind::SphericalCap(t0) => (0..k)
            .map(|j| ManifoldModel::point_from_polar(t0, 2.0 * PI * j as f64 / k as f64))
            .collect(),
    }
}

/// Shared Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McSettings {
    pub horizon: f64,
    pub steps: usize,
    pub n_paths: usize,
    pub seed: u64,
}

impl McSettings {
    pub fn new(horizon: f64, dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        if !(dt > 0.0) || !(horizon > 0.0) {
            return Err(Error::arg("horizon and dt must be positive"));
        }
        if n_paths < 2 {
            return Err(Error::arg("need at least two paths"));
        }
        let steps = (horizon / dt).round().max(1.0) as usize;
        Ok(McSettings { horizon, steps, n_paths, seed })
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }
}

pub fn digest(parts: &[(&str, String)]) -> String {
    let mut sorted: Vec<_> = parts.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(b.0));
    let mut s = String::new();
    for (k, v) in sorted {
        let _ = writeln!(s, "{k}={v}");
    }
    let h = Sha256::digest(s.as_bytes());
    h.iter().take(8).fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    })
}

fn settings_digest(kind: &str, model: &ManifoldModel, s: &McSettings, extra: &[(&str, String)]) -> String {
    let mut parts = vec![
        ("estimator", kind.to_string()),
        ("model", model.to_string()),
        ("T", format!("{}", s.horizon)),
        ("steps", format!("{}", s.steps)),
        ("paths", format!("{}", s.n_paths)),
        ("seed", format!("{}", s.seed)),
    ];
    parts.extend(extra.iter().cloned());
    digest(&parts)
}

fn monitoring_for(model: &ManifoldModel) -> (Monitoring, Option<f64>) {
    if model.is_flat_half_space() {
        (Monitoring::BridgeMinimum, Some(0.0))
    } else {
        (Monitoring::Nodes, None)
    }
}

struct Sample {
    driver: DriverPath,
    path: ReflectedPath,
}

fn sample_path(model: &ManifoldModel, x: &[f64], s: &McSettings, grid: TimeGrid, index: usize) -> Result<Sample> {
    let driver = DriverPath::generate(path_seed(s.seed, index as u64), grid, model.frame_count());
    let (monitoring, eta) = monitoring_for(model);
    let path = integrate_reflected(model, x, &driver, grid, ReflectOptions { eta, monitoring })?;
    Ok(Sample { driver, path })
}

fn transport_limit(model: &ManifoldModel, path: &ReflectedPath) -> Result<(TransportFrame, DampedState)> {
    let frame = parallel_transport(model, path)?;
    let state = damped_limit_state(model, path, &frame, path.eta)?;
    Ok((frame, state))
}

/// Ambient vector P_i w_i v.
fn damped_image(frame: &TransportFrame, state: &DampedState, i: usize, v: &[f64]) -> Vec<f64> {
    let wv = state.apply(i, v);
    let mut out = vec![0.0; frame.ambient];
    frame.apply(i, &wv, &mut out);
    out
}

fn par_samples<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

/// u(T, x) = E f(Y_T).
pub fn neumann_heat_mc(model: &ManifoldModel, f: &ScalarField, s: &McSettings, x: &[f64]) -> Result<MCEstimate> {
    model.check_point(x)?;
    let grid = s.grid()?;
    let vals = par_samples(s.n_paths, |i| {
        let smp = sample_path(model, x, s, grid, i)?;
        Ok(f.value(smp.path.point(grid.steps())))
    })?;
    let d = settings_digest("neumann", model, s, &[("f", f.name.clone()), ("x", format!("{x:?}"))]);
    Ok(MCEstimate::scalar(&vals, d))
}

/// Central finite difference of `neumann_heat_mc` along `dir`, coupled seeds.
pub fn neumann_gradient_fd(
    model: &ManifoldModel,
    f: &ScalarField,
    s: &McSettings,
    x: &[f64],
    dir: &[f64],
    h: f64,
) -> Result<MCEstimate> {
    let grid = s.grid()?;
    let xp: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a + h * b).collect();
    let xm: Vec<f64> = x.iter().zip(dir).map(|(a, b)| a - h * b).collect();
    model.check_point(&xp)?;
    model.check_point(&xm)?;
    let vals = par_samples(s.n_paths, |i| {
        let p = sample_path(model, &xp, s, grid, i)?;
        let m = sample_path(model, &xm, s, grid, i)?;
        let n = grid.steps();
        Ok((f.value(p.path.point(n)) - f.value(m.path.point(n))) / (2.0 * h))
    })?;
    let d = settings_digest("neumann-fd", model, s, &[("f", f.name.clone()), ("x", format!("{x:?}")), ("h", h.to_string())]);
    Ok(MCEstimate::scalar(&vals, d))
}

fn check_vector(model: &ManifoldModel, v: &[f64]) -> Result<()> {
    if v.len() != model.dim() {
        return Err(Error::arg(format!("v needs {} frame coordinates, got {}", model.dim(), v.len())));
    }
    Ok(())
}

/// E φ₀(W_T v) with W the limit damped transport; v in the tangent basis at x.
pub fn one_form_mc(model: &ManifoldModel, phi: &OneForm, s: &McSettings, x: &[f64], v: &[f64]) -> Result<MCEstimate> {
    model.check_point(x)?;
    check_vector(model, v)?;
    let viol = phi.absolute_violation(model);
    if viol > COMPAT_TOL {
        return Err(Error::arg(format!("1-form violates absolute boundary conditions by {viol:.3e}")));
    }
    let grid = s.grid()?;
    let n = grid.steps();
    let da = model.ambient_dim();
    let vals = par_samples(s.n_paths, |i| {
        let smp = sample_path(model, x, s, grid, i)?;
        let (frame, state) = transport_limit(model, &smp.path)?;
        let u = damped_image(&frame, &state, n, v);
        let mut c = [0.0; MAX_AMBIENT];
        phi.covector(smp.path.point(n), &mut c);
        Ok(dot(&c[..da], &u))
    })?;
    let d = settings_digest("one-form", model, s, &[("phi", phi.name.clone()), ("x", format!("{x:?}")), ("v", format!("{v:?}"))]);
    Ok(MCEstimate::scalar(&vals, d))
}

/// d(Q_T f)(v) ≈ (1/T) E[f(Y_T) Σ_i Σ_k ⟨W_{t_i} v, σ_k(Y_{t_i})⟩ ΔB_i^k].
pub fn bismut_gradient_mc(model: &ManifoldModel, f: &ScalarField, s: &McSettings, x: &[f64], v: &[f64]) -> Result<MCEstimate> {
    model.check_point(x)?;
    check_vector(model, v)?;
    let viol = f.neumann_violation(model);
    if viol > COMPAT_TOL {
        return Err(Error::arg(format!("field violates the Neumann condition by {viol:.3e}")));
    }
    let grid = s.grid()?;
    let n = grid.steps();
    let m = model.frame_count();
    let vals = par_samples(s.n_paths, |i| {
        let smp = sample_path(model, x, s, grid, i)?;
        let (frame, state) = transport_limit(model, &smp.path)?;
        let mut mart = 0.0;
        for j in 0..n {
            let u = damped_image(&frame, &state, j, v);
            if u.iter().all(|&c| c == 0.0) {
                continue;
            }
            let fr = model.frame_at(smp.path.point(j));
            let db = smp.driver.increment(j);
            for k in 0..m {
                mart += dot(&u, fr.field(k)) * db[k];
            }
        }
        Ok(f.value(smp.path.point(n)) * mart / s.horizon)
    })?;
    let d = settings_digest("bismut", model, s, &[("f", f.name.clone()), ("x", format!("{x:?}")), ("v", format!("{v:?}"))]);
    Ok(MCEstimate::scalar(&vals, d))
}

/// F(t, y) = Q_{T−t} f(y) on a half-space, f a profile of the normal coordinate.
#[derive(Clone, Copy)]
pub struct ImageKernelSolution {
    pub profile: Profile,
    pub horizon: f64,
}

impl ImageKernelSolution {
    /// ∂F/∂y_d at (t, y); the tangential derivatives vanish.
    pub fn normal_derivative(&self, t: f64, y_normal: f64) -> Result<f64> {
        let tau = self.horizon - t;
        if tau <= 0.0 {
            return Ok((self.profile.derivative)(y_normal));
        }
        // differentiating the Neumann kernel moves f' onto the Dirichlet kernel
        image_kernel_oracle(KernelKind::Dirichlet, tau, y_normal, &self.profile.derivative)
    }
}

/// E[dF(T, Y_T)(W_T v)] − dF(0, x)(v); half-space models only.
pub fn martingale_check(
    model: &ManifoldModel,
    sol: &ImageKernelSolution,
    s: &McSettings,
    x: &[f64],
    v: &[f64],
) -> Result<MCEstimate> {
    if !model.is_flat_half_space() {
        return Err(Error::Unsupported("martingale check needs the image-kernel solution of a half-space".into()));
    }
    model.check_point(x)?;
    check_vector(model, v)?;
    if (s.horizon - sol.horizon).abs() > 1e-12 {
        return Err(Error::arg("solution horizon differs from the simulation horizon"));
    }
    let d = model.dim();
    let start = sol.normal_derivative(0.0, x[d - 1])? * v[d - 1];
    let grid = s.grid()?;
    let n = grid.steps();
    let vals = par_samples(s.n_paths, |i| {
        let smp = sample_path(model, x, s, grid, i)?;
        let (frame, state) = transport_limit(model, &smp.path)?;
        let u = damped_image(&frame, &state, n, v);
        let y = smp.path.point(n);
        Ok(sol.normal_derivative(s.horizon, y[d - 1])? * u[d - 1] - start)
    })?;
    let dg = settings_digest("martingale", model, s, &[("x", format!("{x:?}")), ("v", format!("{v:?}"))]);
    Ok(MCEstimate::scalar(&vals, dg))
}

/// 8-point Gauss–Legendre nodes and weights on [−1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// Straight curve γ(u) = base + u·direction in the chart.
#[derive(Clone, Debug)]
pub struct LineCurve {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

impl LineCurve {
    pub fn at(&self, u: f64) -> Vec<f64> {
        self.base.iter().zip(&self.direction).map(|(b, d)| b + u * d).collect()
    }
}

/// Mean of f(Y_t(γ(u₂))) − f(Y_t(γ(u₁))) − ∫ df(W_t(u) γ̇(u)) du over
/// coupled flows, the u-integral by 8-point Gauss–Legendre.
pub fn weak_derivative_check(
    model: &ManifoldModel,
    f: &ScalarField,
    curve: &LineCurve,
    u1: f64,
    u2: f64,
    s: &McSettings,
) -> Result<MCEstimate> {
    if !model.is_flat_half_space() {
        return Err(Error::Unsupported("weak-derivative check on curved models".into()));
    }
    let da = model.ambient_dim();
    if curve.base.len() != da || curve.direction.len() != da {
        return Err(Error::arg("curve has the wrong dimension"));
    }
    let grid = s.grid()?;
    let n = grid.steps();
    let (lo, hi) = (u1.min(u2), u1.max(u2));
    for u in [lo, hi] {
        model.check_point(&curve.at(u))?;
    }
    let sign = if u2 >= u1 { 1.0 } else { -1.0 };
    let vals = par_samples(s.n_paths, |i| {
        if u1 == u2 {
            return Ok(0.0);
        }
        // one driver shared by every start point on the curve
        let driver = DriverPath::generate(path_seed(s.seed, i as u64), grid, model.frame_count());
        let (monitoring, eta) = monitoring_for(model);
        let flow = |u: f64| integrate_reflected(model, &curve.at(u), &driver, grid, ReflectOptions { eta, monitoring });
        let diff = f.value(flow(u2)?.point(n)) - f.value(flow(u1)?.point(n));
        let mut integral = 0.0;
        let mut g = [0.0; MAX_AMBIENT];
        for (node, w) in GL8 {
            let u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * node;
            let path = flow(u)?;
            let (frame, state) = transport_limit(model, &path)?;
            // flat: the frame is the identity, so γ̇ in frame coordinates is γ̇ itself
            let img = damped_image(&frame, &state, n, &curve.direction);
            f.gradient(path.point(n), &mut g);
            integral += 0.5 * (hi - lo) * w * dot(&g[..da], &img);
        }
        Ok(diff - sign * integral)
    })?;
    let d = settings_digest(
        "weak-derivative",
        model,
        s,
        &[("f", f.name.clone()), ("curve", format!("{:?}+u{:?}", curve.base, curve.direction)), ("u", format!("{u1},{u2}"))],
    );
    Ok(MCEstimate::scalar(&vals, d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelKind {
    Neumann,
    Dirichlet,
}

/// ∫₀^∞ f(y) (g_T(x − y) ± g_T(x + y)) dy by adaptive Gauss–Kronrod,
/// relative accuracy 1e−10 (absolute 1e−13 near zero).
pub fn image_kernel_oracle(kind: KernelKind, t: f64, x: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::arg(format!("T must be positive, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::arg(format!("x must be ≥ 0, got {x}")));
    }
    let sd = t.sqrt();
    let norm = 1.0 / (2.0 * PI * t).sqrt();
    let sign = match kind {
        KernelKind::Neumann => 1.0,
        KernelKind::Dirichlet => -1.0,
    };
    let integrand = |y: f64| {
        let a = (x - y) / sd;
        let b = (x + y) / sd;
        f(y) * norm * ((-0.5 * a * a).exp() + sign * (-0.5 * b * b).exp())
    };
    let reach = 40.0 * sd;
    let lo = (x - reach).max(0.0);
    let hi = x + reach;
    let mut pieces = vec![lo];
    if x > lo {
        pieces.push(x);
    }
    pieces.push(hi);
    let mut total = 0.0;
    for w in pieces.windows(2) {
        total += adaptive_gk(&integrand, w[0], w[1], 1e-13, 1e-10, 60)?;
    }
    Ok(total)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adaptive_gk(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64, depth: u32) -> Result<f64> {
    let (k, err) = gk15(f, a, b);
    if err <= abs_tol.max(rel_tol * k.abs()) {
        return Ok(k);
    }
    if depth == 0 {
        return Err(Error::Numeric(format!("quadrature did not converge on [{a}, {b}]")));
    }
    let m = 0.5 * (a + b);
    Ok(adaptive_gk(f, a, m, 0.5 * abs_tol, rel_tol, depth - 1)? + adaptive_gk(f, m, b, 0.5 * abs_tol, rel_tol, depth - 1)?)
}
