//! The penalized SDE `dY^a = Σ σ_k(Y^a) ∘ dB^k + σ₀ dt + A^a(Y^a) dt` with
//! `A^a = ∇ ln tanh(R/a)`, its local-time approximation `L^a` and the damping
//! rate `c_a`.
//!
//! The scheme is the geodesic Euler step `Y' = exp_Y(Σ σ_k ΔB^k + A^a Δt)`.
//! Because Σ σ_k σ_kᵀ = I and σ₀ = −½ Σ ∇_{σ_k} σ_k, this step already has
//! generator ½Δ, so σ₀ never enters the update explicitly.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, TangentVector, MAX_AMBIENT};
use crate::rng::keyed_normal;
use crate::skorohod1d::{RealPath, MAX_BISECTIONS, MAX_DEPTH};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::arg(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::arg("grid needs at least one step"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.time(i)).collect()
    }
}

/// Brownian increments on a grid, N × m, reproducible from the seed.
#[derive(Clone, Debug)]
pub struct DriverPath {
    seed: u64,
    grid: TimeGrid,
    components: usize,
    increments: Vec<f64>,
}

impl DriverPath {
    pub fn generate(seed: u64, grid: TimeGrid, components: usize) -> Self {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let sd = grid.dt().sqrt();
        let increments = (0..grid.steps() * components)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        DriverPath { seed, grid, components, increments }
    }

    pub fn zero(grid: TimeGrid, components: usize) -> Self {
        DriverPath { seed: 0, grid, components, increments: vec![0.0; grid.steps() * components] }
    }

    pub fn from_increments(seed: u64, grid: TimeGrid, components: usize, increments: Vec<f64>) -> Result<Self> {
        if increments.len() != grid.steps() * components {
            return Err(Error::arg(format!(
                "expected {} increments, got {}",
                grid.steps() * components,
                increments.len()
            )));
        }
        Ok(DriverPath { seed, grid, components, increments })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    #[inline]
    pub fn increment(&self, step: usize) -> &[f64] {
        &self.increments[step * self.components..(step + 1) * self.components]
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// B^k at the nodes.
    pub fn component_path(&self, k: usize) -> RealPath {
        let it = (0..self.grid.steps()).map(|i| self.increments[i * self.components + k]);
        RealPath::from_increments(self.grid.dt(), it).expect("grid is valid")
    }

    /// The same driver restricted to its first `m` components.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m > self.components {
            return Err(Error::arg(format!("driver has {} components, need {m}", self.components)));
        }
        let mut inc = Vec::with_capacity(self.grid.steps() * m);
        for i in 0..self.grid.steps() {
            inc.extend_from_slice(&self.increment(i)[..m]);
        }
        Ok(DriverPath { seed: self.seed, grid: self.grid, components: m, increments: inc })
    }
}

#[derive(Clone, Debug)]
pub struct PenalizedPath {
    pub a: f64,
    pub grid: TimeGrid,
    pub ambient: usize,
    /// (N+1) × ambient, row per node.
    pub points: Vec<f64>,
    pub r_values: Vec<f64>,
    pub l_a: Vec<f64>,
    pub c_a: Vec<f64>,
    /// ∫₀^{t_i} c_a ds accumulated over the sub-steps actually taken.
    pub c_a_integral: Vec<f64>,
    /// Number of bisections performed by the guards.
    pub bisections: u64,
}

impl PenalizedPath {
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
}

/// |A^a| = 2 / (a sinh(2R/a)).
#[inline]
pub fn drift_magnitude(a: f64, r: f64) -> f64 {
    let u = 2.0 * r / a;
    let v = if u > 30.0 {
        let e = (-u).exp();
        4.0 / a * e / (1.0 - e * e)
    } else {
        2.0 / (a * u.sinh())
    };
    if v < 1e-300 {
        0.0
    } else {
        v
    }
}

/// c_a = (4/a²) cosh(2R/a) / sinh²(2R/a).
#[inline]
pub fn c_a_value(a: f64, r: f64) -> f64 {
    let u = 2.0 * r / a;
    if u > 30.0 {
        let e = (-u).exp();
        let q = 1.0 - e * e;
        4.0 / (a * a) * 2.0 * e * (1.0 + e * e) / (q * q)
    } else {
        let s = u.sinh();
        4.0 / (a * a) * u.cosh() / (s * s)
    }
}

pub fn drift_field(model: &ManifoldModel, a: f64, x: &[f64]) -> Result<TangentVector> {
    if !(a > 0.0) {
        return Err(Error::arg(format!("a must be positive, got {a}")));
    }
    model.check_point(x)?;
    let r = model.signed_distance(x);
    if !(r > 0.0) {
        return Err(Error::arg(format!("penalized drift diverges on the boundary (R = {r})")));
    }
    let mut g = vec![0.0; model.ambient_dim()];
    model.grad_r_into(x, &mut g);
    let m = drift_magnitude(a, r);
    g.iter_mut().for_each(|v| *v *= m);
    Ok(TangentVector { base: x.to_vec(), components: g })
}

struct Stepper<'a> {
    model: &'a ManifoldModel,
    a: f64,
    seed: u64,
    m: usize,
    da: usize,
    max_bisections: u32,
    bisections: u64,
}

#[derive(Default)]
struct StepAccum {
    l: f64,
    c: f64,
}

impl Stepper<'_> {
    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        x: &mut [f64; MAX_AMBIENT],
        h: f64,
        db: &[f64],
        step: u64,
        level: u32,
        pos: u64,
        fails: u32,
        acc: &mut StepAccum,
    ) -> std::result::Result<(), String> {
        let r = self.model.signed_distance(&x[..self.da]);
        if !(r > 0.0) {
            return Err(format!("left the interior (R = {r})"));
        }
        let mag = drift_magnitude(self.a, r);
        if level < MAX_DEPTH && mag * h > 0.5 * r {
            return self.split(x, h, db, step, level, pos, 0, acc);
        }
        let frame = self.model.frame_at(&x[..self.da]);
        let mut v = [0.0; MAX_AMBIENT];
        frame.combine(db, &mut v);
        if mag > 0.0 {
            let mut g = [0.0; MAX_AMBIENT];
            self.model.grad_r_into(&x[..self.da], &mut g);
            for i in 0..self.da {
                v[i] += mag * h * g[i];
            }
        }
        let mut y = [0.0; MAX_AMBIENT];
        self.model.exp_into(&x[..self.da], &v[..self.da], &mut y);
        if self.model.signed_distance(&y[..self.da]) > 0.0 {
            acc.l += mag * h;
            acc.c += c_a_value(self.a, r) * h;
            *x = y;
            return Ok(());
        }
        if fails < self.max_bisections && level < MAX_DEPTH {
            return self.split(x, h, db, step, level, pos, fails + 1, acc);
        }
        Err(format!("positivity guard exhausted after {fails} bisections"))
    }

    #[allow(clippy::too_many_arguments)]
    fn split(
        &mut self,
        x: &mut [f64; MAX_AMBIENT],
        h: f64,
        db: &[f64],
        step: u64,
        level: u32,
        pos: u64,
        fails: u32,
        acc: &mut StepAccum,
    ) -> std::result::Result<(), String> {
        self.bisections += 1;
        let sh = 0.5 * h.sqrt();
        let mut left = [0.0; MAX_AMBIENT];
        let mut right = [0.0; MAX_AMBIENT];
        for k in 0..self.m {
            let z = keyed_normal(self.seed, step, level as u64 + 1, pos, k as u64);
            left[k] = 0.5 * db[k] + sh * z;
            right[k] = db[k] - left[k];
        }
        self.advance(x, 0.5 * h, &left[..self.m], step, level + 1, pos.wrapping_mul(2), fails, acc)?;
        self.advance(x, 0.5 * h, &right[..self.m], step, level + 1, pos.wrapping_mul(2).wrapping_add(1), fails, acc)
    }
}

pub fn integrate_penalized(
    model: &ManifoldModel,
    a: f64,
    x0: &[f64],
    driver: &DriverPath,
    grid: TimeGrid,
) -> Result<PenalizedPath> {
    if !(a > 0.0) {
        return Err(Error::arg(format!("a must be positive, got {a}")));
    }
    model.check_point(x0)?;
    if !(model.signed_distance(x0) > 0.0) {
        return Err(Error::arg("penalized start must lie in the interior"));
    }
    check_driver(model, driver, grid)?;
    let da = model.ambient_dim();
    let n = grid.steps();
    let dt = grid.dt();
    let mut st = Stepper {
        model,
        a,
        seed: driver.seed(),
        m: model.frame_count(),
        da,
        max_bisections: MAX_BISECTIONS,
        bisections: 0,
    };
    let mut points = Vec::with_capacity((n + 1) * da);
    let mut r_values = Vec::with_capacity(n + 1);
    let mut l_a = Vec::with_capacity(n + 1);
    let mut c_a = Vec::with_capacity(n + 1);
    let mut c_int = Vec::with_capacity(n + 1);
    let mut x = [0.0; MAX_AMBIENT];
    x[..da].copy_from_slice(x0);
    let (mut l, mut c) = (0.0, 0.0);
    let push = |x: &[f64; MAX_AMBIENT], l: f64, c: f64, points: &mut Vec<f64>, r_values: &mut Vec<f64>, l_a: &mut Vec<f64>, c_a: &mut Vec<f64>, c_int: &mut Vec<f64>| {
        let r = model.signed_distance(&x[..da]);
        points.extend_from_slice(&x[..da]);
        r_values.push(r);
        l_a.push(l);
        c_a.push(c_a_value(a, r));
        c_int.push(c);
    };
    push(&x, l, c, &mut points, &mut r_values, &mut l_a, &mut c_a, &mut c_int);
    for i in 0..n {
        let mut acc = StepAccum::default();
        st.advance(&mut x, dt, &driver.increment(i)[..st.m], i as u64, 0, 0, 0, &mut acc)
            .map_err(|reason| Error::Integration { node: i + 1, reason })?;
        l += acc.l;
        c += acc.c;
        push(&x, l, c, &mut points, &mut r_values, &mut l_a, &mut c_a, &mut c_int);
    }
    Ok(PenalizedPath {
        a,
        grid,
        ambient: da,
        points,
        r_values,
        l_a,
        c_a,
        c_a_integral: c_int,
        bisections: st.bisections,
    })
}

pub(crate) fn check_driver(model: &ManifoldModel, driver: &DriverPath, grid: TimeGrid) -> Result<()> {
    if driver.grid() != grid {
        return Err(Error::arg("driver grid does not match the integration grid"));
    }
    if driver.components() < model.frame_count() {
        return Err(Error::arg(format!(
            "model {model} needs {} driver components, got {}",
            model.frame_count(),
            driver.components()
        )));
    }
    Ok(())
}

/// c_a(R_i) at every node.
pub fn c_a_series(a: f64, path: &PenalizedPath) -> Vec<f64> {
    path.r_values.iter().map(|&r| c_a_value(a, r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_driver_shapes() {
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 3).is_err());
        let g = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!(g.dt(), 0.25);
        let d = DriverPath::generate(3, g, 2);
        assert_eq!(d.increments().len(), 8);
        let d2 = DriverPath::generate(3, g, 2);
        assert_eq!(d.increments(), d2.increments());
        assert_eq!(d.component_path(1).values()[1], d.increment(0)[1]);
    }

    #[test]
    fn large_argument_branches_are_continuous() {
        let a = 0.1;
        let r = 15.0 * a; // u = 2R/a = 30
        let below = drift_magnitude(a, r * (1.0 - 1e-12));
        let above = drift_magnitude(a, r * (1.0 + 1e-12));
        assert!((below / above - 1.0).abs() < 1e-9);
        let below = c_a_value(a, r * (1.0 - 1e-12));
        let above = c_a_value(a, r * (1.0 + 1e-12));
        assert!((below / above - 1.0).abs() < 1e-9);
        assert_eq!(drift_magnitude(1e-3, 1.0), 0.0);
    }

    #[test]
    fn zero_noise_deep_interior_is_stationary() {
        let m = ManifoldModel::half_space(2).unwrap();
        let g = TimeGrid::new(1.0, 100).unwrap();
        let d = DriverPath::zero(g, 2);
        let p = integrate_penalized(&m, 0.05, &[0.3, 2.0], &d, g).unwrap();
        assert!(*p.l_a.last().unwrap() < 1e-12);
        for i in 0..p.len() {
            assert_eq!(p.point(i)[0], 0.3);
            assert!((p.point(i)[1] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let m = ManifoldModel::half_line();
        let g = TimeGrid::new(1.0, 10).unwrap();
        let d = DriverPath::zero(g, 1);
        assert!(integrate_penalized(&m, 0.1, &[0.0], &d, g).is_err());
        assert!(integrate_penalized(&m, 0.0, &[1.0], &d, g).is_err());
        let g2 = TimeGrid::new(1.0, 11).unwrap();
        assert!(integrate_penalized(&m, 0.1, &[1.0], &d, g2).is_err());
        assert!(drift_field(&m, 0.1, &[0.0]).is_err());
    }
}
