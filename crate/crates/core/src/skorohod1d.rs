//! Half-line machinery: the Skorohod map, hitting and coalescence times, the
//! exact derivative flow, and the one-dimensional penalized family
//! `X^a = x + B + ∫ ∂ₓ ln u^a(X^a) ds` with `u^a(x) = φ(x/√a)`.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::error::{Error, Result};
use crate::rng::keyed_normal;

/// Positivity-guard bisections allowed per Euler step.
pub const MAX_BISECTIONS: u32 = 20;
/// Hard cap on the total sub-step depth (drift-size splits included). Past
/// level 64 the bridge position index wraps; the level is part of the key.
pub const MAX_DEPTH: u32 = 200;

/// Values on a strictly increasing time grid, linear in between.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPath {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl RealPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::arg(format!(
                "grid has {} nodes but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::arg("empty path"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::arg("time grid must be strictly increasing"));
        }
        Ok(RealPath { times, values })
    }

    /// Uniform grid `0, dt, 2dt, …`.
    pub fn uniform(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::arg("dt must be positive"));
        }
        let times = (0..values.len()).map(|i| i as f64 * dt).collect();
        Self::new(times, values)
    }

    /// Cumulative sums of increments, starting at 0.
    pub fn from_increments(dt: f64, increments: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for d in increments {
            acc += d;
            values.push(acc);
        }
        Self::uniform(dt, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Linear interpolation; clamps outside the grid.
    pub fn at(&self, t: f64) -> f64 {
        let k = self.segment(t);
        if k + 1 == self.len() {
            return self.values[k];
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    /// Index k with t_k ≤ t < t_{k+1} (last index when t ≥ T).
    fn segment(&self, t: f64) -> usize {
        match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            p => p - 1,
        }
    }
}

/// Solution (g, h) of the Skorohod problem for a start x and driver f.
#[derive(Clone, Debug)]
pub struct SkorohodSolution {
    start: f64,
    driver: RealPath,
    pub reflected: RealPath,
    pub local_time: RealPath,
}

impl SkorohodSolution {
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn driver(&self) -> &RealPath {
        &self.driver
    }

    /// Exact local time at an arbitrary time of the piecewise-linear problem.
    pub fn local_time_at(&self, t: f64) -> f64 {
        let f = &self.driver;
        let k = f.segment(t);
        let m = f.values[..=k].iter().copied().fold(f.at(t), f64::min);
        (-(self.start + m)).max(0.0)
    }

    pub fn reflected_at(&self, t: f64) -> f64 {
        self.start + self.driver.at(t) + self.local_time_at(t)
    }
}

pub fn skorohod_map(x: f64, f: &RealPath) -> Result<SkorohodSolution> {
    if !(x >= 0.0) {
        return Err(Error::arg(format!("start must be ≥ 0, got {x}")));
    }
    if f.values[0] != 0.0 {
        return Err(Error::arg("driver must start at 0"));
    }
    let n = f.len();
    let mut g = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    // Γ = max(x + f, f − min f): after contact Γ no longer depends on x, so
    // coalescence and monotonicity in x hold exactly in floating point too
    let mut run_min = f64::INFINITY;
    for &fi in &f.values {
        run_min = run_min.min(fi);
        h.push((-(x + run_min)).max(0.0));
        g.push((x + fi).max(fi - run_min));
    }
    Ok(SkorohodSolution {
        start: x,
        driver: f.clone(),
        reflected: RealPath { times: f.times.clone(), values: g },
        local_time: RealPath { times: f.times.clone(), values: h },
    })
}

/// τ(x): first zero of the reflected path, linearly interpolated inside the
/// step; `f64::INFINITY` if the path never reaches 0.
pub fn first_hit_zero(sol: &SkorohodSolution) -> f64 {
    let f = &sol.driver;
    let x = sol.start;
    if x == 0.0 {
        return 0.0;
    }
    for i in 1..f.len() {
        let s = x + f.values[i];
        if s <= 0.0 {
            let prev = x + f.values[i - 1];
            let (t0, t1) = (f.times[i - 1], f.times[i]);
            return t0 + prev / (prev - s) * (t1 - t0);
        }
    }
    f64::INFINITY
}

/// ∂ₓX_t(x) = 1_{t < τ(x)} at the nodes.
pub fn derivative_flow_exact(x: f64, f: &RealPath) -> Result<RealPath> {
    let tau = first_hit_zero(&skorohod_map(x, f)?);
    let values = f.times.iter().map(|&t| if t < tau { 1.0 } else { 0.0 }).collect();
    Ok(RealPath { times: f.times.clone(), values })
}

/// First time the reflected paths from x < y agree.
pub fn coalescence_time(x: f64, y: f64, f: &RealPath) -> Result<f64> {
    if !(x < y) {
        return Err(Error::arg(format!("coalescence needs x < y, got x = {x}, y = {y}")));
    }
    let gx = skorohod_map(x, f)?.reflected;
    let gy = skorohod_map(y, f)?.reflected;
    for i in 1..f.len() {
        let d = gy.values[i] - gx.values[i];
        if d <= 1e-12 * (1.0 + gy.values[i].abs()) {
            let (t0, t1) = (f.times[i - 1], f.times[i]);
            // the gap is y − x − L_x(t): it closes where y + f reaches 0,
            // which is linear inside the step
            let (s0, s1) = (y + f.values[i - 1], y + f.values[i]);
            if s1 <= 0.0 && s0 > 0.0 {
                return Ok(t0 + s0 / (s0 - s1) * (t1 - t0));
            }
            return Ok(if s0 <= 0.0 { t0 } else { t1 });
        }
    }
    Ok(f64::INFINITY)
}

/// |x + f|: equal in law to the reflected path but not a flow.
pub fn tanaka_reflection(x: f64, f: &RealPath) -> Result<RealPath> {
    if !(x >= 0.0) {
        return Err(Error::arg(format!("start must be ≥ 0, got {x}")));
    }
    let values = f.values.iter().map(|v| (x + v).abs()).collect();
    Ok(RealPath { times: f.times.clone(), values })
}

// -------------------------------------------------------------------------
// the u^a family

/// φ(y) = ∫₀^y e^{−s²/2} ds.
pub fn phi(y: f64) -> f64 {
    let c = FRAC_PI_2.sqrt();
    if y > 6.0 {
        c - (-0.5 * y * y).exp() / y
    } else {
        c * libm::erf(y / SQRT_2)
    }
}

/// (ln φ)'(y) = e^{−y²/2} / φ(y).
fn log_phi_prime(y: f64) -> f64 {
    if y > 6.0 {
        // ratio of a tiny numerator to ≈ √(π/2); log space avoids underflow to 0/0
        let ln = -0.5 * y * y - phi(y).ln();
        ln.exp()
    } else {
        (-0.5 * y * y).exp() / phi(y)
    }
}

fn check_ax(a: f64, x: f64) -> Result<()> {
    if !(a > 0.0) {
        return Err(Error::arg(format!("a must be positive, got {a}")));
    }
    if !(x > 0.0) {
        return Err(Error::arg(format!("penalized drift diverges at x = {x} ≤ 0")));
    }
    Ok(())
}

/// ∂ₓ ln u^a(x) = a^{−1/2} e^{−x²/2a} / φ(x/√a).
pub fn penalized_drift_1d(a: f64, x: f64) -> Result<f64> {
    check_ax(a, x)?;
    Ok(drift_unchecked(a, x))
}

#[inline]
fn drift_unchecked(a: f64, x: f64) -> f64 {
    let sa = a.sqrt();
    log_phi_prime(x / sa) / sa
}

/// ∂²ₓ ln u^a(x) = a^{−1}(−yA − A²), y = x/√a, A = (ln φ)'(y).
pub fn log_u_second_derivative(a: f64, x: f64) -> Result<f64> {
    check_ax(a, x)?;
    Ok(second_unchecked(a, x))
}

#[inline]
fn second_unchecked(a: f64, x: f64) -> f64 {
    let y = x / a.sqrt();
    let aa = log_phi_prime(y);
    (-y * aa - aa * aa) / a
}

/// ∂³ₓ ln u^a(x) = a^{−3/2}((y² − 1)A + 3yA² + 2A³).
pub fn log_u_third_derivative(a: f64, x: f64) -> Result<f64> {
    check_ax(a, x)?;
    let y = x / a.sqrt();
    let aa = log_phi_prime(y);
    Ok(((y * y - 1.0) * aa + 3.0 * y * aa * aa + 2.0 * aa * aa * aa) / (a * a.sqrt()))
}

/// Options of the 1D Euler scheme.
#[derive(Clone, Copy, Debug)]
pub struct Scheme1d {
    /// Key of the Brownian-bridge refinements used by the bisection guard.
    pub bridge_seed: u64,
    pub max_bisections: u32,
}

impl Default for Scheme1d {
    fn default() -> Self {
        Scheme1d { bridge_seed: 0, max_bisections: MAX_BISECTIONS }
    }
}

/// Euler–Maruyama for X^a driven by `driver`. A step is bisected along a
/// Brownian bridge whenever the drift would move the point by more than half
/// its distance to 0, or the proposal lands at or below 0.
pub fn penalized_path_1d(a: f64, x: f64, driver: &RealPath, scheme: Scheme1d) -> Result<RealPath> {
    check_ax(a, x)?;
    let f = driver;
    let mut values = Vec::with_capacity(f.len());
    values.push(x);
    let mut cur = x;
    for i in 1..f.len() {
        let h = f.times[i] - f.times[i - 1];
        let db = f.values[i] - f.values[i - 1];
        cur = advance_1d(a, cur, h, db, &scheme, (i - 1) as u64, 0, 0, 0)
            .map_err(|reason| Error::Integration { node: i, reason })?;
        values.push(cur);
    }
    Ok(RealPath { times: f.times.clone(), values })
}

#[allow(clippy::too_many_arguments)]
fn advance_1d(
    a: f64,
    x: f64,
    h: f64,
    db: f64,
    scheme: &Scheme1d,
    step: u64,
    level: u32,
    pos: u64,
    fails: u32,
) -> std::result::Result<f64, String> {
    let drift = drift_unchecked(a, x);
    if level < MAX_DEPTH && drift * h > 0.5 * x {
        return split_1d(a, x, h, db, scheme, step, level, pos, 0);
    }
    let y = x + drift * h + db;
    if y > 0.0 {
        return Ok(y);
    }
    if fails < scheme.max_bisections && level < MAX_DEPTH {
        return split_1d(a, x, h, db, scheme, step, level, pos, fails + 1);
    }
    Err(format!("positivity guard exhausted after {fails} bisections"))
}

#[allow(clippy::too_many_arguments)]
fn split_1d(
    a: f64,
    x: f64,
    h: f64,
    db: f64,
    scheme: &Scheme1d,
    step: u64,
    level: u32,
    pos: u64,
    fails: u32,
) -> std::result::Result<f64, String> {
    let z = keyed_normal(scheme.bridge_seed, step, level as u64 + 1, pos, 0);
    let mid = 0.5 * db + 0.5 * h.sqrt() * z;
    let half = 0.5 * h;
    let xm = advance_1d(a, x, half, mid, scheme, step, level + 1, pos.wrapping_mul(2), fails)?;
    advance_1d(a, xm, half, db - mid, scheme, step, level + 1, pos.wrapping_mul(2).wrapping_add(1), fails)
}

/// V^a_t = exp ∫₀ᵗ ∂²ₓ ln u^a(X^a_s) ds, left-endpoint rule on the nodes.
pub fn derivative_flow_penalized(a: f64, path: &RealPath) -> Result<RealPath> {
    if !(a > 0.0) {
        return Err(Error::arg(format!("a must be positive, got {a}")));
    }
    if path.values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::arg("penalized path must be strictly positive"));
    }
    let mut values = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    values.push(1.0);
    for i in 1..path.len() {
        let h = path.times[i] - path.times[i - 1];
        acc += second_unchecked(a, path.values[i - 1]) * h;
        values.push(acc.exp());
    }
    Ok(RealPath { times: path.times.clone(), values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(ts: &[f64], vs: &[f64]) -> RealPath {
        RealPath::new(ts.to_vec(), vs.to_vec()).unwrap()
    }

    #[test]
    fn path_validation() {
        assert!(RealPath::new(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(RealPath::new(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
        let p = lin(&[0.0, 1.0, 3.0], &[0.0, 2.0, 0.0]);
        assert_eq!(p.at(0.5), 1.0);
        assert_eq!(p.at(2.0), 1.0);
        assert_eq!(p.at(5.0), 0.0);
    }

    #[test]
    fn skorohod_examples() {
        let f = lin(&[0.0, 1.0, 2.0], &[0.0, 0.0, 0.0]);
        let s = skorohod_map(1.0, &f).unwrap();
        assert_eq!(s.reflected.values(), &[1.0, 1.0, 1.0]);
        assert_eq!(s.local_time.values(), &[0.0, 0.0, 0.0]);
        assert_eq!(first_hit_zero(&s), f64::INFINITY);

        let f = lin(&[0.0, 0.5, 1.0], &[0.0, -0.5, -1.0]);
        let s = skorohod_map(0.0, &f).unwrap();
        assert_eq!(s.local_time.values(), &[0.0, 0.5, 1.0]);
        assert_eq!(s.reflected.values(), &[0.0, 0.0, 0.0]);

        // down to −2 at t = 1, back up to −1 at t = 2
        let f = lin(&[0.0, 1.0, 2.0], &[0.0, -2.0, -1.0]);
        let s = skorohod_map(1.0, &f).unwrap();
        assert_eq!(s.local_time.values()[1], 1.0);
        assert_eq!(s.reflected.values()[1], 0.0);
        assert_eq!(s.local_time.values()[2], 1.0);
        assert_eq!(s.reflected.values()[2], 1.0);
        // the continuous solution hits 0 half way through the first segment
        assert_eq!(first_hit_zero(&s), 0.5);
        assert_eq!(s.local_time_at(0.75), 0.5);

        assert!(skorohod_map(-0.1, &f).is_err());
    }

    #[test]
    fn hitting_and_coalescence_examples() {
        let f = lin(&[0.0, 0.5, 1.0, 1.5], &[0.0, -0.5, -1.0, -1.5]);
        let s = skorohod_map(1.0, &f).unwrap();
        assert_eq!(first_hit_zero(&s), 1.0);
        let t = coalescence_time(0.0, 1.0, &f).unwrap();
        assert_eq!(t, 1.0);
        assert_eq!(skorohod_map(0.0, &f).unwrap().local_time_at(t), 1.0);
        assert!(coalescence_time(1.0, 1.0, &f).is_err());
        assert!(coalescence_time(1.0, 0.5, &f).is_err());
    }

    #[test]
    fn derivative_flow_examples() {
        let f = lin(&[0.0, 0.5, 1.0, 1.5], &[0.0, -0.5, -1.0, -1.5]);
        let d = derivative_flow_exact(1.0, &f).unwrap();
        // value at exactly τ is 0 (right-continuous)
        assert_eq!(d.values(), &[1.0, 1.0, 0.0, 0.0]);
        let d = derivative_flow_exact(0.0, &f).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tanaka_examples() {
        let f = lin(&[0.0, 0.5, 1.0], &[0.0, -0.5, -1.0]);
        assert_eq!(tanaka_reflection(0.0, &f).unwrap().values(), &[0.0, 0.5, 1.0]);
        let z = lin(&[0.0, 1.0], &[0.0, 0.0]);
        assert_eq!(tanaka_reflection(1.0, &z).unwrap().values(), &[1.0, 1.0]);
    }

    #[test]
    fn drift_limits_and_errors() {
        assert!(penalized_drift_1d(1.0, 0.0).is_err());
        assert!(penalized_drift_1d(0.0, 1.0).is_err());
        assert!(penalized_drift_1d(1e-4, 1.0).unwrap() < 1e-300);
        assert!(penalized_drift_1d(1.0, 0.5).unwrap() > penalized_drift_1d(1.0, 1.5).unwrap());
        // continuity across the asymptotic switch at y = 6
        let lo = penalized_drift_1d(1.0, 6.0 - 1e-9).unwrap();
        let hi = penalized_drift_1d(1.0, 6.0 + 1e-9).unwrap();
        assert!((lo / hi - 1.0).abs() < 1e-6);
    }

    #[test]
    fn far_from_zero_path_is_the_driver() {
        let f = RealPath::from_increments(0.01, (0..100).map(|i| ((i as f64) * 0.7).sin() * 0.1)).unwrap();
        let p = penalized_path_1d(0.01, 10.0, &f, Scheme1d::default()).unwrap();
        for (pv, fv) in p.values().iter().zip(f.values()) {
            assert!((pv - 10.0 - fv).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_flow_penalized_basics() {
        let f = RealPath::uniform(0.01, vec![5.0; 50]).unwrap();
        let v = derivative_flow_penalized(0.01, &f).unwrap();
        assert_eq!(v.values()[0], 1.0);
        assert!(v.values().iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let bad = RealPath::uniform(0.01, vec![1.0, 0.0]).unwrap();
        assert!(derivative_flow_penalized(0.01, &bad).is_err());
    }
}
