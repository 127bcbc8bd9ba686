//! Path-level distances between coupled simulations.

use crate::error::{Error, Result};
use crate::estimators::{digest, MCEstimate};
use crate::geometry::{ManifoldModel, MAX_AMBIENT};
use crate::linalg::dist;

/// sup_i ‖a_i − b_i‖ in the chart (ambient) coordinates.
pub fn sup_distance(a: &[f64], b: &[f64], ambient: usize) -> Result<f64> {
    if a.len() != b.len() || a.len() % ambient != 0 {
        return Err(Error::arg("coupled paths live on different grids"));
    }
    Ok(a.chunks(ambient).zip(b.chunks(ambient)).map(|(x, y)| dist(x, y)).fold(0.0, f64::max))
}

/// E sup_t ρ(A_t, B_t)^p over coupled path pairs.
pub fn sp_distance(a: &[Vec<f64>], b: &[Vec<f64>], ambient: usize, p: f64) -> Result<MCEstimate> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::arg("need at least two coupled path pairs"));
    }
    if !(p > 0.0) {
        return Err(Error::arg(format!("p must be positive, got {p}")));
    }
    let vals = a
        .iter()
        .zip(b)
        .map(|(x, y)| sup_distance(x, y, ambient).map(|s| s.powf(p)))
        .collect::<Result<Vec<_>>>()?;
    let d = digest(&[("metric", "sp".into()), ("p", p.to_string()), ("n", a.len().to_string())]);
    Ok(MCEstimate {
        mean: vec![crate::stats::mean(&vals)],
        stderr: vec![crate::stats::stderr(&vals)],
        n_paths: vals.len(),
        config_digest: d,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalTimeTv {
    pub sup_gap: f64,
    pub tv: f64,
    pub two_lt: f64,
}

/// (sup |L − L^a|, Σ|ΔL − ΔL^a|, 2 L_T).
pub fn local_time_tv(l: &[f64], l_a: &[f64]) -> Result<LocalTimeTv> {
    if l.len() != l_a.len() || l.is_empty() {
        return Err(Error::arg("local times live on different grids"));
    }
    let sup_gap = l.iter().zip(l_a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let tv = l
        .windows(2)
        .zip(l_a.windows(2))
        .map(|(x, y)| ((x[1] - x[0]) - (y[1] - y[0])).abs())
        .sum();
    Ok(LocalTimeTv { sup_gap, tv, two_lt: 2.0 * l[l.len() - 1] })
}

/// sup ‖π(A_i) − π(B_i)‖ over nodes where both paths are in the tubular zone
/// (0 if there are none).
pub fn projection_gap(model: &ManifoldModel, a: &[f64], b: &[f64]) -> Result<f64> {
    let da = model.ambient_dim();
    if a.len() != b.len() || a.len() % da != 0 {
        return Err(Error::arg("coupled paths live on different grids"));
    }
    let delta = model.tubular_radius();
    let mut pa = [0.0; MAX_AMBIENT];
    let mut pb = [0.0; MAX_AMBIENT];
    let mut sup: f64 = 0.0;
    for (x, y) in a.chunks(da).zip(b.chunks(da)) {
        if model.signed_distance(x) < delta && model.signed_distance(y) < delta {
            model.nearest_boundary_point_into(x, &mut pa);
            model.nearest_boundary_point_into(y, &mut pb);
            sup = sup.max(dist(&pa[..da], &pb[..da]));
        }
    }
    Ok(sup)
}
