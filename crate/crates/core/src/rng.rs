//! Seeding rules and counter-based draws.
//!
//! Every path gets its own ChaCha stream keyed by `(master_seed, path_index)`,
//! so results do not depend on how paths are scheduled across threads. The
//! Brownian-bridge refinements used by the sub-stepping guards are *not* drawn
//! from that stream: they are pure functions of `(seed, step, level, position,
//! component)`, which keeps bisection consistent between integrators that
//! split different steps (e.g. two values of `a` on the same driver).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn combine(h: u64, v: u64) -> u64 {
    mix64(h ^ v.wrapping_add(GOLDEN).wrapping_add(h << 6).wrapping_add(h >> 2))
}

/// Seed of the `index`-th path under a master seed.
pub fn path_seed(master: u64, index: u64) -> u64 {
    combine(combine(mix64(master), 0x5041_5448), index)
}

pub fn path_rng(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(path_seed(master, index))
}

/// Uniform in (0, 1], a pure function of the key.
pub fn keyed_uniform(key: &[u64]) -> f64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &k in key {
        h = combine(h, k);
    }
    ((h >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal, a pure function of the key (Box–Muller on two keyed uniforms).
pub fn keyed_normal(seed: u64, step: u64, level: u64, pos: u64, comp: u64) -> f64 {
    let u1 = keyed_uniform(&[seed, step, level, pos, comp, 1]);
    let u2 = keyed_uniform(&[seed, step, level, pos, comp, 2]);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
