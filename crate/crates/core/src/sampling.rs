//! Reproducible random parameter draws.
//!
//! Every check gets its own ChaCha8 stream derived from `(seed, suite, index)`,
//! so results do not depend on thread scheduling or on which other checks ran.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::monodromy::ModelParams;

/// Rejection floor on `|sinh(difference)|` for random draws. Much larger than
/// the genericity floor so that random configurations stay well conditioned.
pub const DRAW_FLOOR: f64 = 0.05;

/// Minimal `|sinh γ|` and `|φ_1|` accepted by random draws.
pub const DRAW_MIN_WEIGHT: f64 = 0.2;

const MAX_REJECTIONS: usize = 10_000;

fn fnv1a(bytes: &[u8], mut h: u64) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stream for check number `index` of suite `suite` under run seed `seed`.
pub fn stream(seed: u64, suite: &str, index: u64) -> ChaCha8Rng {
    let mut h = fnv1a(suite.as_bytes(), 0xcbf2_9ce4_8422_2325);
    h = fnv1a(&index.to_le_bytes(), h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Uniform in the square `|Re|, |Im| ≤ half_width`.
pub fn complex_in_box<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> C64 {
    C64::new(
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
    )
}

fn far_from(z: C64, others: &[C64], floor: f64) -> bool {
    others.iter().all(|&w| (z - w).sinh().norm() >= floor)
}

/// `count` values in the unit box, pairwise separated and separated from
/// every entry of `avoid` (all in the `|sinh(·)|` sense).
pub fn generic_set<R: Rng + ?Sized>(rng: &mut R, count: usize, avoid: &[C64], floor: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        let z = complex_in_box(rng, 1.0);
        tries += 1;
        if (far_from(z, avoid, floor) && far_from(z, &out, floor)) || tries > MAX_REJECTIONS {
            out.push(z);
        }
    }
    out
}

/// Crossing parameter with `|sinh γ| ≥ DRAW_MIN_WEIGHT`.
pub fn gamma<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    loop {
        let g = complex_in_box(rng, 1.0);
        if g.sinh().norm() >= DRAW_MIN_WEIGHT {
            return g;
        }
    }
}

fn twist<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    loop {
        let p = complex_in_box(rng, 1.0);
        if p.norm() >= DRAW_MIN_WEIGHT {
            return p;
        }
    }
}

/// Random model on `sites` sites with generic inhomogeneities.
pub fn model<R: Rng + ?Sized>(rng: &mut R, sites: usize) -> Result<ModelParams> {
    let g = gamma(rng);
    let mu = generic_set(rng, sites, &[], DRAW_FLOOR);
    let phi1 = twist(rng);
    let phi2 = twist(rng);
    ModelParams::new(g, mu, phi1, phi2)
}

/// Values generic with respect to `params.mu()`, `μ_j - γ` and `avoid`.
pub fn spectral<R: Rng + ?Sized>(rng: &mut R, params: &ModelParams, count: usize, avoid: &[C64]) -> Vec<C64> {
    let mut forbidden: Vec<C64> = avoid.to_vec();
    forbidden.extend(params.mu().iter().copied());
    forbidden.extend(params.mu().iter().map(|m| m - params.gamma()));
    let gshift: Vec<C64> = avoid.iter().map(|z| z - params.gamma()).chain(avoid.iter().map(|z| z + params.gamma())).collect();
    forbidden.extend(gshift);
    generic_set(rng, count, &forbidden, DRAW_FLOOR)
}
