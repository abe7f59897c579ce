//! Fixtures shared by the benchmarks.

use bethe_scalar::sampling::{model, spectral, stream};
use bethe_scalar::{ModelParams, C64};

pub struct Fixture {
    pub params: ModelParams,
    pub x: Vec<C64>,
    pub y: Vec<C64>,
}

/// Generic off-shell sets with `n` magnons on `sites` sites.
pub fn fixture(n: usize, sites: usize, seed: u64) -> Fixture {
    let mut rng = stream(seed, "bench", (n * 100 + sites) as u64);
    let params = model(&mut rng, sites).expect("sampled parameters are generic");
    let x = spectral(&mut rng, &params, n, &[]);
    let y = spectral(&mut rng, &params, n, &x);
    Fixture { params, x, y }
}
