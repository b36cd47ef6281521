//! Seedable RNG construction.
//!
//! Solvers and instance generators draw from distinct streams of the same
//! ChaCha8 generator, so a shared base seed never correlates the instance
//! with the search trajectory.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SOLVER_STREAM: u64 = 0x01;
const GENERATOR_STREAM: u64 = 0x02;

/// RNG used by search (initial allocations, proposals, acceptance draws).
pub fn solver_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SOLVER_STREAM);
    rng
}

/// RNG used by instance generators.
pub fn generator_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(GENERATOR_STREAM);
    rng
}
