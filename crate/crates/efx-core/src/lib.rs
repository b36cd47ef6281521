//! EFX fair-division solvers over additive integer valuations.
//!
//! An allocation of indivisible goods is EFX (envy-free up to any good)
//! when no agent prefers another's bundle even after removing any single
//! good from it. This crate counts EFX violations exactly in integer
//! arithmetic and searches for violation-free allocations three ways:
//!
//! - [`anneal::anneal_solve`]: simulated annealing over single-transfer
//!   moves with Metropolis acceptance on the violation count, restarting
//!   from fresh random allocations when a cooling cycle is exhausted;
//! - [`descent::descent_solve`]: a deterministic strict-descent solver for
//!   identical valuations, certified by a replayable move trace;
//! - [`violations::brute_force_efx`]: exhaustive search, for small
//!   instances and as a test oracle.
//!
//! [`baselines`] adds picking-sequence comparison points and the welfare
//! maximizer (useful as a warm start), and [`generators`] produces the
//! seeded uniform, correlated, and identical-value instance families the
//! solvers are benchmarked on.

pub mod anneal;
pub mod baselines;
pub mod descent;
pub mod error;
pub mod generators;
pub mod model;
pub mod rng;
pub mod violations;

pub use anneal::{anneal_solve, anneal_solve_warm, AnnealParams, TrialResult};
pub use baselines::{
    greedy_pick_sequence, n_plus_one_pick, round_robin, social_welfare, welfare_max_allocation,
    PickOrder,
};
pub use descent::{
    descent_solve, verify_descent_trace, DescentMove, DescentTrace, IdenticalInstance,
};
pub use error::Error;
pub use generators::{gen_correlated, gen_identical, gen_uniform, GenKind, GenSpec, DEFAULT_SCALE};
pub use model::{apply_transfer, build_utilities, Allocation, Instance, UtilityMatrix};
pub use violations::{
    brute_force_efx, count_violations, delta_violations, is_efx, violating_triples,
    ViolationCount, DEFAULT_BRUTE_FORCE_CAP,
};
