//! Simulated annealing on the violation count.
//!
//! The search walks the single-transfer neighborhood: pick a good uniformly
//! at random, pick a new owner uniformly among the other agents, and accept
//! the move if it lowers the violation count, or with probability
//! `exp(-delta / T)` otherwise. Temperature decays geometrically; when it
//! reaches the floor without finding an EFX allocation, the search restarts
//! from a fresh uniform-random allocation and keeps its cumulative step
//! count.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::error::Error;
use crate::model::{apply_transfer, build_utilities, check_dims, Allocation, Instance, UtilityMatrix};
use crate::rng::solver_rng;
use crate::violations::{count_pair, delta_violations};

/// In debug builds, recount violations from scratch this often (in accepted
/// moves) to catch incremental-count drift.
#[cfg(debug_assertions)]
const DRIFT_CHECK_PERIOD: u64 = 1 << 16;

/// Annealing schedule and budget.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    /// Temperature at the start of each cooling cycle.
    pub t_initial: f64,
    /// Cooling stops (and the search restarts) once temperature falls to
    /// this floor.
    pub t_min: f64,
    /// Proposals per temperature level; `None` means `100 * n * m`.
    pub steps_per_level: Option<u64>,
    /// Geometric decay factor per level, in (0, 1).
    pub cooling: f64,
    /// Total proposal budget across restarts; `None` runs until solved.
    pub max_total_steps: Option<u64>,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            t_initial: 5.0,
            t_min: 0.0001,
            steps_per_level: None,
            cooling: 0.99,
            max_total_steps: None,
            seed: 0,
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.t_initial.is_finite() || self.t_initial <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "t_initial must be a positive finite number, got {}",
                self.t_initial
            )));
        }
        if !self.t_min.is_finite() || self.t_min <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "t_min must be a positive finite number, got {}",
                self.t_min
            )));
        }
        if self.t_min >= self.t_initial {
            return Err(Error::InvalidParams(format!(
                "t_min ({}) must be below t_initial ({})",
                self.t_min, self.t_initial
            )));
        }
        if !self.cooling.is_finite() || self.cooling <= 0.0 || self.cooling >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "cooling must lie strictly between 0 and 1, got {}",
                self.cooling
            )));
        }
        if self.steps_per_level == Some(0) {
            return Err(Error::InvalidParams(
                "steps_per_level must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Proposals per temperature level for an `n x m` instance.
    pub fn level_steps(&self, n: usize, m: usize) -> u64 {
        self.steps_per_level
            .unwrap_or_else(|| 100u64.saturating_mul(n as u64).saturating_mul(m as u64))
    }
}

/// Outcome of one annealing (or descent) trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// The final allocation: EFX when `solved`, otherwise the best state
    /// seen (fewest violations).
    pub allocation: Allocation,
    /// Neighbors generated, accepted or not, across all restarts.
    pub steps: u64,
    /// Times the search re-initialized after exhausting a cooling cycle.
    pub restarts: u64,
    pub solved: bool,
    pub elapsed: Duration,
}

/// Assigns each good to a uniformly random agent.
pub fn init_random_allocation(rng: &mut impl Rng, n: usize, m: usize) -> Allocation {
    let owner = (0..m).map(|_| rng.random_range(0..n)).collect();
    Allocation::new(n, owner).expect("sampled owners are in range")
}

/// Samples a single-transfer move: a uniform good and a uniform new owner
/// among the `n - 1` agents that do not hold it. Consumes exactly two
/// draws.
pub fn propose_neighbor(rng: &mut impl Rng, alloc: &Allocation) -> (usize, usize) {
    let n = alloc.num_agents();
    let m = alloc.num_goods();
    assert!(n >= 2 && m >= 1, "no neighbors exist for n < 2 or m = 0");
    let good = rng.random_range(0..m);
    let owner = alloc.owner_of(good);
    let k = rng.random_range(0..n - 1);
    let target = k + usize::from(k >= owner);
    (good, target)
}

/// Metropolis rule on the violation-count change: downhill moves are taken
/// outright, others with probability `exp(-delta / temperature)`. A zero
/// delta gives probability 1, so plateau moves are always taken (but still
/// consume the acceptance draw).
pub fn accept(delta: i64, temperature: f64, rng: &mut impl Rng) -> bool {
    if delta < 0 {
        return true;
    }
    rng.random::<f64>() < (-(delta as f64) / temperature).exp()
}

/// Runs annealing from a uniform-random initial allocation.
pub fn anneal_solve(inst: &Instance, params: &AnnealParams) -> Result<TrialResult, Error> {
    run(inst, params, None)
}

/// Runs annealing from a caller-supplied initial allocation; restarts, if
/// any, still re-initialize uniformly at random.
pub fn anneal_solve_warm(
    inst: &Instance,
    params: &AnnealParams,
    start: &Allocation,
) -> Result<TrialResult, Error> {
    check_dims(inst, start)?;
    run(inst, params, Some(start))
}

fn run(inst: &Instance, params: &AnnealParams, warm: Option<&Allocation>) -> Result<TrialResult, Error> {
    params.validate()?;
    let clock = Instant::now();
    let n = inst.num_agents();
    let m = inst.num_goods();
    let level = params.level_steps(n, m);
    let mut rng = solver_rng(params.seed);

    let mut alloc = match warm {
        Some(start) => start.clone(),
        None => init_random_allocation(&mut rng, n, m),
    };
    let mut utilities = build_utilities(inst, &alloc)?;
    let mut f = full_count(inst, &utilities, &alloc);

    let mut steps = 0u64;
    let mut restarts = 0u64;
    let mut best = (f, alloc.clone());
    #[cfg(debug_assertions)]
    let mut accepted = 0u64;

    'search: while f > 0 {
        let mut temperature = params.t_initial;
        while temperature > params.t_min {
            for _ in 0..level {
                if let Some(cap) = params.max_total_steps {
                    if steps >= cap {
                        return Ok(TrialResult {
                            allocation: best.1,
                            steps,
                            restarts,
                            solved: false,
                            elapsed: clock.elapsed(),
                        });
                    }
                }
                let (good, target) = propose_neighbor(&mut rng, &alloc);
                steps += 1;
                let delta = delta_violations(inst, &utilities, &alloc, good, target);
                if accept(delta, temperature, &mut rng) {
                    apply_transfer(inst, &mut alloc, &mut utilities, good, target);
                    f = f.checked_add_signed(delta).expect("violation count drift");
                    #[cfg(debug_assertions)]
                    {
                        accepted += 1;
                        if accepted.is_multiple_of(DRIFT_CHECK_PERIOD) {
                            assert_eq!(f, full_count(inst, &utilities, &alloc));
                        }
                    }
                    if f < best.0 {
                        best = (f, alloc.clone());
                    }
                    if f == 0 {
                        break 'search;
                    }
                }
            }
            temperature *= params.cooling;
        }
        restarts += 1;
        alloc = init_random_allocation(&mut rng, n, m);
        utilities = build_utilities(inst, &alloc)?;
        f = full_count(inst, &utilities, &alloc);
        if f < best.0 {
            best = (f, alloc.clone());
        }
    }

    debug_assert_eq!(f, full_count(inst, &utilities, &alloc));
    Ok(TrialResult {
        allocation: alloc,
        steps,
        restarts,
        solved: true,
        elapsed: clock.elapsed(),
    })
}

fn full_count(inst: &Instance, utilities: &UtilityMatrix, alloc: &Allocation) -> u64 {
    let n = inst.num_agents();
    let mut total = 0u64;
    for viewer in 0..n {
        for holder in 0..n {
            if viewer != holder {
                total += count_pair(inst, utilities, alloc, viewer, holder);
            }
        }
    }
    total
}
