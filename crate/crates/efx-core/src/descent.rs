//! Strict-descent EFX solver for identical additive valuations.
//!
//! When all agents share one value vector `w`, an allocation is EFX exactly
//! when no bundle can send a good to a poorer bundle and still stay ahead:
//! for every pair and every good `g` held by the richer side,
//! `Y_j - Y_i <= w_g`. Transferring a violating good strictly lowers the
//! balance potential `Phi = sum_i (Y_i - mean)^2`, so repeated transfers
//! terminate at an EFX allocation with no randomness involved.
//!
//! All potential arithmetic uses the integer surrogate `n^2 * Phi =
//! sum_i (n*Y_i - W)^2` with `W = sum_g w_g`, so comparisons are exact.

use crate::error::Error;
use crate::model::Allocation;

/// Identical-valuations problem: `n` agents sharing one strictly positive
/// value per good.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdenticalInstance {
    agents: usize,
    weights: Vec<u64>,
}

impl IdenticalInstance {
    /// Builds an instance; every weight must be strictly positive, and the
    /// value mass `n * m * max_weight` must stay below 2^63.
    pub fn new(agents: usize, weights: Vec<u64>) -> Result<Self, Error> {
        if agents == 0 {
            return Err(Error::NoAgents);
        }
        for (g, &w) in weights.iter().enumerate() {
            if w == 0 {
                return Err(Error::ZeroValueGood { good: g + 1 });
            }
        }
        let max = weights.iter().copied().max().unwrap_or(0);
        let product = agents as u128 * weights.len() as u128 * max as u128;
        if product >= crate::model::VALUE_MASS_LIMIT {
            return Err(Error::OverflowGuard { product });
        }
        Ok(Self { agents, weights })
    }

    pub fn num_agents(&self) -> usize {
        self.agents
    }

    pub fn num_goods(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn weight(&self, good: usize) -> u64 {
        self.weights[good]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.iter().sum()
    }

    /// Lifts to a full valuation matrix with one identical row per agent.
    pub fn to_instance(&self) -> crate::model::Instance {
        let rows = vec![self.weights.clone(); self.agents];
        crate::model::Instance::new(rows).expect("validated on construction")
    }
}

/// One executed transfer with the scaled potential on both sides.
///
/// `phi_before` and `phi_after` carry `n^2 * Phi`, the integer surrogate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentMove {
    pub good: usize,
    pub from_agent: usize,
    pub to_agent: usize,
    pub phi_before: u128,
    pub phi_after: u128,
}

/// A full descent run: the move sequence is a replayable certificate that
/// the final allocation was reached by strictly potential-decreasing,
/// violation-driven transfers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentTrace {
    pub moves: Vec<DescentMove>,
    pub allocation: Allocation,
}

/// Bundle values under the common weights.
pub fn bundle_sums(inst: &IdenticalInstance, alloc: &Allocation) -> Vec<u64> {
    let mut sums = vec![0u64; alloc.num_agents()];
    for (good, &agent) in alloc.owners().iter().enumerate() {
        sums[agent] += inst.weight(good);
    }
    sums
}

/// The integer surrogate `n^2 * Phi = sum_i (n*Y_i - W)^2`; zero exactly
/// when all bundle sums are equal.
pub fn scaled_potential(inst: &IdenticalInstance, alloc: &Allocation) -> u128 {
    scaled_from_sums(inst, &bundle_sums(inst, alloc))
}

fn scaled_from_sums(inst: &IdenticalInstance, sums: &[u64]) -> u128 {
    let n = inst.agents as i128;
    let total = inst.total_weight() as i128;
    sums.iter()
        .map(|&y| {
            let d = n * y as i128 - total;
            (d * d) as u128
        })
        .sum()
}

/// Exact change in `Phi` (unscaled) when a good of weight `weight` moves
/// from a bundle worth `from_sum` to one worth `to_sum`:
/// `2 * w * (w - (from_sum - to_sum))`. Always an integer; negative exactly
/// when `from_sum - to_sum > weight`.
pub fn potential_delta(to_sum: u64, from_sum: u64, weight: u64) -> i128 {
    let w = weight as i128;
    2 * w * (w - (from_sum as i128 - to_sum as i128))
}

/// Finds a violating transfer `(good, from, to)` with
/// `sums[from] - sums[to] > weight(good)`, or `None` exactly when the
/// allocation is EFX.
///
/// Richer bundles are tried first (ties to the lower agent index); the
/// receiver is the poorest other agent and the good the bundle's lightest,
/// again with lowest-index ties. `sums` must match `bundle_sums(inst, alloc)`.
pub fn find_violating_transfer(
    inst: &IdenticalInstance,
    alloc: &Allocation,
    sums: &[u64],
) -> Option<(usize, usize, usize)> {
    let n = inst.agents;
    assert_eq!(sums.len(), n, "one bundle sum per agent");
    debug_assert_eq!(sums, bundle_sums(inst, alloc).as_slice());
    if n < 2 {
        return None;
    }

    let mut min1 = 0usize;
    for a in 1..n {
        if sums[a] < sums[min1] {
            min1 = a;
        }
    }
    let mut min2 = usize::from(min1 == 0);
    for a in 0..n {
        if a != min1 && sums[a] < sums[min2] {
            min2 = a;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sums[b].cmp(&sums[a]).then(a.cmp(&b)));

    for &from in &order {
        let to = if from == min1 { min2 } else { min1 };
        let gap = sums[from].saturating_sub(sums[to]);
        if gap == 0 {
            continue;
        }
        let lightest = alloc
            .bundle(from)
            .iter()
            .map(|&g| (inst.weight(g), g))
            .min();
        if let Some((w, g)) = lightest {
            if gap > w {
                return Some((g, from, to));
            }
        }
    }
    None
}

/// Runs strict descent to completion. The result is always EFX; every move
/// in the trace lowers the potential.
pub fn descent_solve(inst: &IdenticalInstance, start: &Allocation) -> Result<DescentTrace, Error> {
    check_dims(inst, start)?;
    let mut alloc = start.clone();
    let mut sums = bundle_sums(inst, &alloc);
    let mut phi = scaled_from_sums(inst, &sums);
    let mut moves = Vec::new();

    while let Some((good, from, to)) = find_violating_transfer(inst, &alloc, &sums) {
        let w = inst.weight(good);
        #[cfg(debug_assertions)]
        let predicted = potential_delta(sums[to], sums[from], w);
        alloc.transfer(good, to);
        sums[from] -= w;
        sums[to] += w;
        let phi_after = scaled_from_sums(inst, &sums);
        debug_assert!(phi_after < phi, "descent must strictly lower the potential");
        #[cfg(debug_assertions)]
        {
            let n = inst.agents as i128;
            assert_eq!(phi_after as i128 - phi as i128, n * n * predicted);
        }
        moves.push(DescentMove {
            good,
            from_agent: from,
            to_agent: to,
            phi_before: phi,
            phi_after,
        });
        phi = phi_after;
    }

    Ok(DescentTrace { moves, allocation: alloc })
}

/// Replays a trace from `start`, confirming each move named the true owner,
/// its violation inequality held, the potential bookkeeping is exact and
/// strictly decreasing, the final allocation matches, and the terminal
/// state admits no further violating transfer.
pub fn verify_descent_trace(
    inst: &IdenticalInstance,
    start: &Allocation,
    trace: &DescentTrace,
) -> Result<(), Error> {
    check_dims(inst, start)?;
    let n = inst.agents;
    let m = inst.num_goods();
    let mut alloc = start.clone();
    let mut sums = bundle_sums(inst, &alloc);
    let mut phi = scaled_from_sums(inst, &sums);

    for (k, mv) in trace.moves.iter().enumerate() {
        let step = k + 1;
        let fail = |detail: String| Error::InvalidTrace { step, detail };
        if mv.good >= m {
            return Err(fail(format!("good {} out of range 1..={m}", mv.good + 1)));
        }
        if mv.to_agent >= n {
            return Err(fail(format!(
                "receiver {} out of range 1..={n}",
                mv.to_agent + 1
            )));
        }
        if alloc.owner_of(mv.good) != mv.from_agent {
            return Err(fail(format!(
                "good {} is held by agent {}, not agent {}",
                mv.good + 1,
                alloc.owner_of(mv.good) + 1,
                mv.from_agent + 1
            )));
        }
        if mv.to_agent == mv.from_agent {
            return Err(fail("sender and receiver coincide".into()));
        }
        let w = inst.weight(mv.good);
        if sums[mv.from_agent].saturating_sub(sums[mv.to_agent]) <= w {
            return Err(fail(format!(
                "no violation: bundle gap {} does not exceed weight {w}",
                sums[mv.from_agent].saturating_sub(sums[mv.to_agent])
            )));
        }
        if mv.phi_before != phi {
            return Err(fail(format!(
                "potential before move is {phi}, trace claims {}",
                mv.phi_before
            )));
        }
        alloc.transfer(mv.good, mv.to_agent);
        sums[mv.from_agent] -= w;
        sums[mv.to_agent] += w;
        let phi_after = scaled_from_sums(inst, &sums);
        if mv.phi_after != phi_after {
            return Err(fail(format!(
                "potential after move is {phi_after}, trace claims {}",
                mv.phi_after
            )));
        }
        if phi_after >= phi {
            return Err(fail("potential did not strictly decrease".into()));
        }
        phi = phi_after;
    }

    let step = trace.moves.len() + 1;
    if trace.allocation.owners() != alloc.owners() {
        return Err(Error::InvalidTrace {
            step,
            detail: "final allocation does not match the replayed moves".into(),
        });
    }
    if let Some((good, from, to)) = find_violating_transfer(inst, &alloc, &sums) {
        return Err(Error::InvalidTrace {
            step,
            detail: format!(
                "terminal state still violates: good {} could move from agent {} to agent {}",
                good + 1,
                from + 1,
                to + 1
            ),
        });
    }
    Ok(())
}

fn check_dims(inst: &IdenticalInstance, alloc: &Allocation) -> Result<(), Error> {
    if alloc.num_goods() != inst.num_goods() {
        return Err(Error::GoodCountMismatch {
            got: alloc.num_goods(),
            expected: inst.num_goods(),
        });
    }
    if alloc.num_agents() != inst.num_agents() {
        return Err(Error::AgentCountMismatch {
            got: alloc.num_agents(),
            expected: inst.num_agents(),
        });
    }
    Ok(())
}
