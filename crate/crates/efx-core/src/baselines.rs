//! Picking-sequence baselines and the welfare-maximizing allocation.
//!
//! These are the non-annealing comparison points: cyclic round robin, the
//! `m = n + 1` picking sequence (whose output is always EFX), and the
//! social-welfare maximizer used as a warm start. Every tie-break is
//! lowest-index so outputs are deterministic.

use crate::error::Error;
use crate::model::{Allocation, Instance};

/// Who picks next, one entry per good.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PickOrder(Vec<usize>);

impl PickOrder {
    /// Validates that every entry names an existing agent. Length is
    /// checked against the instance at use time.
    pub fn new(entries: Vec<usize>, num_agents: usize) -> Result<Self, Error> {
        for (idx, &agent) in entries.iter().enumerate() {
            if agent >= num_agents {
                return Err(Error::PickOrderAgentOutOfRange {
                    position: idx + 1,
                    agent: agent + 1,
                    agents: num_agents,
                });
            }
        }
        Ok(Self(entries))
    }

    /// The cyclic order 1..n repeated, truncated to `num_goods` picks.
    pub fn cyclic(num_agents: usize, num_goods: usize) -> Self {
        Self((0..num_goods).map(|k| k % num_agents).collect())
    }

    /// The order 1, 2, ..., n-1, n, n used when there is one good more
    /// than there are agents.
    pub fn n_plus_one(num_agents: usize) -> Self {
        let mut entries: Vec<usize> = (0..num_agents - 1).collect();
        entries.push(num_agents - 1);
        entries.push(num_agents - 1);
        Self(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Runs the picking sequence left to right: each named agent takes its
/// highest-valued remaining good, ties to the lowest good index.
pub fn greedy_pick_sequence(inst: &Instance, order: &PickOrder) -> Result<Allocation, Error> {
    let m = inst.num_goods();
    if order.len() != m {
        return Err(Error::PickOrderLengthMismatch {
            got: order.len(),
            expected: m,
        });
    }
    // An order may have been validated against a different agent count.
    for (idx, &agent) in order.entries().iter().enumerate() {
        if agent >= inst.num_agents() {
            return Err(Error::PickOrderAgentOutOfRange {
                position: idx + 1,
                agent: agent + 1,
                agents: inst.num_agents(),
            });
        }
    }
    let mut taken = vec![false; m];
    let mut owner = vec![0usize; m];
    for &picker in order.entries() {
        let mut best: Option<(u64, usize)> = None;
        for (g, &gone) in taken.iter().enumerate() {
            if gone {
                continue;
            }
            let v = inst.value(picker, g);
            // strict > keeps the earliest good on ties
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, g));
            }
        }
        let (_, g) = best.expect("one pick per good leaves the pool nonempty");
        taken[g] = true;
        owner[g] = picker;
    }
    Allocation::new(inst.num_agents(), owner)
}

/// Greedy picks in the cyclic order 1..n, 1..n, ...
pub fn round_robin(inst: &Instance) -> Allocation {
    let order = PickOrder::cyclic(inst.num_agents(), inst.num_goods());
    greedy_pick_sequence(inst, &order).expect("cyclic order always fits the instance")
}

/// Greedy picks in the order 1, ..., n-1, n, n; defined only for
/// `m = n + 1`, where the result is always EFX.
pub fn n_plus_one_pick(inst: &Instance) -> Result<Allocation, Error> {
    let n = inst.num_agents();
    if inst.num_goods() != n + 1 {
        return Err(Error::GoodCountNotNPlusOne {
            agents: n,
            goods: inst.num_goods(),
        });
    }
    let alloc = greedy_pick_sequence(inst, &PickOrder::n_plus_one(n))?;
    debug_assert!(
        crate::violations::is_efx(inst, &alloc).unwrap_or(false),
        "the picking sequence 1..n,n must yield an EFX allocation"
    );
    Ok(alloc)
}

/// Assigns each good to the agent valuing it most (ties to the lowest
/// agent index). Under additive valuations this maximizes social welfare.
pub fn welfare_max_allocation(inst: &Instance) -> Allocation {
    let n = inst.num_agents();
    let owner = (0..inst.num_goods())
        .map(|g| {
            let mut best = 0usize;
            for agent in 1..n {
                if inst.value(agent, g) > inst.value(best, g) {
                    best = agent;
                }
            }
            best
        })
        .collect();
    Allocation::new(n, owner).expect("argmax owners are in range")
}

/// Total value owners assign to their own bundles.
pub fn social_welfare(inst: &Instance, alloc: &Allocation) -> u64 {
    alloc
        .owners()
        .iter()
        .enumerate()
        .map(|(g, &agent)| inst.value(agent, g))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::violations::is_efx;

    fn inst(rows: Vec<Vec<u64>>) -> Instance {
        Instance::new(rows).unwrap()
    }

    #[test]
    fn forced_picks_follow_values() {
        let i = inst(vec![vec![5, 1], vec![4, 2]]);
        let order = PickOrder::new(vec![0, 1], 2).unwrap();
        let a = greedy_pick_sequence(&i, &order).unwrap();
        assert_eq!(a.owners(), &[0, 1]);
    }

    #[test]
    fn ties_go_to_the_lowest_good_index() {
        let i = inst(vec![vec![1, 1], vec![1, 1]]);
        let order = PickOrder::new(vec![0, 1], 2).unwrap();
        let a = greedy_pick_sequence(&i, &order).unwrap();
        assert_eq!(a.owners(), &[0, 1]);
    }

    #[test]
    fn every_good_is_picked_exactly_once() {
        let i = inst(vec![
            vec![4, 4, 4, 4, 4],
            vec![9, 1, 8, 2, 7],
            vec![3, 6, 3, 6, 3],
        ]);
        let order = PickOrder::new(vec![1, 1, 2, 0, 2], 3).unwrap();
        let a = greedy_pick_sequence(&i, &order).unwrap();
        let counts: Vec<usize> = (0..3).map(|agent| a.bundle(agent).len()).collect();
        assert_eq!(counts.iter().sum::<usize>(), 5);
        assert_eq!(counts, vec![1, 2, 2]);
    }

    #[test]
    fn order_length_must_match() {
        let i = inst(vec![vec![1, 2], vec![3, 4]]);
        let order = PickOrder::new(vec![0], 2).unwrap();
        assert_eq!(
            greedy_pick_sequence(&i, &order),
            Err(Error::PickOrderLengthMismatch {
                got: 1,
                expected: 2
            })
        );
    }

    #[test]
    fn order_entries_must_name_agents() {
        assert_eq!(
            PickOrder::new(vec![0, 3], 2),
            Err(Error::PickOrderAgentOutOfRange {
                position: 2,
                agent: 4,
                agents: 2
            })
        );
    }

    #[test]
    fn round_robin_grants_distinct_favorites_in_turn() {
        let i = inst(vec![vec![9, 0, 0], vec![0, 9, 0], vec![0, 0, 9]]);
        let a = round_robin(&i);
        assert_eq!(a.owners(), &[0, 1, 2]);
    }

    #[test]
    fn round_robin_single_agent_takes_everything() {
        let i = inst(vec![vec![3, 1, 4, 1]]);
        let a = round_robin(&i);
        assert_eq!(a.owners(), &[0, 0, 0, 0]);
    }

    #[test]
    fn extra_good_sequence_matches_hand_trace() {
        let i = inst(vec![vec![3, 2, 1], vec![3, 2, 1]]);
        let a = n_plus_one_pick(&i).unwrap();
        assert_eq!(a.owners(), &[0, 1, 1]);
        assert!(is_efx(&i, &a).unwrap());
    }

    #[test]
    fn extra_good_sequence_single_agent() {
        let i = inst(vec![vec![2, 7]]);
        let a = n_plus_one_pick(&i).unwrap();
        assert_eq!(a.owners(), &[0, 0]);
    }

    #[test]
    fn extra_good_sequence_requires_matching_size() {
        let i = inst(vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(
            n_plus_one_pick(&i),
            Err(Error::GoodCountNotNPlusOne {
                agents: 2,
                goods: 2
            })
        );
    }

    #[test]
    fn welfare_max_takes_per_good_argmax() {
        let i = inst(vec![vec![5, 1], vec![1, 5]]);
        let a = welfare_max_allocation(&i);
        assert_eq!(a.owners(), &[0, 1]);
        assert_eq!(social_welfare(&i, &a), 10);
    }

    #[test]
    fn welfare_max_ties_go_to_the_first_agent() {
        let i = inst(vec![vec![4, 2, 6], vec![4, 2, 6]]);
        let a = welfare_max_allocation(&i);
        assert_eq!(a.owners(), &[0, 0, 0]);
        assert_eq!(social_welfare(&i, &a), 12);
    }

    #[test]
    fn welfare_equals_per_good_max_sum() {
        let i = inst(vec![vec![4, 1, 9, 2], vec![3, 8, 1, 2], vec![5, 5, 5, 5]]);
        let a = welfare_max_allocation(&i);
        let want: u64 = (0..4).map(|g| (0..3).map(|i2| i.value(i2, g)).max().unwrap()).sum();
        assert_eq!(social_welfare(&i, &a), want);
    }
}
