//! Problem instances, allocations, and cached cross-utilities.
//!
//! All arithmetic is on nonnegative 64-bit integers. An instance is accepted
//! only if `n * m * max_value < 2^63`, so every bundle sum and every utility
//! fits comfortably in a `u64` and comparisons are exact.

use crate::error::Error;

/// Upper bound on `n * m * max_value`; keeps all utility sums below 2^63.
pub const VALUE_MASS_LIMIT: u128 = 1 << 63;

/// A fair-division problem: `n` agents, `m` goods, and an `n x m` matrix of
/// nonnegative integer valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: usize,
    goods: usize,
    /// Row-major `agents x goods` valuation matrix.
    values: Vec<u64>,
}

impl Instance {
    /// Builds an instance from one valuation row per agent.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self, Error> {
        if rows.is_empty() {
            return Err(Error::NoAgents);
        }
        let goods = rows[0].len();
        for (idx, row) in rows.iter().enumerate() {
            if row.len() != goods {
                return Err(Error::RaggedRow {
                    row: idx + 1,
                    got: row.len(),
                    expected: goods,
                });
            }
        }
        let agents = rows.len();
        let values: Vec<u64> = rows.into_iter().flatten().collect();
        Self::from_flat(agents, goods, values)
    }

    /// Builds an instance from a row-major flat matrix.
    pub fn from_flat(agents: usize, goods: usize, values: Vec<u64>) -> Result<Self, Error> {
        if agents == 0 {
            return Err(Error::NoAgents);
        }
        if values.len() != agents * goods {
            return Err(Error::RaggedRow {
                row: agents,
                got: values.len(),
                expected: agents * goods,
            });
        }
        let max = values.iter().copied().max().unwrap_or(0);
        let product = agents as u128 * goods as u128 * max as u128;
        if product >= VALUE_MASS_LIMIT {
            return Err(Error::OverflowGuard { product });
        }
        Ok(Self {
            agents,
            goods,
            values,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.agents
    }

    pub fn num_goods(&self) -> usize {
        self.goods
    }

    /// Value agent `agent` assigns to good `good`.
    #[inline]
    pub fn value(&self, agent: usize, good: usize) -> u64 {
        self.values[agent * self.goods + good]
    }

    /// The full valuation row of one agent.
    #[inline]
    pub fn agent_values(&self, agent: usize) -> &[u64] {
        &self.values[agent * self.goods..(agent + 1) * self.goods]
    }

    /// Total value agent `agent` assigns to the whole good set.
    pub fn total_value(&self, agent: usize) -> u64 {
        self.agent_values(agent).iter().sum()
    }

    pub fn max_value(&self) -> u64 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// True when every agent has the same valuation row.
    pub fn has_identical_rows(&self) -> bool {
        let first = self.agent_values(0);
        (1..self.agents).all(|a| self.agent_values(a) == first)
    }
}

/// A partition of the goods: every good has exactly one owning agent.
///
/// Bundles are kept alongside the owner vector so per-bundle scans cost
/// `O(|A_j|)` and a transfer costs `O(1)`. Equality is on the owner vector
/// only; bundle iteration order is history-dependent.
#[derive(Debug, Clone)]
pub struct Allocation {
    owner: Vec<usize>,
    bundles: Vec<Vec<usize>>,
    /// Position of each good inside its owner's bundle.
    slot: Vec<usize>,
}

impl Allocation {
    /// Builds an allocation from a 0-based owner vector.
    pub fn new(num_agents: usize, owner: Vec<usize>) -> Result<Self, Error> {
        let mut bundles = vec![Vec::new(); num_agents];
        let mut slot = vec![0usize; owner.len()];
        for (good, &agent) in owner.iter().enumerate() {
            if agent >= num_agents {
                return Err(Error::OwnerOutOfRange {
                    good: good + 1,
                    agent: agent + 1,
                    agents: num_agents,
                });
            }
            slot[good] = bundles[agent].len();
            bundles[agent].push(good);
        }
        Ok(Self {
            owner,
            bundles,
            slot,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn num_goods(&self) -> usize {
        self.owner.len()
    }

    #[inline]
    pub fn owner_of(&self, good: usize) -> usize {
        self.owner[good]
    }

    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    /// Goods currently held by `agent`, in no particular order.
    #[inline]
    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    /// Moves `good` to `target`, keeping bundle bookkeeping in sync.
    pub(crate) fn transfer(&mut self, good: usize, target: usize) {
        let from = self.owner[good];
        debug_assert_ne!(from, target);
        let pos = self.slot[good];
        self.bundles[from].swap_remove(pos);
        if let Some(&moved) = self.bundles[from].get(pos) {
            self.slot[moved] = pos;
        }
        self.slot[good] = self.bundles[target].len();
        self.bundles[target].push(good);
        self.owner[good] = target;
    }
}

impl PartialEq for Allocation {
    fn eq(&self, other: &Self) -> bool {
        self.bundles.len() == other.bundles.len() && self.owner == other.owner
    }
}

impl Eq for Allocation {}

/// Cached cross-utilities: `get(i, j)` is the value agent `i` assigns to
/// agent `j`'s bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityMatrix {
    agents: usize,
    entries: Vec<u64>,
}

impl UtilityMatrix {
    pub fn num_agents(&self) -> usize {
        self.agents
    }

    #[inline]
    pub fn get(&self, viewer: usize, holder: usize) -> u64 {
        self.entries[viewer * self.agents + holder]
    }
}

/// Computes the full cross-utility matrix for an allocation.
pub fn build_utilities(inst: &Instance, alloc: &Allocation) -> Result<UtilityMatrix, Error> {
    check_dims(inst, alloc)?;
    let n = inst.num_agents();
    let mut entries = vec![0u64; n * n];
    for (good, &holder) in alloc.owners().iter().enumerate() {
        for viewer in 0..n {
            entries[viewer * n + holder] += inst.value(viewer, good);
        }
    }
    Ok(UtilityMatrix { agents: n, entries })
}

/// Reassigns `good` to `target` and patches the two affected utility
/// columns in `O(n)`.
///
/// Panics if `target` already owns the good or either index is out of
/// range; proposing a no-op transfer is a caller bug.
pub fn apply_transfer(
    inst: &Instance,
    alloc: &mut Allocation,
    utilities: &mut UtilityMatrix,
    good: usize,
    target: usize,
) {
    let n = inst.num_agents();
    assert!(good < inst.num_goods(), "good index out of range");
    assert!(target < n, "target agent out of range");
    let from = alloc.owner_of(good);
    assert_ne!(target, from, "transfer target must differ from the owner");
    for viewer in 0..n {
        let v = inst.value(viewer, good);
        utilities.entries[viewer * n + from] -= v;
        utilities.entries[viewer * n + target] += v;
    }
    alloc.transfer(good, target);
}

pub(crate) fn check_dims(inst: &Instance, alloc: &Allocation) -> Result<(), Error> {
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
