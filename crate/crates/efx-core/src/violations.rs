//! The search objective: counting EFX violations and scoring single
//! transfers incrementally.
//!
//! A triple `(i, j, g)` with `g` in agent `j`'s bundle is a violation when
//! `u_i(A_j \ {g}) > u_i(A_i)`, with strict integer comparison; ties are
//! not violations. An allocation is EFX exactly when no triple violates.

use crate::error::Error;
use crate::model::{build_utilities, Allocation, Instance, UtilityMatrix};

/// Violation totals for one allocation, broken down per ordered agent pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationCount {
    agents: usize,
    total: u64,
    per_pair: Vec<u64>,
}

impl ViolationCount {
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Count of violating goods for the ordered pair (viewer, holder).
    pub fn per_pair(&self, viewer: usize, holder: usize) -> u64 {
        self.per_pair[viewer * self.agents + holder]
    }

    pub fn num_agents(&self) -> usize {
        self.agents
    }
}

/// Violations charged to the ordered pair (viewer, holder): goods `g` in
/// the holder's bundle whose removal still leaves that bundle strictly
/// better, from the viewer's perspective, than the viewer's own bundle.
pub fn count_pair(
    inst: &Instance,
    utilities: &UtilityMatrix,
    alloc: &Allocation,
    viewer: usize,
    holder: usize,
) -> u64 {
    assert_ne!(viewer, holder, "a pair requires two distinct agents");
    let held = utilities.get(viewer, holder);
    let own = utilities.get(viewer, viewer);
    // held - value never underflows: the good is part of the held sum.
    alloc
        .bundle(holder)
        .iter()
        .filter(|&&g| held - inst.value(viewer, g) > own)
        .count() as u64
}

/// Counts all violations of an allocation from scratch.
pub fn count_violations(inst: &Instance, alloc: &Allocation) -> Result<ViolationCount, Error> {
    let utilities = build_utilities(inst, alloc)?;
    let n = inst.num_agents();
    let mut per_pair = vec![0u64; n * n];
    let mut total = 0u64;
    for viewer in 0..n {
        for holder in 0..n {
            if holder == viewer {
                continue;
            }
            let c = count_pair(inst, &utilities, alloc, viewer, holder);
            per_pair[viewer * n + holder] = c;
            total += c;
        }
    }
    Ok(ViolationCount {
        agents: n,
        total,
        per_pair,
    })
}

/// True when the allocation has no violations.
pub fn is_efx(inst: &Instance, alloc: &Allocation) -> Result<bool, Error> {
    Ok(count_violations(inst, alloc)?.total() == 0)
}

/// Every violating triple (viewer, holder, good), ascending. Intended for
/// diagnostics, not hot paths.
pub fn violating_triples(
    inst: &Instance,
    alloc: &Allocation,
) -> Result<Vec<(usize, usize, usize)>, Error> {
    let utilities = build_utilities(inst, alloc)?;
    let n = inst.num_agents();
    let mut triples = Vec::new();
    for viewer in 0..n {
        let own = utilities.get(viewer, viewer);
        for holder in 0..n {
            if holder == viewer {
                continue;
            }
            let held = utilities.get(viewer, holder);
            for (good, &owner) in alloc.owners().iter().enumerate() {
                if owner == holder && held - inst.value(viewer, good) > own {
                    triples.push((viewer, holder, good));
                }
            }
        }
    }
    Ok(triples)
}

/// Exact change in the violation count if `good` moved to `target`,
/// without mutating anything.
///
/// Only pairs whose viewer or holder is the current owner or the target
/// can change, so those are the only ones rescored. Cost is `O(m)` plus
/// `O(n)` scans of the two affected bundles.
///
/// Panics if `target` already owns the good.
pub fn delta_violations(
    inst: &Instance,
    utilities: &UtilityMatrix,
    alloc: &Allocation,
    good: usize,
    target: usize,
) -> i64 {
    let n = inst.num_agents();
    let from = alloc.owner_of(good);
    assert_ne!(target, from, "transfer target must differ from the owner");

    let mut before = 0u64;
    let mut after = 0u64;

    for viewer in 0..n {
        let w = inst.value(viewer, good);
        let own_b = utilities.get(viewer, viewer);

        if viewer != from {
            // Holder is the shrinking bundle.
            let held_b = utilities.get(viewer, from);
            let held_a = held_b - w;
            let own_a = if viewer == target { own_b + w } else { own_b };
            for &g in alloc.bundle(from) {
                let v = inst.value(viewer, g);
                if held_b - v > own_b {
                    before += 1;
                }
                // Guard order matters: for g == good, v may exceed held_a.
                if g != good && held_a - v > own_a {
                    after += 1;
                }
            }
        }

        if viewer != target {
            // Holder is the growing bundle.
            let held_b = utilities.get(viewer, target);
            let held_a = held_b + w;
            let own_a = if viewer == from { own_b - w } else { own_b };
            for &g in alloc.bundle(target) {
                let v = inst.value(viewer, g);
                if held_b - v > own_b {
                    before += 1;
                }
                if held_a - v > own_a {
                    after += 1;
                }
            }
            // The moved good itself: removing it leaves the old bundle value.
            if held_b > own_a {
                after += 1;
            }
        }
    }

    // Pairs against untouched bundles change only through the viewer's own
    // utility, and only for the two agents trading the good.
    for viewer in [from, target] {
        let w = inst.value(viewer, good);
        if w == 0 {
            continue;
        }
        let own_b = utilities.get(viewer, viewer);
        let own_a = if viewer == from { own_b - w } else { own_b + w };
        for holder in 0..n {
            if holder == from || holder == target {
                continue;
            }
            let held = utilities.get(viewer, holder);
            for &g in alloc.bundle(holder) {
                let v = inst.value(viewer, g);
                if held - v > own_b {
                    before += 1;
                }
                if held - v > own_a {
                    after += 1;
                }
            }
        }
    }

    after as i64 - before as i64
}

/// Default ceiling on the number of owner vectors exhaustive search will
/// enumerate.
pub const DEFAULT_BRUTE_FORCE_CAP: u128 = 10_000_000;

/// Exhaustively searches all `n^m` allocations for an EFX one, in
/// lexicographic owner-vector order. Returns `None` when no allocation is
/// EFX, and an error when the state space exceeds `cap`.
pub fn brute_force_efx(inst: &Instance, cap: u128) -> Result<Option<Allocation>, Error> {
    let n = inst.num_agents();
    let m = inst.num_goods();
    let states = u32::try_from(m)
        .ok()
        .and_then(|exp| (n as u128).checked_pow(exp))
        .unwrap_or(u128::MAX);
    if states > cap {
        return Err(Error::SearchSpaceTooLarge { states, cap });
    }

    let mut owner = vec![0usize; m];
    // sums[i*n + j]: value viewer i assigns to bundle j, patched as the
    // odometer advances.
    let mut sums = vec![0u64; n * n];
    for g in 0..m {
        for i in 0..n {
            sums[i * n] += inst.value(i, g);
        }
    }

    loop {
        if efx_owner_vector(inst, &owner, &sums, n) {
            return Ok(Some(Allocation::new(n, owner)?));
        }
        // Advance the rightmost digit first: lexicographic order.
        let mut pos = m;
        loop {
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
            let old = owner[pos];
            if old + 1 < n {
                move_in_sums(inst, &mut sums, n, pos, old, old + 1);
                owner[pos] = old + 1;
                break;
            }
            move_in_sums(inst, &mut sums, n, pos, old, 0);
            owner[pos] = 0;
        }
    }
}

fn move_in_sums(inst: &Instance, sums: &mut [u64], n: usize, good: usize, from: usize, to: usize) {
    for i in 0..n {
        let v = inst.value(i, good);
        sums[i * n + from] -= v;
        sums[i * n + to] += v;
    }
}

fn efx_owner_vector(inst: &Instance, owner: &[usize], sums: &[u64], n: usize) -> bool {
    for i in 0..n {
        let own = sums[i * n + i];
        for j in 0..n {
            if j == i {
                continue;
            }
            let held = sums[i * n + j];
            if held <= own {
                continue;
            }
            // held > own >= 0, so bundle j is nonempty; dropping its
            // cheapest good keeps the most value.
            let mut min_v = u64::MAX;
            for (g, &o) in owner.iter().enumerate() {
                if o == j {
                    min_v = min_v.min(inst.value(i, g));
                }
            }
            if held - min_v > own {
                return false;
            }
        }
    }
    true
}
