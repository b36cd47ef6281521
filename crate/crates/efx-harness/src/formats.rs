//! On-disk document formats: instances, allocations, per-trial records.
//!
//! Every document leads with a `format_version` field. Instance and
//! allocation files are pretty-printed JSON objects; per-trial records are
//! JSON Lines (one flat object per line) so a crashed run keeps every
//! completed trial. The CSV export is a pure projection of the records.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use efx_core::{Allocation, Instance};

use crate::error::HarnessError;
use crate::stats::TrialRecord;

/// Version written into, and accepted from, every document this build touches.
pub const FORMAT_VERSION: u32 = 1;

/// Header fields of any versioned document; parsed first so a version
/// mismatch is reported before any shape errors.
#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    format_version: u32,
    n: usize,
    m: usize,
    scale: u64,
    values: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationDoc {
    format_version: u32,
    instance_digest: String,
    /// 1-based agent index per good, `owner[g]` owning good `g + 1`.
    owner: Vec<usize>,
}

fn check_version(text: &str) -> Result<(), HarnessError> {
    let probe: VersionProbe = serde_json::from_str(text)?;
    if probe.format_version != FORMAT_VERSION {
        return Err(HarnessError::UnsupportedVersion {
            got: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    Ok(())
}

/// Hex SHA-256 of the valuation data. The digest covers the shape and the
/// raw values, not `scale`: an allocation pairs with the numbers the solver
/// saw, and `scale` is generation metadata that never affects them.
pub fn instance_digest(inst: &Instance) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"efx.instance.v1");
    hasher.update((inst.num_agents() as u64).to_le_bytes());
    hasher.update((inst.num_goods() as u64).to_le_bytes());
    for agent in 0..inst.num_agents() {
        for &v in inst.agent_values(agent) {
            hasher.update(v.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}

pub fn instance_to_json(inst: &Instance, scale: u64) -> Result<String, HarnessError> {
    if scale == 0 {
        return Err(HarnessError::ZeroScale);
    }
    let doc = InstanceDoc {
        format_version: FORMAT_VERSION,
        n: inst.num_agents(),
        m: inst.num_goods(),
        scale,
        values: (0..inst.num_agents()).map(|a| inst.agent_values(a).to_vec()).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn instance_from_json(text: &str) -> Result<(Instance, u64), HarnessError> {
    check_version(text)?;
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.values.len() != doc.n {
        return Err(HarnessError::RowCountMismatch {
            got: doc.values.len(),
            expected: doc.n,
            // First surplus row when too many, first absent row when too few.
            row: doc.values.len().min(doc.n) + 1,
        });
    }
    for (idx, row) in doc.values.iter().enumerate() {
        if row.len() != doc.m {
            return Err(HarnessError::ColumnCountMismatch {
                row: idx + 1,
                got: row.len(),
                expected: doc.m,
            });
        }
    }
    if doc.scale == 0 {
        return Err(HarnessError::ZeroScale);
    }
    Ok((Instance::new(doc.values)?, doc.scale))
}

pub fn allocation_to_json(alloc: &Allocation, inst: &Instance) -> Result<String, HarnessError> {
    let doc = AllocationDoc {
        format_version: FORMAT_VERSION,
        instance_digest: instance_digest(inst),
        owner: alloc.owners().iter().map(|&a| a + 1).collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parses an allocation and binds it to `inst`, rejecting files whose
/// digest names a different instance.
pub fn allocation_from_json(text: &str, inst: &Instance) -> Result<Allocation, HarnessError> {
    check_version(text)?;
    let doc: AllocationDoc = serde_json::from_str(text)?;
    let computed = instance_digest(inst);
    if doc.instance_digest != computed {
        return Err(HarnessError::DigestMismatch { in_file: doc.instance_digest, computed });
    }
    if doc.owner.len() != inst.num_goods() {
        return Err(HarnessError::OwnerLengthMismatch {
            got: doc.owner.len(),
            expected: inst.num_goods(),
        });
    }
    let agents = inst.num_agents();
    let mut owner = Vec::with_capacity(doc.owner.len());
    for (idx, &entry) in doc.owner.iter().enumerate() {
        if entry == 0 || entry > agents {
            return Err(HarnessError::OwnerOutOfRange { position: idx + 1, got: entry, agents });
        }
        owner.push(entry - 1);
    }
    Ok(Allocation::new(agents, owner)?)
}

pub fn read_instance(path: &Path) -> Result<(Instance, u64), HarnessError> {
    instance_from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance, scale: u64) -> Result<(), HarnessError> {
    fs::write(path, instance_to_json(inst, scale)? + "\n")?;
    Ok(())
}

pub fn read_allocation(path: &Path, inst: &Instance) -> Result<Allocation, HarnessError> {
    allocation_from_json(&fs::read_to_string(path)?, inst)
}

pub fn write_allocation(
    path: &Path,
    alloc: &Allocation,
    inst: &Instance,
) -> Result<(), HarnessError> {
    fs::write(path, allocation_to_json(alloc, inst)? + "\n")?;
    Ok(())
}

/// One record as a single JSON line (no trailing newline).
pub fn record_to_line(record: &TrialRecord) -> String {
    serde_json::to_string(record).expect("flat struct serialization cannot fail")
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<TrialRecord>, HarnessError> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| Ok(serde_json::from_str(line)?))
        .collect()
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, HarnessError> {
    records_from_jsonl(&fs::read_to_string(path)?)
}

/// Projects records to CSV with a fixed header, in input order.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,seed,solved,steps,restarts,elapsed_ms\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.trial, r.seed, r.solved, r.steps, r.restarts, r.elapsed_ms
        ));
    }
    out
}
