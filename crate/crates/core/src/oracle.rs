//! Exhaustive ground truth: every way of handing each good to any agent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{efx_verdict_unchecked, is_efx, Allocation};
use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::multigraph::Agent;

/// Largest `n^m` the oracle will enumerate.
pub const ORACLE_MAX_ALLOCATIONS: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub efx_count: u64,
    /// The lexicographically first EFX allocation (holder of good 0 most significant).
    pub sample: Option<Allocation>,
    pub searched: u64,
}

fn allocation_space(inst: &Instance) -> Result<u64> {
    let n = inst.agent_count() as u128;
    let mut total: u128 = 1;
    for _ in 0..inst.good_count() {
        total = total.saturating_mul(n);
        if total > ORACLE_MAX_ALLOCATIONS {
            break;
        }
    }
    if total > ORACLE_MAX_ALLOCATIONS {
        return Err(Error::Capacity {
            what: "allocations to enumerate",
            actual: total,
            limit: ORACLE_MAX_ALLOCATIONS,
        });
    }
    Ok(total as u64)
}

/// Visits every assignment extending `prefix`, in lexicographic order.
fn for_each_assignment(n: usize, m: usize, prefix: &[Agent], mut visit: impl FnMut(&[Agent])) {
    let mut holder = vec![0; m];
    holder[..prefix.len()].copy_from_slice(prefix);
    let free = prefix.len();
    loop {
        visit(&holder);
        let mut i = m;
        loop {
            if i == free {
                return;
            }
            i -= 1;
            holder[i] += 1;
            if holder[i] < n {
                break;
            }
            holder[i] = 0;
        }
    }
}

/// Splits the search by the holders of the first few goods so chunks can run in
/// parallel; chunk order is lexicographic.
fn prefixes(n: usize, m: usize) -> Vec<Vec<Agent>> {
    let depth = m.min(3);
    let mut out = vec![Vec::new()];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn scan<T: Send>(inst: &Instance, per_chunk: impl Fn(&[Agent]) -> T + Sync) -> Result<Vec<T>> {
    allocation_space(inst)?;
    Ok(prefixes(inst.agent_count(), inst.good_count())
        .par_iter()
        .map(|p| per_chunk(p))
        .collect())
}

/// Counts EFX allocations among all `n^m` complete allocations.
pub fn brute_force_efx(inst: &Instance) -> Result<OracleReport> {
    let searched = allocation_space(inst)?;
    let (n, m) = (inst.agent_count(), inst.good_count());
    let chunks = scan(inst, |prefix| {
        let mut count = 0u64;
        let mut first: Option<Vec<Agent>> = None;
        for_each_assignment(n, m, prefix, |holder| {
            let alloc = Allocation::from_assignment(n, holder);
            if efx_verdict_unchecked(inst, &alloc).ok() {
                count += 1;
                if first.is_none() {
                    first = Some(holder.to_vec());
                }
            }
        });
        (count, first)
    })?;
    let efx_count = chunks.iter().map(|c| c.0).sum();
    let sample = chunks
        .into_iter()
        .find_map(|c| c.1)
        .map(|h| Allocation::from_assignment(n, &h));
    Ok(OracleReport {
        efx_count,
        sample,
        searched,
    })
}

/// Every EFX allocation, as the holder of each good, in lexicographic order.
pub fn efx_assignments(inst: &Instance) -> Result<Vec<Vec<Agent>>> {
    let (n, m) = (inst.agent_count(), inst.good_count());
    let chunks = scan(inst, |prefix| {
        let mut found = Vec::new();
        for_each_assignment(n, m, prefix, |holder| {
            if efx_verdict_unchecked(inst, &Allocation::from_assignment(n, holder)).ok() {
                found.push(holder.to_vec());
            }
        });
        found
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Membership of a complete allocation in the EFX set.
pub fn contains(inst: &Instance, alloc: &Allocation) -> Result<bool> {
    alloc.validate(inst)?;
    if !alloc.is_complete(inst.good_count()) {
        return Err(invalid("oracle membership needs a complete allocation"));
    }
    Ok(is_efx(inst, alloc)?.ok())
}
