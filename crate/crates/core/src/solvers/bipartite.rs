use std::collections::BTreeSet;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::multigraph::Agent;

use super::structure::resolve_structure;
use super::{require_cancellable, SolverOutput};

/// EFX allocation for a bipartite multi-graph with cancellable valuations.
///
/// Roots are the left vertices in ascending order. Each root's right neighbours cut
/// their loops with it; ordinary neighbours keep their preferred piece, and the root and
/// its favourite neighbour settle the favourite loop plus the leftovers between them.
/// Left vertices hold nothing before they are resolved, so every structure starts from
/// an empty root bundle.
pub fn bipartite_efx(
    inst: &Instance,
    left: &BTreeSet<Agent>,
    right: &BTreeSet<Agent>,
) -> Result<SolverOutput> {
    check_bipartition(inst, left, right)?;
    require_cancellable(inst)?;
    let mut alloc = Allocation::empty(inst.agent_count());
    let mut trace = Vec::with_capacity(left.len());
    for &u in left {
        debug_assert!(alloc.bundle(u).is_empty());
        let right_nbrs: Vec<Agent> = inst.graph().neighbour_iter(u).collect();
        trace.push(resolve_structure(inst, &mut alloc, u, right_nbrs, 1)?);
    }
    Ok(SolverOutput {
        allocation: alloc,
        trace,
    })
}

pub(crate) fn check_bipartition(
    inst: &Instance,
    left: &BTreeSet<Agent>,
    right: &BTreeSet<Agent>,
) -> Result<()> {
    let n = inst.agent_count();
    let covered = left.len() + right.len() == n
        && left.is_disjoint(right)
        && left.iter().chain(right).all(|&v| v < n);
    if !covered {
        return Err(Error::Precondition(
            "left and right sides must partition the agents".into(),
        ));
    }
    let g = inst.graph();
    for e in 0..g.edge_count() {
        let (a, b) = g.endpoints(e);
        if left.contains(&a) == left.contains(&b) {
            return Err(Error::Precondition(format!(
                "edge {e} joins agents {a} and {b} on the same side"
            )));
        }
    }
    Ok(())
}

/// The bipartition as a 0/1 colouring, for trace headers.
pub(crate) fn side_coloring(left: &BTreeSet<Agent>, n: usize) -> Vec<(Agent, usize)> {
    (0..n)
        .map(|v| (v, usize::from(!left.contains(&v))))
        .collect()
}
