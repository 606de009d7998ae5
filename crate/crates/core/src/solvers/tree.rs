use crate::allocation::{envy_graph_unchecked, find_source_with_path, resolve_cycle, Allocation};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::multigraph::Agent;
use crate::partition::cut_and_choose;
use crate::valuation::Bundle;

use super::trace::TraceEvent;
use super::SolverOutput;

/// Order in which leaves are peeled off: repeatedly the highest-index vertex of skeleton
/// degree one among those still present, paired with its unique remaining neighbour.
fn peel_order(inst: &Instance) -> Vec<(Agent, Agent)> {
    let g = inst.graph();
    let n = g.vertex_count();
    let mut present = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.skeleton_degree(v)).collect();
    let mut order = Vec::new();
    while let Some(leaf) = (0..n).rev().find(|&v| present[v] && degree[v] == 1) {
        let parent = g
            .neighbour_iter(leaf)
            .find(|&w| present[w])
            .expect("a leaf has one present neighbour");
        present[leaf] = false;
        degree[leaf] = 0;
        degree[parent] -= 1;
        order.push((leaf, parent));
    }
    order
}

/// EFX allocation for a multi-tree (any forest skeleton) with monotone valuations.
///
/// Leaves are removed one at a time until no edges remain, then re-attached in reverse.
/// Before a leaf is attached, all envy cycles in the current allocation are resolved.
/// The parent cuts the loop, the leaf takes its preferred piece, and the other piece
/// goes to the parent when nobody envies it, or otherwise to a source of the envy graph
/// that reaches the parent; if the parent then envies that source, the cycle through
/// the path is resolved.
pub fn tree_efx(inst: &Instance) -> Result<SolverOutput> {
    if !inst.graph().is_multitree() {
        return Err(Error::Precondition(
            "tree solver needs a multi-graph whose skeleton is a forest".into(),
        ));
    }
    let g = inst.graph();
    let mut alloc = Allocation::empty(inst.agent_count());
    let mut trace = Vec::new();
    for (leaf, parent) in peel_order(inst).into_iter().rev() {
        while let Some(cycle) = envy_graph_unchecked(inst, &alloc).find_cycle() {
            alloc = resolve_cycle(&alloc, &cycle)?;
            trace.push(TraceEvent::CycleResolved {
                cycle,
                snapshot: alloc.clone(),
            });
        }
        let envy = envy_graph_unchecked(inst, &alloc);
        let loop_goods: Bundle = g.parallel_slice(leaf, parent).iter().copied().collect();
        let choice = cut_and_choose(inst.valuation(parent), inst.valuation(leaf), &loop_goods)?;
        alloc
            .bundle_mut(leaf)
            .extend(choice.chooser_piece.iter().copied());

        let source = find_source_with_path(&envy, parent)?;
        let receiver = source.as_ref().map_or(parent, |(s, _)| *s);
        alloc
            .bundle_mut(receiver)
            .extend(choice.cutter_piece.iter().copied());
        trace.push(TraceEvent::LeafAttached {
            leaf,
            parent,
            leaf_piece: choice.chooser_piece,
            other_piece: choice.cutter_piece,
            receiver,
            snapshot: alloc.clone(),
        });

        if let Some((_, path)) = source {
            let pv = inst.valuation(parent);
            if pv.value(alloc.bundle(parent)) < pv.value(alloc.bundle(receiver)) {
                alloc = resolve_cycle(&alloc, &path)?;
                trace.push(TraceEvent::CycleResolved {
                    cycle: path,
                    snapshot: alloc.clone(),
                });
            }
        }
    }
    debug_assert!(alloc.is_complete(inst.good_count()));
    Ok(SolverOutput {
        allocation: alloc,
        trace,
    })
}
