use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::multigraph::{Agent, Coloring, ColoringVerdict, Girth};

use super::structure::resolve_structure;
use super::{require_cancellable, SolverOutput};

/// Smallest girth the chromatic solver accepts for a `t`-colouring.
pub fn required_girth(t: usize) -> usize {
    (2 * t).saturating_sub(1)
}

/// Checks that `coloring` is proper and that the skeleton has girth at least `2t - 1`.
pub fn check_chromatic_preconditions(inst: &Instance, coloring: &Coloring) -> Result<()> {
    let g = inst.graph();
    if let ColoringVerdict::Conflict(e) = g.validate_coloring(coloring)? {
        let (a, b) = g.endpoints(e);
        return Err(Error::Precondition(format!(
            "colouring is not proper: edge {e} joins agents {a} and {b} of colour {}",
            coloring.color(a)
        )));
    }
    let need = required_girth(coloring.t());
    if let Some(cycle) = g.shortest_cycle() {
        if cycle.len() < need {
            return Err(Error::Precondition(format!(
                "girth {} is below 2t-1 = {need} for t = {}; short cycle {cycle:?}",
                cycle.len(),
                coloring.t()
            )));
        }
    }
    Ok(())
}

/// EFX allocation for a properly `t`-coloured multi-graph of girth at least `2t - 1`
/// with cancellable valuations.
///
/// Phase `i` treats colour class `i` as the left side and all higher colours as the
/// right side, resolving one structure per left vertex in ascending order. Roots may
/// already hold goods from earlier phases; those either stay with the root or pass to
/// its favourite neighbour together with the leftovers.
pub fn chromatic_efx(inst: &Instance, coloring: &Coloring) -> Result<SolverOutput> {
    check_chromatic_preconditions(inst, coloring)?;
    require_cancellable(inst)?;
    let g = inst.graph();
    let mut alloc = Allocation::empty(inst.agent_count());
    let mut trace = Vec::new();
    for phase in 0..coloring.t().saturating_sub(1) {
        for u in coloring.class(phase) {
            let right: Vec<Agent> = g
                .neighbour_iter(u)
                .filter(|&w| coloring.color(w) > phase)
                .collect();
            trace.push(resolve_structure(inst, &mut alloc, u, right, phase + 1)?);
        }
    }
    debug_assert!(alloc.is_complete(inst.good_count()));
    Ok(SolverOutput {
        allocation: alloc,
        trace,
    })
}

/// Whether the girth condition holds for `t` colours.
pub fn girth_allows(girth: Girth, t: usize) -> bool {
    girth >= Girth::Finite(required_girth(t))
}
