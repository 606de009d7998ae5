//! The three polynomial EFX solvers, a class-detecting dispatcher, and solver traces.

mod bipartite;
mod chromatic;
mod structure;
mod trace;
mod tree;

pub use bipartite::bipartite_efx;
pub use chromatic::{check_chromatic_preconditions, chromatic_efx, girth_allows, required_girth};
pub use structure::{NeighbourCut, Structure};
pub use trace::{read_trace, write_trace, Branch, Method, TraceEvent, Transfer};
pub use tree::tree_efx;

use crate::allocation::Allocation;
use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::multigraph::{Agent, Coloring};
use crate::oracle::brute_force_efx;

/// Largest colour count the dispatcher searches for.
pub const DISPATCH_MAX_COLORS: usize = 4;
pub const BRUTE_FORCE_MAX_AGENTS: usize = 4;
pub const BRUTE_FORCE_MAX_GOODS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverOutput {
    pub allocation: Allocation,
    pub trace: Vec<TraceEvent>,
}

pub(crate) fn require_cancellable(inst: &Instance) -> Result<()> {
    match inst.first_table_agent() {
        Some(agent) => Err(Error::UnsupportedValuation {
            agent,
            kind: inst.valuation(agent).kind(),
        }),
        None => Ok(()),
    }
}

/// How one connected component was solved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentRun {
    pub agents: Vec<Agent>,
    pub method: Method,
    /// Colours used by the chromatic solver.
    pub colors: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub allocation: Allocation,
    pub method: Method,
    pub components: Vec<ComponentRun>,
    pub trace: Vec<TraceEvent>,
}

/// Solves each connected component that has goods, trying in order: the tree solver,
/// the chromatic solver for multi-cycles of length at least 5, the bipartite solver, the
/// chromatic solver (with the restricted `hint` or an exact
/// colouring of at most [`DISPATCH_MAX_COLORS`] colours meeting the girth bound), and
/// exhaustive search on components with at most 4 agents and 8 goods.
///
/// `method` is the solver shared by every component (`Tree` when there are none) or
/// `Mixed`.
pub fn solve(inst: &Instance, hint: Option<&Coloring>) -> Result<Solution> {
    solve_with(inst, hint, None)
}

/// Like [`solve`], but with `only` set every component goes to that solver, and a
/// failed precondition is an error instead of a fallback. Forced exhaustive search is
/// bounded by the oracle's capacity rather than the dispatch bound.
pub fn solve_with(
    inst: &Instance,
    hint: Option<&Coloring>,
    only: Option<Method>,
) -> Result<Solution> {
    if only == Some(Method::Mixed) {
        return Err(invalid("mixed is not a solver"));
    }
    if let Some(h) = hint {
        if h.colors().len() != inst.agent_count() {
            return Err(invalid(format!(
                "colouring hint covers {} agents, instance has {}",
                h.colors().len(),
                inst.agent_count()
            )));
        }
        if !inst.graph().validate_coloring(h)?.is_proper() {
            return Err(invalid("colouring hint is not proper"));
        }
    }
    let mut alloc = Allocation::empty(inst.agent_count());
    let mut trace = Vec::new();
    let mut components = Vec::new();
    for agents in inst.graph().components() {
        let (sub, goods) = inst.restrict(&agents);
        if sub.good_count() == 0 {
            continue;
        }
        let local_hint = hint.map(|h| {
            Coloring::from_colors(agents.iter().map(|&v| h.color(v)).collect()).compacted()
        });
        let (run, out, coloring) = solve_component(&sub, local_hint.as_ref(), only)?;
        trace.push(TraceEvent::ComponentStarted {
            method: run,
            agents: agents.clone(),
            coloring: coloring
                .as_ref()
                .map(|c| c.iter().map(|&(v, col)| (agents[v], col)).collect()),
            instance_agents: inst.agent_count(),
            instance_goods: inst.good_count(),
        });
        for ev in out.trace {
            trace.push(ev.lift(&agents, &goods, &alloc));
        }
        for (local, bundle) in out.allocation.into_bundles().into_iter().enumerate() {
            *alloc.bundle_mut(agents[local]) = bundle.into_iter().map(|g| goods[g]).collect();
        }
        components.push(ComponentRun {
            agents,
            method: run,
            colors: coloring
                .filter(|_| run == Method::Chromatic)
                .map(|c| c.iter().map(|&(_, col)| col).max().map_or(1, |m| m + 1)),
        });
    }
    let method = match components.first() {
        None => Method::Tree,
        Some(first) if components.iter().all(|c| c.method == first.method) => first.method,
        Some(_) => Method::Mixed,
    };
    Ok(Solution {
        allocation: alloc,
        method,
        components,
        trace,
    })
}

type ComponentResult = (Method, SolverOutput, Option<Vec<(Agent, usize)>>);
type ColouredRun = (SolverOutput, Vec<(Agent, usize)>);

/// Runs the chromatic solver with the hint, or else an exact colouring, when the girth
/// allows it.
fn try_chromatic(
    inst: &Instance,
    hint: Option<&Coloring>,
    girth: crate::multigraph::Girth,
) -> Result<Option<ColouredRun>> {
    let candidate = hint
        .filter(|h| girth_allows(girth, h.t()))
        .cloned()
        .or_else(|| {
            inst.graph()
                .find_coloring(DISPATCH_MAX_COLORS)
                .filter(|c| girth_allows(girth, c.t()))
        });
    let Some(coloring) = candidate else {
        return Ok(None);
    };
    let out = chromatic_efx(inst, &coloring)?;
    let colors = coloring.colors().iter().copied().enumerate().collect();
    Ok(Some((out, colors)))
}

fn forced_component(
    inst: &Instance,
    hint: Option<&Coloring>,
    method: Method,
) -> Result<ComponentResult> {
    let g = inst.graph();
    match method {
        Method::Tree => Ok((Method::Tree, tree_efx(inst)?, None)),
        Method::Bipartite => {
            let (left, right) = g
                .bipartition()
                .ok_or_else(|| Error::Precondition("the graph is not bipartite".into()))?;
            let out = bipartite_efx(inst, &left, &right)?;
            Ok((
                method,
                out,
                Some(bipartite::side_coloring(&left, inst.agent_count())),
            ))
        }
        Method::Chromatic => {
            let coloring = hint
                .cloned()
                .or_else(|| g.find_coloring(DISPATCH_MAX_COLORS))
                .ok_or_else(|| {
                    Error::Precondition(format!("needs more than {DISPATCH_MAX_COLORS} colours"))
                })?;
            let out = chromatic_efx(inst, &coloring)?;
            Ok((
                method,
                out,
                Some(coloring.colors().iter().copied().enumerate().collect()),
            ))
        }
        Method::BruteForce => Ok((method, exhaustive(inst)?, None)),
        Method::Mixed => Err(invalid("mixed is not a solver")),
    }
}

fn exhaustive(inst: &Instance) -> Result<SolverOutput> {
    match brute_force_efx(inst)?.sample {
        Some(allocation) => Ok(SolverOutput {
            allocation,
            trace: Vec::new(),
        }),
        None => Err(Error::UnsupportedClass(
            "exhaustive search found no EFX allocation".into(),
        )),
    }
}

fn solve_component(
    inst: &Instance,
    hint: Option<&Coloring>,
    only: Option<Method>,
) -> Result<ComponentResult> {
    if let Some(method) = only {
        return forced_component(inst, hint, method);
    }
    let g = inst.graph();
    if g.is_multitree() {
        return Ok((Method::Tree, tree_efx(inst)?, None));
    }
    let cancellable = inst.first_table_agent().is_none();
    let mut reasons = vec!["skeleton has a cycle, so not a multi-tree".to_string()];
    let girth = g.girth();
    // multi-cycles of length 5 or more go to the chromatic solver even when even
    if cancellable && g.multicycle_length().is_some_and(|len| len >= 5) {
        if let Some((out, colors)) = try_chromatic(inst, hint, girth)? {
            return Ok((Method::Chromatic, out, Some(colors)));
        }
    }
    let bipart = g.bipartition();
    match (&bipart, cancellable) {
        (Some((left, right)), true) => {
            let out = bipartite_efx(inst, left, right)?;
            let colors = bipartite::side_coloring(left, inst.agent_count());
            return Ok((Method::Bipartite, out, Some(colors)));
        }
        (Some(_), false) => reasons.push("bipartite, but a table valuation is present".into()),
        (None, _) => reasons.push("not bipartite".into()),
    }
    if cancellable {
        if let Some((out, colors)) = try_chromatic(inst, hint, girth)? {
            return Ok((Method::Chromatic, out, Some(colors)));
        }
        reasons.push(match g.find_coloring(DISPATCH_MAX_COLORS) {
            Some(c) => format!(
                "girth {girth} is below 2t-1 = {} for chromatic number {}",
                required_girth(c.t()),
                c.t()
            ),
            None => format!("needs more than {DISPATCH_MAX_COLORS} colours"),
        });
    } else {
        reasons.push("chromatic solver needs cancellable valuations".into());
    }
    if inst.agent_count() <= BRUTE_FORCE_MAX_AGENTS && inst.good_count() <= BRUTE_FORCE_MAX_GOODS {
        return Ok((Method::BruteForce, exhaustive(inst)?, None));
    }
    reasons.push(format!(
        "{} agents and {} goods exceed the exhaustive-search bound of {BRUTE_FORCE_MAX_AGENTS} agents and {BRUTE_FORCE_MAX_GOODS} goods",
        inst.agent_count(),
        inst.good_count()
    ));
    Err(Error::UnsupportedClass(reasons.join("; ")))
}
