//! Structural class report: which solver preconditions an instance meets.

use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::multigraph::Girth;
use crate::solvers::{
    girth_allows, required_girth, Method, BRUTE_FORCE_MAX_AGENTS, BRUTE_FORCE_MAX_GOODS,
    DISPATCH_MAX_COLORS,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub agents: usize,
    pub goods: usize,
    pub components: usize,
    pub bipartite: bool,
    pub multitree: bool,
    pub girth: Girth,
    /// Exact chromatic number, or `None` when it exceeds `chromatic_cap`.
    pub chromatic_number: Option<usize>,
    pub chromatic_cap: usize,
    /// Smallest girth the chromatic solver needs for `chromatic_number` colours.
    pub required_girth: Option<usize>,
    /// Every valuation is additive, budget-additive or unit-demand.
    pub cancellable: bool,
    /// Solvers whose preconditions hold for the whole instance. Exhaustive search is
    /// listed only when no polynomial solver applies, and the chromatic solver not for
    /// forests.
    pub eligible: Vec<Method>,
}

pub fn analyze(inst: &Instance) -> AnalysisReport {
    let g = inst.graph();
    let bipartite = g.bipartition().is_some();
    let multitree = g.is_multitree();
    let girth = g.girth();
    let chromatic_number = g.find_coloring(DISPATCH_MAX_COLORS).map(|c| c.t());
    let cancellable = inst.first_table_agent().is_none();

    let mut eligible = Vec::new();
    if multitree {
        eligible.push(Method::Tree);
    }
    if bipartite && cancellable {
        eligible.push(Method::Bipartite);
    }
    if let Some(t) = chromatic_number {
        if !multitree && cancellable && girth_allows(girth, t) {
            eligible.push(Method::Chromatic);
        }
    }
    if eligible.is_empty()
        && inst.agent_count() <= BRUTE_FORCE_MAX_AGENTS
        && inst.good_count() <= BRUTE_FORCE_MAX_GOODS
    {
        eligible.push(Method::BruteForce);
    }

    AnalysisReport {
        agents: inst.agent_count(),
        goods: inst.good_count(),
        components: g.components().len(),
        bipartite,
        multitree,
        girth,
        chromatic_number,
        chromatic_cap: DISPATCH_MAX_COLORS,
        required_girth: chromatic_number.map(required_girth),
        cancellable,
        eligible,
    }
}
