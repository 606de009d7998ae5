//! Replays a solver trace and checks the step invariants the algorithms rely on.
//!
//! Every check is scoped to the component announced by the latest `ComponentStarted`
//! event. Structure steps (bipartite and chromatic solvers) are checked for localized
//! envy, partial EFX, good movement, distances along allocated edges, and the
//! unresolved-union bound; tree steps for monotone own-bundle values and partial EFX at
//! the end of each leaf step.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::allocation::{efx_verdict_unchecked, envy_graph_unchecked, Allocation};
use crate::error::{invalid, Result};
use crate::instance::Instance;
use crate::multigraph::{Agent, EdgeId};
use crate::solvers::{Method, TraceEvent, Transfer};
use crate::valuation::Bundle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantFamily {
    /// Any envied agent is a resolved root, envied only by its favourite.
    LocalizedEnvy,
    PartialEfx,
    /// Goods change hands only from a root to its favourite, at most once per phase,
    /// and new goods come from the structure being resolved.
    GoodMovement,
    /// Holders of goods stay close, along allocated edges, to the agents valuing them
    /// and to the roots whose structure the goods came from.
    Distance,
    /// No unresolved agent values the union of the other unresolved agents' bundles
    /// above its own.
    UnresolvedUnion,
    /// No agent's value for its own bundle drops between tree steps.
    TreeMonotone,
}

impl InvariantFamily {
    pub const ALL: [InvariantFamily; 6] = [
        InvariantFamily::LocalizedEnvy,
        InvariantFamily::PartialEfx,
        InvariantFamily::GoodMovement,
        InvariantFamily::Distance,
        InvariantFamily::UnresolvedUnion,
        InvariantFamily::TreeMonotone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InvariantFamily::LocalizedEnvy => "localized_envy",
            InvariantFamily::PartialEfx => "partial_efx",
            InvariantFamily::GoodMovement => "good_movement",
            InvariantFamily::Distance => "distance",
            InvariantFamily::UnresolvedUnion => "unresolved_union",
            InvariantFamily::TreeMonotone => "tree_monotone",
        }
    }
}

impl std::fmt::Display for InvariantFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Zero-based index of the trace event.
    pub event: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl FamilyStatus {
    pub fn name(self) -> &'static str {
        match self {
            FamilyStatus::Pass => "pass",
            FamilyStatus::Fail => "fail",
            FamilyStatus::NotApplicable => "not_applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: InvariantFamily,
    /// Snapshots this family was checked on.
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl FamilyReport {
    pub fn status(&self) -> FamilyStatus {
        if !self.violations.is_empty() {
            FamilyStatus::Fail
        } else if self.checked == 0 {
            FamilyStatus::NotApplicable
        } else {
            FamilyStatus::Pass
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub events: usize,
    pub families: Vec<FamilyReport>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(|f| f.violations.is_empty())
    }

    pub fn family(&self, family: InvariantFamily) -> &FamilyReport {
        self.families
            .iter()
            .find(|f| f.family == family)
            .expect("every family is reported")
    }

    /// First violation in event order, with its family.
    pub fn first_violation(&self) -> Option<(InvariantFamily, &Violation)> {
        self.families
            .iter()
            .flat_map(|f| f.violations.iter().map(move |v| (f.family, v)))
            .min_by_key(|(fam, v)| (v.event, *fam))
    }
}

struct Component {
    method: Method,
    agents: Vec<Agent>,
    member: Vec<bool>,
    colour: Vec<Option<usize>>,
    resolved: Vec<bool>,
    favourite: Vec<Option<Agent>>,
    phase: usize,
    moved_in_phase: BTreeSet<EdgeId>,
}

impl Component {
    fn colour_of(&self, u: Agent, event: usize) -> Result<usize> {
        self.colour[u].ok_or_else(|| invalid(format!("event {event}: agent {u} has no colour")))
    }
}

struct Auditor<'a> {
    inst: &'a Instance,
    families: Vec<FamilyReport>,
}

impl Auditor<'_> {
    fn checked(&mut self, family: InvariantFamily) {
        self.report(family).checked += 1;
    }

    fn fail(&mut self, family: InvariantFamily, event: usize, message: String) {
        self.report(family)
            .violations
            .push(Violation { event, message });
    }

    fn report(&mut self, family: InvariantFamily) -> &mut FamilyReport {
        self.families
            .iter_mut()
            .find(|f| f.family == family)
            .expect("every family is reported")
    }
}

/// Audits `trace` against `inst`. Inconsistent input (events before any component
/// header, unknown agents, snapshots that are not valid allocations, a header for a
/// different instance) is an error; invariant failures are reported, not raised.
pub fn audit(inst: &Instance, trace: &[TraceEvent]) -> Result<AuditReport> {
    let n = inst.agent_count();
    let mut aud = Auditor {
        inst,
        families: InvariantFamily::ALL
            .iter()
            .map(|&family| FamilyReport {
                family,
                checked: 0,
                violations: Vec::new(),
            })
            .collect(),
    };
    let mut prev = Allocation::empty(n);
    let mut comp: Option<Component> = None;

    for (i, ev) in trace.iter().enumerate() {
        if let TraceEvent::ComponentStarted {
            method,
            agents,
            coloring,
            instance_agents,
            instance_goods,
        } = ev
        {
            if (*instance_agents, *instance_goods) != (n, inst.good_count()) {
                return Err(invalid(format!(
                    "event {i}: trace is for {instance_agents} agents and {instance_goods} goods, \
                     instance has {n} and {}",
                    inst.good_count()
                )));
            }
            comp = Some(start_component(i, n, *method, agents, coloring.as_deref())?);
            continue;
        }
        let Some(c) = comp.as_mut() else {
            return Err(invalid(format!("event {i} precedes any component header")));
        };
        let snap = ev.snapshot().expect("non-header events carry snapshots");
        snap.validate(inst)
            .map_err(|e| invalid(format!("event {i}: snapshot: {e}")))?;
        check_event_agents(i, ev, c)?;

        match ev {
            TraceEvent::StructureResolved {
                phase,
                root,
                favourite,
                transfers,
                ..
            } => {
                if !matches!(c.method, Method::Bipartite | Method::Chromatic) {
                    return Err(invalid(format!(
                        "event {i}: structure step inside a {} component",
                        c.method
                    )));
                }
                if *phase != c.phase {
                    if *phase < c.phase {
                        aud.fail(
                            InvariantFamily::GoodMovement,
                            i,
                            format!("phase went back from {} to {phase}", c.phase),
                        );
                    }
                    c.phase = *phase;
                    c.moved_in_phase.clear();
                }
                c.resolved[*root] = true;
                c.favourite[*root] = *favourite;
                check_movement(&mut aud, i, c, &prev, snap, *root, *favourite, transfers)?;
                check_localized_envy(&mut aud, i, c, snap);
                check_partial_efx(&mut aud, i, snap);
                check_distance(&mut aud, i, c, snap)?;
                check_unresolved_union(&mut aud, i, c, snap);
            }
            TraceEvent::LeafAttached { .. } | TraceEvent::CycleResolved { .. } => {
                if c.method != Method::Tree {
                    return Err(invalid(format!(
                        "event {i}: tree step inside a {} component",
                        c.method
                    )));
                }
                check_monotone(&mut aud, i, c, &prev, snap);
                let step_continues =
                    matches!(trace.get(i + 1), Some(TraceEvent::CycleResolved { .. }));
                if !step_continues {
                    check_partial_efx(&mut aud, i, snap);
                }
            }
            TraceEvent::ComponentStarted { .. } => unreachable!(),
        }
        prev = snap.clone();
    }
    Ok(AuditReport {
        events: trace.len(),
        families: aud.families,
    })
}

fn start_component(
    event: usize,
    n: usize,
    method: Method,
    agents: &[Agent],
    coloring: Option<&[(Agent, usize)]>,
) -> Result<Component> {
    let mut member = vec![false; n];
    for &u in agents {
        if u >= n || std::mem::replace(&mut member[u], true) {
            return Err(invalid(format!(
                "event {event}: component lists unknown or repeated agent {u}"
            )));
        }
    }
    let mut colour = vec![None; n];
    for &(u, col) in coloring.unwrap_or_default() {
        if u >= n || !member[u] {
            return Err(invalid(format!(
                "event {event}: colouring mentions agent {u} outside the component"
            )));
        }
        colour[u] = Some(col);
    }
    if matches!(method, Method::Bipartite | Method::Chromatic)
        && agents.iter().any(|&u| colour[u].is_none())
    {
        return Err(invalid(format!(
            "event {event}: {method} component without a colour for every agent"
        )));
    }
    Ok(Component {
        method,
        agents: agents.to_vec(),
        member,
        colour,
        resolved: vec![false; n],
        favourite: vec![None; n],
        phase: 0,
        moved_in_phase: BTreeSet::new(),
    })
}

fn check_event_agents(event: usize, ev: &TraceEvent, c: &Component) -> Result<()> {
    let mut named: Vec<Agent> = Vec::new();
    match ev {
        TraceEvent::StructureResolved {
            root,
            favourite,
            transfers,
            ..
        } => {
            named.push(*root);
            named.extend(favourite);
            for t in transfers {
                named.extend([t.from, t.to]);
            }
        }
        TraceEvent::LeafAttached {
            leaf,
            parent,
            receiver,
            ..
        } => named.extend([*leaf, *parent, *receiver]),
        TraceEvent::CycleResolved { cycle, .. } => named.extend(cycle),
        TraceEvent::ComponentStarted { .. } => {}
    }
    match named
        .into_iter()
        .find(|&u| u >= c.member.len() || !c.member[u])
    {
        Some(u) => Err(invalid(format!(
            "event {event}: agent {u} is not in the current component"
        ))),
        None => Ok(()),
    }
}

fn component_goods(inst: &Instance, c: &Component) -> BTreeSet<EdgeId> {
    c.agents
        .iter()
        .flat_map(|&u| inst.graph().incident_edges(u).iter().copied())
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn check_movement(
    aud: &mut Auditor,
    event: usize,
    c: &mut Component,
    prev: &Allocation,
    snap: &Allocation,
    root: Agent,
    favourite: Option<Agent>,
    transfers: &[Transfer],
) -> Result<()> {
    use InvariantFamily::GoodMovement as F;
    aud.checked(F);
    let g = aud.inst.graph();
    let m = aud.inst.good_count();
    let before = prev.holders(m);
    let after = snap.holders(m);
    let root_colour = c.colour_of(root, event)?;

    for u in 0..snap.agent_count() {
        if !c.member[u] && prev.bundle(u) != snap.bundle(u) {
            aud.fail(
                F,
                event,
                format!("agent {u} outside the component changed bundle"),
            );
        }
    }
    for e in component_goods(aud.inst, c) {
        let (x, y) = g.endpoints(e);
        let in_structure = (x == root || y == root) && {
            let other = if x == root { y } else { x };
            c.colour_of(other, event)? > root_colour
        };
        match (before[e], after[e]) {
            (Some(h), None) => {
                aud.fail(F, event, format!("good {e} held by {h} became unallocated"))
            }
            (Some(from), Some(to)) if from != to => {
                let listed = transfers.contains(&Transfer { good: e, from, to });
                if from != root || Some(to) != favourite {
                    aud.fail(
                        F,
                        event,
                        format!("good {e} moved from {from} to {to}, not from root {root} to its favourite"),
                    );
                } else if !listed {
                    aud.fail(
                        F,
                        event,
                        format!("good {e} moved from {from} to {to} without a recorded transfer"),
                    );
                }
                if !c.moved_in_phase.insert(e) {
                    aud.fail(
                        F,
                        event,
                        format!("good {e} moved twice in phase {}", c.phase),
                    );
                }
            }
            (None, Some(to)) => {
                let in_struct_agent = to == root
                    || (c.colour_of(to, event)? > root_colour
                        && !g.parallel_slice(root, to).is_empty());
                if !in_structure {
                    aud.fail(
                        F,
                        event,
                        format!(
                            "good {e} allocated while resolving root {root}, outside its structure"
                        ),
                    );
                } else if !in_struct_agent {
                    aud.fail(
                        F,
                        event,
                        format!("good {e} given to {to}, who is outside the structure of {root}"),
                    );
                }
            }
            (None, None) if in_structure => {
                aud.fail(
                    F,
                    event,
                    format!("good {e} of the structure of {root} left unallocated"),
                );
            }
            _ => {}
        }
    }
    for t in transfers {
        if before.get(t.good).copied().flatten() != Some(t.from)
            || after.get(t.good).copied().flatten() != Some(t.to)
        {
            aud.fail(
                F,
                event,
                format!(
                    "recorded transfer of good {} from {} to {} did not happen",
                    t.good, t.from, t.to
                ),
            );
        }
    }
    Ok(())
}

fn check_localized_envy(aud: &mut Auditor, event: usize, c: &Component, snap: &Allocation) {
    use InvariantFamily::LocalizedEnvy as F;
    aud.checked(F);
    for &(z, y) in envy_graph_unchecked(aud.inst, snap).edges() {
        if !(c.member[z] && c.member[y]) {
            continue;
        }
        if !c.resolved[y] {
            aud.fail(F, event, format!("agent {z} envies unresolved agent {y}"));
        } else if c.favourite[y] != Some(z) {
            aud.fail(
                F,
                event,
                format!("agent {z} envies root {y} but is not its favourite"),
            );
        }
    }
}

fn check_partial_efx(aud: &mut Auditor, event: usize, snap: &Allocation) {
    use InvariantFamily::PartialEfx as F;
    aud.checked(F);
    if let Some(w) = efx_verdict_unchecked(aud.inst, snap).witness {
        aud.fail(
            F,
            event,
            format!(
                "agent {} envies agent {} even without good {}",
                w.envier, w.envied, w.good
            ),
        );
    }
}

/// Hop distances from `src` in the graph whose edges are the allocated goods.
fn allocated_distances(inst: &Instance, held: &[Option<Agent>], src: Agent) -> Vec<Option<usize>> {
    let g = inst.graph();
    let mut dist = vec![None; g.vertex_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].expect("queued vertices have distances");
        for &e in g.incident_edges(x) {
            if held[e].is_none() {
                continue;
            }
            let (a, b) = g.endpoints(e);
            let y = if a == x { b } else { a };
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

fn check_distance(aud: &mut Auditor, event: usize, c: &Component, snap: &Allocation) -> Result<()> {
    use InvariantFamily::Distance as F;
    aud.checked(F);
    let inst = aud.inst;
    let g = inst.graph();
    let held = snap.holders(inst.good_count());
    let mut from: Vec<Option<Vec<Option<usize>>>> = vec![None; g.vertex_count()];
    let mut failures = Vec::new();
    for e in component_goods(inst, c) {
        let Some(w) = held[e] else { continue };
        let (x, y) = g.endpoints(e);
        let cw = c.colour_of(w, event)?;
        let (cx, cy) = (c.colour_of(x, event)?, c.colour_of(y, event)?);
        let root = if cx <= cy { x } else { y };
        let croot = cx.min(cy);
        for z in [x, y] {
            let d = from[z].get_or_insert_with(|| allocated_distances(inst, &held, z))[w];
            // colours are zero-based here, so colour c corresponds to bound c + 1
            if d.is_none_or(|d| d > cw + 1) {
                failures.push(format!(
                    "agent {z} values good {e} held by {w} at allocated distance {} > {}",
                    fmt_dist(d),
                    cw + 1
                ));
            }
        }
        let d = from[root].get_or_insert_with(|| allocated_distances(inst, &held, root))[w];
        if d.is_none_or(|d| d + croot > cw) {
            failures.push(format!(
                "good {e} from the structure of {root} is held by {w} at allocated distance {} > {}",
                fmt_dist(d),
                cw as i64 - croot as i64
            ));
        }
    }
    for f in failures {
        aud.fail(F, event, f);
    }
    Ok(())
}

fn fmt_dist(d: Option<usize>) -> String {
    d.map_or_else(|| "unreachable".to_string(), |d| d.to_string())
}

fn check_unresolved_union(aud: &mut Auditor, event: usize, c: &Component, snap: &Allocation) {
    use InvariantFamily::UnresolvedUnion as F;
    aud.checked(F);
    let unresolved: Vec<Agent> = c
        .agents
        .iter()
        .copied()
        .filter(|&u| !c.resolved[u])
        .collect();
    for &z in &unresolved {
        let val = aud.inst.valuation(z);
        let own = val.value(snap.bundle(z));
        let others: Bundle = unresolved
            .iter()
            .filter(|&&w| w != z)
            .flat_map(|&w| snap.bundle(w).iter().copied())
            .collect();
        let union = val.value(&others);
        if own < union {
            aud.fail(
                F,
                event,
                format!("unresolved agent {z} values the other unresolved bundles at {union} > own {own}"),
            );
        }
    }
}

fn check_monotone(
    aud: &mut Auditor,
    event: usize,
    c: &Component,
    prev: &Allocation,
    snap: &Allocation,
) {
    use InvariantFamily::TreeMonotone as F;
    aud.checked(F);
    for &u in &c.agents {
        let val = aud.inst.valuation(u);
        let (before, after) = (val.value(prev.bundle(u)), val.value(snap.bundle(u)));
        if after < before {
            aud.fail(
                F,
                event,
                format!("agent {u}'s own value fell from {before} to {after}"),
            );
        }
    }
}
