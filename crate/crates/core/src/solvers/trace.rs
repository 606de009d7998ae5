//! Per-step solver snapshots, streamed as JSON lines and replayed by the auditor.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{invalid, Result};
use crate::multigraph::{Agent, EdgeId};
use crate::valuation::Bundle;

/// Which solver handled a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tree,
    Bipartite,
    Chromatic,
    BruteForce,
    /// Components were handled by different solvers.
    Mixed,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tree => "tree",
            Method::Bipartite => "bipartite",
            Method::Chromatic => "chromatic",
            Method::BruteForce => "brute_force",
            Method::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Method::Tree,
            Method::Bipartite,
            Method::Chromatic,
            Method::BruteForce,
            Method::Mixed,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| invalid(format!("unknown method {s:?}")))
    }
}

/// How a structure's favourite loop was settled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Root and favourite want the same piece and the root keeps it; everything else,
    /// including the root's earlier goods, goes to the favourite.
    SameBundleKeep,
    /// Root and favourite want the same piece; the root takes the rest plus leftovers.
    SameBundleLeftovers,
    /// Root and favourite want different pieces.
    DifferentBundles,
    /// The root has no neighbours to its right; nothing is allocated.
    NoRightNeighbours,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub good: EdgeId,
    pub from: Agent,
    pub to: Agent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// Emitted by the dispatcher before each connected component is solved.
    ComponentStarted {
        method: Method,
        agents: Vec<Agent>,
        /// `(agent, colour)` for the colouring the solver used: the bipartition as
        /// colours 0/1 for the bipartite solver, the proper colouring for the chromatic one.
        coloring: Option<Vec<(Agent, usize)>>,
        instance_agents: usize,
        instance_goods: usize,
    },
    StructureResolved {
        phase: usize,
        root: Agent,
        favourite: Option<Agent>,
        branch: Branch,
        snapshot: Allocation,
        /// Previously allocated goods that changed hands in this step.
        transfers: Vec<Transfer>,
    },
    LeafAttached {
        leaf: Agent,
        parent: Agent,
        leaf_piece: Bundle,
        other_piece: Bundle,
        /// The parent itself, or the source agent that received `other_piece`.
        receiver: Agent,
        snapshot: Allocation,
    },
    CycleResolved {
        cycle: Vec<Agent>,
        snapshot: Allocation,
    },
}

impl TraceEvent {
    pub fn snapshot(&self) -> Option<&Allocation> {
        match self {
            TraceEvent::ComponentStarted { .. } => None,
            TraceEvent::StructureResolved { snapshot, .. }
            | TraceEvent::LeafAttached { snapshot, .. }
            | TraceEvent::CycleResolved { snapshot, .. } => Some(snapshot),
        }
    }

    /// Rewrites agent and good indices from a sub-instance into the parent instance.
    /// Snapshots become `base` with the component's agents replaced.
    pub(crate) fn lift(self, agents: &[Agent], goods: &[EdgeId], base: &Allocation) -> TraceEvent {
        let a = |u: Agent| agents[u];
        let b = |set: Bundle| -> Bundle { set.into_iter().map(|g| goods[g]).collect() };
        let snap = |s: Allocation| {
            let mut out = base.clone();
            for (local, bundle) in s.into_bundles().into_iter().enumerate() {
                *out.bundle_mut(agents[local]) = b(bundle);
            }
            out
        };
        match self {
            TraceEvent::ComponentStarted { .. } => self,
            TraceEvent::StructureResolved {
                phase,
                root,
                favourite,
                branch,
                snapshot,
                transfers,
            } => TraceEvent::StructureResolved {
                phase,
                root: a(root),
                favourite: favourite.map(a),
                branch,
                snapshot: snap(snapshot),
                transfers: transfers
                    .into_iter()
                    .map(|t| Transfer {
                        good: goods[t.good],
                        from: a(t.from),
                        to: a(t.to),
                    })
                    .collect(),
            },
            TraceEvent::LeafAttached {
                leaf,
                parent,
                leaf_piece,
                other_piece,
                receiver,
                snapshot,
            } => TraceEvent::LeafAttached {
                leaf: a(leaf),
                parent: a(parent),
                leaf_piece: b(leaf_piece),
                other_piece: b(other_piece),
                receiver: a(receiver),
                snapshot: snap(snapshot),
            },
            TraceEvent::CycleResolved { cycle, snapshot } => TraceEvent::CycleResolved {
                cycle: cycle.into_iter().map(a).collect(),
                snapshot: snap(snapshot),
            },
        }
    }
}

pub fn write_trace<W: Write>(mut out: W, events: &[TraceEvent]) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a JSON-lines trace; blank lines are skipped.
pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<TraceEvent>> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| invalid(format!("trace line {}: {e}", i + 1)))?;
        if line.trim().is_empty() {
            continue;
        }
        let ev = serde_json::from_str(&line)
            .map_err(|e| invalid(format!("trace line {}: {e}", i + 1)))?;
        events.push(ev);
    }
    Ok(events)
}
