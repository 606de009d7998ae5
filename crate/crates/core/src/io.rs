//! JSON documents for instances, allocations and colourings.
//!
//! Files name agents and goods with strings; the core works with indices assigned in
//! declaration order.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{invalid, Result};
use crate::instance::Instance;
use crate::multigraph::{Agent, Coloring, EdgeId, MultiGraph};
use crate::valuation::{Bundle, Table, Valuation};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub endpoints: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntryDoc {
    pub bundle: Vec<String>,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValuationDoc {
    Additive {
        values: BTreeMap<String, u64>,
    },
    BudgetAdditive {
        values: BTreeMap<String, u64>,
        cap: u64,
    },
    UnitDemand {
        values: BTreeMap<String, u64>,
    },
    Table {
        edges: Vec<String>,
        entries: Vec<TableEntryDoc>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub version: String,
    pub agents: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    pub valuations: BTreeMap<String, ValuationDoc>,
}

/// Names for agents and goods, indexed like the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    agents: Vec<String>,
    edges: Vec<String>,
    agent_index: HashMap<String, Agent>,
    edge_index: HashMap<String, EdgeId>,
}

impl Labels {
    pub fn new(agents: Vec<String>, edges: Vec<String>) -> Result<Self> {
        let agent_index = index_names(&agents, "agent")?;
        let edge_index = index_names(&edges, "edge")?;
        Ok(Labels {
            agents,
            edges,
            agent_index,
            edge_index,
        })
    }

    /// `v0, v1, ...` for agents and `e0, e1, ...` for goods.
    pub fn numbered(agents: usize, edges: usize) -> Self {
        Self::new(
            (0..agents).map(|i| format!("v{i}")).collect(),
            (0..edges).map(|i| format!("e{i}")).collect(),
        )
        .expect("numbered names are unique")
    }

    pub fn agent(&self, u: Agent) -> &str {
        &self.agents[u]
    }

    pub fn edge(&self, e: EdgeId) -> &str {
        &self.edges[e]
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn edges(&self) -> &[String] {
        &self.edges
    }

    pub fn agent_index(&self, name: &str) -> Result<Agent> {
        self.agent_index
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("unknown agent {name:?}")))
    }

    pub fn edge_index(&self, name: &str) -> Result<EdgeId> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| invalid(format!("unknown edge {name:?}")))
    }

    fn bundle_names(&self, bundle: &Bundle) -> Vec<String> {
        bundle.iter().map(|&g| self.edges[g].clone()).collect()
    }

    fn bundle_of(&self, names: &[String]) -> Result<Bundle> {
        let mut out = Bundle::new();
        for n in names {
            if !out.insert(self.edge_index(n)?) {
                return Err(invalid(format!("edge {n:?} listed twice")));
            }
        }
        Ok(out)
    }
}

fn index_names(names: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(invalid(format!("duplicate {what} name {n:?}")));
        }
    }
    Ok(index)
}

fn check_version(v: &str) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(invalid(format!(
            "unsupported format version {v:?}, expected {FORMAT_VERSION:?}"
        )));
    }
    Ok(())
}

impl InstanceDocument {
    pub fn to_instance(&self) -> Result<(Instance, Labels)> {
        check_version(&self.version)?;
        let labels = Labels::new(
            self.agents.clone(),
            self.edges.iter().map(|e| e.id.clone()).collect(),
        )?;
        let mut pairs = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            pairs.push((
                labels.agent_index(&e.endpoints[0])?,
                labels.agent_index(&e.endpoints[1])?,
            ));
        }
        let graph = MultiGraph::new(self.agents.len(), pairs)?;
        for name in self.valuations.keys() {
            labels.agent_index(name)?;
        }
        let mut valuations = Vec::with_capacity(self.agents.len());
        for name in &self.agents {
            let doc = self
                .valuations
                .get(name)
                .ok_or_else(|| invalid(format!("agent {name:?} has no valuation")))?;
            let val = valuation_from_doc(doc, &labels)?;
            let u = valuations.len();
            if let Some(g) = val
                .support()
                .into_iter()
                .find(|&g| !graph.is_endpoint(g, u))
            {
                return Err(invalid(format!(
                    "agent {name:?} values edge {:?}, which is not incident to it",
                    labels.edge(g)
                )));
            }
            valuations.push(val);
        }
        Ok((Instance::new(graph, valuations)?, labels))
    }

    pub fn from_instance(inst: &Instance, labels: &Labels) -> Self {
        let g = inst.graph();
        let edges = (0..g.edge_count())
            .map(|e| {
                let (a, b) = g.endpoints(e);
                EdgeDoc {
                    id: labels.edge(e).to_string(),
                    endpoints: [labels.agent(a).to_string(), labels.agent(b).to_string()],
                }
            })
            .collect();
        let valuations = inst
            .valuations()
            .iter()
            .enumerate()
            .map(|(u, v)| (labels.agent(u).to_string(), valuation_to_doc(v, labels)))
            .collect();
        InstanceDocument {
            version: FORMAT_VERSION.to_string(),
            agents: labels.agents().to_vec(),
            edges,
            valuations,
        }
    }
}

fn named_values(values: &BTreeMap<String, u64>, labels: &Labels) -> Result<BTreeMap<EdgeId, u64>> {
    values
        .iter()
        .map(|(n, &v)| Ok((labels.edge_index(n)?, v)))
        .collect()
}

fn valuation_from_doc(doc: &ValuationDoc, labels: &Labels) -> Result<Valuation> {
    Ok(match doc {
        ValuationDoc::Additive { values } => Valuation::Additive(named_values(values, labels)?),
        ValuationDoc::BudgetAdditive { values, cap } => Valuation::BudgetAdditive {
            values: named_values(values, labels)?,
            cap: *cap,
        },
        ValuationDoc::UnitDemand { values } => Valuation::UnitDemand(named_values(values, labels)?),
        ValuationDoc::Table { edges, entries } => {
            let edge_ids = labels.bundle_of(edges)?;
            let entries = entries
                .iter()
                .map(|en| Ok((labels.bundle_of(&en.bundle)?, en.value)))
                .collect::<Result<Vec<_>>>()?;
            Valuation::Table(Table::from_entries(edge_ids, entries)?)
        }
    })
}

fn valuation_to_doc(v: &Valuation, labels: &Labels) -> ValuationDoc {
    let names = |m: &BTreeMap<EdgeId, u64>| {
        m.iter()
            .map(|(&g, &x)| (labels.edge(g).to_string(), x))
            .collect()
    };
    match v {
        Valuation::Additive(m) => ValuationDoc::Additive { values: names(m) },
        Valuation::BudgetAdditive { values, cap } => ValuationDoc::BudgetAdditive {
            values: names(values),
            cap: *cap,
        },
        Valuation::UnitDemand(m) => ValuationDoc::UnitDemand { values: names(m) },
        Valuation::Table(t) => ValuationDoc::Table {
            edges: t
                .edges()
                .iter()
                .map(|&g| labels.edge(g).to_string())
                .collect(),
            entries: t
                .entries()
                .map(|(bundle, value)| TableEntryDoc {
                    bundle: labels.bundle_names(&bundle),
                    value,
                })
                .collect(),
        },
    }
}

pub fn parse_instance(json: &str) -> Result<(Instance, Labels)> {
    let doc: InstanceDocument =
        serde_json::from_str(json).map_err(|e| invalid(format!("instance JSON: {e}")))?;
    doc.to_instance()
}

pub fn instance_to_json(inst: &Instance, labels: &Labels) -> String {
    serde_json::to_string_pretty(&InstanceDocument::from_instance(inst, labels))
        .expect("instance documents serialize")
}

/// Bundles by agent name; agents missing from the map hold nothing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationDocument {
    pub version: String,
    pub bundles: BTreeMap<String, Vec<String>>,
}

impl AllocationDocument {
    pub fn from_allocation(alloc: &Allocation, labels: &Labels) -> Self {
        AllocationDocument {
            version: FORMAT_VERSION.to_string(),
            bundles: alloc
                .bundles()
                .iter()
                .enumerate()
                .map(|(u, b)| (labels.agent(u).to_string(), labels.bundle_names(b)))
                .collect(),
        }
    }

    /// Resolves names; the result may still overlap, which `Allocation::validate` reports.
    pub fn to_allocation(&self, labels: &Labels) -> Result<Allocation> {
        check_version(&self.version)?;
        let mut bundles = vec![Bundle::new(); labels.agents().len()];
        for (name, goods) in &self.bundles {
            bundles[labels.agent_index(name)?] = labels.bundle_of(goods)?;
        }
        let mut seen = HashMap::new();
        for (u, b) in bundles.iter().enumerate() {
            for &g in b {
                if let Some(prev) = seen.insert(g, u) {
                    return Err(invalid(format!(
                        "edge {:?} is held by both {:?} and {:?}",
                        labels.edge(g),
                        labels.agent(prev),
                        labels.agent(u)
                    )));
                }
            }
        }
        Ok(Allocation::from_bundles(bundles))
    }
}

pub fn parse_allocation(json: &str, labels: &Labels) -> Result<Allocation> {
    let doc: AllocationDocument =
        serde_json::from_str(json).map_err(|e| invalid(format!("allocation JSON: {e}")))?;
    doc.to_allocation(labels)
}

pub fn allocation_to_json(alloc: &Allocation, labels: &Labels) -> String {
    serde_json::to_string_pretty(&AllocationDocument::from_allocation(alloc, labels))
        .expect("allocation documents serialize")
}

/// Colour per agent name. `t` defaults to one more than the largest colour.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringDocument {
    pub colors: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
}

impl ColoringDocument {
    pub fn from_coloring(c: &Coloring, labels: &Labels) -> Self {
        ColoringDocument {
            colors: c
                .colors()
                .iter()
                .enumerate()
                .map(|(u, &col)| (labels.agent(u).to_string(), col))
                .collect(),
            t: Some(c.t()),
        }
    }

    pub fn to_coloring(&self, labels: &Labels) -> Result<Coloring> {
        let mut colors = vec![None; labels.agents().len()];
        for (name, &c) in &self.colors {
            colors[labels.agent_index(name)?] = Some(c);
        }
        let colors = colors
            .into_iter()
            .enumerate()
            .map(|(u, c)| {
                c.ok_or_else(|| invalid(format!("agent {:?} has no colour", labels.agent(u))))
            })
            .collect::<Result<Vec<_>>>()?;
        let t = self
            .t
            .unwrap_or_else(|| colors.iter().max().map_or(0, |&m| m + 1));
        Coloring::new(colors, t)
    }
}

pub fn parse_coloring(json: &str, labels: &Labels) -> Result<Coloring> {
    let doc: ColoringDocument =
        serde_json::from_str(json).map_err(|e| invalid(format!("colouring JSON: {e}")))?;
    doc.to_coloring(labels)
}
