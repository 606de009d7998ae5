use crate::error::{invalid, Result};
use crate::multigraph::{Agent, MultiGraph};
use crate::valuation::{Bundle, Valuation};

/// A fair-division problem on a multi-graph: one valuation per vertex, each supported
/// only on that vertex's incident edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    graph: MultiGraph,
    valuations: Vec<Valuation>,
}

impl Instance {
    pub fn new(graph: MultiGraph, valuations: Vec<Valuation>) -> Result<Self> {
        if valuations.len() != graph.vertex_count() {
            return Err(invalid(format!(
                "{} valuations for {} agents",
                valuations.len(),
                graph.vertex_count()
            )));
        }
        for (u, val) in valuations.iter().enumerate() {
            for g in val.support() {
                if g >= graph.edge_count() {
                    return Err(invalid(format!("agent {u} values unknown good {g}")));
                }
                if !graph.is_endpoint(g, u) {
                    return Err(invalid(format!(
                        "agent {u} values good {g}, which is not incident to it"
                    )));
                }
            }
        }
        Ok(Instance { graph, valuations })
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, u: Agent) -> &Valuation {
        &self.valuations[u]
    }

    pub fn agent_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn good_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn value(&self, u: Agent, bundle: &Bundle) -> u64 {
        self.valuations[u].value(bundle)
    }

    /// First agent holding an explicit table, if any.
    pub fn first_table_agent(&self) -> Option<Agent> {
        self.valuations
            .iter()
            .position(|v| !v.is_cancellable_family())
    }

    /// Sub-instance on `vertices` (sorted). Returns it with the local→global edge map.
    pub fn restrict(&self, vertices: &[Agent]) -> (Instance, Vec<usize>) {
        let (graph, edge_map) = self.graph.induced(vertices);
        let mut global_to_local = std::collections::HashMap::new();
        for (local, &global) in edge_map.iter().enumerate() {
            global_to_local.insert(global, local);
        }
        let valuations = vertices
            .iter()
            .map(|&v| relabel(&self.valuations[v], &global_to_local))
            .collect();
        let inst = Instance::new(graph, valuations).expect("restriction keeps supports incident");
        (inst, edge_map)
    }
}

fn relabel(val: &Valuation, map: &std::collections::HashMap<usize, usize>) -> Valuation {
    use crate::valuation::Table;
    let remap =
        |m: &std::collections::BTreeMap<usize, u64>| m.iter().map(|(g, &x)| (map[g], x)).collect();
    match val {
        Valuation::Additive(v) => Valuation::Additive(remap(v)),
        Valuation::BudgetAdditive { values, cap } => Valuation::BudgetAdditive {
            values: remap(values),
            cap: *cap,
        },
        Valuation::UnitDemand(v) => Valuation::UnitDemand(remap(v)),
        Valuation::Table(t) => {
            // induced subgraphs keep relative edge order, so masks stay aligned
            let edges = t.edges().iter().map(|g| map[g]).collect();
            let values = t.entries().map(|(_, v)| v).collect();
            Valuation::Table(Table::from_mask_values(edges, values).expect("relabelled table"))
        }
    }
}
