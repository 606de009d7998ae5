//! Seeded random instances for the graph families the solvers cover.
//!
//! All randomness comes from a ChaCha8 stream seeded with a `u64`, and probabilities are
//! integer fractions, so the same parameters and seed give the same instance everywhere.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::multigraph::{families, Agent, EdgeId, MultiGraph};
use crate::valuation::{Table, Valuation};

/// Most incident goods an agent may have under random table valuations.
pub const TABLE_MAX_INCIDENT: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValuationFamily {
    #[default]
    Additive,
    UnitDemand,
    BudgetAdditive,
    /// Random monotone tables; multitrees only.
    Table,
}

impl ValuationFamily {
    pub const ALL: [ValuationFamily; 4] = [
        ValuationFamily::Additive,
        ValuationFamily::UnitDemand,
        ValuationFamily::BudgetAdditive,
        ValuationFamily::Table,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ValuationFamily::Additive => "additive",
            ValuationFamily::UnitDemand => "unit_demand",
            ValuationFamily::BudgetAdditive => "budget_additive",
            ValuationFamily::Table => "table",
        }
    }
}

impl FromStr for ValuationFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown valuation family {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphFamily {
    /// Each left/right pair is joined with probability `edge_num / edge_den` by
    /// 1..=`max_parallel` parallel edges.
    Bipartite {
        left: usize,
        right: usize,
        edge_num: u64,
        edge_den: u64,
        max_parallel: usize,
    },
    /// Random recursive tree; each tree edge carries 1..=`max_parallel` copies.
    Multitree {
        agents: usize,
        max_parallel: usize,
    },
    Multicycle {
        len: usize,
        max_parallel: usize,
    },
    /// The Petersen graph with every edge repeated `copies` times.
    Petersen {
        copies: usize,
    },
}

impl GraphFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GraphFamily::Bipartite { .. } => "bipartite",
            GraphFamily::Multitree { .. } => "multitree",
            GraphFamily::Multicycle { .. } => "multicycle",
            GraphFamily::Petersen { .. } => "petersen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSpec {
    pub graph: GraphFamily,
    pub valuations: ValuationFamily,
    /// Largest value drawn for a single good (or a table increment).
    pub value_max: u64,
}

pub fn generate(spec: &GenSpec, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if spec.valuations == ValuationFamily::Table
        && !matches!(spec.graph, GraphFamily::Multitree { .. })
    {
        return Err(invalid(
            "table valuations are only generated for multitrees",
        ));
    }
    let graph = match spec.graph {
        GraphFamily::Bipartite {
            left,
            right,
            edge_num,
            edge_den,
            max_parallel,
        } => {
            if edge_den == 0 || edge_num > edge_den {
                return Err(invalid("edge probability must be a fraction in [0, 1]"));
            }
            check_parallel(max_parallel)?;
            let mut edges = Vec::new();
            for u in 0..left {
                for w in left..left + right {
                    if rng.gen_range(0..edge_den) < edge_num {
                        let copies = rng.gen_range(1..=max_parallel);
                        edges.extend(std::iter::repeat_n((u, w), copies));
                    }
                }
            }
            MultiGraph::new(left + right, edges)?
        }
        GraphFamily::Multitree {
            agents,
            max_parallel,
        } => {
            check_parallel(max_parallel)?;
            let limit = (spec.valuations == ValuationFamily::Table).then_some(TABLE_MAX_INCIDENT);
            random_multitree(&mut rng, agents, max_parallel, limit)
        }
        GraphFamily::Multicycle { len, max_parallel } => {
            if len < 3 {
                return Err(invalid("a multi-cycle needs at least 3 agents"));
            }
            check_parallel(max_parallel)?;
            let copies: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=max_parallel)).collect();
            families::multicycle(&copies)
        }
        GraphFamily::Petersen { copies } => {
            check_parallel(copies)?;
            families::petersen(copies)
        }
    };
    let valuations = (0..graph.vertex_count())
        .map(|u| random_valuation(&mut rng, graph.incident_edges(u), spec))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(graph, valuations)
}

fn check_parallel(p: usize) -> Result<()> {
    if p == 0 {
        return Err(invalid("parallel edge count must be at least 1"));
    }
    Ok(())
}

/// Vertex `v > 0` hangs off a uniformly random earlier vertex. With `limit`, no vertex
/// gets more than `limit` incident edges.
fn random_multitree(
    rng: &mut ChaCha8Rng,
    agents: usize,
    max_parallel: usize,
    limit: Option<usize>,
) -> MultiGraph {
    let mut room = vec![limit.unwrap_or(usize::MAX); agents];
    let mut edges = Vec::new();
    for v in 1..agents {
        let open: Vec<Agent> = (0..v).filter(|&p| room[p] > 0).collect();
        let p = open[rng.gen_range(0..open.len())];
        // keep one slot free on the new vertex so later vertices always find a parent
        let most = max_parallel
            .min(room[p])
            .min(room[v].saturating_sub(1))
            .max(1);
        let copies = rng.gen_range(1..=most);
        room[p] -= copies;
        room[v] -= copies;
        edges.extend(std::iter::repeat_n((p, v), copies));
    }
    MultiGraph::new(agents, edges).expect("tree edges join distinct vertices")
}

fn random_valuation(
    rng: &mut ChaCha8Rng,
    incident: &[EdgeId],
    spec: &GenSpec,
) -> Result<Valuation> {
    let vmax = spec.value_max;
    let draw = |rng: &mut ChaCha8Rng| -> Vec<(EdgeId, u64)> {
        incident
            .iter()
            .map(|&g| (g, rng.gen_range(0..=vmax)))
            .collect()
    };
    Ok(match spec.valuations {
        ValuationFamily::Additive => Valuation::additive(draw(rng)),
        ValuationFamily::UnitDemand => Valuation::unit_demand(draw(rng)),
        ValuationFamily::BudgetAdditive => {
            let values = draw(rng);
            let total: u64 = values.iter().map(|&(_, v)| v).sum();
            let cap = rng.gen_range(0..=total);
            Valuation::budget_additive(values, cap)
        }
        ValuationFamily::Table => {
            let k = incident.len();
            if k > TABLE_MAX_INCIDENT {
                return Err(invalid(format!(
                    "table valuation over {k} goods exceeds {TABLE_MAX_INCIDENT}"
                )));
            }
            // each subset is worth its best proper subset plus a random increment
            let mut values = vec![0u64; 1 << k];
            for mask in 1..values.len() {
                let base = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| values[mask & !(1 << i)])
                    .max()
                    .unwrap_or(0);
                values[mask] = base + rng.gen_range(0..=vmax);
            }
            let mut edges = incident.to_vec();
            edges.sort_unstable();
            Valuation::Table(Table::from_mask_values(edges, values)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(graph: GraphFamily, valuations: ValuationFamily) -> GenSpec {
        GenSpec {
            graph,
            valuations,
            value_max: 20,
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let s = spec(
            GraphFamily::Bipartite {
                left: 4,
                right: 3,
                edge_num: 1,
                edge_den: 2,
                max_parallel: 3,
            },
            ValuationFamily::BudgetAdditive,
        );
        assert_eq!(generate(&s, 9).unwrap(), generate(&s, 9).unwrap());
        assert_ne!(generate(&s, 9).unwrap(), generate(&s, 10).unwrap());
    }

    #[test]
    fn families_have_their_shape() {
        for seed in 0..20 {
            let t = generate(
                &spec(
                    GraphFamily::Multitree {
                        agents: 8,
                        max_parallel: 3,
                    },
                    ValuationFamily::Table,
                ),
                seed,
            )
            .unwrap();
            assert!(t.graph().is_multitree());
            assert!((0..8).all(|v| t.graph().incident_edges(v).len() <= TABLE_MAX_INCIDENT));

            let c = generate(
                &spec(
                    GraphFamily::Multicycle {
                        len: 6,
                        max_parallel: 2,
                    },
                    ValuationFamily::UnitDemand,
                ),
                seed,
            )
            .unwrap();
            assert_eq!(c.graph().girth(), crate::multigraph::Girth::Finite(6));
        }
        let p = generate(
            &spec(
                GraphFamily::Petersen { copies: 2 },
                ValuationFamily::Additive,
            ),
            1,
        )
        .unwrap();
        assert_eq!(p.good_count(), 30);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = [
            spec(
                GraphFamily::Multicycle {
                    len: 2,
                    max_parallel: 2,
                },
                ValuationFamily::Additive,
            ),
            spec(
                GraphFamily::Petersen { copies: 0 },
                ValuationFamily::Additive,
            ),
            spec(GraphFamily::Petersen { copies: 1 }, ValuationFamily::Table),
            spec(
                GraphFamily::Bipartite {
                    left: 1,
                    right: 1,
                    edge_num: 3,
                    edge_den: 2,
                    max_parallel: 1,
                },
                ValuationFamily::Additive,
            ),
        ];
        for s in &bad {
            assert!(generate(s, 0).is_err(), "{s:?}");
        }
    }

    #[test]
    fn family_names_parse() {
        for f in ValuationFamily::ALL {
            assert_eq!(f.name().parse::<ValuationFamily>().unwrap(), f);
        }
        assert!("convex".parse::<ValuationFamily>().is_err());
    }
}
