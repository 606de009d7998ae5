mod common;

use std::collections::BTreeSet;

use common::*;
use efxgraph::multigraph::{families, Coloring, MultiGraph};
use efxgraph::solvers::{Branch, TraceEvent};
use efxgraph::valuation::{Table, Valuation};
use efxgraph::{
    bipartite_efx, chromatic_efx, generate, is_efx, oracle, solve, solve_with, tree_efx, Error,
    GenSpec, GraphFamily, Instance, Method, ValuationFamily,
};

fn zero_valuations(g: &MultiGraph) -> Vec<Valuation> {
    (0..g.vertex_count())
        .map(|_| Valuation::additive([]))
        .collect()
}

#[test]
fn b1_bipartite_allocation() {
    let inst = b1();
    let out = bipartite_efx(&inst, &BTreeSet::from([0]), &BTreeSet::from([1, 2])).unwrap();
    assert_eq!(out.allocation, bundles(&[&[0, 3], &[1], &[2]]));
    assert!(is_efx(&inst, &out.allocation).unwrap().ok());
    assert!(naive_is_efx(&inst, &out.allocation));

    let efx_set = naive_efx_set(&inst);
    assert!(efx_set.contains(&holder_vector(&out.allocation, 4)));
    let report = oracle::brute_force_efx(&inst).unwrap();
    assert_eq!(report.searched, 81);
    assert_eq!(report.efx_count as usize, efx_set.len());

    match &out.trace[..] {
        [TraceEvent::StructureResolved {
            phase: 1,
            root: 0,
            favourite: Some(1),
            branch: Branch::DifferentBundles,
            transfers,
            ..
        }] => assert!(transfers.is_empty()),
        other => panic!("unexpected trace {other:?}"),
    }
}

#[test]
fn bipartite_single_edge_and_edgeless() {
    let g = MultiGraph::new(2, [(0, 1)]).unwrap();
    for (va, vb) in [(5, 5), (0, 3), (2, 0)] {
        let inst = Instance::new(
            g.clone(),
            vec![
                Valuation::additive([(0, va)]),
                Valuation::additive([(0, vb)]),
            ],
        )
        .unwrap();
        let out = bipartite_efx(&inst, &BTreeSet::from([0]), &BTreeSet::from([1])).unwrap();
        assert_complete_efx(&inst, &out.allocation);
        // the root takes the good exactly when it values it above the empty piece
        assert_eq!(out.allocation.bundle(0).contains(&0), va > 0);
    }
    let empty = MultiGraph::new(3, []).unwrap();
    let inst = Instance::new(empty.clone(), zero_valuations(&empty)).unwrap();
    let out = bipartite_efx(&inst, &BTreeSet::from([0, 1]), &BTreeSet::from([2])).unwrap();
    assert_eq!(out.allocation.allocated_count(), 0);
}

#[test]
fn bipartite_rejects_bad_input() {
    let inst = b1();
    let err = bipartite_efx(&inst, &BTreeSet::from([0, 1]), &BTreeSet::from([2])).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));

    let g = MultiGraph::new(2, [(0, 1)]).unwrap();
    let t = Table::from_mask_values(vec![0], vec![0, 1]).unwrap();
    let inst = Instance::new(g, vec![Valuation::Table(t), Valuation::additive([])]).unwrap();
    let err = bipartite_efx(&inst, &BTreeSet::from([0]), &BTreeSet::from([1])).unwrap_err();
    assert!(matches!(err, Error::UnsupportedValuation { agent: 0, .. }));
}

#[test]
fn tree_two_agents() {
    // agent 1 is the leaf, agent 0 its parent
    let g = MultiGraph::new(2, [(0, 1), (0, 1), (0, 1)]).unwrap();
    let inst = Instance::new(
        g,
        vec![
            Valuation::additive([(0, 4), (1, 3), (2, 2)]),
            Valuation::additive([(0, 1), (1, 5), (2, 1)]),
        ],
    )
    .unwrap();
    let out = tree_efx(&inst).unwrap();
    assert_eq!(out.allocation, bundles(&[&[0], &[1, 2]]));
    assert_complete_efx(&inst, &out.allocation);
}

#[test]
fn tree_with_worthless_edges() {
    let g = MultiGraph::new(2, [(0, 1), (0, 1)]).unwrap();
    let inst = Instance::new(
        g,
        vec![
            Valuation::additive([(0, 3), (1, 1)]),
            Valuation::additive([(0, 0), (1, 0)]),
        ],
    )
    .unwrap();
    let first = tree_efx(&inst).unwrap();
    assert_complete_efx(&inst, &first.allocation);
    assert_eq!(tree_efx(&inst).unwrap(), first);
}

#[test]
fn tree_star_agrees_with_oracle() {
    for seed in 0..30 {
        let g = families::star(3, 1);
        let mut values = Vec::new();
        for u in 0..4 {
            let inc = g.incident_edges(u);
            values
                .push(Valuation::additive(inc.iter().map(|&e| {
                    (e, (seed as u64 * 7 + e as u64 * 3 + u as u64) % 10)
                })));
        }
        let inst = Instance::new(g.clone(), values).unwrap();
        let out = tree_efx(&inst).unwrap();
        assert_complete_efx(&inst, &out.allocation);
        assert!(naive_efx_set(&inst).contains(&holder_vector(&out.allocation, 3)));
    }
}

#[test]
fn tree_rejects_cycles() {
    let g = families::cycle(3);
    let inst = Instance::new(g.clone(), zero_valuations(&g)).unwrap();
    assert!(matches!(tree_efx(&inst), Err(Error::Precondition(_))));
}

#[test]
fn tree_handles_table_valuations() {
    // complementary goods for the parent: worthless alone, valuable together
    let g = MultiGraph::new(2, [(0, 1), (0, 1), (0, 1)]).unwrap();
    let t = Table::from_mask_values(vec![0, 1, 2], vec![0, 0, 0, 10, 1, 1, 1, 10]).unwrap();
    let inst = Instance::new(
        g,
        vec![
            Valuation::Table(t),
            Valuation::additive([(0, 2), (1, 2), (2, 2)]),
        ],
    )
    .unwrap();
    let out = tree_efx(&inst).unwrap();
    assert_complete_efx(&inst, &out.allocation);
}

fn petersen_instance(seed: u64) -> Instance {
    generate(
        &GenSpec {
            graph: GraphFamily::Petersen { copies: 2 },
            valuations: ValuationFamily::Additive,
            value_max: 100,
        },
        seed,
    )
    .unwrap()
}

#[test]
fn multi_petersen_seed_42() {
    let inst = petersen_instance(42);
    let coloring = inst.graph().find_coloring(3).unwrap();
    assert_eq!(coloring.t(), 3);
    let out = chromatic_efx(&inst, &coloring).unwrap();
    assert_complete_efx(&inst, &out.allocation);
}

#[test]
fn five_cycle_with_doubled_edge() {
    for seed in 0..20u64 {
        let g = families::multicycle(&[2, 1, 1, 1, 1]);
        let vals = (0..5)
            .map(|u| {
                Valuation::additive(
                    g.incident_edges(u)
                        .iter()
                        .map(|&e| (e, (seed * 13 + 5 * e as u64 + 3 * u as u64) % 11)),
                )
            })
            .collect();
        let inst = Instance::new(g, vals).unwrap();
        let coloring = Coloring::new(vec![0, 1, 0, 1, 2], 3).unwrap();
        let out = chromatic_efx(&inst, &coloring).unwrap();
        assert_complete_efx(&inst, &out.allocation);
        assert!(naive_efx_set(&inst).contains(&holder_vector(&out.allocation, 6)));
    }
}

#[test]
fn chromatic_preconditions() {
    let g = families::multicycle(&[2, 2, 2]);
    let inst = Instance::new(g.clone(), zero_valuations(&g)).unwrap();
    let c = Coloring::new(vec![0, 1, 2], 3).unwrap();
    match chromatic_efx(&inst, &c) {
        Err(Error::Precondition(msg)) => assert!(msg.contains("[0, 1, 2]"), "{msg}"),
        other => panic!("expected girth failure, got {other:?}"),
    }
    let g = families::cycle(5);
    let inst = Instance::new(g.clone(), zero_valuations(&g)).unwrap();
    let improper = Coloring::new(vec![0, 1, 0, 1, 1], 3).unwrap();
    assert!(matches!(
        chromatic_efx(&inst, &improper),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn two_colour_chromatic_matches_bipartite() {
    for seed in 0..50 {
        let inst = generate(
            &GenSpec {
                graph: GraphFamily::Bipartite {
                    left: 4,
                    right: 4,
                    edge_num: 1,
                    edge_den: 2,
                    max_parallel: 3,
                },
                valuations: ValuationFamily::Additive,
                value_max: 30,
            },
            seed,
        )
        .unwrap();
        let left: BTreeSet<_> = (0..4).collect();
        let right: BTreeSet<_> = (4..8).collect();
        let coloring = Coloring::new((0..8).map(|v| usize::from(v >= 4)).collect(), 2).unwrap();
        let bip = bipartite_efx(&inst, &left, &right).unwrap();
        let chr = chromatic_efx(&inst, &coloring).unwrap();
        assert_eq!(bip, chr, "seed {seed}");
    }
}

#[test]
fn dispatcher_routes_multicycles() {
    let cases = [(3, Method::BruteForce), (4, Method::Bipartite)]
        .into_iter()
        .chain((5..=9).map(|l| (l, Method::Chromatic)));
    for (len, method) in cases {
        let inst = generate(
            &GenSpec {
                graph: GraphFamily::Multicycle {
                    len,
                    max_parallel: 2,
                },
                valuations: ValuationFamily::Additive,
                value_max: 50,
            },
            len as u64,
        )
        .unwrap();
        let sol = solve(&inst, None).unwrap();
        assert_eq!(sol.method, method, "length {len}");
        if method == Method::Chromatic {
            let exact = if len % 2 == 0 { 2 } else { 3 };
            assert_eq!(sol.components[0].colors, Some(exact));
        }
        assert_complete_efx(&inst, &sol.allocation);
    }
}

#[test]
fn dispatcher_solves_components_separately() {
    // a doubled triangle next to a path
    let g = MultiGraph::new(5, [(0, 1), (0, 1), (1, 2), (0, 2), (3, 4), (3, 4)]).unwrap();
    let vals = (0..5)
        .map(|u| Valuation::additive(g.incident_edges(u).iter().map(|&e| (e, 1 + e as u64))))
        .collect();
    let inst = Instance::new(g, vals).unwrap();
    let sol = solve(&inst, None).unwrap();
    assert_eq!(sol.method, Method::Mixed);
    let methods: Vec<_> = sol.components.iter().map(|c| c.method).collect();
    assert_eq!(methods, vec![Method::BruteForce, Method::Tree]);
    assert_complete_efx(&inst, &sol.allocation);
}

#[test]
fn dispatcher_reports_unsupported_classes() {
    // K4 needs four colours and has triangles; too many goods for exhaustive search
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let g = MultiGraph::new(4, pairs.iter().flat_map(|&p| [p, p])).unwrap();
    let inst = Instance::new(g.clone(), zero_valuations(&g)).unwrap();
    match solve(&inst, None) {
        Err(Error::UnsupportedClass(msg)) => {
            assert!(msg.contains("not bipartite"), "{msg}");
            assert!(msg.contains("exhaustive"), "{msg}");
        }
        other => panic!("expected unsupported class, got {other:?}"),
    }
}

#[test]
fn dispatcher_uses_a_colouring_hint() {
    let inst = petersen_instance(3);
    let hint = inst.graph().find_coloring(3).unwrap();
    let sol = solve(&inst, Some(&hint)).unwrap();
    assert_eq!(sol.method, Method::Chromatic);
    assert_complete_efx(&inst, &sol.allocation);
    let short = Coloring::new(vec![0; 3], 1).unwrap();
    assert!(matches!(
        solve(&inst, Some(&short)),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn oracle_examples() {
    let g = MultiGraph::new(2, [(0, 1)]).unwrap();
    let inst = Instance::new(
        g,
        vec![Valuation::additive([(0, 1)]), Valuation::additive([(0, 1)])],
    )
    .unwrap();
    assert_eq!(oracle::brute_force_efx(&inst).unwrap().efx_count, 2);

    let unfair = bundles(&[&[], &[0, 1]]);
    let g = MultiGraph::new(2, [(0, 1), (0, 1)]).unwrap();
    let inst = Instance::new(
        g,
        vec![
            Valuation::additive([(0, 5), (1, 5)]),
            Valuation::additive([]),
        ],
    )
    .unwrap();
    assert!(!oracle::contains(&inst, &unfair).unwrap());
    let v = is_efx(&inst, &unfair).unwrap();
    let w = v.witness.unwrap();
    assert_eq!((w.envier, w.envied, w.good), (0, 1, 0));

    let empty = MultiGraph::new(0, []).unwrap();
    let inst = Instance::new(empty, vec![]).unwrap();
    assert!(oracle::contains(&inst, &bundles(&[])).unwrap());
}

#[test]
fn forced_solver_on_b1() {
    let inst = b1();
    assert_eq!(solve(&inst, None).unwrap().method, Method::Tree);
    let sol = solve_with(&inst, None, Some(Method::Bipartite)).unwrap();
    assert_eq!(sol.method, Method::Bipartite);
    assert_eq!(sol.allocation, bundles(&[&[0, 3], &[1], &[2]]));
    for m in [Method::Tree, Method::Chromatic, Method::BruteForce] {
        let sol = solve_with(&inst, None, Some(m)).unwrap();
        assert_eq!(sol.method, m);
        assert_complete_efx(&inst, &sol.allocation);
    }
    let triangle = generate(
        &GenSpec {
            graph: GraphFamily::Multicycle {
                len: 3,
                max_parallel: 2,
            },
            valuations: ValuationFamily::Additive,
            value_max: 9,
        },
        1,
    )
    .unwrap();
    for m in [Method::Tree, Method::Bipartite, Method::Chromatic] {
        assert!(solve_with(&triangle, None, Some(m)).is_err(), "{m}");
    }
    assert!(solve_with(&inst, None, Some(Method::Mixed)).is_err());
    assert_eq!("brute_force".parse::<Method>().unwrap(), Method::BruteForce);
}
