//! Fixtures and independently coded reference checks shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use efxgraph::multigraph::{Agent, EdgeId, MultiGraph};
use efxgraph::solvers::TraceEvent;
use efxgraph::valuation::{Bundle, Valuation};
use efxgraph::{bipartite_efx, Allocation, Instance, Method};

/// Three agents a=0, b=1, c=2; goods e1, e2 between a and b (ids 0, 1) and e3, e4
/// between a and c (ids 2, 3).
pub fn b1() -> Instance {
    let g = MultiGraph::new(3, [(0, 1), (0, 1), (0, 2), (0, 2)]).unwrap();
    Instance::new(
        g,
        vec![
            Valuation::additive([(0, 8), (1, 1), (2, 5), (3, 4)]),
            Valuation::additive([(0, 3), (1, 3)]),
            Valuation::additive([(2, 6), (3, 1)]),
        ],
    )
    .unwrap()
}

pub fn bundles(sets: &[&[usize]]) -> Allocation {
    Allocation::from_bundles(sets.iter().map(|s| s.iter().copied().collect()).collect())
}

/// EFX by definition, checking every pair and every removal without shortcuts.
pub fn naive_is_efx(inst: &Instance, alloc: &Allocation) -> bool {
    let n = inst.agent_count();
    let mut violations = 0usize;
    for u in 0..n {
        for w in 0..n {
            if u == w {
                continue;
            }
            let own = inst.value(u, alloc.bundle(u));
            for &x in alloc.bundle(w) {
                let mut rest: Bundle = alloc.bundle(w).clone();
                rest.remove(&x);
                if own < inst.value(u, &rest) {
                    violations += 1;
                }
            }
        }
    }
    violations == 0
}

pub fn naive_is_ef(inst: &Instance, alloc: &Allocation) -> bool {
    let n = inst.agent_count();
    (0..n).all(|u| (0..n).all(|w| inst.value(u, alloc.bundle(u)) >= inst.value(u, alloc.bundle(w))))
}

/// Every complete allocation that is EFX, as holder vectors, found by recursion over
/// goods in id order.
pub fn naive_efx_set(inst: &Instance) -> Vec<Vec<Agent>> {
    fn rec(inst: &Instance, holder: &mut Vec<Agent>, out: &mut Vec<Vec<Agent>>) {
        if holder.len() == inst.good_count() {
            let alloc = Allocation::from_assignment(inst.agent_count(), holder);
            if naive_is_efx(inst, &alloc) {
                out.push(holder.clone());
            }
            return;
        }
        for a in 0..inst.agent_count() {
            holder.push(a);
            rec(inst, holder, out);
            holder.pop();
        }
    }
    let mut out = Vec::new();
    rec(inst, &mut Vec::new(), &mut out);
    out
}

pub fn holder_vector(alloc: &Allocation, goods: usize) -> Vec<Agent> {
    alloc
        .holders(goods)
        .into_iter()
        .map(|h| h.expect("complete allocation"))
        .collect()
}

pub fn assert_complete_efx(inst: &Instance, alloc: &Allocation) {
    alloc.validate(inst).unwrap();
    assert!(
        alloc.is_complete(inst.good_count()),
        "incomplete: {alloc:?}"
    );
    assert!(naive_is_efx(inst, alloc), "not EFX: {alloc:?}");
}

/// n^m, saturating.
pub fn allocation_space(inst: &Instance) -> u128 {
    (0..inst.good_count()).fold(1u128, |acc, _| {
        acc.saturating_mul(inst.agent_count() as u128)
    })
}

/// Cancellable valuation with its own evaluation, independent of the library's.
#[derive(Debug, Clone)]
pub struct RefValuation {
    /// 0 additive, 1 unit-demand, 2 budget-additive.
    pub family: usize,
    pub values: Vec<(EdgeId, u64)>,
    pub cap: u64,
}

pub const REF_FAMILIES: [&str; 3] = ["additive", "unit_demand", "budget_additive"];

impl RefValuation {
    pub fn value(&self, goods: &Bundle) -> u64 {
        let vals = self
            .values
            .iter()
            .filter(|(g, _)| goods.contains(g))
            .map(|&(_, v)| v);
        match self.family {
            0 => vals.sum(),
            1 => vals.max().unwrap_or(0),
            _ => vals.sum::<u64>().min(self.cap),
        }
    }

    pub fn build(&self) -> Valuation {
        let pairs = self.values.iter().copied();
        match self.family {
            0 => Valuation::additive(pairs),
            1 => Valuation::unit_demand(pairs),
            _ => Valuation::budget_additive(pairs, self.cap),
        }
    }

    /// Neither piece is worth less than the other minus any one of its goods.
    pub fn efx_split(&self, a: &Bundle, b: &Bundle) -> bool {
        let fine = |own: &Bundle, other: &Bundle| {
            other.iter().all(|x| {
                let mut rest = other.clone();
                rest.remove(x);
                self.value(own) >= self.value(&rest)
            })
        };
        fine(a, b) && fine(b, a)
    }

    /// Every ordered split of `bundle` that passes [`Self::efx_split`].
    pub fn efx_splits(&self, bundle: &Bundle) -> Vec<(Bundle, Bundle)> {
        let items: Vec<EdgeId> = bundle.iter().copied().collect();
        (0..1usize << items.len())
            .map(|mask| {
                let (mut a, mut b) = (Bundle::new(), Bundle::new());
                for (i, &g) in items.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        b.insert(g);
                    } else {
                        a.insert(g);
                    }
                }
                (a, b)
            })
            .filter(|(a, b)| self.efx_split(a, b))
            .collect()
    }
}

pub fn snapshot_mut(ev: &mut TraceEvent) -> &mut Allocation {
    match ev {
        TraceEvent::StructureResolved { snapshot, .. }
        | TraceEvent::LeafAttached { snapshot, .. }
        | TraceEvent::CycleResolved { snapshot, .. } => snapshot,
        TraceEvent::ComponentStarted { .. } => panic!("header has no snapshot"),
    }
}

pub fn move_good(alloc: &mut Allocation, good: usize, to: usize) {
    for u in 0..alloc.agent_count() {
        alloc.bundle_mut(u).remove(&good);
    }
    alloc.bundle_mut(to).insert(good);
}

/// B1 solved by the bipartite solver with `a` on the left, behind a component header.
pub fn b1_bipartite_trace(inst: &Instance) -> Vec<TraceEvent> {
    let out = bipartite_efx(inst, &BTreeSet::from([0]), &BTreeSet::from([1, 2])).unwrap();
    let mut trace = vec![TraceEvent::ComponentStarted {
        method: Method::Bipartite,
        agents: vec![0, 1, 2],
        coloring: Some(vec![(0, 0), (1, 1), (2, 1)]),
        instance_agents: 3,
        instance_goods: 4,
    }];
    trace.extend(out.trace);
    trace
}
