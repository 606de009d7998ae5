//! Allocations, envy graphs, the EFX verifier and envy-cycle resolution.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::Instance;
use crate::multigraph::{Agent, EdgeId};
use crate::valuation::Bundle;

/// One bundle per agent, pairwise disjoint. Goods held by nobody are unallocated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation {
    bundles: Vec<Bundle>,
}

impl Allocation {
    pub fn empty(agents: usize) -> Self {
        Allocation {
            bundles: vec![Bundle::new(); agents],
        }
    }

    /// Wraps bundles without checking them; see [`Allocation::validate`].
    pub fn from_bundles(bundles: Vec<Bundle>) -> Self {
        Allocation { bundles }
    }

    /// Builds a complete allocation from the holder of each good.
    pub fn from_assignment(agents: usize, holder: &[Agent]) -> Self {
        let mut bundles = vec![Bundle::new(); agents];
        for (g, &a) in holder.iter().enumerate() {
            bundles[a].insert(g);
        }
        Allocation { bundles }
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundle(&self, u: Agent) -> &Bundle {
        &self.bundles[u]
    }

    pub fn bundle_mut(&mut self, u: Agent) -> &mut Bundle {
        &mut self.bundles[u]
    }

    pub fn bundles(&self) -> &[Bundle] {
        &self.bundles
    }

    pub fn into_bundles(self) -> Vec<Bundle> {
        self.bundles
    }

    pub fn allocated_count(&self) -> usize {
        self.bundles.iter().map(BTreeSet::len).sum()
    }

    /// Holder of each of the `goods` goods.
    pub fn holders(&self, goods: usize) -> Vec<Option<Agent>> {
        let mut out = vec![None; goods];
        for (u, b) in self.bundles.iter().enumerate() {
            for &g in b {
                if g < goods {
                    out[g] = Some(u);
                }
            }
        }
        out
    }

    pub fn is_complete(&self, goods: usize) -> bool {
        self.allocated_count() == goods && self.holders(goods).iter().all(Option::is_some)
    }

    /// Checks the agent count, that every good exists, and that bundles are disjoint.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        if self.bundles.len() != inst.agent_count() {
            return Err(invalid(format!(
                "allocation has {} bundles, instance has {} agents",
                self.bundles.len(),
                inst.agent_count()
            )));
        }
        let m = inst.good_count();
        let mut seen = vec![None; m];
        for (u, b) in self.bundles.iter().enumerate() {
            for &g in b {
                if g >= m {
                    return Err(invalid(format!("agent {u} holds unknown good {g}")));
                }
                if let Some(prev) = seen[g].replace(u) {
                    return Err(invalid(format!(
                        "good {g} is held by both agent {prev} and agent {u}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Directed envy relation: `(u, w)` whenever `u` strictly prefers `w`'s bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    edges: Vec<(Agent, Agent)>,
    out: Vec<Vec<Agent>>,
    inn: Vec<Vec<Agent>>,
}

impl EnvyGraph {
    pub fn from_edges(agents: usize, edges: impl IntoIterator<Item = (Agent, Agent)>) -> Self {
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        let mut out = vec![Vec::new(); agents];
        let mut inn = vec![Vec::new(); agents];
        for &(u, w) in &edges {
            out[u].push(w);
            inn[w].push(u);
        }
        for list in inn.iter_mut() {
            list.sort_unstable();
        }
        EnvyGraph { edges, out, inn }
    }

    /// All envy edges in lexicographic order.
    pub fn edges(&self) -> &[(Agent, Agent)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn envies(&self, u: Agent, w: Agent) -> bool {
        self.out[u].binary_search(&w).is_ok()
    }

    pub fn successors(&self, u: Agent) -> &[Agent] {
        &self.out[u]
    }

    pub fn predecessors(&self, u: Agent) -> &[Agent] {
        &self.inn[u]
    }

    pub fn is_source(&self, u: Agent) -> bool {
        self.inn[u].is_empty()
    }

    /// Some directed cycle `(u_1, .., u_k)` with `u_i -> u_{i+1}` and `u_k -> u_1`.
    /// DFS from the lowest agent, successors ascending.
    pub fn find_cycle(&self) -> Option<Vec<Agent>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let n = self.out.len();
        let mut mark = vec![Mark::New; n];
        for start in 0..n {
            if mark[start] != Mark::New {
                continue;
            }
            let mut path = vec![start];
            let mut cursor = vec![0usize];
            mark[start] = Mark::Active;
            while let Some(&u) = path.last() {
                let i = *cursor.last().unwrap();
                if let Some(&w) = self.out[u].get(i) {
                    *cursor.last_mut().unwrap() += 1;
                    match mark[w] {
                        Mark::New => {
                            mark[w] = Mark::Active;
                            path.push(w);
                            cursor.push(0);
                        }
                        Mark::Active => {
                            let at = path.iter().position(|&x| x == w).unwrap();
                            return Some(path[at..].to_vec());
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[u] = Mark::Done;
                    path.pop();
                    cursor.pop();
                }
            }
        }
        None
    }
}

pub fn envy_graph(inst: &Instance, alloc: &Allocation) -> Result<EnvyGraph> {
    alloc.validate(inst)?;
    Ok(envy_graph_unchecked(inst, alloc))
}

pub(crate) fn envy_graph_unchecked(inst: &Instance, alloc: &Allocation) -> EnvyGraph {
    let n = inst.agent_count();
    let mut edges = Vec::new();
    for u in 0..n {
        let val = inst.valuation(u);
        let own = val.value(alloc.bundle(u));
        for w in 0..n {
            if w != u && val.value(alloc.bundle(w)) > own {
                edges.push((u, w));
            }
        }
    }
    EnvyGraph::from_edges(n, edges)
}

/// `envier` still prefers `envied`'s bundle after `good` is removed from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfxWitness {
    pub envier: Agent,
    pub envied: Agent,
    pub good: EdgeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfxVerdict {
    pub witness: Option<EfxWitness>,
}

impl EfxVerdict {
    pub fn ok(&self) -> bool {
        self.witness.is_none()
    }
}

/// Exhaustive EFX check over ordered pairs `(u, w)` and goods of `w`, all ascending.
/// Partial allocations are allowed.
pub fn is_efx(inst: &Instance, alloc: &Allocation) -> Result<EfxVerdict> {
    alloc.validate(inst)?;
    Ok(efx_verdict_unchecked(inst, alloc))
}

pub(crate) fn efx_verdict_unchecked(inst: &Instance, alloc: &Allocation) -> EfxVerdict {
    EfxVerdict {
        witness: first_efx_violation(inst, alloc),
    }
}

fn first_efx_violation(inst: &Instance, alloc: &Allocation) -> Option<EfxWitness> {
    let n = inst.agent_count();
    for u in 0..n {
        let val = inst.valuation(u);
        let own = val.value(alloc.bundle(u));
        for w in 0..n {
            if w == u {
                continue;
            }
            let other = alloc.bundle(w);
            if val.value(other) <= own {
                continue;
            }
            for &x in other {
                if val.value_of(other.iter().copied().filter(|&g| g != x)) > own {
                    return Some(EfxWitness {
                        envier: u,
                        envied: w,
                        good: x,
                    });
                }
            }
        }
    }
    None
}

/// Each `cycle[i]` takes the bundle of `cycle[i + 1]`; the last takes the first's.
pub fn resolve_cycle(alloc: &Allocation, cycle: &[Agent]) -> Result<Allocation> {
    if cycle.len() < 2 {
        return Err(invalid("an envy cycle needs at least two agents"));
    }
    let distinct: BTreeSet<_> = cycle.iter().collect();
    if distinct.len() != cycle.len() {
        return Err(invalid(format!("cycle {cycle:?} repeats an agent")));
    }
    if let Some(&bad) = cycle.iter().find(|&&u| u >= alloc.agent_count()) {
        return Err(invalid(format!("cycle mentions unknown agent {bad}")));
    }
    let mut out = alloc.clone();
    for (i, &u) in cycle.iter().enumerate() {
        let next = cycle[(i + 1) % cycle.len()];
        out.bundles[u] = alloc.bundles[next].clone();
    }
    Ok(out)
}

/// For a `target` with incoming envy, finds a source (no incoming envy) that reaches it,
/// together with a directed path `source, .., target`.
///
/// Searches backwards from `target` breadth-first, expanding predecessors in ascending
/// order; the first source discovered wins. Returns `None` when `target` is itself a
/// source. The ancestry of `target` must be acyclic.
pub fn find_source_with_path(eg: &EnvyGraph, target: Agent) -> Result<Option<(Agent, Vec<Agent>)>> {
    let n = eg.out.len();
    if target >= n {
        return Err(invalid(format!("unknown agent {target}")));
    }
    if eg.is_source(target) {
        return Ok(None);
    }
    let mut toward: Vec<Option<Agent>> = vec![None; n];
    let mut visited = vec![false; n];
    visited[target] = true;
    let mut queue = VecDeque::from([target]);
    let mut ancestors = vec![target];
    let mut source = None;
    while let Some(x) = queue.pop_front() {
        for &p in eg.predecessors(x) {
            if !visited[p] {
                visited[p] = true;
                toward[p] = Some(x);
                ancestors.push(p);
                if source.is_none() && eg.is_source(p) {
                    source = Some(p);
                }
                queue.push_back(p);
            }
        }
    }
    if ancestry_has_cycle(eg, &visited, &ancestors) {
        return Err(Error::Precondition(format!(
            "the envy graph has a cycle among the ancestors of agent {target}"
        )));
    }
    let s = source.expect("a finite acyclic ancestry has a source");
    let mut path = vec![s];
    let mut cur = s;
    while let Some(next) = toward[cur] {
        path.push(next);
        cur = next;
    }
    Ok(Some((s, path)))
}

fn ancestry_has_cycle(eg: &EnvyGraph, inside: &[bool], nodes: &[Agent]) -> bool {
    // Kahn's algorithm restricted to the ancestor set.
    let mut indeg = vec![0usize; inside.len()];
    for &v in nodes {
        indeg[v] = eg.predecessors(v).iter().filter(|&&p| inside[p]).count();
    }
    let mut stack: Vec<Agent> = nodes.iter().copied().filter(|&v| indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = stack.pop() {
        removed += 1;
        for &w in eg.successors(v) {
            if inside[w] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
    }
    removed != nodes.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multigraph::MultiGraph;
    use crate::valuation::Valuation;

    fn two_agents(values: &[(EdgeId, u64)], goods: usize) -> Instance {
        let g = MultiGraph::new(2, vec![(0, 1); goods]).unwrap();
        Instance::new(
            g,
            vec![
                Valuation::additive(values.iter().copied()),
                Valuation::additive([]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn envy_graph_cases() {
        let inst = two_agents(&[(0, 5)], 1);
        let empty = Allocation::empty(2);
        assert!(envy_graph(&inst, &empty).unwrap().is_empty());
        let a = Allocation::from_bundles(vec![Bundle::new(), Bundle::from([0])]);
        assert_eq!(envy_graph(&inst, &a).unwrap().edges(), &[(0, 1)]);
        let sym = two_agents(&[(0, 1), (1, 5)], 2);
        let fine = Allocation::from_bundles(vec![Bundle::from([1]), Bundle::from([0])]);
        assert!(envy_graph(&sym, &fine).unwrap().is_empty());
    }

    #[test]
    fn efx_singleton_and_pair() {
        let inst = two_agents(&[(0, 5)], 1);
        let a = Allocation::from_bundles(vec![Bundle::new(), Bundle::from([0])]);
        assert!(is_efx(&inst, &a).unwrap().ok());
        let inst2 = two_agents(&[(0, 5), (1, 5)], 2);
        let b = Allocation::from_bundles(vec![Bundle::new(), Bundle::from([0, 1])]);
        assert_eq!(
            is_efx(&inst2, &b).unwrap().witness,
            Some(EfxWitness {
                envier: 0,
                envied: 1,
                good: 0
            })
        );
    }

    #[test]
    fn validation_rejects_overlap_and_unknown_goods() {
        let inst = two_agents(&[(0, 5)], 2);
        let overlap = Allocation::from_bundles(vec![Bundle::from([0]), Bundle::from([0])]);
        assert!(is_efx(&inst, &overlap).is_err());
        let unknown = Allocation::from_bundles(vec![Bundle::from([9]), Bundle::new()]);
        assert!(envy_graph(&inst, &unknown).is_err());
        let short = Allocation::from_bundles(vec![Bundle::new()]);
        assert!(short.validate(&inst).is_err());
    }

    #[test]
    fn resolve_cycle_shifts_bundles() {
        let a = Allocation::from_bundles(vec![
            Bundle::from([0]),
            Bundle::from([1]),
            Bundle::from([2]),
            Bundle::from([3]),
        ]);
        let swapped = resolve_cycle(&a, &[0, 1]).unwrap();
        assert_eq!(swapped.bundle(0), &Bundle::from([1]));
        assert_eq!(swapped.bundle(1), &Bundle::from([0]));
        let rotated = resolve_cycle(&a, &[0, 1, 2]).unwrap();
        assert_eq!(rotated.bundle(0), &Bundle::from([1]));
        assert_eq!(rotated.bundle(1), &Bundle::from([2]));
        assert_eq!(rotated.bundle(2), &Bundle::from([0]));
        assert_eq!(rotated.bundle(3), &Bundle::from([3]));
        assert!(resolve_cycle(&a, &[0, 1, 0]).is_err());
        assert!(resolve_cycle(&a, &[2]).is_err());
    }

    #[test]
    fn source_with_path_cases() {
        let edgeless = EnvyGraph::from_edges(3, []);
        assert_eq!(find_source_with_path(&edgeless, 1).unwrap(), None);
        let single = EnvyGraph::from_edges(2, [(0, 1)]);
        assert_eq!(
            find_source_with_path(&single, 1).unwrap(),
            Some((0, vec![0, 1]))
        );
        let chain = EnvyGraph::from_edges(3, [(2, 0), (0, 1)]);
        assert_eq!(
            find_source_with_path(&chain, 1).unwrap(),
            Some((2, vec![2, 0, 1]))
        );
        let cyclic = EnvyGraph::from_edges(3, [(0, 1), (1, 0), (1, 2)]);
        assert!(find_source_with_path(&cyclic, 2).is_err());
    }

    #[test]
    fn find_cycle_follows_edges() {
        let g = EnvyGraph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 1)]);
        let c = g.find_cycle().unwrap();
        assert_eq!(c, vec![1, 2, 3]);
        assert!(EnvyGraph::from_edges(3, [(0, 1), (1, 2)])
            .find_cycle()
            .is_none());
    }
}
