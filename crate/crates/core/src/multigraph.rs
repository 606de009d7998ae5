//! Multi-graphs whose vertices are agents and whose (possibly parallel) edges are goods.
//!
//! Structural queries (bipartition, forest test, girth, colouring) all operate on the
//! simple skeleton: parallel edges between the same pair collapse to a single adjacency.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Agent = usize;
pub type EdgeId = usize;

/// An undirected multi-graph without self-loops. Edge ids are dense, `0..edge_count()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    vertex_count: usize,
    endpoints: Vec<(Agent, Agent)>,
    incident: Vec<Vec<EdgeId>>,
    adjacency: Vec<BTreeMap<Agent, Vec<EdgeId>>>,
}

impl MultiGraph {
    /// Builds a graph from endpoint pairs; the i-th pair becomes edge `i`.
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Agent, Agent)>,
    {
        let mut endpoints = Vec::new();
        let mut incident = vec![Vec::new(); vertex_count];
        let mut adjacency = vec![BTreeMap::new(); vertex_count];
        for (id, (a, b)) in edges.into_iter().enumerate() {
            if a >= vertex_count || b >= vertex_count {
                return Err(invalid(format!(
                    "edge {id} has endpoint outside 0..{vertex_count}: ({a}, {b})"
                )));
            }
            if a == b {
                return Err(invalid(format!("edge {id} is a self-loop at vertex {a}")));
            }
            let pair = (a.min(b), a.max(b));
            endpoints.push(pair);
            incident[a].push(id);
            incident[b].push(id);
            adjacency[a].entry(b).or_insert_with(Vec::new).push(id);
            adjacency[b].entry(a).or_insert_with(Vec::new).push(id);
        }
        Ok(MultiGraph {
            vertex_count,
            endpoints,
            incident,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.endpoints.len()
    }

    /// Endpoints of `e` as `(smaller, larger)`.
    pub fn endpoints(&self, e: EdgeId) -> (Agent, Agent) {
        self.endpoints[e]
    }

    pub fn is_endpoint(&self, e: EdgeId, u: Agent) -> bool {
        let (a, b) = self.endpoints[e];
        a == u || b == u
    }

    /// Edges incident to `u`, ascending.
    pub fn incident_edges(&self, u: Agent) -> &[EdgeId] {
        &self.incident[u]
    }

    fn check_vertex(&self, u: Agent) -> Result<()> {
        if u < self.vertex_count {
            Ok(())
        } else {
            Err(invalid(format!(
                "vertex {u} outside 0..{}",
                self.vertex_count
            )))
        }
    }

    /// The parallel edges between `u` and `w`; empty when they are not adjacent.
    pub fn parallel_edges(&self, u: Agent, w: Agent) -> Result<BTreeSet<EdgeId>> {
        self.check_vertex(u)?;
        self.check_vertex(w)?;
        Ok(self.parallel_slice(u, w).iter().copied().collect())
    }

    pub(crate) fn parallel_slice(&self, u: Agent, w: Agent) -> &[EdgeId] {
        self.adjacency[u].get(&w).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn neighbours(&self, u: Agent) -> Result<BTreeSet<Agent>> {
        self.check_vertex(u)?;
        Ok(self.adjacency[u].keys().copied().collect())
    }

    /// Skeleton neighbours of `u` in ascending order.
    pub fn neighbour_iter(&self, u: Agent) -> impl Iterator<Item = Agent> + '_ {
        self.adjacency[u].keys().copied()
    }

    pub fn skeleton_degree(&self, u: Agent) -> usize {
        self.adjacency[u].len()
    }

    /// Connected components of the skeleton, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Agent>> {
        let mut seen = vec![false; self.vertex_count];
        let mut out = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for y in self.neighbour_iter(x) {
                    if !seen[y] {
                        seen[y] = true;
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Proper 2-colouring of the skeleton, if one exists. The smallest vertex of each
    /// component lands on the left side.
    pub fn bipartition(&self) -> Option<(BTreeSet<Agent>, BTreeSet<Agent>)> {
        let mut side: Vec<Option<bool>> = vec![None; self.vertex_count];
        for start in 0..self.vertex_count {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(false);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                let sx = side[x].unwrap();
                for y in self.neighbour_iter(x) {
                    match side[y] {
                        None => {
                            side[y] = Some(!sx);
                            queue.push_back(y);
                        }
                        Some(sy) if sy == sx => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        for (v, s) in side.into_iter().enumerate() {
            if s == Some(false) {
                left.insert(v);
            } else {
                right.insert(v);
            }
        }
        Some((left, right))
    }

    /// True iff the skeleton is a forest.
    pub fn is_multitree(&self) -> bool {
        let skeleton_edges: usize = self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2;
        skeleton_edges + self.components().len() == self.vertex_count
    }

    /// Length of the skeleton when it is a single cycle through every vertex.
    pub fn multicycle_length(&self) -> Option<usize> {
        let n = self.vertex_count;
        let is_cycle =
            n >= 3 && self.adjacency.iter().all(|a| a.len() == 2) && self.components().len() == 1;
        is_cycle.then_some(n)
    }

    pub fn girth(&self) -> Girth {
        match self.shortest_cycle() {
            Some(c) => Girth::Finite(c.len()),
            None => Girth::Infinite,
        }
    }

    /// A shortest simple cycle of the skeleton, as a vertex sequence.
    ///
    /// BFS from every root; a non-tree edge `(x, y)` closes a walk of length
    /// `d(x) + d(y) + 1`. The global minimum over all roots is the girth, and the
    /// minimising walk is necessarily simple.
    pub fn shortest_cycle(&self) -> Option<Vec<Agent>> {
        let n = self.vertex_count;
        // (length, root, x, y, BFS parents from root)
        type Closing = (usize, Agent, Agent, Agent, Vec<Option<Agent>>);
        let mut best: Option<Closing> = None;
        for root in 0..n {
            let mut dist = vec![usize::MAX; n];
            let mut parent: Vec<Option<Agent>> = vec![None; n];
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            let mut found: Option<(usize, Agent, Agent)> = None;
            'bfs: while let Some(x) = queue.pop_front() {
                if let Some((len, _, _)) = found {
                    if 2 * dist[x] + 1 >= len {
                        break;
                    }
                }
                for y in self.neighbour_iter(x) {
                    if dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        parent[y] = Some(x);
                        queue.push_back(y);
                    } else if parent[x] != Some(y) {
                        let len = dist[x] + dist[y] + 1;
                        if found.is_none_or(|(l, _, _)| len < l) {
                            found = Some((len, x, y));
                        }
                        if len == 3 {
                            break 'bfs;
                        }
                    }
                }
            }
            if let Some((len, x, y)) = found {
                if best.as_ref().is_none_or(|b| len < b.0) {
                    best = Some((len, root, x, y, parent));
                }
            }
        }
        let (_, root, x, y, parent) = best?;
        let trace = |mut v: Agent| {
            let mut path = vec![v];
            while v != root {
                v = parent[v].unwrap();
                path.push(v);
            }
            path
        };
        // root .. x, then y .. (excluding root)
        let mut cycle: Vec<Agent> = trace(x).into_iter().rev().collect();
        let back = trace(y);
        cycle.extend(back.into_iter().take_while(|&v| v != root));
        Some(cycle)
    }

    /// Checks a colouring for properness; on failure reports the lowest conflicting edge.
    pub fn validate_coloring(&self, coloring: &Coloring) -> Result<ColoringVerdict> {
        if coloring.colors.len() != self.vertex_count {
            return Err(invalid(format!(
                "colouring covers {} vertices, graph has {}",
                coloring.colors.len(),
                self.vertex_count
            )));
        }
        for (e, &(a, b)) in self.endpoints.iter().enumerate() {
            if coloring.colors[a] == coloring.colors[b] {
                return Ok(ColoringVerdict::Conflict(e));
            }
        }
        Ok(ColoringVerdict::Proper)
    }

    /// Exact minimum colouring with at most `t_max` colours, by backtracking in vertex
    /// order with colours tried ascending.
    pub fn find_coloring(&self, t_max: usize) -> Option<Coloring> {
        let n = self.vertex_count;
        if n == 0 {
            return Some(Coloring {
                colors: Vec::new(),
                t: 1,
            });
        }
        for t in 1..=t_max {
            let mut colors = vec![usize::MAX; n];
            if self.color_from(0, t, &mut colors) {
                return Some(Coloring { colors, t });
            }
        }
        None
    }

    fn color_from(&self, v: Agent, t: usize, colors: &mut [usize]) -> bool {
        if v == self.vertex_count {
            return true;
        }
        for c in 0..t {
            // earlier vertices are coloured, later ones hold usize::MAX
            if self.neighbour_iter(v).all(|w| colors[w] != c) {
                colors[v] = c;
                if self.color_from(v + 1, t, colors) {
                    return true;
                }
            }
        }
        colors[v] = usize::MAX;
        false
    }

    /// The multi-graph induced by `vertices` (sorted, distinct), renumbered densely.
    /// Returns the subgraph and, for each of its edges, the id in `self`.
    pub fn induced(&self, vertices: &[Agent]) -> (MultiGraph, Vec<EdgeId>) {
        let mut local = vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let kept: Vec<EdgeId> = (0..self.edge_count())
            .filter(|&e| {
                let (a, b) = self.endpoints[e];
                local[a] != usize::MAX && local[b] != usize::MAX
            })
            .collect();
        let sub = MultiGraph::new(
            vertices.len(),
            kept.iter().map(|&e| {
                let (a, b) = self.endpoints[e];
                (local[a], local[b])
            }),
        )
        .expect("induced subgraph of a valid graph is valid");
        (sub, kept)
    }
}

/// Length of the shortest skeleton cycle. `Finite(_)` orders below `Infinite`.
/// Serialized as the length, or `null` for forests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl From<Option<usize>> for Girth {
    fn from(len: Option<usize>) -> Self {
        len.map_or(Girth::Infinite, Girth::Finite)
    }
}

impl From<Girth> for Option<usize> {
    fn from(g: Girth) -> Self {
        match g {
            Girth::Finite(len) => Some(len),
            Girth::Infinite => None,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "infinite"),
        }
    }
}

/// A vertex colouring with colours in `0..t`. Properness is checked separately.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<usize>,
    t: usize,
}

impl Coloring {
    pub fn new(colors: Vec<usize>, t: usize) -> Result<Self> {
        if let Some((v, &c)) = colors.iter().enumerate().find(|(_, &c)| c >= t) {
            return Err(invalid(format!(
                "vertex {v} has colour {c}, expected < {t}"
            )));
        }
        Ok(Coloring { colors, t })
    }

    /// Uses `max colour + 1` as the number of colours.
    pub fn from_colors(colors: Vec<usize>) -> Self {
        let t = colors.iter().max().map_or(1, |&c| c + 1);
        Coloring { colors, t }
    }

    pub fn color(&self, v: Agent) -> usize {
        self.colors[v]
    }

    pub fn colors(&self) -> &[usize] {
        &self.colors
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Vertices of colour `c`, ascending.
    pub fn class(&self, c: usize) -> Vec<Agent> {
        (0..self.colors.len())
            .filter(|&v| self.colors[v] == c)
            .collect()
    }

    /// Renumbers the colours actually used to `0..k`, preserving their order.
    pub fn compacted(&self) -> Coloring {
        let used: BTreeSet<usize> = self.colors.iter().copied().collect();
        let rank: BTreeMap<usize, usize> = used.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Coloring {
            colors: self.colors.iter().map(|c| rank[c]).collect(),
            t: used.len().max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColoringVerdict {
    Proper,
    Conflict(EdgeId),
}

impl ColoringVerdict {
    pub fn is_proper(self) -> bool {
        self == ColoringVerdict::Proper
    }
}

/// Small graph constructors shared by tests, generators and examples.
pub mod families {
    use super::{Agent, MultiGraph};

    /// A cycle on `len` vertices where pair `(i, i+1)` carries `copies[i]` parallel edges.
    pub fn multicycle(copies: &[usize]) -> MultiGraph {
        let len = copies.len();
        let mut edges = Vec::new();
        for (i, &k) in copies.iter().enumerate() {
            for _ in 0..k {
                edges.push((i, (i + 1) % len));
            }
        }
        MultiGraph::new(len, edges).expect("cycle edges are valid")
    }

    pub fn cycle(len: usize) -> MultiGraph {
        multicycle(&vec![1; len])
    }

    /// Petersen graph skeleton: outer 5-cycle 0..5, spokes i–i+5, inner pentagram.
    pub fn petersen_pairs() -> Vec<(Agent, Agent)> {
        let mut pairs = Vec::new();
        for i in 0..5 {
            pairs.push((i, (i + 1) % 5));
        }
        for i in 0..5 {
            pairs.push((i, i + 5));
        }
        for i in 0..5 {
            pairs.push((5 + i, 5 + (i + 2) % 5));
        }
        pairs
    }

    pub fn petersen(copies: usize) -> MultiGraph {
        let edges = petersen_pairs()
            .into_iter()
            .flat_map(|p| std::iter::repeat_n(p, copies));
        MultiGraph::new(10, edges).expect("petersen edges are valid")
    }

    /// Star with centre 0 and leaves `1..=leaves`, each spoke repeated `copies` times.
    pub fn star(leaves: usize, copies: usize) -> MultiGraph {
        let edges = (1..=leaves).flat_map(|l| std::iter::repeat_n((0, l), copies));
        MultiGraph::new(leaves + 1, edges).expect("star edges are valid")
    }
}
