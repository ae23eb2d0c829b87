//! Simple graphs, multigraphs and the structural routines the rest of the
//! crate builds on.
//!
//! Vertices are dense integers `0..n`. Adjacency lists are kept sorted so
//! every traversal visits vertices in the same order for a fixed input.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(usize),
    #[error("edge list and edge id list differ in length ({edges} vs {ids})")]
    EdgeIdLength { edges: usize, ids: usize },
}

/// A simple undirected graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = GraphError;

    fn try_from(repr: GraphRepr) -> Result<Self, Self::Error> {
        Graph::new(repr.n, repr.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, normalising each edge to `(min, max)` and sorting the
    /// edge list. Self-loops and repeated edges are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut list = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            adj[u].push(v);
            adj[v].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(Graph { n, edges: list, adj })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order. The position of
    /// an edge in this slice is its edge id.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The common degree if the graph is regular (and nonempty).
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adj.first()?.len();
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.edges.binary_search(&(u.min(v), u.max(v))).ok()
    }

    /// Vertex count, edge count and edge list are identical.
    pub fn same_as(&self, other: &Graph) -> bool {
        self == other
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// Whether `set` induces a connected subgraph. The empty set is not
    /// considered connected.
    pub fn induces_connected(&self, set: &[usize]) -> bool {
        let Some(&start) = set.first() else {
            return false;
        };
        let mut inside = vec![false; self.n];
        for &v in set {
            if v >= self.n {
                return false;
            }
            inside[v] = true;
        }
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut reached = 1;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        let distinct = inside.iter().filter(|&&b| b).count();
        reached == distinct
    }

    /// BFS distances from `s`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, s: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[s] = Some(0);
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for &w in &self.adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A two-colouring of the vertices with every edge crossing sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    side: Vec<Side>,
}

impl Bipartition {
    pub fn from_sides(side: Vec<Side>) -> Self {
        Bipartition { side }
    }

    pub fn side(&self, v: usize) -> Side {
        self.side[v]
    }

    pub fn sides(&self) -> &[Side] {
        &self.side
    }

    pub fn left(&self) -> Vec<usize> {
        self.members(Side::Left)
    }

    pub fn right(&self) -> Vec<usize> {
        self.members(Side::Right)
    }

    fn members(&self, s: Side) -> Vec<usize> {
        (0..self.side.len()).filter(|&v| self.side[v] == s).collect()
    }

    pub fn is_balanced(&self) -> bool {
        let left = self.side.iter().filter(|&&s| s == Side::Left).count();
        2 * left == self.side.len()
    }

    pub fn is_valid_for(&self, g: &Graph) -> bool {
        self.side.len() == g.n() && g.edges().iter().all(|&(u, v)| self.side[u] != self.side[v])
    }
}

/// BFS two-colouring. The smallest vertex of every component goes Left.
pub fn is_bipartite(g: &Graph) -> Option<Bipartition> {
    let mut side: Vec<Option<Side>> = vec![None; g.n()];
    for start in 0..g.n() {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(Side::Left);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let sv = side[v].unwrap();
            let other = match sv {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            for &w in g.neighbors(v) {
                match side[w] {
                    None => {
                        side[w] = Some(other);
                        queue.push_back(w);
                    }
                    Some(sw) if sw == sv => return None,
                    Some(_) => {}
                }
            }
        }
    }
    Some(Bipartition {
        side: side.into_iter().map(Option::unwrap).collect(),
    })
}

/// A shortest odd cycle, as its vertex sequence (the closing edge from the
/// last vertex back to the first is implied). `None` iff `g` is bipartite.
///
/// Runs a BFS from every root; an edge joining two vertices on the same BFS
/// layer closes an odd walk through the root, and trimming the walk at the
/// lowest common ancestor leaves an odd cycle. The minimum over all roots is
/// attained when the root lies on a shortest odd cycle.
pub fn min_odd_cycle(g: &Graph) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for root in 0..g.n() {
        let mut dist = vec![usize::MAX; g.n()];
        let mut parent = vec![usize::MAX; g.n()];
        dist[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        for &(a, b) in g.edges() {
            if dist[a] == usize::MAX || dist[a] != dist[b] {
                continue;
            }
            let len = 2 * dist[a] + 1;
            if best.as_ref().is_some_and(|c| c.len() <= len) {
                continue;
            }
            // walk both branches up to their lowest common ancestor
            let mut left = vec![a];
            let mut right = vec![b];
            let (mut x, mut y) = (a, b);
            while x != y {
                x = parent[x];
                y = parent[y];
                left.push(x);
                right.push(y);
            }
            right.pop();
            right.reverse();
            // left: a .. lca, right: (child of lca) .. b
            let mut cycle = left;
            cycle.extend(right);
            debug_assert!(cycle.len() % 2 == 1);
            if best.as_ref().map_or(true, |c| cycle.len() < c.len()) {
                best = Some(cycle);
            }
        }
    }
    best
}

/// Bipartite double cover: vertex `i` of `g` becomes `i` (left copy) and
/// `n + i` (right copy), with `i` adjacent to `n + j` iff `{i, j}` is an edge.
pub fn double_cover(g: &Graph) -> Graph {
    let n = g.n();
    let edges = g
        .edges()
        .iter()
        .flat_map(|&(i, j)| [(i, n + j), (j, n + i)]);
    Graph::new(2 * n, edges).expect("double cover of a simple graph is simple")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiEdge {
    pub u: usize,
    pub v: usize,
    pub id: usize,
}

/// Undirected multigraph whose edges carry caller-supplied identities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MultigraphRepr", into = "MultigraphRepr")]
pub struct Multigraph {
    n: usize,
    edges: Vec<MultiEdge>,
}

#[derive(Serialize, Deserialize)]
struct MultigraphRepr {
    n: usize,
    edges: Vec<[usize; 2]>,
    edge_ids: Vec<usize>,
}

impl TryFrom<MultigraphRepr> for Multigraph {
    type Error = GraphError;

    fn try_from(r: MultigraphRepr) -> Result<Self, Self::Error> {
        if r.edges.len() != r.edge_ids.len() {
            return Err(GraphError::EdgeIdLength {
                edges: r.edges.len(),
                ids: r.edge_ids.len(),
            });
        }
        let edges = r
            .edges
            .iter()
            .zip(&r.edge_ids)
            .map(|(&[u, v], &id)| MultiEdge { u, v, id });
        Multigraph::new(r.n, edges)
    }
}

impl From<Multigraph> for MultigraphRepr {
    fn from(m: Multigraph) -> Self {
        MultigraphRepr {
            n: m.n,
            edges: m.edges.iter().map(|e| [e.u, e.v]).collect(),
            edge_ids: m.edges.iter().map(|e| e.id).collect(),
        }
    }
}

impl Multigraph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = MultiEdge>,
    {
        let edges: Vec<MultiEdge> = edges.into_iter().collect();
        let mut ids = Vec::with_capacity(edges.len());
        for e in &edges {
            for w in [e.u, e.v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop(e.u));
            }
            ids.push(e.id);
        }
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdgeId(w[0]));
        }
        Ok(Multigraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[MultiEdge] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }
}

/// Greedy proper edge colouring: each edge, in list order, takes the smallest
/// colour unused at both endpoints. Returns the colour classes as lists of
/// edge ids; at most `2Δ - 1` classes.
pub fn matching_decomposition(d: &Multigraph) -> Vec<Vec<usize>> {
    let mut used: Vec<Vec<bool>> = vec![Vec::new(); d.n()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for e in d.edges() {
        let taken = |c: usize, v: usize| used[v].get(c).copied().unwrap_or(false);
        let colour = (0..).find(|&c| !taken(c, e.u) && !taken(c, e.v)).unwrap();
        for v in [e.u, e.v] {
            if used[v].len() <= colour {
                used[v].resize(colour + 1, false);
            }
            used[v][colour] = true;
        }
        if classes.len() <= colour {
            classes.resize(colour + 1, Vec::new());
        }
        classes[colour].push(e.id);
    }
    classes
}

/// A walk given by its vertex sequence. Paths produced by this crate are
/// simple; a single vertex is the trivial path.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn new(vertices: Vec<usize>) -> Self {
        assert!(!vertices.is_empty(), "a path has at least one vertex");
        Path(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn source(&self) -> usize {
        self.0[0]
    }

    pub fn target(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_trivial(&self) -> bool {
        self.0.len() == 1
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_valid_in(&self, g: &Graph) -> bool {
        self.0.iter().all(|&v| v < g.n()) && self.steps().all(|(a, b)| g.has_edge(a, b))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Label {
    dist: f64,
    hops: usize,
    vertex: usize,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.hops.cmp(&self.hops))
            .then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-weight `s`–`t` path under nonnegative edge weights, indexed by
/// edge id. Among minimum-weight paths the fewest-hop ones win, and among
/// those the lexicographically smallest vertex sequence. Returns the path
/// and its total weight, or `None` when `t` is unreachable.
pub fn shortest_path<W>(g: &Graph, s: usize, t: usize, weight: W) -> Option<(Path, f64)>
where
    W: Fn(usize) -> f64,
{
    if s == t {
        return Some((Path::new(vec![s]), 0.0));
    }
    // Dijkstra from the target so the forward walk from `s` can pick the
    // smallest tight neighbour at every step.
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[t] = 0.0;
    hops[t] = 0;
    heap.push(Label {
        dist: 0.0,
        hops: 0,
        vertex: t,
    });
    while let Some(Label { dist: d, hops: h, vertex: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &w in g.neighbors(v) {
            let c = weight(g.edge_index(v, w).unwrap());
            debug_assert!(c >= 0.0, "negative edge weight");
            let nd = d + c;
            let nh = h + 1;
            if nd < dist[w] || (nd == dist[w] && nh < hops[w]) {
                dist[w] = nd;
                hops[w] = nh;
                heap.push(Label {
                    dist: nd,
                    hops: nh,
                    vertex: w,
                });
            }
        }
    }
    if !dist[s].is_finite() {
        return None;
    }
    let mut walk = vec![s];
    let mut v = s;
    while v != t {
        let tol = 1e-9 * dist[v].max(1.0);
        let next = g
            .neighbors(v)
            .iter()
            .copied()
            .find(|&w| {
                hops[w] != usize::MAX
                    && hops[w] + 1 == hops[v]
                    && (dist[w] + weight(g.edge_index(v, w).unwrap()) - dist[v]).abs() <= tol
            })
            .expect("a tight predecessor exists on every shortest path");
        walk.push(next);
        v = next;
    }
    Some((Path::new(walk), dist[s]))
}
