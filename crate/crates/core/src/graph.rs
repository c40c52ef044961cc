//! Weighted graphs, forests and Kruskal's minimum spanning forest.
//!
//! Every "lighter/heavier edge" decision goes through [`Edge::cmp`], the total
//! order `(weight, smaller endpoint, larger endpoint)`. With it the minimum
//! spanning forest is unique and the maximum edge of any cycle is well defined.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::Metric;
use crate::weight::exact_total;

/// An undirected weighted edge in canonical form `u < v`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(into = "(usize, usize, f64)", from = "(usize, usize, f64)")]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    /// Canonicalises the endpoint order.
    pub fn new(a: usize, b: usize, w: f64) -> Self {
        Edge { u: a.min(b), v: a.max(b), w }
    }

    pub fn key(&self) -> (usize, usize) {
        (self.u, self.v)
    }

    pub fn touches(&self, x: usize) -> bool {
        self.u == x || self.v == x
    }

    pub fn other(&self, x: usize) -> usize {
        if self.u == x {
            self.v
        } else {
            self.u
        }
    }
}

impl From<(usize, usize, f64)> for Edge {
    fn from((a, b, w): (usize, usize, f64)) -> Self {
        Edge::new(a, b, w)
    }
}

impl From<Edge> for (usize, usize, f64) {
    fn from(e: Edge) -> Self {
        (e.u, e.v, e.w)
    }
}

impl PartialEq for Edge {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Edge {}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Edge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.w
            .total_cmp(&other.w)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

/// Sum of edge weights, correctly rounded.
pub fn edge_weight<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> f64 {
    exact_total(edges.into_iter().map(|e| e.w))
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n], sets: n }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

/// An undirected simple graph on `0..n` with real edge weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRepr {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<GraphRepr> for WeightedGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        WeightedGraph::new(r.n, r.edges.into_iter().map(Edge::from).collect())
    }
}

impl From<WeightedGraph> for GraphRepr {
    fn from(g: WeightedGraph) -> Self {
        GraphRepr { n: g.n, edges: g.edges.into_iter().map(Into::into).collect() }
    }
}

impl WeightedGraph {
    /// Validates endpoints, self-loops, duplicate pairs and weights.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.v >= n {
                return Err(Error::VertexOutOfRange { vertex: e.v, n });
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop at {}", e.u)));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) has weight {}", e.u, e.v, e.w)));
            }
            if !seen.insert(e.key()) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.u, e.v)));
            }
        }
        Ok(WeightedGraph { n, edges })
    }

    pub(crate) fn from_trusted(n: usize, edges: Vec<Edge>) -> Self {
        WeightedGraph { n, edges }
    }

    pub fn edgeless(n: usize) -> Self {
        WeightedGraph { n, edges: Vec::new() }
    }

    /// The complete graph `G(M)` of a metric.
    pub fn complete(m: &Metric) -> Self {
        let n = m.n();
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push(Edge { u, v, w: m.d(u, v) });
            }
        }
        WeightedGraph { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight(&self) -> f64 {
        edge_weight(&self.edges)
    }

    pub fn edge_keys(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(Edge::key).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.n);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        uf.sets() <= 1
    }

    /// Edge sorted copy in the total edge order.
    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut edges = self.edges.clone();
        edges.sort_unstable();
        edges
    }

    /// The distance matrix when the graph is complete, else `None`.
    pub fn as_complete_matrix(&self) -> Option<Vec<Vec<f64>>> {
        if self.edges.len() != self.n * self.n.saturating_sub(1) / 2 {
            return None;
        }
        let mut m = vec![vec![0.0; self.n]; self.n];
        for e in &self.edges {
            m[e.u][e.v] = e.w;
            m[e.v][e.u] = e.w;
        }
        Some(m)
    }
}

/// An acyclic spanning subgraph with per-vertex component labels.
///
/// Edges are kept sorted in the total edge order; a component is labelled by
/// its smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    n: usize,
    edges: Vec<Edge>,
    component: Vec<usize>,
}

impl Forest {
    /// Builds a forest, rejecting cycles and malformed edges.
    pub fn from_edges(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        let g = WeightedGraph::new(n, edges.clone())?;
        let mut uf = UnionFind::new(n);
        for e in g.edges() {
            if !uf.union(e.u, e.v) {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) closes a cycle", e.u, e.v)));
            }
        }
        edges.sort_unstable();
        Ok(Self::with_components(n, edges, &mut uf))
    }

    fn with_components(n: usize, edges: Vec<Edge>, uf: &mut UnionFind) -> Self {
        let mut label = vec![usize::MAX; n];
        let mut component = vec![0; n];
        for v in 0..n {
            let root = uf.find(v);
            if label[root] == usize::MAX {
                label[root] = v;
            }
            component[v] = label[root];
        }
        Forest { n, edges, component }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight(&self) -> f64 {
        edge_weight(&self.edges)
    }

    pub fn component(&self, v: usize) -> usize {
        self.component[v]
    }

    pub fn components(&self) -> &[usize] {
        &self.component
    }

    pub fn num_components(&self) -> usize {
        self.n - self.edges.len()
    }

    pub fn is_spanning_tree(&self) -> bool {
        self.num_components() == 1
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        let key = (u.min(v), u.max(v));
        self.edges.iter().any(|e| e.key() == key)
    }

    pub fn edge_keys(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().map(Edge::key).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        adjacency(self.n, &self.edges)
    }

    pub fn as_graph(&self) -> WeightedGraph {
        WeightedGraph::from_trusted(self.n, self.edges.clone())
    }

    /// Tree path from `a` to `b`, or `None` if they lie in different trees.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<Edge>> {
        tree_path(self.n, &self.edges, a, b)
    }
}

pub(crate) fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<(usize, f64)>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        adj[e.u].push((e.v, e.w));
        adj[e.v].push((e.u, e.w));
    }
    adj
}

/// Path between `a` and `b` in an acyclic edge set, by breadth-first search.
pub(crate) fn tree_path(n: usize, edges: &[Edge], a: usize, b: usize) -> Option<Vec<Edge>> {
    let adj = adjacency(n, edges);
    let mut parent: Vec<Option<(usize, f64)>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[a] = true;
    let mut queue = VecDeque::from([a]);
    while let Some(x) = queue.pop_front() {
        if x == b {
            break;
        }
        for &(y, w) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some((x, w));
                queue.push_back(y);
            }
        }
    }
    if !seen[b] {
        return None;
    }
    let mut path = Vec::new();
    let mut x = b;
    while let Some((p, w)) = parent[x] {
        path.push(Edge::new(p, x, w));
        x = p;
    }
    path.reverse();
    Some(path)
}

/// Kruskal's algorithm under the total edge order.
pub fn kruskal_msf(g: &WeightedGraph) -> Forest {
    let mut uf = UnionFind::new(g.n());
    let mut chosen = Vec::with_capacity(g.n().saturating_sub(1));
    for e in g.sorted_edges() {
        if uf.union(e.u, e.v) {
            chosen.push(e);
        }
    }
    Forest::with_components(g.n(), chosen, &mut uf)
}

/// Minimum spanning tree of the complete graph of `m`.
pub fn metric_mst(m: &Metric) -> Forest {
    kruskal_msf(&WeightedGraph::complete(m))
}

/// The unique cycle of `f ∪ {e}`: the tree path between e's endpoints, then `e`.
pub fn forest_cycle(f: &Forest, e: Edge) -> Result<Vec<Edge>> {
    let n = f.n();
    if e.v >= n {
        return Err(Error::VertexOutOfRange { vertex: e.v, n });
    }
    if f.contains(e.u, e.v) {
        return Err(Error::InvalidGraph(format!("edge ({}, {}) already belongs to the forest", e.u, e.v)));
    }
    if f.component(e.u) != f.component(e.v) {
        return Err(Error::NoCycle(e.u, e.v));
    }
    let mut cycle = f.path(e.u, e.v).ok_or(Error::NoCycle(e.u, e.v))?;
    cycle.push(e);
    Ok(cycle)
}

/// A failure of the cycle property for a claimed minimum spanning forest.
#[derive(Debug, Clone, PartialEq)]
pub enum CycleViolation {
    /// `chord` joins two different trees of the forest, so the forest is not maximal.
    Bridging { chord: Edge },
    /// `heavier` lies on the cycle closed by `chord` but outranks it.
    HeavierOnCycle { chord: Edge, heavier: Edge },
}

/// Checks that every non-forest edge is the order-maximal edge of the cycle it closes.
pub fn cycle_property_check(g: &WeightedGraph, f: &Forest) -> std::result::Result<(), CycleViolation> {
    let in_forest = f.edge_keys();
    for &chord in g.edges() {
        if in_forest.contains(&chord.key()) {
            continue;
        }
        let Some(path) = f.path(chord.u, chord.v) else {
            return Err(CycleViolation::Bridging { chord });
        };
        if let Some(&heavier) = path.iter().filter(|e| **e > chord).max() {
            return Err(CycleViolation::HeavierOnCycle { chord, heavier });
        }
    }
    Ok(())
}

/// A spanning tree with a designated root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedTree {
    tree: Forest,
    root: usize,
}

impl RootedTree {
    pub fn new(tree: Forest, root: usize) -> Result<Self> {
        if root >= tree.n() {
            return Err(Error::VertexOutOfRange { vertex: root, n: tree.n() });
        }
        if !tree.is_spanning_tree() {
            return Err(Error::Disconnected);
        }
        Ok(RootedTree { tree, root })
    }

    pub fn tree(&self) -> &Forest {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }
}

/// Structural parameters of a rooted tree.
///
/// `radius`, `diameter`, `sum_pairwise` and `sum_single` are weighted;
/// `depth` and `hop_diameter` are their unit-weight counterparts, as are the
/// two `*_unweighted` sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParameters {
    pub degree: usize,
    pub radius: f64,
    pub depth: f64,
    pub diameter: f64,
    pub hop_diameter: f64,
    pub sum_pairwise: f64,
    pub sum_single: f64,
    pub sum_pairwise_unweighted: f64,
    pub sum_single_unweighted: f64,
}

struct Dfs {
    order: Vec<usize>,
    parent: Vec<usize>,
    parent_w: Vec<f64>,
    dist: Vec<f64>,
    hops: Vec<f64>,
}

fn dfs(adj: &[Vec<(usize, f64)>], root: usize) -> Dfs {
    let n = adj.len();
    let mut d = Dfs {
        order: Vec::with_capacity(n),
        parent: vec![usize::MAX; n],
        parent_w: vec![0.0; n],
        dist: vec![0.0; n],
        hops: vec![0.0; n],
    };
    let mut visited = vec![false; n];
    let mut stack = vec![root];
    visited[root] = true;
    while let Some(x) = stack.pop() {
        d.order.push(x);
        for &(y, w) in &adj[x] {
            if !visited[y] {
                visited[y] = true;
                d.parent[y] = x;
                d.parent_w[y] = w;
                d.dist[y] = d.dist[x] + w;
                d.hops[y] = d.hops[x] + 1.0;
                stack.push(y);
            }
        }
    }
    d
}

fn farthest(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

/// Evaluates all [`TreeParameters`] in linear time.
///
/// Pairwise sums use per-edge subtree-size contributions; diameters use the
/// two-sweep farthest-vertex argument.
pub fn tree_parameters(t: &RootedTree) -> TreeParameters {
    let n = t.n();
    let adj = t.tree().adjacency();
    let from_root = dfs(&adj, t.root());

    let mut size = vec![1usize; n];
    for &x in from_root.order.iter().rev() {
        let p = from_root.parent[x];
        if p != usize::MAX {
            size[p] += size[x];
        }
    }
    let mut pairwise = 0.0;
    let mut pairwise_unit = 0.0;
    for x in 0..n {
        if from_root.parent[x] != usize::MAX {
            let crossings = (size[x] * (n - size[x])) as f64;
            pairwise += crossings * from_root.parent_w[x];
            pairwise_unit += crossings;
        }
    }

    let (far_w, _) = farthest(&from_root.dist);
    let (_, diameter) = farthest(&dfs(&adj, far_w).dist);
    let (far_h, _) = farthest(&from_root.hops);
    let (_, hop_diameter) = farthest(&dfs(&adj, far_h).hops);

    TreeParameters {
        degree: adj.iter().map(Vec::len).max().unwrap_or(0),
        radius: farthest(&from_root.dist).1,
        depth: farthest(&from_root.hops).1,
        diameter,
        hop_diameter,
        sum_pairwise: pairwise,
        sum_single: from_root.dist.iter().sum(),
        sum_pairwise_unweighted: pairwise_unit,
        sum_single_unweighted: from_root.hops.iter().sum(),
    }
}

/// What [`brute_force_optimal_tree`] minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeObjective {
    Degree,
    /// Weighted root eccentricity, best root.
    Radius,
    /// Unweighted root eccentricity, best root.
    Depth,
    Diameter,
    HopDiameter,
    SumPairwise,
    /// Weighted single-source distance sum, best root.
    SumSingle,
}

impl TreeObjective {
    pub const ALL: [TreeObjective; 7] = [
        TreeObjective::Degree,
        TreeObjective::Radius,
        TreeObjective::Depth,
        TreeObjective::Diameter,
        TreeObjective::HopDiameter,
        TreeObjective::SumPairwise,
        TreeObjective::SumSingle,
    ];

    pub fn rooted(self) -> bool {
        matches!(self, TreeObjective::Radius | TreeObjective::Depth | TreeObjective::SumSingle)
    }

    pub fn value(self, p: &TreeParameters) -> f64 {
        match self {
            TreeObjective::Degree => p.degree as f64,
            TreeObjective::Radius => p.radius,
            TreeObjective::Depth => p.depth,
            TreeObjective::Diameter => p.diameter,
            TreeObjective::HopDiameter => p.hop_diameter,
            TreeObjective::SumPairwise => p.sum_pairwise,
            TreeObjective::SumSingle => p.sum_single,
        }
    }
}

pub const BRUTE_FORCE_MAX_N: usize = 8;

/// Decodes a Prüfer sequence into the edge list of a labelled tree.
fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf always exists");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Spanning tree of `g` minimising `objective`, by enumerating all labelled
/// trees on `n <= 8` vertices. Returns the tree (rooted at its best root for
/// rooted objectives, at 0 otherwise) and the optimal value.
pub fn brute_force_optimal_tree(g: &WeightedGraph, objective: TreeObjective) -> Result<(RootedTree, f64)> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooManyVertices { max: BRUTE_FORCE_MAX_N, got: n });
    }
    if n == 0 {
        return Err(Error::TooFewVertices { needed: 1, got: 0 });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if n == 1 {
        let t = RootedTree::new(Forest::from_edges(1, Vec::new())?, 0)?;
        return Ok((t, 0.0));
    }
    let mut weight = vec![vec![None; n]; n];
    for e in g.edges() {
        weight[e.u][e.v] = Some(e.w);
        weight[e.v][e.u] = Some(e.w);
    }
    let roots: Vec<usize> = if objective.rooted() { (0..n).collect() } else { vec![0] };
    let mut best: Option<(RootedTree, f64)> = None;
    let mut seq = vec![0usize; n - 2];
    loop {
        let edges: Option<Vec<Edge>> = prufer_edges(&seq, n)
            .into_iter()
            .map(|(a, b)| weight[a][b].map(|w| Edge::new(a, b, w)))
            .collect();
        if let Some(edges) = edges {
            let forest = Forest::from_edges(n, edges)?;
            for &root in &roots {
                let t = RootedTree { tree: forest.clone(), root };
                let value = objective.value(&tree_parameters(&t));
                if best.as_ref().is_none_or(|(_, b)| value < *b) {
                    best = Some((t, value));
                }
            }
        }
        // odometer increment over [0, n)^(n-2)
        let mut i = 0;
        while i < seq.len() {
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
        if i == seq.len() {
            break;
        }
    }
    best.ok_or(Error::Disconnected)
}
