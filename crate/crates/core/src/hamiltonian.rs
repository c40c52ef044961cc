//! Hamiltonian paths of a metric: exact Held-Karp, MST preorder
//! 2-approximation, and shortcutting onto a vertex subset.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{metric_mst, Edge};
use crate::metric::{Metric, VertexSubset};
use crate::weight::exact_total;

/// Largest metric the exact solver accepts.
pub const EXACT_MAX_N: usize = 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Approx,
}

/// A vertex order visiting every point once, with its weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamPath {
    order: Vec<usize>,
    weight: f64,
    exactness: Exactness,
}

impl HamPath {
    /// Validates `order` as a permutation of `0..m.n()` and weighs it.
    ///
    /// The weight is the correctly rounded sum of the consecutive distances,
    /// so it does not depend on the direction of traversal.
    pub fn from_order(m: &Metric, order: Vec<usize>, exactness: Exactness) -> Result<Self> {
        let n = m.n();
        if order.len() != n {
            return Err(Error::NotPermutation(n));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::NotPermutation(n));
            }
        }
        let weight = exact_total(order.windows(2).map(|w| m.d(w[0], w[1])));
        Ok(HamPath { order, weight, exactness })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn exactness(&self) -> Exactness {
        self.exactness
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    /// Path edges in canonical form, weighted by `m`.
    pub fn edges(&self, m: &Metric) -> Vec<Edge> {
        self.order.windows(2).map(|w| Edge::new(w[0], w[1], m.d(w[0], w[1]))).collect()
    }

    fn oriented(mut order: Vec<usize>) -> Vec<usize> {
        if order.first() > order.last() {
            order.reverse();
        }
        order
    }
}

/// Minimum-weight Hamiltonian path by dynamic programming over
/// (visited subset, last vertex). `2 <= n <= 18`.
pub fn exact_min_ham_path(m: &Metric) -> Result<HamPath> {
    let n = m.n();
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: n });
    }
    if n > EXACT_MAX_N {
        return Err(Error::TooManyVertices { max: EXACT_MAX_N, got: n });
    }
    let dist = m.to_matrix();
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; (full + 1) * n];
    let mut prev = vec![u8::MAX; (full + 1) * n];
    for v in 0..n {
        best[(1 << v) * n + v] = 0.0;
    }
    for mask in 1..=full {
        for last in 0..n {
            let cur = best[mask * n + last];
            if cur == f64::INFINITY {
                continue;
            }
            let row = &dist[last];
            for next in 0..n {
                if mask >> next & 1 == 1 {
                    continue;
                }
                let slot = (mask | 1 << next) * n + next;
                let cand = cur + row[next];
                if cand < best[slot] {
                    best[slot] = cand;
                    prev[slot] = last as u8;
                }
            }
        }
    }
    let mut last = (0..n)
        .min_by(|&a, &b| best[full * n + a].total_cmp(&best[full * n + b]))
        .expect("n >= 2");
    let mut mask = full;
    let mut order = Vec::with_capacity(n);
    loop {
        order.push(last);
        let p = prev[mask * n + last];
        mask &= !(1 << last);
        if p == u8::MAX {
            break;
        }
        last = p as usize;
    }
    HamPath::from_order(m, HamPath::oriented(order), Exactness::Exact)
}

/// Depth-first preorder of `MST(M)` from vertex 0, children in index order.
/// Weight is at most `2·w(MST(M))` by the triangle inequality.
pub fn approx_ham_path(m: &Metric) -> Result<HamPath> {
    let n = m.n();
    if n == 0 {
        return Err(Error::TooFewVertices { needed: 1, got: 0 });
    }
    let mst = metric_mst(m);
    let mut children: Vec<Vec<usize>> = mst.adjacency().into_iter().map(|a| a.into_iter().map(|(v, _)| v).collect()).collect();
    for c in &mut children {
        c.sort_unstable();
    }
    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        if std::mem::replace(&mut visited[x], true) {
            continue;
        }
        order.push(x);
        stack.extend(children[x].iter().rev().filter(|&&y| !visited[y]));
    }
    HamPath::from_order(m, order, Exactness::Approx)
}

/// Restricts `h` to the vertices of `subset`, keeping their relative order.
///
/// The result is a path of `m.induce(subset)`: vertex `i` stands for
/// `subset[i]`.
pub fn shortcut_path(m: &Metric, h: &HamPath, subset: &VertexSubset) -> Result<HamPath> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if h.n() != m.n() {
        return Err(Error::SizeMismatch { expected: m.n(), got: h.n() });
    }
    let sub = m.induce(subset)?;
    let order = h.order.iter().filter_map(|&v| subset.local_index(v)).collect();
    let exactness = if subset.len() == m.n() { h.exactness } else { Exactness::Approx };
    HamPath::from_order(&sub, order, exactness)
}
