//! Constructive lightness certificates for minimum spanning forests of
//! symmetric disk graphs.
//!
//! Given the MSF `F` of `S = SDG(M, r)` and any Hamiltonian path `H` of `M`,
//! [`decompose`] produces an edge set `Ẽ ⊆ E_F` with `w(Ẽ) <= w(H)` whose
//! removal leaves at least `⌈n/5⌉` isolated vertices, along with every
//! intermediate set needed to check that claim. [`verify_certificate`]
//! re-derives each property from the inputs alone.
//!
//! [`lightness_trace`] applies the decomposition repeatedly: it peels the
//! isolated vertices, recomputes the MSF of the disk graph induced on the
//! survivors, shortcuts the path and repeats until at most four points remain.
//! The per-round weights telescope to `w(F) <= log_{5/4}(n) · w(H)`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk_graph::{build_sdg, build_sdg_graph, RangeAssignment};
use crate::error::{Error, Result};
use crate::graph::{edge_weight, kruskal_msf, metric_mst, tree_path, Edge, Forest, UnionFind, WeightedGraph};
use crate::hamiltonian::{approx_ham_path, exact_min_ham_path, shortcut_path, Exactness, HamPath};
use crate::metric::{Metric, VertexSubset};
use crate::weight::{cmp_sums, sum_le, ExactSum};

/// `log_{5/4} n`.
pub fn log54(n: usize) -> f64 {
    (n as f64).ln() / 1.25f64.ln()
}

/// `⌈log_{5/4} n⌉`, the most peeling rounds an `n`-point trace may take.
pub fn max_rounds(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        log54(n).ceil() as usize
    }
}

/// `2·log_{5/4} n`, the weight-coefficient bound for metric disk graphs.
pub fn lightness_bound(n: usize) -> f64 {
    2.0 * log54(n)
}

/// Smallest admissible number of isolated vertices, `⌈n/5⌉`.
pub fn isolated_quota(n: usize) -> usize {
    n.div_ceil(5)
}

pub type EdgePair = [usize; 2];

fn pair(e: &Edge) -> EdgePair {
    [e.u, e.v]
}

fn pairs(edges: &[Edge]) -> Vec<EdgePair> {
    edges.iter().map(pair).collect()
}

/// Weight of every edge set in a [`DecompositionCertificate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateWeights {
    pub forest: f64,
    pub ham: f64,
    pub e_prime: f64,
    pub e_dprime: f64,
    pub e1: f64,
    pub e2: f64,
    pub tilde_e2: f64,
    pub star_h: f64,
    pub star_f: f64,
    pub tilde_e: f64,
}

/// All edge sets of one decomposition, as canonical `[u, v]` pairs.
///
/// * `e_prime`: path edges present in the disk graph; `e_dprime` the rest.
/// * `e1` / `e2`: `e_prime` edges inside / outside the forest. `e2` is in
///   ascending edge order and `tilde_e2[i]` is the forest edge exchanged for
///   `e2[i]`.
/// * `star_h[i]` is a path edge outside the disk graph paired with the forest
///   edge `star_f[i]` incident to its smaller-radius endpoint.
/// * `tilde_e = e1 ∪ tilde_e2 ∪ star_f`; `remaining_h = e_dprime \ star_h`.
/// * `isolated`: vertices with no edge in `F \ tilde_e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionCertificate {
    pub n: usize,
    pub e_prime: Vec<EdgePair>,
    pub e_dprime: Vec<EdgePair>,
    pub e1: Vec<EdgePair>,
    pub e2: Vec<EdgePair>,
    pub tilde_e2: Vec<EdgePair>,
    pub star_h: Vec<EdgePair>,
    pub star_f: Vec<EdgePair>,
    pub tilde_e: Vec<EdgePair>,
    pub remaining_h: Vec<EdgePair>,
    pub isolated: VertexSubset,
    pub weights: CertificateWeights,
}

impl DecompositionCertificate {
    /// Vertices that keep at least one forest edge.
    pub fn survivors(&self) -> VertexSubset {
        self.isolated.complement(self.n)
    }
}

fn check_inputs(m: &Metric, r: &RangeAssignment, f: &Forest, h: &HamPath) -> Result<()> {
    let n = m.n();
    if r.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: r.len() });
    }
    if f.n() != n {
        return Err(Error::SizeMismatch { expected: n, got: f.n() });
    }
    if h.n() != n {
        return Err(Error::NotPermutation(n));
    }
    HamPath::from_order(m, h.order().to_vec(), h.exactness())?;
    Ok(())
}

/// Builds the decomposition certificate for `(M, r, F, H)`.
///
/// Fails if `f` is not the MSF of `SDG(m, r)` or `h` is not a Hamiltonian
/// path of `m`.
pub fn decompose(m: &Metric, r: &RangeAssignment, f: &Forest, h: &HamPath) -> Result<DecompositionCertificate> {
    check_inputs(m, r, f, h)?;
    if kruskal_msf(&build_sdg(m, r)?).edges() != f.edges() {
        return Err(Error::NotMsf);
    }
    Ok(decompose_unchecked(m, r, f, h))
}

fn decompose_unchecked(m: &Metric, r: &RangeAssignment, f: &Forest, h: &HamPath) -> DecompositionCertificate {
    let n = m.n();
    let mut path_edges = h.edges(m);
    path_edges.sort_unstable();
    let in_path: HashSet<(usize, usize)> = path_edges.iter().map(Edge::key).collect();
    let in_forest = f.edge_keys();

    let (e_prime, e_dprime): (Vec<Edge>, Vec<Edge>) = path_edges.iter().partition(|e| r.admits(e));
    let (e1, e2): (Vec<Edge>, Vec<Edge>) = e_prime.iter().partition(|e| in_forest.contains(&e.key()));

    // Exchange each e2 edge, lightest first, against a non-path edge of the cycle it closes.
    let mut running: Vec<Edge> = f.edges().to_vec();
    let mut tilde_e2 = Vec::with_capacity(e2.len());
    for &added in &e2 {
        let cycle = tree_path(n, &running, added.u, added.v).expect("path edge of the disk graph lies inside one tree");
        let out = *cycle
            .iter()
            .filter(|e| !in_path.contains(&e.key()))
            .max()
            .expect("an acyclic path cannot contain a whole cycle");
        running.retain(|e| e.key() != out.key());
        running.push(added);
        tilde_e2.push(out);
    }

    let exchanged: HashSet<(usize, usize)> = e1.iter().chain(&tilde_e2).map(Edge::key).collect();
    let mut rest: Vec<Edge> = f.edges().iter().filter(|e| !exchanged.contains(&e.key())).copied().collect();

    let mut star_h = Vec::new();
    let mut star_f = Vec::new();
    let mut remaining_h = Vec::new();
    for &e in &e_dprime {
        let low = r.min_endpoint(&e);
        let heaviest = rest.iter().enumerate().filter(|(_, x)| x.touches(low)).max_by_key(|(_, x)| **x).map(|(i, _)| i);
        match heaviest {
            Some(i) => {
                star_f.push(rest.swap_remove(i));
                star_h.push(e);
            }
            None => remaining_h.push(e),
        }
    }

    let mut tilde_e: Vec<Edge> = e1.iter().chain(&tilde_e2).chain(&star_f).copied().collect();
    tilde_e.sort_unstable();
    let mut degree = vec![0usize; n];
    for e in &rest {
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let isolated = VertexSubset::new((0..n).filter(|&v| degree[v] == 0).collect(), n).expect("increasing by construction");

    let weights = CertificateWeights {
        forest: f.weight(),
        ham: edge_weight(&path_edges),
        e_prime: edge_weight(&e_prime),
        e_dprime: edge_weight(&e_dprime),
        e1: edge_weight(&e1),
        e2: edge_weight(&e2),
        tilde_e2: edge_weight(&tilde_e2),
        star_h: edge_weight(&star_h),
        star_f: edge_weight(&star_f),
        tilde_e: edge_weight(&tilde_e),
    };
    DecompositionCertificate {
        n,
        e_prime: pairs(&e_prime),
        e_dprime: pairs(&e_dprime),
        e1: pairs(&e1),
        e2: pairs(&e2),
        tilde_e2: pairs(&tilde_e2),
        star_h: pairs(&star_h),
        star_f: pairs(&star_f),
        tilde_e: pairs(&tilde_e),
        remaining_h: pairs(&remaining_h),
        isolated,
        weights,
    }
}

/// A property of a certificate that failed re-derivation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateViolation {
    #[error("input: {0}")]
    Input(String),
    #[error("malformed edge list {set}: {detail}")]
    Malformed { set: &'static str, detail: String },
    #[error("set algebra: {0}")]
    SetAlgebra(String),
    #[error("exchange order: e2 is not strictly ascending at index {0}")]
    ExchangeOrder(usize),
    #[error("exchange count: |tilde_e2| = {exchanged} but |e2| = {added}")]
    ExchangeCount { added: usize, exchanged: usize },
    #[error("exchanged edge tilde_e2[{index}] = {edge:?} belongs to H")]
    ExchangedEdgeInPath { index: usize, edge: EdgePair },
    #[error("exchanged edge tilde_e2[{index}] = {edge:?} is not a forest edge")]
    ExchangedEdgeNotInForest { index: usize, edge: EdgePair },
    #[error("exchange {index}: w(tilde_e2) = {exchanged} exceeds w(e2) = {added}")]
    ExchangeHeavier { index: usize, added: f64, exchanged: f64 },
    #[error("exchange {index}: {edge:?} is not on the cycle closed by e2[{index}]")]
    ExchangeNotOnCycle { index: usize, edge: EdgePair },
    #[error("path edge {edge:?} outside the disk graph has r(min(e)) = {radius} >= w(e) = {weight}")]
    OutsideEdgeInRange { edge: EdgePair, radius: f64, weight: f64 },
    #[error("star count: |star_f| = {forest} but |star_h| = {path}")]
    StarCount { path: usize, forest: usize },
    #[error("star pair {index}: {detail}")]
    StarPair { index: usize, detail: String },
    #[error("star weight: w(star_f) exceeds w(star_h)")]
    StarWeight,
    #[error("disjointness: {0}")]
    Overlap(String),
    #[error("weight bound: w(tilde_e) = {removed} exceeds w(H) = {path}")]
    RemovedTooHeavy { removed: f64, path: f64 },
    #[error("remaining path edge {edge:?} has a non-isolated smaller-radius endpoint {vertex}")]
    RemainingNotIsolated { edge: EdgePair, vertex: usize },
    #[error("isolated set differs from the isolated vertices of F \\ tilde_e")]
    IsolatedMismatch,
    #[error("isolated count: {found} isolated vertices, need at least {required}")]
    IsolatedCount { found: usize, required: usize },
    #[error("recorded weight of {0} differs from its recomputed value")]
    WeightMismatch(&'static str),
}

type Key = (usize, usize);

fn key_set(list: &[EdgePair]) -> HashSet<Key> {
    list.iter().map(|p| (p[0], p[1])).collect()
}

/// Re-derives every certificate property from `(m, r, f, h)`.
///
/// Returns the empty list when the certificate is valid. Only the metric,
/// the ranges and the listed vertex pairs are trusted; all memberships,
/// exchange cycles and weights are recomputed.
pub fn verify_certificate(
    m: &Metric,
    r: &RangeAssignment,
    f: &Forest,
    h: &HamPath,
    cert: &DecompositionCertificate,
) -> Vec<CertificateViolation> {
    use CertificateViolation as V;
    let n = m.n();
    if let Err(e) = check_inputs(m, r, f, h) {
        return vec![V::Input(e.to_string())];
    }
    if cert.n != n {
        return vec![V::Input(format!("certificate is for {} vertices, metric has {n}", cert.n))];
    }
    match build_sdg(m, r) {
        Ok(sdg) if kruskal_msf(&sdg).edges() == f.edges() => {}
        _ => return vec![V::Input("forest is not the MSF of the disk graph".into())],
    }

    let mut out = Vec::new();
    let lists: [(&'static str, &Vec<EdgePair>); 9] = [
        ("e_prime", &cert.e_prime),
        ("e_dprime", &cert.e_dprime),
        ("e1", &cert.e1),
        ("e2", &cert.e2),
        ("tilde_e2", &cert.tilde_e2),
        ("star_h", &cert.star_h),
        ("star_f", &cert.star_f),
        ("tilde_e", &cert.tilde_e),
        ("remaining_h", &cert.remaining_h),
    ];
    for (set, list) in lists {
        if let Some(p) = list.iter().find(|p| p[0] >= p[1] || p[1] >= n) {
            out.push(V::Malformed { set, detail: format!("pair {p:?} is not canonical in 0..{n}") });
        } else if key_set(list).len() != list.len() {
            out.push(V::Malformed { set, detail: "duplicate pair".into() });
        }
    }
    if !out.is_empty() {
        return out;
    }

    let edge = |p: &EdgePair| Edge { u: p[0], v: p[1], w: m.d(p[0], p[1]) };
    let weights_of = |list: &[EdgePair]| list.iter().map(|p| m.d(p[0], p[1])).collect::<Vec<_>>();
    let path: Vec<Edge> = h.edges(m);
    let path_keys: HashSet<Key> = path.iter().map(Edge::key).collect();
    let forest_keys = f.edge_keys();

    let expect_set = |out: &mut Vec<V>, name: &str, got: &[EdgePair], want: &HashSet<Key>| {
        if key_set(got) != *want {
            out.push(V::SetAlgebra(format!("{name} does not match its definition")));
        }
    };

    // Partition of the path.
    let admitted: HashSet<Key> = path.iter().filter(|e| r.admits(e)).map(Edge::key).collect();
    let outside: HashSet<Key> = path_keys.difference(&admitted).copied().collect();
    expect_set(&mut out, "e_prime (H ∩ S)", &cert.e_prime, &admitted);
    expect_set(&mut out, "e_dprime (H \\ S)", &cert.e_dprime, &outside);
    let want_e1: HashSet<Key> = admitted.intersection(&forest_keys).copied().collect();
    let want_e2: HashSet<Key> = admitted.difference(&forest_keys).copied().collect();
    expect_set(&mut out, "e1 (e_prime ∩ F)", &cert.e1, &want_e1);
    expect_set(&mut out, "e2 (e_prime \\ F)", &cert.e2, &want_e2);

    // Exchanges, replayed on a running forest.
    let e2: Vec<Edge> = cert.e2.iter().map(edge).collect();
    if let Some(i) = e2.windows(2).position(|w| w[0] >= w[1]) {
        out.push(V::ExchangeOrder(i + 1));
    }
    if cert.tilde_e2.len() != cert.e2.len() {
        out.push(V::ExchangeCount { added: cert.e2.len(), exchanged: cert.tilde_e2.len() });
    } else {
        let mut running: HashSet<Key> = forest_keys.clone();
        for (index, (added, out_pair)) in e2.iter().zip(&cert.tilde_e2).enumerate() {
            let removed = edge(out_pair);
            let key = removed.key();
            if path_keys.contains(&key) {
                out.push(V::ExchangedEdgeInPath { index, edge: *out_pair });
            }
            if !forest_keys.contains(&key) {
                out.push(V::ExchangedEdgeNotInForest { index, edge: *out_pair });
            }
            if removed.w > added.w {
                out.push(V::ExchangeHeavier { index, added: added.w, exchanged: removed.w });
            }
            // Swapping keeps a spanning forest iff `removed` lies on the cycle `added` closes.
            let on_cycle = running.contains(&key) && {
                let mut uf = UnionFind::new(n);
                running.iter().filter(|&&k| k != key).all(|&(a, b)| uf.union(a, b)) && uf.union(added.u, added.v)
            };
            if !on_cycle {
                out.push(V::ExchangeNotOnCycle { index, edge: *out_pair });
                break;
            }
            running.remove(&key);
            running.insert(added.key());
        }
    }

    // Path edges outside the disk graph, and their pairing with forest edges.
    for p in &cert.e_dprime {
        let e = edge(p);
        let radius = r.get(r.min_endpoint(&e));
        if radius >= e.w {
            out.push(V::OutsideEdgeInRange { edge: *p, radius, weight: e.w });
        }
    }
    if cert.star_h.len() != cert.star_f.len() {
        out.push(V::StarCount { path: cert.star_h.len(), forest: cert.star_f.len() });
    } else {
        for (index, (ph, pf)) in cert.star_h.iter().zip(&cert.star_f).enumerate() {
            let (eh, ef) = (edge(ph), edge(pf));
            let low = r.min_endpoint(&eh);
            let radius = r.get(low);
            let problem = if !outside.contains(&eh.key()) {
                Some("star_h edge is not in e_dprime".to_string())
            } else if !forest_keys.contains(&ef.key()) || path_keys.contains(&ef.key()) {
                Some("star_f edge is not in F \\ H".to_string())
            } else if !ef.touches(low) {
                Some(format!("star_f edge does not touch min(e) = {low}"))
            } else if !(ef.w <= radius && radius < eh.w) {
                Some(format!("need w(star_f) = {} <= r(min(e)) = {radius} < w(star_h) = {}", ef.w, eh.w))
            } else {
                None
            };
            if let Some(detail) = problem {
                out.push(V::StarPair { index, detail });
            }
        }
        if !sum_le(weights_of(&cert.star_f), weights_of(&cert.star_h)) {
            out.push(V::StarWeight);
        }
    }
    let star_h_keys = key_set(&cert.star_h);
    let want_remaining: HashSet<Key> = outside.difference(&star_h_keys).copied().collect();
    expect_set(&mut out, "remaining_h (e_dprime \\ star_h)", &cert.remaining_h, &want_remaining);

    // Disjointness of the path-side and forest-side families.
    for (side, family) in [
        ("path side (e1, e2, star_h)", [&cert.e1, &cert.e2, &cert.star_h]),
        ("forest side (e1, tilde_e2, star_f)", [&cert.e1, &cert.tilde_e2, &cert.star_f]),
    ] {
        let total: usize = family.iter().map(|l| l.len()).sum();
        let union: HashSet<Key> = family.iter().flat_map(|l| key_set(l)).collect();
        if union.len() != total {
            out.push(V::Overlap(format!("{side} sets intersect")));
        }
    }

    // The removed set, its weight and what it isolates.
    let want_tilde: HashSet<Key> =
        [&cert.e1, &cert.tilde_e2, &cert.star_f].iter().flat_map(|l| key_set(l)).collect();
    expect_set(&mut out, "tilde_e (e1 ∪ tilde_e2 ∪ star_f)", &cert.tilde_e, &want_tilde);
    let tilde_keys = key_set(&cert.tilde_e);
    if !tilde_keys.is_subset(&forest_keys) {
        out.push(V::SetAlgebra("tilde_e is not a subset of F".into()));
    }
    let path_weights: Vec<f64> = path.iter().map(|e| e.w).collect();
    if !sum_le(weights_of(&cert.tilde_e), path_weights.iter().copied()) {
        let mut acc = ExactSum::new();
        acc.add_all(weights_of(&cert.tilde_e));
        let mut ham = ExactSum::new();
        ham.add_all(path_weights.iter().copied());
        out.push(V::RemovedTooHeavy { removed: acc.value(), path: ham.value() });
    }
    let mut degree = vec![0usize; n];
    for e in f.edges().iter().filter(|e| !tilde_keys.contains(&e.key())) {
        degree[e.u] += 1;
        degree[e.v] += 1;
    }
    let isolated: Vec<usize> = (0..n).filter(|&v| degree[v] == 0).collect();
    if cert.isolated.as_slice() != isolated.as_slice() {
        out.push(V::IsolatedMismatch);
    }
    for p in &cert.remaining_h {
        let low = r.min_endpoint(&edge(p));
        if degree[low] != 0 {
            out.push(V::RemainingNotIsolated { edge: *p, vertex: low });
        }
    }
    let required = isolated_quota(n);
    if isolated.len() < required {
        out.push(V::IsolatedCount { found: isolated.len(), required });
    }

    // Recorded weights.
    let w = &cert.weights;
    let recorded: [(&'static str, f64, f64); 10] = [
        ("forest", w.forest, f.weight()),
        ("ham", w.ham, crate::weight::exact_total(path_weights.iter().copied())),
        ("e_prime", w.e_prime, crate::weight::exact_total(weights_of(&cert.e_prime))),
        ("e_dprime", w.e_dprime, crate::weight::exact_total(weights_of(&cert.e_dprime))),
        ("e1", w.e1, crate::weight::exact_total(weights_of(&cert.e1))),
        ("e2", w.e2, crate::weight::exact_total(weights_of(&cert.e2))),
        ("tilde_e2", w.tilde_e2, crate::weight::exact_total(weights_of(&cert.tilde_e2))),
        ("star_h", w.star_h, crate::weight::exact_total(weights_of(&cert.star_h))),
        ("star_f", w.star_f, crate::weight::exact_total(weights_of(&cert.star_f))),
        ("tilde_e", w.tilde_e, crate::weight::exact_total(weights_of(&cert.tilde_e))),
    ];
    for (name, stored, actual) in recorded {
        if stored != actual {
            out.push(V::WeightMismatch(name));
        }
    }
    out
}

/// How the top-level Hamiltonian path is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamMode {
    Exact,
    Approx,
    /// Exact up to [`AUTO_EXACT_MAX_N`] points, approximate above.
    Auto,
}

pub const AUTO_EXACT_MAX_N: usize = 16;

impl std::str::FromStr for HamMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(HamMode::Exact),
            "approx" => Ok(HamMode::Approx),
            "auto" => Ok(HamMode::Auto),
            _ => Err(Error::InvalidParameter(format!("unknown path mode {s:?}"))),
        }
    }
}

impl fmt::Display for HamMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HamMode::Exact => "exact",
            HamMode::Approx => "approx",
            HamMode::Auto => "auto",
        })
    }
}

/// A Hamiltonian path of `m` according to `mode`. One-point metrics get the
/// trivial path.
pub fn ham_path(m: &Metric, mode: HamMode) -> Result<HamPath> {
    if m.n() == 1 {
        return HamPath::from_order(m, vec![0], Exactness::Exact);
    }
    match mode {
        HamMode::Exact => exact_min_ham_path(m),
        HamMode::Approx => approx_ham_path(m),
        HamMode::Auto if m.n() <= AUTO_EXACT_MAX_N => exact_min_ham_path(m),
        HamMode::Auto => approx_ham_path(m),
    }
}

/// One peeling round. Edge lists use the original vertex labels; `path` and
/// `certificate` use the labels of the metric induced on `vertices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRound {
    pub vertices: VertexSubset,
    pub path: HamPath,
    pub path_edges: Vec<Edge>,
    pub forest: Vec<Edge>,
    pub removed: Vec<Edge>,
    pub kept: Vec<Edge>,
    pub isolated: VertexSubset,
    pub certificate: DecompositionCertificate,
    pub w_path: f64,
    pub w_forest: f64,
    pub w_removed: f64,
    pub w_kept: f64,
}

/// The at most four points left after the last round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceBasis {
    pub vertices: VertexSubset,
    pub path_edges: Vec<Edge>,
    pub forest: Vec<Edge>,
    pub w_path: f64,
    pub w_forest: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightnessTrace {
    pub n: usize,
    pub ham_exactness: Exactness,
    /// `w(F)` for the full instance.
    pub w_forest: f64,
    /// `w(H)` for the full instance.
    pub w_ham: f64,
    pub rounds: Vec<TraceRound>,
    pub basis: TraceBasis,
    /// `Σ_k w(Ẽ_k) + w(basis forest)`.
    pub removed_total: f64,
    /// `rounds · w(H) + 3 · w(H_last)`.
    pub budget: f64,
    /// `log_{5/4}(n) · w(H)`.
    pub log_bound: f64,
    pub max_rounds: usize,
}

fn globalize(vertices: &VertexSubset, edges: &[Edge]) -> Vec<Edge> {
    let map = vertices.as_slice();
    let mut out: Vec<Edge> = edges.iter().map(|e| Edge::new(map[e.u], map[e.v], e.w)).collect();
    out.sort_unstable();
    out
}

/// Peels the MSF of `SDG(m, r)` round by round down to at most four points,
/// starting from a path chosen by `mode`.
pub fn lightness_trace(m: &Metric, r: &RangeAssignment, mode: HamMode) -> Result<LightnessTrace> {
    if m.n() == 0 {
        return Err(Error::TooFewVertices { needed: 1, got: 0 });
    }
    lightness_trace_from(m, r, ham_path(m, mode)?)
}

/// [`lightness_trace`] starting from the given Hamiltonian path of `m`.
pub fn lightness_trace_from(m: &Metric, r: &RangeAssignment, top_path: HamPath) -> Result<LightnessTrace> {
    let n = m.n();
    if n == 0 {
        return Err(Error::TooFewVertices { needed: 1, got: 0 });
    }
    if r.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: r.len() });
    }
    let top_path = HamPath::from_order(m, top_path.order().to_vec(), top_path.exactness())?;
    let top_forest = kruskal_msf(&build_sdg(m, r)?);

    let mut vertices = VertexSubset::full(n);
    let mut sub = m.clone();
    let mut sub_r = r.clone();
    let mut path = top_path.clone();
    let mut forest = top_forest.clone();
    let mut rounds = Vec::new();

    while vertices.len() >= 5 {
        let cert = decompose_unchecked(&sub, &sub_r, &forest, &path);
        let removed_keys: HashSet<Key> = key_set(&cert.tilde_e);
        let (removed_local, kept_local): (Vec<Edge>, Vec<Edge>) =
            forest.edges().iter().partition(|e| removed_keys.contains(&e.key()));
        let survivors = cert.survivors();
        let path_edges = globalize(&vertices, &path.edges(&sub));
        let round = TraceRound {
            isolated: vertices.compose(&cert.isolated)?,
            path_edges,
            forest: globalize(&vertices, forest.edges()),
            removed: globalize(&vertices, &removed_local),
            kept: globalize(&vertices, &kept_local),
            w_path: path.weight(),
            w_forest: forest.weight(),
            w_removed: edge_weight(&removed_local),
            w_kept: edge_weight(&kept_local),
            vertices: vertices.clone(),
            path: path.clone(),
            certificate: cert,
        };
        rounds.push(round);

        if survivors.is_empty() {
            vertices = survivors;
            break;
        }
        let next_sub = sub.induce(&survivors)?;
        let next_r = sub_r.restrict(survivors.iter());
        path = shortcut_path(&sub, &path, &survivors)?;
        forest = kruskal_msf(&build_sdg(&next_sub, &next_r)?);
        vertices = vertices.compose(&survivors)?;
        sub = next_sub;
        sub_r = next_r;
    }

    let basis = if vertices.is_empty() {
        TraceBasis { vertices, path_edges: Vec::new(), forest: Vec::new(), w_path: 0.0, w_forest: 0.0 }
    } else {
        TraceBasis {
            path_edges: globalize(&vertices, &path.edges(&sub)),
            forest: globalize(&vertices, forest.edges()),
            w_path: path.weight(),
            w_forest: forest.weight(),
            vertices,
        }
    };

    let mut removed_total = ExactSum::new();
    for round in &rounds {
        removed_total.add_all(round.removed.iter().map(|e| e.w));
    }
    removed_total.add_all(basis.forest.iter().map(|e| e.w));
    let mut budget = ExactSum::new();
    for _ in 0..rounds.len() {
        budget.add_all(top_path.edges(m).iter().map(|e| e.w));
    }
    for _ in 0..3 {
        budget.add_all(basis.path_edges.iter().map(|e| e.w));
    }

    Ok(LightnessTrace {
        n,
        ham_exactness: top_path.exactness(),
        w_forest: top_forest.weight(),
        w_ham: top_path.weight(),
        rounds,
        basis,
        removed_total: removed_total.value(),
        budget: budget.value(),
        log_bound: log54(n) * top_path.weight(),
        max_rounds: max_rounds(n),
    })
}

/// A relation of the peeling argument that does not hold for a trace.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceViolation {
    #[error("{rounds} rounds exceed the limit of {max}")]
    TooManyRounds { rounds: usize, max: usize },
    #[error("round {round}: {survivors} of {size} points survive, more than 4/5")]
    InsufficientShrink { round: usize, size: usize, survivors: usize },
    #[error("round {round}: path weight increased")]
    PathGrew { round: usize },
    #[error("round {round}: removed weight exceeds the path weight")]
    RemovedExceedsPath { round: usize },
    #[error("round {round}: kept edges outweigh the next forest")]
    KeptExceedsNextForest { round: usize },
    #[error("round {round}: removed and kept edges do not partition the forest")]
    ForestSplit { round: usize },
    #[error("round {round}: certificate invalid: {violations:?}")]
    Certificate { round: usize, violations: Vec<CertificateViolation> },
    #[error("round {round}: recomputed data differs from the recorded trace ({what})")]
    Replay { round: usize, what: &'static str },
    #[error("basis of {size} points is too large")]
    BasisTooLarge { size: usize },
    #[error("basis forest outweighs three times its path")]
    BasisHeavy,
    #[error("w(F) exceeds the telescoped sum of removed weights")]
    Telescoping,
    #[error("removed weights exceed rounds·w(H) + 3·w(H_last)")]
    Budget,
    #[error("rounds·w(H) + 3·w(H_last) = {budget} exceeds log_5/4(n)·w(H) = {bound}")]
    BudgetOverBound { budget: f64, bound: f64 },
    #[error("w(F) = {forest} exceeds log_5/4(n)·w(H) = {bound}")]
    Bound { forest: f64, bound: f64 },
}

fn weights(edges: &[Edge]) -> impl Iterator<Item = f64> + '_ {
    edges.iter().map(|e| e.w)
}

impl LightnessTrace {
    /// Checks every relation of the peeling argument, recomputing each round's
    /// disk graph, forest and certificate from `(m, r)`.
    pub fn check(&self, m: &Metric, r: &RangeAssignment) -> Vec<TraceViolation> {
        use TraceViolation as V;
        let mut out = Vec::new();
        if self.rounds.len() > self.max_rounds || self.max_rounds != max_rounds(self.n) {
            out.push(V::TooManyRounds { rounds: self.rounds.len(), max: max_rounds(self.n) });
        }
        let top_path = self.rounds.first().map(|r| &r.path_edges).unwrap_or(&self.basis.path_edges);

        for (k, round) in self.rounds.iter().enumerate() {
            let size = round.vertices.len();
            let next_vertices = self.rounds.get(k + 1).map(|r| &r.vertices).unwrap_or(&self.basis.vertices);
            let next_forest = self.rounds.get(k + 1).map(|r| &r.forest).unwrap_or(&self.basis.forest);
            let next_path = self.rounds.get(k + 1).map(|r| &r.path_edges).unwrap_or(&self.basis.path_edges);
            if next_vertices.len() > size * 4 / 5 {
                out.push(V::InsufficientShrink { round: k, size, survivors: next_vertices.len() });
            }
            if !sum_le(weights(next_path), weights(&round.path_edges)) {
                out.push(V::PathGrew { round: k });
            }
            if !sum_le(weights(&round.removed), weights(&round.path_edges)) {
                out.push(V::RemovedExceedsPath { round: k });
            }
            if !sum_le(weights(&round.kept), weights(next_forest)) {
                out.push(V::KeptExceedsNextForest { round: k });
            }
            let mut split: Vec<Edge> = round.removed.iter().chain(&round.kept).copied().collect();
            split.sort_unstable();
            if split != round.forest {
                out.push(V::ForestSplit { round: k });
            }

            // Replay the round from the instance.
            let Ok(sub) = m.induce(&round.vertices) else {
                out.push(V::Replay { round: k, what: "vertex set" });
                continue;
            };
            let sub_r = r.restrict(round.vertices.iter());
            let forest = match build_sdg(&sub, &sub_r) {
                Ok(g) => kruskal_msf(&g),
                Err(_) => {
                    out.push(V::Replay { round: k, what: "ranges" });
                    continue;
                }
            };
            if globalize(&round.vertices, forest.edges()) != round.forest {
                out.push(V::Replay { round: k, what: "forest" });
            }
            if globalize(&round.vertices, &round.path.edges(&sub)) != {
                let mut p = round.path_edges.clone();
                p.sort_unstable();
                p
            } {
                out.push(V::Replay { round: k, what: "path" });
            }
            let violations = verify_certificate(&sub, &sub_r, &forest, &round.path, &round.certificate);
            if !violations.is_empty() {
                out.push(V::Certificate { round: k, violations });
            }
            if round.vertices.compose(&round.certificate.isolated).ok().as_ref() != Some(&round.isolated)
                || round.isolated.complement(self.n).as_slice().iter().filter(|v| round.vertices.contains(**v)).copied().collect::<Vec<_>>()
                    != next_vertices.as_slice()
            {
                out.push(V::Replay { round: k, what: "survivors" });
            }
        }

        let basis = &self.basis;
        if basis.vertices.len() > 4 {
            out.push(V::BasisTooLarge { size: basis.vertices.len() });
        }
        if !basis.vertices.is_empty() {
            if let Ok(sub) = m.induce(&basis.vertices) {
                let sub_r = r.restrict(basis.vertices.iter());
                if let Ok(g) = build_sdg(&sub, &sub_r) {
                    if globalize(&basis.vertices, kruskal_msf(&g).edges()) != basis.forest {
                        out.push(V::Replay { round: self.rounds.len(), what: "basis forest" });
                    }
                }
            }
        }
        let mut triple = ExactSum::new();
        triple.add_all(weights(&basis.forest));
        for _ in 0..3 {
            triple.sub_all(weights(&basis.path_edges));
        }
        if triple.sign() == std::cmp::Ordering::Greater {
            out.push(V::BasisHeavy);
        }

        let removed: Vec<f64> =
            self.rounds.iter().flat_map(|r| weights(&r.removed)).chain(weights(&basis.forest)).collect();
        let full_forest = kruskal_msf(&build_sdg(m, r).unwrap_or_else(|_| WeightedGraph::edgeless(m.n())));
        if !sum_le(weights(full_forest.edges()), removed.iter().copied()) {
            out.push(V::Telescoping);
        }
        let mut budget = Vec::new();
        for _ in 0..self.rounds.len() {
            budget.extend(weights(top_path));
        }
        for _ in 0..3 {
            budget.extend(weights(&basis.path_edges));
        }
        if cmp_sums(removed.iter().copied(), budget.iter().copied()) == std::cmp::Ordering::Greater {
            out.push(V::Budget);
        }
        if self.budget > self.log_bound {
            out.push(V::BudgetOverBound { budget: self.budget, bound: self.log_bound });
        }
        if self.w_forest > self.log_bound {
            out.push(V::Bound { forest: self.w_forest, bound: self.log_bound });
        }
        out
    }
}

/// Weight coefficient `w(MSF(SDG)) / w(MST)` with its applicable bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub n: usize,
    pub w_msf_sdg: f64,
    /// Weight of the MST of the metric, or of the MSF of the host graph in graph mode.
    pub w_mst_metric: f64,
    pub coefficient: f64,
    /// `2·log_{5/4} n`.
    pub bound: f64,
    /// The SDG spans one component (equivalently, connects every point).
    pub connected: bool,
    /// False for general weighted graphs, where no logarithmic bound holds.
    pub bound_applies: bool,
}

impl CoefficientReport {
    pub fn within_bound(&self) -> bool {
        !self.bound_applies || self.coefficient <= self.bound
    }
}

/// Weight coefficient of `SDG(m, r)` relative to the metric MST.
pub fn weight_coefficient(m: &Metric, r: &RangeAssignment) -> Result<CoefficientReport> {
    let n = m.n();
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: n });
    }
    let msf = kruskal_msf(&build_sdg(m, r)?);
    let mst = metric_mst(m);
    let (w_msf_sdg, w_mst_metric) = (msf.weight(), mst.weight());
    Ok(CoefficientReport {
        n,
        w_msf_sdg,
        w_mst_metric,
        coefficient: w_msf_sdg / w_mst_metric,
        bound: lightness_bound(n),
        connected: msf.is_spanning_tree(),
        bound_applies: true,
    })
}

/// Weight coefficient of `SDG(g, r)` relative to `MSF(g)` for a general
/// weighted graph. The logarithmic bound is reported but not applicable.
pub fn graph_weight_coefficient(g: &WeightedGraph, r: &RangeAssignment) -> Result<CoefficientReport> {
    let n = g.n();
    if n < 2 {
        return Err(Error::TooFewVertices { needed: 2, got: n });
    }
    let msf = kruskal_msf(&build_sdg_graph(g, r)?);
    let host = kruskal_msf(g);
    let (w_msf_sdg, w_mst_metric) = (msf.weight(), host.weight());
    if w_mst_metric == 0.0 {
        return Err(Error::InvalidGraph("host graph has a zero-weight spanning forest".into()));
    }
    Ok(CoefficientReport {
        n,
        w_msf_sdg,
        w_mst_metric,
        coefficient: w_msf_sdg / w_mst_metric,
        bound: lightness_bound(n),
        connected: msf.is_spanning_tree(),
        bound_applies: false,
    })
}

/// Relabels certificate pairs to original vertex ids for display.
pub fn relabel_pairs(vertices: &VertexSubset, list: &[EdgePair]) -> Vec<EdgePair> {
    let map: HashMap<usize, usize> = vertices.iter().enumerate().collect();
    list.iter()
        .map(|p| {
            let (a, b) = (map[&p[0]], map[&p[1]]);
            [a.min(b), a.max(b)]
        })
        .collect()
}
