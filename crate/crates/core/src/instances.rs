//! Instance families, seeded random generators and the JSON instance format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::disk_graph::{build_sdg, build_sdg_graph, RangeAssignment};
use crate::error::{Error, Result};
use crate::graph::{metric_mst, Edge, WeightedGraph};
use crate::metric::{Metric, Norm};
use crate::range_assignment::max_incident;

/// Grid resolution of random coordinates: every coordinate is `k / 2^24`.
const COORD_SCALE: f64 = (1u64 << 24) as f64;
/// Random matrix weights are `k / 2^20` with `1 <= k <= 2^20`.
const WEIGHT_SCALE: f64 = (1u64 << 20) as f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Star,
    Chain,
    C3,
    Line,
    Euclidean,
    Matrix,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Star, Family::Chain, Family::C3, Family::Line, Family::Euclidean, Family::Matrix];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Chain => "chain",
            Family::C3 => "c3",
            Family::Line => "line",
            Family::Euclidean => "euclidean",
            Family::Matrix => "matrix",
        }
    }

    /// Whether instances of this family are metrics (rather than general graphs).
    pub fn is_metric(self) -> bool {
        !matches!(self, Family::C3 | Family::Line)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

/// Where distances come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Host {
    Metric(Metric),
    /// A weighted graph that need not be complete nor metric.
    Graph(WeightedGraph),
}

/// An instance with its ranges and, for the fixed families, analytic reference values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BundleRepr", into = "BundleRepr")]
pub struct InstanceBundle {
    pub host: Host,
    pub ranges: RangeAssignment,
    pub family: Option<Family>,
    pub seed: Option<u64>,
    pub reference: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BundleRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graph: Option<WeightedGraph>,
    ranges: RangeAssignment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    reference: BTreeMap<String, f64>,
}

impl TryFrom<BundleRepr> for InstanceBundle {
    type Error = Error;

    fn try_from(r: BundleRepr) -> Result<Self> {
        let host = match (r.metric, r.graph) {
            (Some(m), None) => Host::Metric(m),
            (None, Some(g)) => Host::Graph(g),
            _ => return Err(Error::InvalidParameter("instance needs exactly one of \"metric\" or \"graph\"".into())),
        };
        InstanceBundle::new(host, r.ranges, r.family, r.seed, r.reference)
    }
}

impl From<InstanceBundle> for BundleRepr {
    fn from(b: InstanceBundle) -> Self {
        let (metric, graph) = match b.host {
            Host::Metric(m) => (Some(m), None),
            Host::Graph(g) => (None, Some(g)),
        };
        BundleRepr { metric, graph, ranges: b.ranges, family: b.family, seed: b.seed, reference: b.reference }
    }
}

impl InstanceBundle {
    pub fn new(
        host: Host,
        ranges: RangeAssignment,
        family: Option<Family>,
        seed: Option<u64>,
        reference: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = match &host {
            Host::Metric(m) => m.n(),
            Host::Graph(g) => g.n(),
        };
        if ranges.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: ranges.len() });
        }
        Ok(InstanceBundle { host, ranges, family, seed, reference })
    }

    pub fn from_metric(m: Metric, ranges: RangeAssignment) -> Result<Self> {
        Self::new(Host::Metric(m), ranges, None, None, BTreeMap::new())
    }

    pub fn n(&self) -> usize {
        match &self.host {
            Host::Metric(m) => m.n(),
            Host::Graph(g) => g.n(),
        }
    }

    pub fn metric(&self) -> Option<&Metric> {
        match &self.host {
            Host::Metric(m) => Some(m),
            Host::Graph(_) => None,
        }
    }

    pub fn graph(&self) -> Option<&WeightedGraph> {
        match &self.host {
            Host::Graph(g) => Some(g),
            Host::Metric(_) => None,
        }
    }

    /// The host as a weighted graph; complete for metrics.
    pub fn host_graph(&self) -> WeightedGraph {
        match &self.host {
            Host::Metric(m) => WeightedGraph::complete(m),
            Host::Graph(g) => g.clone(),
        }
    }

    pub fn sdg(&self) -> Result<WeightedGraph> {
        match &self.host {
            Host::Metric(m) => build_sdg(m, &self.ranges),
            Host::Graph(g) => build_sdg_graph(g, &self.ranges),
        }
    }

    pub fn reference(&self, key: &str) -> Option<f64> {
        self.reference.get(key).copied()
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<InstanceBundle> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_instance(bundle: &InstanceBundle, path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(bundle)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn two_valued(n: usize, near: impl Fn(usize, usize) -> bool) -> Result<Metric> {
    Metric::from_matrix(
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else if near(i, j) { 1.0 } else { 2.0 }).collect())
            .collect(),
    )
}

fn refs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn check_min_n(n: usize, needed: usize) -> Result<()> {
    if n < needed {
        return Err(Error::TooFewVertices { needed, got: n });
    }
    Ok(())
}

/// Point 0 at distance 1 from all others, every other distance 2, ranges 1.
///
/// References: the disk graph is the star at 0, while a spanning tree of
/// maximum degree 2 exists; the star is optimal for every other parameter.
pub fn gen_star_metric(n: usize) -> Result<InstanceBundle> {
    check_min_n(n, 3)?;
    let k = n as f64;
    let reference = refs(&[
        ("sdg_max_degree", k - 1.0),
        ("weight_coefficient", 1.0),
        ("degree_coefficient", (k - 1.0) / 2.0),
        ("opt_degree", 2.0),
        ("opt_radius", 1.0),
        ("opt_depth", 1.0),
        ("opt_diameter", 2.0),
        ("opt_hop_diameter", 2.0),
        ("opt_sum_single", k - 1.0),
        ("opt_sum_pairwise", (k - 1.0) * (k - 1.0)),
    ]);
    InstanceBundle::new(
        Host::Metric(two_valued(n, |i, j| i == 0 || j == 0)?),
        RangeAssignment::constant(n, 1.0)?,
        Some(Family::Star),
        None,
        reference,
    )
}

/// Consecutive points at distance 1, all other pairs at distance 2, ranges 1.
///
/// References: `s_*` are the parameters of the disk-graph path `S` rooted at
/// 0, `t_*` those of the star `T` at 0 (weights 1, 2, ..., 2), and `opt_*`
/// the optima over all spanning trees where they have a closed form.
pub fn gen_chain_metric(n: usize) -> Result<InstanceBundle> {
    check_min_n(n, 3)?;
    let k = n as f64;
    let t_diameter = if n == 3 { 3.0 } else { 4.0 };
    let reference = refs(&[
        ("weight_coefficient", 1.0),
        ("s_degree", 2.0),
        ("s_radius", k - 1.0),
        ("s_depth", k - 1.0),
        ("s_diameter", k - 1.0),
        ("s_hop_diameter", k - 1.0),
        ("s_sum_single", k * (k - 1.0) / 2.0),
        ("s_sum_pairwise", (k - 1.0) * k * (k + 1.0) / 6.0),
        ("t_degree", k - 1.0),
        ("t_radius", 2.0),
        ("t_depth", 1.0),
        ("t_diameter", t_diameter),
        ("t_hop_diameter", 2.0),
        ("t_sum_single", 2.0 * k - 3.0),
        ("t_sum_pairwise", (2.0 * k - 3.0) + 3.0 * (k - 2.0) + 2.0 * (k - 2.0) * (k - 3.0)),
        ("opt_degree", 2.0),
        ("opt_radius", if n == 3 { 1.0 } else { 2.0 }),
        ("opt_depth", 1.0),
        ("opt_diameter", (k - 1.0).min(4.0)),
        ("opt_hop_diameter", 2.0),
        ("opt_sum_single", 2.0 * k - 4.0),
        ("hop_diameter_coefficient", (k - 1.0) / 2.0),
    ]);
    InstanceBundle::new(
        Host::Metric(two_valued(n, |i, j| i.abs_diff(j) == 1)?),
        RangeAssignment::constant(n, 1.0)?,
        Some(Family::Chain),
        None,
        reference,
    )
}

/// Triangle with weights `δ(0,1) = 1`, `δ(0,2) = 2`, `δ(1,2) = w`, ranges `(1, w, w)`.
///
/// A metric only for `w <= 3`; the bundle is always stored as a graph.
pub fn gen_c3(w: f64) -> Result<InstanceBundle> {
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::InvalidParameter(format!("triangle weight must be positive and finite, got {w}")));
    }
    let g = WeightedGraph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(0, 2, 2.0), Edge::new(1, 2, w)])?;
    let reference = refs(&[("w_sdg", w + 1.0), ("w_mst", 3.0), ("coefficient", (w + 1.0) / 3.0)]);
    InstanceBundle::new(Host::Graph(g), RangeAssignment::new(vec![1.0, w, w])?, Some(Family::C3), None, reference)
}

/// Default `(W, ε)` for [`gen_line_graph`]: `W = 1000·n`, `ε = 1/(1000·n)`.
pub fn line_graph_defaults(n: usize) -> (f64, f64) {
    let k = 1000.0 * n as f64;
    (k, 1.0 / k)
}

/// Coordinates `0, 1, 1 + ε, ..., 1 + (n-3)·ε, W + 1` underlying [`gen_line_graph`].
pub fn line_coordinates(n: usize, w: f64, eps: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for (i, xi) in x.iter_mut().enumerate().take(n.saturating_sub(1)).skip(1) {
        *xi = 1.0 + (i - 1) as f64 * eps;
    }
    if n > 0 {
        x[n - 1] = w + 1.0;
    }
    x
}

/// Points of the line at `s = 0`, `u_i = 1 + (i-1)·ε` for `1 <= i <= n-2`, and
/// `t = W + 1`, labelled `0`, `1..=n-2`, `n-1`. Edges join `s` and `t` to every
/// `u_i`; `r(s) = 1`, all other ranges `W`.
///
/// Requires `n >= 4`, `W > n` and `0 < ε < 1/n`.
pub fn gen_line_graph(n: usize, w: f64, eps: f64) -> Result<InstanceBundle> {
    check_min_n(n, 4)?;
    let k = n as f64;
    if !(w.is_finite() && w > k) {
        return Err(Error::InvalidParameter(format!("need W > n = {n}, got {w}")));
    }
    if !(eps > 0.0 && eps * k < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < 1/n, got {eps}")));
    }
    let t = n - 1;
    let x = line_coordinates(n, w, eps);
    let mut edges = Vec::with_capacity(2 * (n - 2));
    for u in 1..t {
        edges.push(Edge::new(0, u, x[u] - x[0]));
        edges.push(Edge::new(u, t, x[t] - x[u]));
    }
    let mut ranges = vec![w; n];
    ranges[0] = 1.0;
    let inner = k - 2.0;
    let spread = eps * inner * (inner - 1.0) / 2.0;
    let w_mst = inner + spread + w - (inner - 1.0) * eps;
    let w_sdg = inner * w - spread + 1.0;
    let reference = refs(&[("w_mst", w_mst), ("w_sdg", w_sdg), ("coefficient", w_sdg / w_mst), ("n_minus_2", inner)]);
    InstanceBundle::new(
        Host::Graph(WeightedGraph::new(n, edges)?),
        RangeAssignment::new(ranges)?,
        Some(Family::Line),
        None,
        reference,
    )
}

/// `n` distinct points drawn uniformly from the grid `{k / 2^24}^d ⊂ [0, 1)^d`.
pub fn gen_random_euclidean(n: usize, d: usize, p: Norm, seed: u64) -> Result<Metric> {
    check_min_n(n, 2)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let cell: Vec<u32> = (0..d).map(|_| rng.gen_range(0..1u32 << 24)).collect();
        if seen.insert(cell.clone()) {
            points.push(cell.into_iter().map(|c| c as f64 / COORD_SCALE).collect());
        }
    }
    Metric::from_points(points, p)
}

/// Random symmetric weights `k / 2^20`, `1 <= k <= 2^20`, closed under
/// shortest paths.
pub fn gen_random_matrix_metric(n: usize, seed: u64) -> Result<Metric> {
    check_min_n(n, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = rng.gen_range(1..=1u32 << 20) as f64 / WEIGHT_SCALE;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    // Repeat until no entry improves; sums of grid values are exact.
    loop {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Metric::from_matrix(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RangeMode {
    /// Each radius uniform in `[min distance, diameter]`.
    Uniform,
    /// Uniform, raised to the heaviest incident MST edge; the disk graph
    /// then contains `MST(M)` and is connected.
    Biased,
}

impl FromStr for RangeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(RangeMode::Uniform),
            "biased" | "connect_biased" => Ok(RangeMode::Biased),
            _ => Err(Error::InvalidParameter(format!("unknown range mode {s:?}"))),
        }
    }
}

impl fmt::Display for RangeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangeMode::Uniform => "uniform",
            RangeMode::Biased => "biased",
        })
    }
}

pub fn gen_random_ranges(m: &Metric, mode: RangeMode, seed: u64) -> Result<RangeAssignment> {
    let (lo, hi) = (m.min_distance()?, m.diameter()?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut radii: Vec<f64> = (0..m.n()).map(|_| rng.gen_range(lo..=hi)).collect();
    if mode == RangeMode::Biased {
        for (r, floor) in radii.iter_mut().zip(max_incident(&metric_mst(m))) {
            *r = r.max(floor);
        }
    }
    RangeAssignment::new(radii)
}

/// Per-instance seed: the SplitMix64 output function applied to
/// `base + (index + 1)·0x9E3779B97F4A7C15` (wrapping).
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Metric space of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Space {
    Euclidean { d: usize, p: Norm },
    Matrix,
}

/// Random metric plus ranges. The metric uses `seed`, the ranges
/// `mix_seed(seed, 0)`.
pub fn gen_random_instance(n: usize, space: Space, mode: RangeMode, seed: u64) -> Result<InstanceBundle> {
    let (m, family) = match space {
        Space::Euclidean { d, p } => (gen_random_euclidean(n, d, p, seed)?, Family::Euclidean),
        Space::Matrix => (gen_random_matrix_metric(n, seed)?, Family::Matrix),
    };
    let ranges = gen_random_ranges(&m, mode, mix_seed(seed, 0))?;
    InstanceBundle::new(Host::Metric(m), ranges, Some(family), Some(seed), BTreeMap::new())
}
