//! Symmetric disk graphs and unit disk graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{kruskal_msf, metric_mst, Edge, WeightedGraph};
use crate::metric::Metric;

/// Transmission radius per vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RangeAssignment(Vec<f64>);

impl TryFrom<Vec<f64>> for RangeAssignment {
    type Error = Error;

    fn try_from(radii: Vec<f64>) -> Result<Self> {
        if let Some((v, r)) = radii.iter().enumerate().find(|(_, r)| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidRanges(format!("radius of vertex {v} is {r}")));
        }
        Ok(RangeAssignment(radii))
    }
}

impl From<RangeAssignment> for Vec<f64> {
    fn from(r: RangeAssignment) -> Self {
        r.0
    }
}

impl RangeAssignment {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        Self::try_from(radii)
    }

    pub fn constant(n: usize, radius: f64) -> Result<Self> {
        Self::new(vec![radius; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn get(&self, v: usize) -> f64 {
        self.0[v]
    }

    pub fn restrict(&self, vertices: impl IntoIterator<Item = usize>) -> RangeAssignment {
        RangeAssignment(vertices.into_iter().map(|v| self.0[v]).collect())
    }

    /// Whether both endpoints reach across `e`.
    #[inline]
    pub fn admits(&self, e: &Edge) -> bool {
        self.0[e.u] >= e.w && self.0[e.v] >= e.w
    }

    /// The endpoint of `e` with the smaller radius; the larger-index endpoint on ties.
    #[inline]
    pub fn min_endpoint(&self, e: &Edge) -> usize {
        if self.0[e.u] < self.0[e.v] {
            e.u
        } else {
            e.v
        }
    }

    pub fn total(&self) -> f64 {
        crate::weight::exact_total(self.0.iter().copied())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::SizeMismatch { expected: n, got: self.len() });
        }
        Ok(())
    }
}

/// `SDG(M, r)`: edge `(u, v)` of weight `δ(u, v)` iff `min(r(u), r(v)) >= δ(u, v)`.
pub fn build_sdg(m: &Metric, r: &RangeAssignment) -> Result<WeightedGraph> {
    r.check_len(m.n())?;
    let n = m.n();
    let mut edges = Vec::new();
    for u in 0..n {
        if r.get(u) == 0.0 {
            continue;
        }
        for v in u + 1..n {
            let e = Edge { u, v, w: m.d(u, v) };
            if r.admits(&e) {
                edges.push(e);
            }
        }
    }
    Ok(WeightedGraph::from_trusted(n, edges))
}

/// `SDG(G, r)` for an arbitrary weighted graph: keeps edges both endpoints reach.
pub fn build_sdg_graph(g: &WeightedGraph, r: &RangeAssignment) -> Result<WeightedGraph> {
    r.check_len(g.n())?;
    let edges = g.edges().iter().filter(|e| r.admits(e)).copied().collect();
    Ok(WeightedGraph::from_trusted(g.n(), edges))
}

/// Unit disk graph with common radius `c`.
pub fn build_udg(m: &Metric, c: f64) -> Result<WeightedGraph> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("disk radius must be positive, got {c}")));
    }
    build_sdg(m, &RangeAssignment::constant(m.n(), c)?)
}

/// Outcome of a successful [`udg_msf_containment`] check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdgContainment {
    pub connected: bool,
    pub w_msf_udg: f64,
    pub w_mst_metric: f64,
    /// `w(MSF(UDG)) / w(MST(M))`; `None` for fewer than two points.
    pub coefficient: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum UdgViolation {
    /// An edge of the UDG forest is missing from the metric MST.
    NotInMst(Edge),
    /// The UDG is connected but its MST differs from the metric MST.
    TreesDiffer,
}

/// Checks `MSF(UDG(M, c)) ⊆ MST(M)`, and equality when the UDG is connected.
pub fn udg_msf_containment(m: &Metric, c: f64) -> Result<std::result::Result<UdgContainment, UdgViolation>> {
    let udg = build_udg(m, c)?;
    let msf = kruskal_msf(&udg);
    let mst = metric_mst(m);
    let mst_keys = mst.edge_keys();
    if let Some(e) = msf.edges().iter().find(|e| !mst_keys.contains(&e.key())) {
        return Ok(Err(UdgViolation::NotInMst(*e)));
    }
    let connected = udg.is_connected();
    if connected && msf.edges() != mst.edges() {
        return Ok(Err(UdgViolation::TreesDiffer));
    }
    let (w_msf_udg, w_mst_metric) = (msf.weight(), mst.weight());
    Ok(Ok(UdgContainment {
        connected,
        w_msf_udg,
        w_mst_metric,
        coefficient: (m.n() >= 2).then(|| w_msf_udg / w_mst_metric),
    }))
}
