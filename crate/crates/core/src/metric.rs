//! Finite metric spaces: ℓ_p point sets and explicit distance matrices.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};

/// The exponent of an ℓ_p norm, `p >= 1` or `p = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    P(f64),
    Max,
}

impl Norm {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Norm::Max)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Norm::P(p))
        } else {
            Err(Error::InvalidParameter(format!("norm exponent must be >= 1, got {p}")))
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            Norm::P(p) => p,
            Norm::Max => f64::INFINITY,
        }
    }

    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        let diffs = a.iter().zip(b).map(|(x, y)| (x - y).abs());
        match self {
            Norm::Max => diffs.fold(0.0, f64::max),
            Norm::P(p) if p == 1.0 => diffs.sum(),
            Norm::P(p) if p == 2.0 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::P(p) => diffs.map(|d| d.powf(p)).sum::<f64>().powf(p.recip()),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Max => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(Norm::Max),
            other => other
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad norm exponent {s:?}")))
                .and_then(Norm::new),
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Norm::P(p) => s.serialize_f64(*p),
            Norm::Max => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => Norm::new(p),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// First violated metric axiom found by [`validate_metric`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricViolation {
    #[error("matrix row {row} has {len} entries, expected {n}")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("entry ({u}, {v}) is not a finite number")]
    NonFinite { u: usize, v: usize },
    #[error("diagonal entry ({u}, {u}) is not zero")]
    NonzeroDiagonal { u: usize },
    #[error("distance between distinct points {u} and {v} is not positive")]
    NonPositive { u: usize, v: usize },
    #[error("matrix is not symmetric at ({u}, {v})")]
    Asymmetric { u: usize, v: usize },
    #[error("triangle inequality fails: d({u},{w}) = {direct} > d({u},{via}) + d({via},{w}) = {detour}")]
    Triangle { u: usize, via: usize, w: usize, direct: f64, detour: f64 },
    #[error("points have inconsistent dimensions")]
    RaggedPoints,
}

/// Checks the metric axioms on a square matrix, reporting the first violation.
///
/// Pairs are scanned before triples. Triples `(u, via, w)` are visited with
/// `u < w` in lexicographic order and `via` innermost.
pub fn validate_metric(matrix: &[Vec<f64>]) -> std::result::Result<(), MetricViolation> {
    let n = matrix.len();
    for (row, entries) in matrix.iter().enumerate() {
        if entries.len() != n {
            return Err(MetricViolation::NotSquare { row, len: entries.len(), n });
        }
    }
    for u in 0..n {
        for v in 0..n {
            let d = matrix[u][v];
            if !d.is_finite() {
                return Err(MetricViolation::NonFinite { u, v });
            }
            if u == v && d != 0.0 {
                return Err(MetricViolation::NonzeroDiagonal { u });
            }
            if u != v && d <= 0.0 {
                return Err(MetricViolation::NonPositive { u: u.min(v), v: u.max(v) });
            }
            if d != matrix[v][u] {
                return Err(MetricViolation::Asymmetric { u: u.min(v), v: u.max(v) });
            }
        }
    }
    for u in 0..n {
        for w in u + 1..n {
            let direct = matrix[u][w];
            for via in 0..n {
                let detour = matrix[u][via] + matrix[via][w];
                if direct > detour {
                    return Err(MetricViolation::Triangle { u, via, w, direct, detour });
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Space {
    Lp { norm: Norm, points: Vec<Vec<f64>> },
    Matrix { n: usize, dist: Vec<f64> },
}

/// An immutable finite metric `(V, δ)` on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricRepr", into = "MetricRepr")]
pub struct Metric {
    space: Space,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MetricRepr {
    EuclideanLp { p: Norm, points: Vec<Vec<f64>> },
    Matrix { matrix: Vec<Vec<f64>> },
}

impl TryFrom<MetricRepr> for Metric {
    type Error = Error;

    fn try_from(repr: MetricRepr) -> Result<Self> {
        match repr {
            MetricRepr::EuclideanLp { p, points } => Metric::from_points(points, p),
            MetricRepr::Matrix { matrix } => Metric::from_matrix(matrix),
        }
    }
}

impl From<Metric> for MetricRepr {
    fn from(m: Metric) -> Self {
        match m.space {
            Space::Lp { norm, points } => MetricRepr::EuclideanLp { p: norm, points },
            Space::Matrix { .. } => MetricRepr::Matrix { matrix: m.to_matrix() },
        }
    }
}

impl Metric {
    /// Builds a metric from an explicit distance matrix, validating every axiom.
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        validate_metric(&matrix)?;
        let n = matrix.len();
        let dist = matrix.into_iter().flatten().collect();
        Ok(Metric { space: Space::Matrix { n, dist } })
    }

    /// Builds an ℓ_p metric over `points`. Points must be pairwise distinct.
    pub fn from_points(points: Vec<Vec<f64>>, norm: Norm) -> Result<Self> {
        if let Some(first) = points.first() {
            let dim = first.len();
            if points.iter().any(|p| p.len() != dim) {
                return Err(MetricViolation::RaggedPoints.into());
            }
        }
        for (u, p) in points.iter().enumerate() {
            if p.iter().any(|x| !x.is_finite()) {
                return Err(MetricViolation::NonFinite { u, v: u }.into());
            }
        }
        for u in 0..points.len() {
            for v in u + 1..points.len() {
                if norm.distance(&points[u], &points[v]) <= 0.0 {
                    return Err(MetricViolation::NonPositive { u, v }.into());
                }
            }
        }
        Ok(Metric { space: Space::Lp { norm, points } })
    }

    pub fn n(&self) -> usize {
        match &self.space {
            Space::Lp { points, .. } => points.len(),
            Space::Matrix { n, .. } => *n,
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.space, Space::Matrix { .. })
    }

    pub fn norm(&self) -> Option<Norm> {
        match &self.space {
            Space::Lp { norm, .. } => Some(*norm),
            Space::Matrix { .. } => None,
        }
    }

    pub fn points(&self) -> Option<&[Vec<f64>]> {
        match &self.space {
            Space::Lp { points, .. } => Some(points),
            Space::Matrix { .. } => None,
        }
    }

    /// `δ(u, v)`; panics on out-of-range indices. See [`Metric::distance`].
    #[inline]
    pub fn d(&self, u: usize, v: usize) -> f64 {
        match &self.space {
            Space::Lp { norm, points } => {
                if u == v {
                    0.0
                } else {
                    norm.distance(&points[u], &points[v])
                }
            }
            Space::Matrix { n, dist } => dist[u * n + v],
        }
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<f64> {
        let n = self.n();
        for vertex in [u, v] {
            if vertex >= n {
                return Err(Error::VertexOutOfRange { vertex, n });
            }
        }
        Ok(self.d(u, v))
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> Result<f64> {
        let n = self.n();
        if n < 2 {
            return Err(Error::TooFewVertices { needed: 2, got: n });
        }
        let mut best = 0.0f64;
        for u in 0..n {
            for v in u + 1..n {
                best = best.max(self.d(u, v));
            }
        }
        Ok(best)
    }

    /// Smallest distance between distinct points.
    pub fn min_distance(&self) -> Result<f64> {
        let n = self.n();
        if n < 2 {
            return Err(Error::TooFewVertices { needed: 2, got: n });
        }
        let mut best = f64::INFINITY;
        for u in 0..n {
            for v in u + 1..n {
                best = best.min(self.d(u, v));
            }
        }
        Ok(best)
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.n();
        (0..n).map(|u| (0..n).map(|v| self.d(u, v)).collect()).collect()
    }

    /// Sub-metric on `subset`. Vertex `i` of the result is `subset[i]` here.
    ///
    /// ℓ_p metrics stay ℓ_p over the restricted point list, so induced
    /// distances are bit-identical to the parent's.
    pub fn induce(&self, subset: &VertexSubset) -> Result<Metric> {
        if subset.is_empty() {
            return Err(Error::EmptySubset);
        }
        subset.check_range(self.n())?;
        let space = match &self.space {
            Space::Lp { norm, points } => Space::Lp {
                norm: *norm,
                points: subset.iter().map(|v| points[v].clone()).collect(),
            },
            Space::Matrix { .. } => {
                let k = subset.len();
                let mut dist = Vec::with_capacity(k * k);
                for u in subset.iter() {
                    dist.extend(subset.iter().map(|v| self.d(u, v)));
                }
                Space::Matrix { n: k, dist }
            }
        };
        Ok(Metric { space })
    }
}

/// A set of vertex indices, stored strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct VertexSubset(Vec<usize>);

impl TryFrom<Vec<usize>> for VertexSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        if v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnsortedSubset);
        }
        Ok(VertexSubset(v))
    }
}

impl From<VertexSubset> for Vec<usize> {
    fn from(s: VertexSubset) -> Self {
        s.0
    }
}

impl VertexSubset {
    /// Validates that `indices` is strictly increasing and below `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let s = VertexSubset::try_from(indices)?;
        s.check_range(n)?;
        Ok(s)
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, n)
    }

    pub fn full(n: usize) -> Self {
        VertexSubset((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Position of `v` within the subset, i.e. its label in an induced metric.
    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    /// Maps a subset of this subset's local labels back to parent labels.
    pub fn compose(&self, inner: &VertexSubset) -> Result<VertexSubset> {
        inner.check_range(self.len())?;
        Ok(VertexSubset(inner.iter().map(|i| self.0[i]).collect()))
    }

    /// Vertices of `0..n` that are not in the subset.
    pub fn complement(&self, n: usize) -> VertexSubset {
        VertexSubset((0..n).filter(|&v| !self.contains(v)).collect())
    }

    fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&vertex) if vertex >= n => Err(Error::VertexOutOfRange { vertex, n }),
            _ => Ok(()),
        }
    }
}
