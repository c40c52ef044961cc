//! Bounded range assignment: shrink a feasible range bound `r′` to the
//! heaviest incident edge of the MSF of `SDG(M, r′)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decomposition::log54;
use crate::disk_graph::{build_sdg, RangeAssignment};
use crate::error::{Error, Result};
use crate::graph::{kruskal_msf, metric_mst, Forest};
use crate::metric::Metric;
use crate::weight::ExactSum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentReport {
    pub ranges: RangeAssignment,
    /// `Σ_v r(v)`.
    pub cost: f64,
    /// Weight of `T = MSF(SDG(M, r′))`.
    pub w_t: f64,
    /// `w(MST(M))`, a lower bound on the cost of any connecting assignment.
    pub lower_bound: f64,
    /// `r <= r′` pointwise and `SDG(M, r)` has the components of `T`.
    pub feasible: bool,
    /// `SDG(M, r′)` is connected.
    pub connected_input: bool,
}

/// Heaviest `T`-edge weight at each vertex, 0 where `T` has no edge.
pub fn max_incident(t: &Forest) -> Vec<f64> {
    let mut r = vec![0.0f64; t.n()];
    for e in t.edges() {
        r[e.u] = r[e.u].max(e.w);
        r[e.v] = r[e.v].max(e.w);
    }
    r
}

/// Assigns each vertex the heaviest incident edge of `MSF(SDG(m, r′))`.
///
/// Disconnected bounds are handled per component and flagged through
/// `connected_input`.
pub fn bounded_assignment(m: &Metric, r_prime: &RangeAssignment) -> Result<AssignmentReport> {
    let n = m.n();
    if r_prime.len() != n {
        return Err(Error::SizeMismatch { expected: n, got: r_prime.len() });
    }
    let t = kruskal_msf(&build_sdg(m, r_prime)?);
    let ranges = RangeAssignment::new(max_incident(&t))?;
    let induced = kruskal_msf(&build_sdg(m, &ranges)?);
    let pointwise = ranges.radii().iter().zip(r_prime.radii()).all(|(r, b)| r <= b);
    let same_components = (0..n).all(|v| induced.component(v) == t.component(v));
    Ok(AssignmentReport {
        cost: ranges.total(),
        w_t: t.weight(),
        lower_bound: if n >= 2 { metric_mst(m).weight() } else { 0.0 },
        feasible: pointwise && same_components,
        connected_input: t.is_spanning_tree(),
        ranges,
    })
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentViolation {
    #[error("ratio undefined: the bounding disk graph is disconnected")]
    Disconnected,
    #[error("assignment is infeasible")]
    Infeasible,
    #[error("cost {cost} exceeds twice the tree weight {w_t}")]
    DoubleCounting { cost: f64, w_t: f64 },
    #[error("cost {cost} exceeds {bound} = 4·log_5/4(n)·w(MST(M))")]
    Ratio { cost: f64, bound: f64 },
}

/// Realized ratio `cost / lower_bound` after checking the logarithmic cost bound.
pub fn cost_ratio_check(report: &AssignmentReport, n: usize) -> std::result::Result<f64, AssignmentViolation> {
    if !report.connected_input {
        return Err(AssignmentViolation::Disconnected);
    }
    if !report.feasible {
        return Err(AssignmentViolation::Infeasible);
    }
    let mut slack = ExactSum::new();
    slack.add(2.0 * report.w_t);
    slack.sub_all(report.ranges.radii().iter().copied());
    if slack.sign() == std::cmp::Ordering::Less {
        return Err(AssignmentViolation::DoubleCounting { cost: report.cost, w_t: report.w_t });
    }
    let bound = 4.0 * log54(n) * report.lower_bound;
    if report.cost > bound {
        return Err(AssignmentViolation::Ratio { cost: report.cost, bound });
    }
    Ok(if report.lower_bound > 0.0 { report.cost / report.lower_bound } else { 0.0 })
}
