//! Symmetric disk graphs over finite metrics.
//!
//! Builds `SDG(M, r)`, computes its minimum spanning forest and compares the
//! weight against `MST(M)`. Lightness is certified constructively: each
//! decomposition round removes edges no heavier than a Hamiltonian path and
//! isolates a fifth of the points. Also provides the bounded range
//! assignment, the fixed instance families and a seeded sweep harness.

pub mod decomposition;
pub mod disk_graph;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod hamiltonian;
pub mod instances;
pub mod metric;
pub mod range_assignment;
pub mod weight;

pub use decomposition::{
    decompose, lightness_trace, verify_certificate, weight_coefficient, DecompositionCertificate, HamMode,
    LightnessTrace,
};
pub use disk_graph::{build_sdg, build_udg, RangeAssignment};
pub use error::{Error, Result};
pub use graph::{kruskal_msf, Edge, Forest, WeightedGraph};
pub use hamiltonian::HamPath;
pub use instances::InstanceBundle;
pub use metric::{Metric, Norm, VertexSubset};
