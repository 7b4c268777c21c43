//! Discrete calculus on weighted graphs, built around the inequality
//! `u_tt - Δu ≥ v·|u|^σ`.
//!
//! The crate provides the pieces needed to study that inequality numerically:
//!
//! * [`graph`]: weighted graphs `(V, ω, μ)` with symmetric edge weights and a
//!   positive vertex measure, plus truncated lattice, tree, and product
//!   builders and a line-oriented description-file format.
//! * [`metric`]: pseudo-metrics (hop count, Euclidean, product) with cached
//!   distances, balls, annuli, and the edge jump size `j`.
//! * [`calculus`]: the graph Laplacian, integration-by-parts checks (both the
//!   finite-support identity and its exponentially weighted variant), and
//!   decay reports for `Δd` and `Δd^(1+α)`.
//! * [`hypothesis`]: growth-condition verdicts over a radius grid, weighted
//!   `ℓ¹` norms, and initial-data sign reports.
//! * [`cutoff`]: smooth cutoff profiles, compactly supported and
//!   exponentially decaying space-time test families, empirical envelope
//!   verification, and a zero-propagation check.
//! * [`simulate`]: a leapfrog integrator with blow-up detection, a stable
//!   step-size bound, and a weak-form residual evaluator.
//!
//! All numerics are deterministic: identical inputs produce bit-identical
//! outputs, which the report layer in the companion CLI relies on.

pub mod calculus;
pub mod cutoff;
pub mod graph;
pub mod hypothesis;
pub mod metric;
pub mod simulate;
pub mod util;

pub use calculus::{IbpTriple, LaplacianReport, WeightedIbpReport};
pub use cutoff::{
    BoundReport, CutoffFamily, CutoffParams, FamilyKind, ProfileSet, PropagationReport,
    PropagationVerdict,
};
pub use graph::{GraphFunction, VertexSet, WeightedGraph};
pub use hypothesis::{
    GrowthCondition, GrowthParams, GrowthVerdict, InitialDataReport, Potential, XDeltaReport,
};
pub use metric::{MetricKind, PseudoMetric};
pub use simulate::{
    BoundaryPolicy, ResidualReport, RunStatus, Trajectory, WaveConfig,
};
