//! Experiment descriptions: what graph to build, which checks to run, and
//! how to drive the simulator. Configs are JSON; unknown top-level keys are
//! rejected so typos surface as errors instead of silently ignored options.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn bad(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Integer lattice truncated to the closed Euclidean ball of `radius`.
    Lattice { dim: usize, radius: f64 },
    /// Rooted homogeneous tree: every vertex gets `branching` children.
    Tree { branching: usize, depth: usize },
    /// Lattice crossed with a finite fiber graph.
    Product { dim: usize, radius: f64, fiber: Box<GraphSpec> },
    /// Vertices, undirected weighted edges, and a measure, given inline.
    Explicit { vertices: usize, edges: Vec<(usize, usize, f64)>, measure: Vec<f64> },
    /// A graph description file produced by `graphwave build`.
    File { path: String },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MetricChoice {
    Combinatorial,
    Euclidean,
    Product,
}

impl GraphSpec {
    pub fn default_metric(&self) -> MetricChoice {
        match self {
            GraphSpec::Lattice { .. } => MetricChoice::Euclidean,
            GraphSpec::Product { .. } => MetricChoice::Product,
            _ => MetricChoice::Combinatorial,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `v ≡ 1`.
    One,
    /// Explicit per-vertex values.
    Table { values: Vec<f64> },
    /// `v(x) = (1 + d(x))^exponent`.
    LatticePower { exponent: f64 },
    /// `v(x) = scale · max(d,1)^{(σ−3)/2} · branching^{(σ−1)d}`, the tree
    /// family; requires a tree graph.
    TreeExponential { scale: f64 },
}

impl Default for PotentialSpec {
    fn default() -> Self {
        PotentialSpec::One
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
pub enum CheckId {
    #[serde(rename = "ER_spacetime")]
    ErSpacetime,
    #[serde(rename = "ball_g_weighted")]
    BallGWeighted,
    #[serde(rename = "ball_volume")]
    BallVolume,
    #[serde(rename = "exp_inside")]
    ExpInside,
    #[serde(rename = "exp_outside")]
    ExpOutside,
    #[serde(rename = "annulus")]
    Annulus,
    #[serde(rename = "finite_time_slab")]
    FiniteTimeSlab,
    #[serde(rename = "distance_laplacian")]
    DistanceLaplacian,
    #[serde(rename = "initial_data")]
    InitialData,
    #[serde(rename = "cutoff_compact")]
    CutoffCompact,
    #[serde(rename = "cutoff_exponential")]
    CutoffExponential,
}

impl CheckId {
    pub fn name(self) -> &'static str {
        match self {
            CheckId::ErSpacetime => "ER_spacetime",
            CheckId::BallGWeighted => "ball_g_weighted",
            CheckId::BallVolume => "ball_volume",
            CheckId::ExpInside => "exp_inside",
            CheckId::ExpOutside => "exp_outside",
            CheckId::Annulus => "annulus",
            CheckId::FiniteTimeSlab => "finite_time_slab",
            CheckId::DistanceLaplacian => "distance_laplacian",
            CheckId::InitialData => "initial_data",
            CheckId::CutoffCompact => "cutoff_compact",
            CheckId::CutoffExponential => "cutoff_exponential",
        }
    }

    pub fn is_cutoff(self) -> bool {
        matches!(self, CheckId::CutoffCompact | CheckId::CutoffExponential)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Zero,
    /// `amplitude` at the base vertex, zero elsewhere.
    Indicator { amplitude: f64 },
    /// `amplitude · exp(−d(x)²/width²)`.
    Pulse { width: f64, amplitude: f64 },
    /// Uniform in `[−scale, scale)`, drawn from the run seed.
    Random { scale: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryChoice {
    ZeroExterior,
    Free,
}

impl Default for BoundaryChoice {
    fn default() -> Self {
        BoundaryChoice::ZeroExterior
    }
}

fn default_stride() -> usize {
    1
}

fn default_series() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub t_final: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub boundary: BoundaryChoice,
    #[serde(default)]
    pub linear_only: bool,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    pub u0: InitialSpec,
    pub u1: InitialSpec,
    /// Write the per-step norm series as a CSV next to the report.
    #[serde(default = "default_series")]
    pub series: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub metric: Option<MetricChoice>,
    /// Origin override; defaults to the builder's base vertex.
    #[serde(default)]
    pub x0: Option<usize>,
    pub sigma: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub theta: Option<(f64, f64)>,
    /// Cutoff power `s`; defaults per the cutoff module.
    #[serde(default)]
    pub power_s: Option<f64>,
    #[serde(default)]
    pub potential: PotentialSpec,
    #[serde(default)]
    pub r_grid: Vec<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub dt_quad: Option<f64>,
    #[serde(default)]
    pub checks: Vec<CheckId>,
    #[serde(default)]
    pub simulation: Option<SimulationSpec>,
    /// RNG seed for randomized initial data; `--seed` overrides.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    /// Semantic validation beyond what serde enforces; every error names
    /// the offending key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.sigma > 1.0) {
            return Err(bad("sigma", format!("must exceed 1, got {}", self.sigma)));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(bad("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(bad("delta", format!("must be positive, got {d}")));
            }
        }
        if let Some((t1, t2)) = self.theta {
            if !(t1 >= 2.0 && t2 >= 2.0) {
                return Err(bad("theta", format!("both exponents must be >= 2, got ({t1}, {t2})")));
            }
        }
        if let Some(s) = self.power_s {
            if !(s > 1.0) {
                return Err(bad("power_s", format!("must exceed 1, got {s}")));
            }
        }
        for w in self.r_grid.windows(2) {
            if !(w[0] < w[1]) {
                return Err(bad("r_grid", "must be strictly increasing"));
            }
        }
        if let Some(&r) = self.r_grid.first() {
            if !(r > 1.0) {
                return Err(bad("r_grid", format!("radii must exceed 1, got {r}")));
            }
        }
        self.validate_graph()?;
        if matches!(self.potential, PotentialSpec::TreeExponential { .. })
            && !matches!(self.graph, GraphSpec::Tree { .. })
        {
            return Err(bad("potential", "tree_exponential requires a tree graph"));
        }
        if let PotentialSpec::TreeExponential { scale } = self.potential {
            if !(scale > 0.0) {
                return Err(bad("potential", format!("scale must be positive, got {scale}")));
            }
        }
        let needs_grid = self
            .checks
            .iter()
            .any(|c| !matches!(c, CheckId::DistanceLaplacian | CheckId::CutoffCompact | CheckId::CutoffExponential));
        if needs_grid && self.r_grid.is_empty() {
            return Err(bad("r_grid", "selected checks need a nonempty radius grid"));
        }
        let needs_delta = self.checks.iter().any(|c| {
            matches!(c, CheckId::ExpInside | CheckId::ExpOutside | CheckId::CutoffExponential)
        });
        if needs_delta && self.delta.is_none() {
            return Err(bad("delta", "selected checks need a decay rate"));
        }
        if let Some(sim) = &self.simulation {
            if !(sim.t_final > 0.0) {
                return Err(bad("simulation.t_final", format!("must be positive, got {}", sim.t_final)));
            }
            if let Some(dt) = sim.dt {
                if !(dt > 0.0) {
                    return Err(bad("simulation.dt", format!("must be positive, got {dt}")));
                }
            }
            if sim.snapshot_stride == 0 {
                return Err(bad("simulation.snapshot_stride", "must be at least 1"));
            }
        }
        Ok(())
    }

    fn validate_graph(&self) -> Result<(), ConfigError> {
        match &self.graph {
            GraphSpec::Lattice { dim, radius } => {
                if *dim == 0 {
                    return Err(bad("graph.dim", "must be at least 1"));
                }
                if !(*radius >= 0.0) {
                    return Err(bad("graph.radius", format!("must be nonnegative, got {radius}")));
                }
            }
            GraphSpec::Tree { branching, .. } => {
                if *branching < 2 {
                    return Err(bad("graph.branching", "must be at least 2"));
                }
            }
            GraphSpec::Product { dim, radius, fiber } => {
                if *dim == 0 {
                    return Err(bad("graph.dim", "must be at least 1"));
                }
                if !(*radius >= 0.0) {
                    return Err(bad("graph.radius", format!("must be nonnegative, got {radius}")));
                }
                if matches!(**fiber, GraphSpec::Lattice { .. } | GraphSpec::Product { .. }) {
                    return Err(bad("graph.fiber", "fiber must be a finite graph spec (tree, explicit, or file)"));
                }
            }
            GraphSpec::Explicit { vertices, edges, measure } => {
                if *vertices == 0 {
                    return Err(bad("graph.vertices", "must be at least 1"));
                }
                if measure.len() != *vertices {
                    return Err(bad(
                        "graph.measure",
                        format!("expected {} entries, got {}", vertices, measure.len()),
                    ));
                }
                for &(a, b, w) in edges {
                    if a >= *vertices || b >= *vertices {
                        return Err(bad("graph.edges", format!("vertex index out of range in ({a}, {b}, {w})")));
                    }
                }
            }
            GraphSpec::File { path } => {
                if path.is_empty() {
                    return Err(bad("graph.path", "must not be empty"));
                }
            }
        }
        Ok(())
    }

    pub fn metric_choice(&self) -> MetricChoice {
        self.metric.unwrap_or_else(|| self.graph.default_metric())
    }
}

/// Bundled configurations mirroring the worked examples.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "example-6.1" => ExperimentConfig {
            graph: GraphSpec::Lattice { dim: 1, radius: 50.0 },
            metric: Some(MetricChoice::Euclidean),
            x0: None,
            sigma: 2.0,
            alpha: 1.0,
            delta: Some(0.5),
            theta: None,
            power_s: None,
            potential: PotentialSpec::One,
            r_grid: vec![10.0, 16.0, 24.0, 32.0, 40.0],
            r0: None,
            dt_quad: None,
            checks: vec![CheckId::BallVolume, CheckId::Annulus, CheckId::DistanceLaplacian],
            simulation: None,
            seed: None,
        },
        "example-6.2" => ExperimentConfig {
            graph: GraphSpec::Tree { branching: 2, depth: 12 },
            metric: Some(MetricChoice::Combinatorial),
            x0: None,
            sigma: 2.0,
            alpha: 0.0,
            delta: Some(0.5),
            theta: None,
            power_s: None,
            potential: PotentialSpec::TreeExponential { scale: 1.0 },
            r_grid: vec![2.0, 3.0, 4.0, 5.0, 6.0],
            r0: None,
            dt_quad: None,
            checks: vec![CheckId::BallGWeighted, CheckId::DistanceLaplacian],
            simulation: None,
            seed: None,
        },
        "example-6.3" => ExperimentConfig {
            graph: GraphSpec::Product {
                dim: 1,
                radius: 40.0,
                fiber: Box::new(GraphSpec::Explicit {
                    vertices: 4,
                    edges: vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
                    measure: vec![1.0; 4],
                }),
            },
            metric: Some(MetricChoice::Product),
            x0: None,
            sigma: 2.0,
            alpha: 1.0,
            delta: Some(0.5),
            theta: None,
            power_s: None,
            potential: PotentialSpec::One,
            r_grid: vec![8.0, 12.0, 16.0, 24.0, 32.0],
            r0: None,
            dt_quad: None,
            checks: vec![CheckId::BallVolume, CheckId::Annulus, CheckId::DistanceLaplacian],
            simulation: None,
            seed: None,
        },
        "finite-7.1" => ExperimentConfig {
            graph: GraphSpec::Explicit {
                vertices: 10,
                edges: vec![
                    (0, 1, 1.0),
                    (1, 2, 1.0),
                    (2, 3, 1.0),
                    (3, 4, 1.0),
                    (4, 5, 1.0),
                    (5, 6, 1.0),
                    (6, 7, 1.0),
                    (7, 8, 1.0),
                    (8, 9, 1.0),
                    (9, 0, 1.0),
                ],
                measure: vec![1.0; 10],
            },
            metric: Some(MetricChoice::Combinatorial),
            x0: None,
            sigma: 2.0,
            alpha: 0.0,
            delta: None,
            theta: None,
            power_s: None,
            potential: PotentialSpec::One,
            r_grid: vec![2.0, 4.0, 8.0, 16.0],
            r0: None,
            dt_quad: None,
            checks: vec![CheckId::FiniteTimeSlab, CheckId::InitialData],
            simulation: Some(SimulationSpec {
                t_final: 10.0,
                dt: None,
                threshold: None,
                boundary: BoundaryChoice::ZeroExterior,
                linear_only: false,
                snapshot_stride: 1,
                u0: InitialSpec::Zero,
                u1: InitialSpec::Indicator { amplitude: 1.0 },
                series: true,
            }),
            seed: None,
        },
        _ => return None,
    };
    Some(cfg)
}

pub const PRESET_NAMES: [&str; 4] = ["example-6.1", "example-6.2", "example-6.3", "finite-7.1"];
