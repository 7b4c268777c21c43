//! Report assembly and serialization. Reports are deterministic: same
//! config and seed produce byte-identical JSON, so wall-clock metadata goes
//! to a separate file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::Context;
use graphwave_core::simulate::RunStatus;
use graphwave_core::{Trajectory, WeightedGraph};
use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub clipped: usize,
    pub base_vertex: usize,
    pub degree_bound: f64,
    pub connected: bool,
    pub metric: String,
    pub max_distance: f64,
    pub jump: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DataPoint {
    pub r: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    /// "pass" or "fail".
    pub verdict: String,
    pub fitted_slope: Option<f64>,
    pub sup_ratio: Option<f64>,
    /// Named scalars specific to the check, sorted by key.
    pub constants: BTreeMap<String, f64>,
    pub data_points: Vec<DataPoint>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub status: RunStatus,
    pub blowup_time: Option<f64>,
    /// Relative to the report directory; absent when series output is off.
    pub series_path: Option<String>,
    #[serde(skip)]
    pub dt: f64,
    #[serde(skip)]
    pub steps: usize,
    #[serde(skip)]
    pub final_sup_norm: f64,
    #[serde(skip)]
    pub boundary_clean_steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config_echo: ExperimentConfig,
    pub graph_summary: GraphSummary,
    pub checks: Vec<CheckReport>,
    pub simulations: Vec<SimulationReport>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

pub fn summarize_graph(
    graph: &WeightedGraph,
    metric_name: &str,
    max_distance: f64,
    jump: f64,
) -> GraphSummary {
    GraphSummary {
        vertices: graph.len(),
        edges: graph.edge_count(),
        clipped: graph.clipped_count(),
        base_vertex: graph.base_vertex(),
        degree_bound: graph.degree_bound(),
        connected: graph.is_connected(),
        metric: metric_name.to_string(),
        max_distance,
        jump,
    }
}

/// Writes `report.json` plus `report_meta.json` (timestamps live only in
/// the latter) and returns the serialized report bytes.
pub fn write_report(dir: &Path, report: &Report, seed: u64) -> anyhow::Result<Vec<u8>> {
    fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let mut bytes = serde_json::to_vec_pretty(report).context("serializing report")?;
    bytes.push(b'\n');
    let path = dir.join("report.json");
    fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;

    #[derive(Serialize)]
    struct Meta {
        created_unix_ms: u128,
        seed: u64,
        tool_version: &'static str,
    }
    let meta = Meta {
        created_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
        seed,
        tool_version: env!("CARGO_PKG_VERSION"),
    };
    let meta_path = dir.join("report_meta.json");
    fs::write(&meta_path, serde_json::to_vec_pretty(&meta)?)
        .with_context(|| format!("writing {}", meta_path.display()))?;
    Ok(bytes)
}

/// Per-step norm series: `step,time,sup_norm,l1_weighted_norm`.
pub fn write_series_csv(dir: &Path, name: &str, traj: &Trajectory) -> anyhow::Result<String> {
    fs::create_dir_all(dir)?;
    let mut out = String::from("step,time,sup_norm,l1_weighted_norm\n");
    for (step, (&sup, &l1)) in traj.sup_norms.iter().zip(&traj.l1_norms).enumerate() {
        let time = step as f64 * traj.dt;
        out.push_str(&format!("{step},{time},{sup},{l1}\n"));
    }
    let path = dir.join(name);
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(name.to_string())
}
