//! Executes a validated config: builds the graph, dispatches the selected
//! checks, runs the simulation, and assembles the report.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use graphwave_core::calculus::distance_laplacian_report;
use graphwave_core::cutoff::{cutoff_family, verify_cutoff_bounds, CutoffParams, FamilyKind};
use graphwave_core::graph::{
    build_graph, from_description_file, homogeneous_tree, lattice_zn, product_graph,
    GraphFunction, WeightedGraph,
};
use graphwave_core::hypothesis::{growth_check, initial_data_report, GrowthCondition, GrowthParams, Potential};
use graphwave_core::metric::PseudoMetric;
use graphwave_core::simulate::{integrate_wave, BoundaryPolicy, WaveConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::config::{
    BoundaryChoice, CheckId, ExperimentConfig, GraphSpec, InitialSpec, MetricChoice, PotentialSpec,
};
use crate::report::{
    summarize_graph, write_series_csv, CheckReport, DataPoint, Report, SimulationReport,
};

pub struct Workspace {
    pub graph: WeightedGraph,
    pub metric: PseudoMetric,
    pub potential: Potential,
    pub seed: u64,
}

pub fn build_graph_from_spec(spec: &GraphSpec) -> anyhow::Result<WeightedGraph> {
    let graph = match spec {
        GraphSpec::Lattice { dim, radius } => lattice_zn(*dim, *radius)?,
        GraphSpec::Tree { branching, depth } => homogeneous_tree(*branching, *depth)?,
        GraphSpec::Product { dim, radius, fiber } => {
            let fiber_graph = build_graph_from_spec(fiber).context("config key `graph.fiber`")?;
            product_graph(*dim, *radius, &fiber_graph, None)?
        }
        GraphSpec::Explicit { vertices, edges, measure } => build_graph(*vertices, edges, measure)?,
        GraphSpec::File { path } => from_description_file(Path::new(path))?,
    };
    Ok(graph)
}

pub fn build_workspace(config: &ExperimentConfig, seed: u64) -> anyhow::Result<Workspace> {
    let mut graph = build_graph_from_spec(&config.graph).context("config key `graph`")?;
    if let Some(x0) = config.x0 {
        graph = graph.with_base_vertex(x0).context("config key `x0`")?;
    }
    let metric = match config.metric_choice() {
        MetricChoice::Combinatorial => PseudoMetric::combinatorial(&graph),
        MetricChoice::Euclidean => PseudoMetric::euclidean(&graph),
        MetricChoice::Product => PseudoMetric::product(&graph),
    }
    .context("config key `metric`")?;
    let potential = match &config.potential {
        PotentialSpec::One => Potential::one(),
        PotentialSpec::Table { values } => {
            if values.len() != graph.len() {
                bail!(
                    "config key `potential.values`: expected {} entries, got {}",
                    graph.len(),
                    values.len()
                );
            }
            Potential::from_values(&graph, values.clone()).context("config key `potential.values`")?
        }
        PotentialSpec::LatticePower { exponent } => Potential::lattice_power(&graph, &metric, *exponent),
        PotentialSpec::TreeExponential { scale } => {
            let GraphSpec::Tree { branching, .. } = &config.graph else {
                bail!("config key `potential`: tree_exponential requires a tree graph");
            };
            Potential::tree_exponential(&graph, &metric, *branching as f64, config.sigma, *scale)
                .context("config key `potential`")?
        }
    };
    Ok(Workspace { graph, metric, potential, seed })
}

pub fn build_initial(ws: &Workspace, spec: &InitialSpec, stream: u64) -> GraphFunction {
    match spec {
        InitialSpec::Zero => GraphFunction::zeros(&ws.graph),
        InitialSpec::Indicator { amplitude } => {
            GraphFunction::indicator(&ws.graph, ws.graph.base_vertex(), *amplitude)
        }
        InitialSpec::Pulse { width, amplitude } => GraphFunction::from_fn(&ws.graph, |x| {
            let d = ws.metric.distance(x);
            amplitude * (-d * d / (width * width)).exp()
        }),
        InitialSpec::Random { scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(ws.seed ^ stream);
            let s = *scale;
            GraphFunction::from_fn(&ws.graph, |_| rng.random_range(-s..s))
        }
    }
}

fn growth_condition(id: CheckId) -> Option<GrowthCondition> {
    Some(match id {
        CheckId::ErSpacetime => GrowthCondition::ErSpacetime,
        CheckId::BallGWeighted => GrowthCondition::BallGWeighted,
        CheckId::BallVolume => GrowthCondition::BallVolume,
        CheckId::ExpInside => GrowthCondition::ExpInside,
        CheckId::ExpOutside => GrowthCondition::ExpOutside,
        CheckId::Annulus => GrowthCondition::Annulus,
        CheckId::FiniteTimeSlab => GrowthCondition::FiniteTimeSlab,
        _ => return None,
    })
}

fn verdict(pass: bool) -> String {
    if pass { "pass".into() } else { "fail".into() }
}

fn run_growth_check(
    ws: &Workspace,
    config: &ExperimentConfig,
    condition: GrowthCondition,
) -> anyhow::Result<CheckReport> {
    let mut params = GrowthParams::new(config.r_grid.clone());
    if let Some(r0) = config.r0 {
        params.r0 = r0;
    }
    params.theta = config.theta;
    params.delta = config.delta;
    params.dt_quad = config.dt_quad;
    let v = growth_check(
        &ws.graph,
        &ws.metric,
        &ws.potential,
        config.sigma,
        config.alpha,
        condition,
        &params,
    )
    .with_context(|| format!("check `{}`", condition.id()))?;
    let mut constants = BTreeMap::new();
    constants.insert("target_exponent".into(), v.target_exponent);
    constants.insert("slope_tolerance".into(), v.slope_tolerance);
    Ok(CheckReport {
        id: condition.id().to_string(),
        verdict: verdict(v.holds),
        fitted_slope: v.fitted_slope,
        sup_ratio: Some(v.sup_ratio),
        constants,
        data_points: v
            .r_grid
            .iter()
            .zip(&v.lhs_values)
            .map(|(&r, &value)| DataPoint { r, value })
            .collect(),
    })
}

fn run_distance_laplacian(ws: &Workspace, config: &ExperimentConfig) -> anyhow::Result<CheckReport> {
    let r0 = config.r0.unwrap_or(2.0);
    let rep = distance_laplacian_report(&ws.graph, &ws.metric, config.alpha, r0)
        .context("check `distance_laplacian`")?;
    let mut constants = BTreeMap::new();
    constants.insert("sup_one_sided".into(), rep.sup_one_sided);
    constants.insert("sup_two_sided".into(), rep.sup_two_sided);
    constants.insert("sup_power".into(), rep.sup_power);
    constants.insert("universal_two_sided".into(), rep.universal_two_sided);
    constants.insert("chain_r0".into(), rep.chain_r0);
    let pass = rep.chain_consistent && rep.sup_power.is_finite() && rep.eligible > 0;
    Ok(CheckReport {
        id: CheckId::DistanceLaplacian.name().into(),
        verdict: verdict(pass),
        fitted_slope: None,
        sup_ratio: None,
        constants,
        data_points: Vec::new(),
    })
}

fn run_initial_data(ws: &Workspace, config: &ExperimentConfig) -> anyhow::Result<CheckReport> {
    let u1_spec = config
        .simulation
        .as_ref()
        .map(|s| s.u1.clone())
        .unwrap_or(InitialSpec::Zero);
    let u1 = build_initial(ws, &u1_spec, 0x7531);
    let rep = initial_data_report(&ws.graph, &ws.metric, &u1, &config.r_grid)
        .context("check `initial_data`")?;
    let mut constants = BTreeMap::new();
    constants.insert("total".into(), rep.total);
    constants.insert("liminf_proxy".into(), rep.liminf_proxy);
    let pass = rep.total_nonnegative && rep.liminf_proxy_nonnegative;
    Ok(CheckReport {
        id: CheckId::InitialData.name().into(),
        verdict: verdict(pass),
        fitted_slope: None,
        sup_ratio: None,
        constants,
        data_points: rep
            .r_grid
            .iter()
            .zip(&rep.s_values)
            .map(|(&r, &value)| DataPoint { r, value })
            .collect(),
    })
}

fn run_cutoff_check(ws: &Workspace, config: &ExperimentConfig, kind: FamilyKind) -> anyhow::Result<CheckReport> {
    let id = match kind {
        FamilyKind::Compact => CheckId::CutoffCompact.name(),
        FamilyKind::Exponential => CheckId::CutoffExponential.name(),
    };
    if config.r_grid.is_empty() {
        bail!("check `{id}`: needs a nonempty r_grid");
    }
    let r_max = *config.r_grid.last().unwrap();
    let mut params = CutoffParams::new(r_max, config.alpha, config.delta.unwrap_or(1.0), config.sigma);
    if let Some(s) = config.power_s {
        params.s = s;
    }
    if config.theta.is_some() {
        params.theta = config.theta;
    }
    let template = cutoff_family(&ws.graph, &ws.metric, kind, &params)
        .with_context(|| format!("check `{id}`"))?;
    let rep = verify_cutoff_bounds(&ws.graph, &ws.metric, &template, &config.r_grid, None)
        .with_context(|| format!("check `{id}`"))?;
    let mut constants = BTreeMap::new();
    match kind {
        FamilyKind::Compact => {
            constants.insert(
                "laplacian_spread".into(),
                graphwave_core::cutoff::constant_spread(&rep.laplacian_bound),
            );
            constants.insert(
                "time_derivative_spread".into(),
                graphwave_core::cutoff::constant_spread(&rep.time_derivative_bound),
            );
            constants.insert(
                "second_time_spread".into(),
                graphwave_core::cutoff::constant_spread(&rep.second_time_bound),
            );
            constants.insert("support_violations".into(), rep.support_violations as f64);
        }
        FamilyKind::Exponential => {
            constants.insert(
                "laplacian_spread".into(),
                graphwave_core::cutoff::constant_spread(&rep.laplacian_bound),
            );
            constants.insert("interior_zero_violations".into(), rep.interior_zero_violations as f64);
            constants.insert("initial_dt_max".into(), rep.initial_dt_max);
            constants.insert("admissibility_constant".into(), rep.admissibility_constant);
            constants.insert("scaled_decay_constant".into(), rep.scaled_decay_constant);
        }
    }
    let pass = rep.constants_bounded && rep.all_indicators_clean;
    Ok(CheckReport {
        id: id.into(),
        verdict: verdict(pass),
        fitted_slope: None,
        sup_ratio: None,
        constants,
        data_points: rep
            .laplacian_bound
            .iter()
            .map(|e| DataPoint { r: e.r, value: e.constant })
            .collect(),
    })
}

pub fn run_check(ws: &Workspace, config: &ExperimentConfig, id: CheckId) -> anyhow::Result<CheckReport> {
    if let Some(cond) = growth_condition(id) {
        return run_growth_check(ws, config, cond);
    }
    match id {
        CheckId::DistanceLaplacian => run_distance_laplacian(ws, config),
        CheckId::InitialData => run_initial_data(ws, config),
        CheckId::CutoffCompact => run_cutoff_check(ws, config, FamilyKind::Compact),
        CheckId::CutoffExponential => run_cutoff_check(ws, config, FamilyKind::Exponential),
        _ => unreachable!("growth ids handled above"),
    }
}

pub fn run_simulation(
    ws: &Workspace,
    config: &ExperimentConfig,
    out_dir: Option<&Path>,
    index: usize,
) -> anyhow::Result<SimulationReport> {
    let sim = config.simulation.as_ref().expect("caller checks presence");
    let u0 = build_initial(ws, &sim.u0, 0x0001);
    let u1 = build_initial(ws, &sim.u1, 0x7531);
    let mut wave = WaveConfig::new(sim.t_final);
    wave.dt = sim.dt;
    wave.blowup_threshold = sim.threshold;
    wave.boundary = match sim.boundary {
        BoundaryChoice::ZeroExterior => BoundaryPolicy::ZeroExterior,
        BoundaryChoice::Free => BoundaryPolicy::Free,
    };
    wave.linear_only = sim.linear_only;
    wave.snapshot_stride = sim.snapshot_stride;
    wave.delta = config.delta;
    let traj = integrate_wave(
        &ws.graph,
        &ws.potential,
        config.sigma,
        &u0,
        &u1,
        &wave,
        Some(&ws.metric),
    )
    .context("simulation")?;
    let series_path = match (sim.series, out_dir) {
        (true, Some(dir)) => Some(write_series_csv(dir, &format!("series_{index}.csv"), &traj)?),
        _ => None,
    };
    Ok(SimulationReport {
        status: traj.status.clone(),
        blowup_time: traj.blowup_time,
        series_path,
        dt: traj.dt,
        steps: traj.steps(),
        final_sup_norm: *traj.sup_norms.last().unwrap(),
        boundary_clean_steps: traj.boundary_clean_steps,
    })
}

/// Which parts of the config a subcommand exercises.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    BuildOnly,
    HypothesisChecks,
    CutoffChecks,
    SimulationOnly,
    Everything,
}

pub fn run_experiment(
    config: &ExperimentConfig,
    seed: u64,
    out_dir: Option<&Path>,
    scope: Scope,
) -> anyhow::Result<Report> {
    let ws = build_workspace(config, seed)?;
    let mut checks = Vec::new();
    if scope != Scope::BuildOnly && scope != Scope::SimulationOnly {
        for &id in &config.checks {
            let wanted = match scope {
                Scope::HypothesisChecks => !id.is_cutoff(),
                Scope::CutoffChecks => id.is_cutoff(),
                _ => true,
            };
            if wanted {
                checks.push(run_check(&ws, config, id)?);
            }
        }
    }
    let mut simulations = Vec::new();
    if matches!(scope, Scope::SimulationOnly | Scope::Everything) && config.simulation.is_some() {
        simulations.push(run_simulation(&ws, config, out_dir, 0)?);
    }
    let summary = summarize_graph(
        &ws.graph,
        match config.metric_choice() {
            MetricChoice::Combinatorial => "combinatorial",
            MetricChoice::Euclidean => "euclidean",
            MetricChoice::Product => "product",
        },
        ws.metric.max_distance(),
        ws.metric.jump(),
    );
    let mut echo = config.clone();
    echo.seed = Some(seed);
    Ok(Report { config_echo: echo, graph_summary: summary, checks, simulations })
}
