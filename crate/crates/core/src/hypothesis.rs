//! Machine-checkable forms of the nonexistence hypotheses: weighted
//! space-time growth conditions, membership in the exponentially weighted
//! ℓ¹ class, and the sign conditions on the initial velocity.
//!
//! Growth conditions all have the shape `lhs(R) ≤ C · R^p` for every
//! `R ≥ R₀ > 1` with a generic constant `C`. At desk scale that is
//! operationalized as: compute `lhs` on a finite `R`-grid, fit a log-log
//! slope, and compare against the target exponent `p` with a fixed
//! tolerance; `sup lhs(R)/R^p` is reported alongside as the best finite
//! constant. A pass is evidence over the sampled range, not a proof of the
//! asymptotic statement.

use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphFunction, WeightedGraph};
use crate::metric::PseudoMetric;
use crate::util::{log_log_slope, trapezoid};

/// Fitted slope may exceed the target by this much before a check fails.
pub const SLOPE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum HypothesisError {
    #[error("nonlinearity exponent must exceed 1, got {0}")]
    SigmaOutOfRange(f64),
    #[error("shape exponents must satisfy theta1, theta2 >= 2 and theta1/theta2 >= (1+alpha)/2; got theta1={theta1}, theta2={theta2}, alpha={alpha}")]
    ThetaConstraint { theta1: f64, theta2: f64, alpha: f64 },
    #[error("condition {0} needs a decay rate delta")]
    MissingDelta(&'static str),
    #[error("R grid must be strictly increasing with every entry above {r0}")]
    BadGrid { r0: f64 },
    #[error("check needs distances up to {needed:.3} but the truncation only provides {available:.3}")]
    WindowTooSmall { needed: f64, available: f64 },
    #[error("potential must be positive and finite, got {value} at vertex {vertex}")]
    NonpositivePotential { vertex: usize, value: f64 },
    #[error("potential drops below its declared lower bound at vertex {vertex}: {value} < {bound}")]
    LowerBoundViolated { vertex: usize, value: f64, bound: f64 },
}

/// The positive coefficient of the nonlinearity `v |u|^σ`.
///
/// Every built-in potential is time-independent; `value` still takes a time
/// argument so evaluation sites read like the continuous object. A potential
/// may carry a spatial lower bound `g ≤ v`, which the ball-weighted growth
/// check sums in place of `v`.
#[derive(Clone, Debug)]
pub struct Potential {
    /// `None` means identically one.
    values: Option<Vec<f64>>,
    lower_bound: Option<Vec<f64>>,
}

impl Potential {
    pub fn one() -> Self {
        Self { values: None, lower_bound: None }
    }

    pub fn from_values(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self, HypothesisError> {
        assert_eq!(values.len(), graph.len());
        for (x, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HypothesisError::NonpositivePotential { vertex: x, value: v });
            }
        }
        Ok(Self { values: Some(values), lower_bound: None })
    }

    /// `v(x) = (1 + d(x,x₀))^p`.
    pub fn lattice_power(graph: &WeightedGraph, metric: &PseudoMetric, p: f64) -> Self {
        let values = (0..graph.len()).map(|x| (1.0 + metric.distance(x)).powf(p)).collect();
        Self { values: Some(values), lower_bound: None }
    }

    /// `v(x) = scale · max(d,1)^{(σ−3)/2} · branching^{(σ−1) d}` with
    /// `d = d(x,x₀)`. The distance is floored at 1 so the value at the base
    /// vertex stays positive and finite for every σ > 1.
    pub fn tree_exponential(
        graph: &WeightedGraph,
        metric: &PseudoMetric,
        branching: f64,
        sigma: f64,
        scale: f64,
    ) -> Result<Self, HypothesisError> {
        if sigma <= 1.0 {
            return Err(HypothesisError::SigmaOutOfRange(sigma));
        }
        assert!(branching > 1.0 && scale > 0.0);
        let values = (0..graph.len())
            .map(|x| {
                let d = metric.distance(x);
                scale * d.max(1.0).powf(0.5 * (sigma - 3.0)) * branching.powf((sigma - 1.0) * d)
            })
            .collect();
        Ok(Self { values: Some(values), lower_bound: None })
    }

    /// Attaches a positive lower bound `g ≤ v`, verified pointwise.
    pub fn with_lower_bound(mut self, graph: &WeightedGraph, g: Vec<f64>) -> Result<Self, HypothesisError> {
        assert_eq!(g.len(), graph.len());
        for (x, &b) in g.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(HypothesisError::NonpositivePotential { vertex: x, value: b });
            }
            let v = self.value(x, 0.0);
            if v < b * (1.0 - 1e-12) {
                return Err(HypothesisError::LowerBoundViolated { vertex: x, value: v, bound: b });
            }
        }
        self.lower_bound = Some(g);
        Ok(self)
    }

    pub fn value(&self, x: usize, _t: f64) -> f64 {
        match &self.values {
            Some(v) => v[x],
            None => 1.0,
        }
    }

    /// The function the `ball_g_weighted` condition integrates: the declared
    /// lower bound when present, the potential itself otherwise.
    pub fn spatial_floor(&self, x: usize) -> f64 {
        match (&self.lower_bound, &self.values) {
            (Some(g), _) => g[x],
            (None, Some(v)) => v[x],
            (None, None) => 1.0,
        }
    }

    pub fn is_one(&self) -> bool {
        self.values.is_none()
    }

    pub fn is_time_independent(&self) -> bool {
        true
    }
}

/// Which growth condition a verdict speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GrowthCondition {
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
}

impl GrowthCondition {
    pub fn id(self) -> &'static str {
        match self {
            Self::ErSpacetime => "ER_spacetime",
            Self::BallGWeighted => "ball_g_weighted",
            Self::BallVolume => "ball_volume",
            Self::ExpInside => "exp_inside",
            Self::ExpOutside => "exp_outside",
            Self::Annulus => "annulus",
            Self::FiniteTimeSlab => "finite_time_slab",
        }
    }

    /// Exponent `p` in the condition's right side `C R^p`.
    pub fn target_exponent(self, sigma: f64, alpha: f64) -> f64 {
        let a1 = 1.0 + alpha;
        match self {
            Self::ErSpacetime | Self::ExpInside | Self::ExpOutside => a1 * sigma / (sigma - 1.0),
            Self::BallGWeighted | Self::BallVolume => a1 * (sigma + 1.0) / (2.0 * (sigma - 1.0)),
            Self::Annulus => a1 * (sigma + 1.0) / (2.0 * (sigma - 1.0)) - 1.0,
            Self::FiniteTimeSlab => 2.0 * sigma / (sigma - 1.0),
        }
    }
}

/// Tuning knobs for [`growth_check`]. `r0` is the smallest admissible grid
/// radius; shape exponents default to `(2(1+α), 4)`; `dt_quad` defaults to
/// `R^{θ₁/θ₂}/200` per grid point.
#[derive(Clone, Debug)]
pub struct GrowthParams {
    pub r_grid: Vec<f64>,
    pub r0: f64,
    pub theta: Option<(f64, f64)>,
    pub delta: Option<f64>,
    pub dt_quad: Option<f64>,
}

impl GrowthParams {
    pub fn new(r_grid: Vec<f64>) -> Self {
        Self { r_grid, r0: 1.0 + 1e-9, theta: None, delta: None, dt_quad: None }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_theta(mut self, theta1: f64, theta2: f64) -> Self {
        self.theta = Some((theta1, theta2));
        self
    }
}

/// Outcome of one growth-condition check over an `R`-grid.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthVerdict {
    pub condition: GrowthCondition,
    pub target_exponent: f64,
    pub slope_tolerance: f64,
    pub r_grid: Vec<f64>,
    pub lhs_values: Vec<f64>,
    pub fitted_slope: Option<f64>,
    /// `max_R lhs(R) / R^target`: the best constant exhibited by the data.
    pub sup_ratio: f64,
    pub holds: bool,
    pub theta: Option<(f64, f64)>,
    pub delta: Option<f64>,
}

fn validate_grid(grid: &[f64], r0: f64) -> Result<(), HypothesisError> {
    let ok = !grid.is_empty()
        && r0 > 1.0
        && grid[0] >= r0
        && grid.windows(2).all(|w| w[0] < w[1])
        && grid.iter().all(|r| r.is_finite());
    if ok {
        Ok(())
    } else {
        Err(HypothesisError::BadGrid { r0 })
    }
}

/// Truncated graphs undercount sums that reach past the clipped layer;
/// reject radii the window cannot support. Untruncated graphs are the whole
/// universe, so nothing is missing there.
fn require_extent(graph: &WeightedGraph, metric: &PseudoMetric, needed: f64) -> Result<(), HypothesisError> {
    if graph.clipped_count() == 0 {
        return Ok(());
    }
    let available = metric.max_distance();
    if needed > available * (1.0 + 1e-12) {
        return Err(HypothesisError::WindowTooSmall { needed, available });
    }
    Ok(())
}

/// Evaluates one growth condition on its `R`-grid and fits the slope.
///
/// Left sides per condition, writing `q = −1/(σ−1)`, `w(x,t) = v(x,t)^q μ(x)`
/// and `T = R^{(1+α)/2}`:
///
/// * `ER_spacetime`: `∫_0^∞ Σ_x 1{R^{θ₁} ≤ d^{θ₁}+t^{θ₂} ≤ 2R^{θ₁}} w dt`
/// * `ball_g_weighted`: `Σ_V g^q e^{−δd/R} μ` with δ, else `Σ_{B_R} g^q μ`
/// * `ball_volume`: `Σ_{B_R} w(·,0)` (plain volume when v ≡ 1)
/// * `exp_inside`: `∫_T^{2T} Σ_{B_R} w e^{−δd/R} dt`
/// * `exp_outside`: `∫_0^{2T} Σ_{V∖B_R} w e^{−δd/R} dt`
/// * `annulus`: `Σ_{R<d≤R+1} w(·,0)`
/// * `finite_time_slab`: `∫_R^{2R} Σ_V w dt`
///
/// Time integrals use the trapezoid rule; spatial sums are exact.
pub fn growth_check(
    graph: &WeightedGraph,
    metric: &PseudoMetric,
    potential: &Potential,
    sigma: f64,
    alpha: f64,
    condition: GrowthCondition,
    params: &GrowthParams,
) -> Result<GrowthVerdict, HypothesisError> {
    if sigma <= 1.0 {
        return Err(HypothesisError::SigmaOutOfRange(sigma));
    }
    assert!((0.0..=1.0).contains(&alpha), "exponent must lie in [0, 1]");
    validate_grid(&params.r_grid, params.r0)?;
    let q = -1.0 / (sigma - 1.0);
    let n = graph.len();
    let r_max = *params.r_grid.last().unwrap();

    let weight_at = |x: usize, t: f64| potential.value(x, t).powf(q) * graph.mu(x);

    let mut theta = None;
    let mut needs_extent: f64 = 0.0;
    match condition {
        GrowthCondition::ErSpacetime => {
            let (t1, t2) = params.theta.unwrap_or((2.0 * (1.0 + alpha), 4.0));
            if t1 < 2.0 || t2 < 2.0 || t1 / t2 < (1.0 + alpha) / 2.0 - 1e-12 {
                return Err(HypothesisError::ThetaConstraint { theta1: t1, theta2: t2, alpha });
            }
            theta = Some((t1, t2));
            needs_extent = 2f64.powf(1.0 / t1) * r_max;
        }
        GrowthCondition::BallVolume | GrowthCondition::ExpInside | GrowthCondition::ExpOutside => {
            needs_extent = r_max;
        }
        GrowthCondition::Annulus => needs_extent = r_max + 1.0,
        GrowthCondition::BallGWeighted => {
            needs_extent = if params.delta.is_some() { 0.0 } else { r_max };
        }
        GrowthCondition::FiniteTimeSlab => {}
    }
    if needs_extent > 0.0 {
        require_extent(graph, metric, needs_extent)?;
    }
    let delta = match condition {
        GrowthCondition::ExpInside | GrowthCondition::ExpOutside => {
            Some(params.delta.ok_or(HypothesisError::MissingDelta(condition.id()))?)
        }
        GrowthCondition::BallGWeighted => params.delta,
        _ => None,
    };

    let mut lhs_values = Vec::with_capacity(params.r_grid.len());
    match condition {
        GrowthCondition::ErSpacetime => {
            let (t1, t2) = theta.unwrap();
            // Sort vertices by d^θ₁ once; each time slice then reads one
            // contiguous window via prefix sums.
            let mut by_pow: Vec<(f64, usize)> =
                (0..n).map(|x| (metric.distance(x).powf(t1), x)).collect();
            by_pow.sort_by(|a, b| a.0.total_cmp(&b.0));
            let keys: Vec<f64> = by_pow.iter().map(|p| p.0).collect();
            let time_independent = potential.is_time_independent();
            let prefix: Vec<f64> = {
                let mut acc = 0.0;
                let mut p = Vec::with_capacity(n + 1);
                p.push(0.0);
                for &(_, x) in &by_pow {
                    acc += weight_at(x, 0.0);
                    p.push(acc);
                }
                p
            };
            for &r in &params.r_grid {
                let rp = r.powf(t1);
                let t_max = (2.0 * rp).powf(1.0 / t2);
                let dt = params.dt_quad.unwrap_or(r.powf(t1 / t2) / 200.0);
                let slice = |t: f64| -> f64 {
                    let tp = t.powf(t2);
                    let lo = rp - tp;
                    let hi = 2.0 * rp - tp;
                    if hi < 0.0 {
                        return 0.0;
                    }
                    if time_independent {
                        let a = keys.partition_point(|&k| k < lo);
                        let b = keys.partition_point(|&k| k <= hi);
                        prefix[b] - prefix[a]
                    } else {
                        by_pow
                            .iter()
                            .filter(|&&(k, _)| k >= lo && k <= hi)
                            .map(|&(_, x)| weight_at(x, t))
                            .sum()
                    }
                };
                lhs_values.push(trapezoid(0.0, t_max, dt, slice));
            }
        }
        GrowthCondition::BallGWeighted => {
            let floor_q: Vec<f64> =
                (0..n).map(|x| potential.spatial_floor(x).powf(q) * graph.mu(x)).collect();
            for &r in &params.r_grid {
                let s: f64 = match delta {
                    Some(dl) => (0..n)
                        .map(|x| floor_q[x] * (-dl * metric.distance(x) / r).exp())
                        .sum(),
                    None => (0..n).filter(|&x| metric.distance(x) <= r).map(|x| floor_q[x]).sum(),
                };
                lhs_values.push(s);
            }
        }
        GrowthCondition::BallVolume => {
            for &r in &params.r_grid {
                let s: f64 =
                    (0..n).filter(|&x| metric.distance(x) <= r).map(|x| weight_at(x, 0.0)).sum();
                lhs_values.push(s);
            }
        }
        GrowthCondition::Annulus => {
            for &r in &params.r_grid {
                let s: f64 = (0..n)
                    .filter(|&x| {
                        let d = metric.distance(x);
                        r < d && d <= r + 1.0
                    })
                    .map(|x| weight_at(x, 0.0))
                    .sum();
                lhs_values.push(s);
            }
        }
        GrowthCondition::ExpInside | GrowthCondition::ExpOutside => {
            let dl = delta.unwrap();
            let inside = condition == GrowthCondition::ExpInside;
            for &r in &params.r_grid {
                let t_up = r.powf(0.5 * (1.0 + alpha));
                let (a, b) = if inside { (t_up, 2.0 * t_up) } else { (0.0, 2.0 * t_up) };
                let dt = params.dt_quad.unwrap_or(((b - a) / 200.0).max(1e-9));
                let members: Vec<usize> = (0..n)
                    .filter(|&x| (metric.distance(x) <= r) == inside)
                    .collect();
                let spatial = |t: f64| -> f64 {
                    members
                        .iter()
                        .map(|&x| weight_at(x, t) * (-dl * metric.distance(x) / r).exp())
                        .sum()
                };
                if potential.is_time_independent() {
                    let s = spatial(a);
                    lhs_values.push(trapezoid(a, b, dt, |_| s));
                } else {
                    lhs_values.push(trapezoid(a, b, dt, spatial));
                }
            }
        }
        GrowthCondition::FiniteTimeSlab => {
            for &r in &params.r_grid {
                let dt = params.dt_quad.unwrap_or(r / 200.0);
                if potential.is_time_independent() {
                    let s: f64 = (0..n).map(|x| weight_at(x, 0.0)).sum();
                    lhs_values.push(trapezoid(r, 2.0 * r, dt, |_| s));
                } else {
                    lhs_values.push(trapezoid(r, 2.0 * r, dt, |t| {
                        (0..n).map(|x| weight_at(x, t)).sum()
                    }));
                }
            }
        }
    }

    let target = condition.target_exponent(sigma, alpha);
    let fitted_slope = log_log_slope(&params.r_grid, &lhs_values);
    let sup_ratio = params
        .r_grid
        .iter()
        .zip(&lhs_values)
        .map(|(&r, &v)| v / r.powf(target))
        .fold(0.0f64, f64::max);
    let holds = fitted_slope.map_or(true, |s| s <= target + SLOPE_TOLERANCE);

    Ok(GrowthVerdict {
        condition,
        target_exponent: target,
        slope_tolerance: SLOPE_TOLERANCE,
        r_grid: params.r_grid.clone(),
        lhs_values,
        fitted_slope,
        sup_ratio,
        holds,
        theta,
        delta,
    })
}

/// Partial sums of the weighted ℓ¹ norm `Σ |f| e^{−δd} μ` along growing
/// radii.
#[derive(Clone, Debug, Serialize)]
pub struct XDeltaReport {
    pub delta: f64,
    pub radii: Vec<f64>,
    /// Nondecreasing by construction.
    pub partial_sums: Vec<f64>,
    /// Last increment fell below `1e−10 ×` the running value.
    pub converged: bool,
    pub final_value: f64,
}

/// Evaluates the weighted ℓ¹ partial sums of `f` over the given radii
/// (defaults to unit steps out to the largest distance).
pub fn xdelta_norm(
    graph: &WeightedGraph,
    metric: &PseudoMetric,
    delta: f64,
    f: &GraphFunction,
    radii: Option<&[f64]>,
) -> XDeltaReport {
    assert!(delta > 0.0, "decay rate must be positive");
    let default_radii: Vec<f64>;
    let radii: &[f64] = match radii {
        Some(r) => {
            assert!(r.windows(2).all(|w| w[0] < w[1]), "radii must be increasing");
            r
        }
        None => {
            let top = metric.max_distance().ceil() as usize;
            default_radii = (0..=top).map(|k| k as f64).collect();
            &default_radii
        }
    };
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.sort_by(|&a, &b| metric.distance(a).total_cmp(&metric.distance(b)));
    let mut partial_sums = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut idx = 0;
    for &r in radii {
        while idx < order.len() && metric.distance(order[idx]) <= r {
            let x = order[idx];
            acc += f.value(x).abs() * (-delta * metric.distance(x)).exp() * graph.mu(x);
            idx += 1;
        }
        partial_sums.push(acc);
    }
    let final_value = *partial_sums.last().unwrap_or(&0.0);
    let converged = match partial_sums.len() {
        0 | 1 => true,
        l => {
            let inc = partial_sums[l - 1] - partial_sums[l - 2];
            inc <= 1e-10 * final_value.max(1e-300)
        }
    };
    XDeltaReport { delta, radii: radii.to_vec(), partial_sums, converged, final_value }
}

/// Ball-vs-double-ball sums of the initial velocity: per radius,
/// `S(R) = Σ_{B_R} u₁⁺ μ − Σ_{B_{2R}} u₁⁻ μ`, whose liminf over `R → ∞` the
/// nonexistence theorems require to be nonnegative. At finite radius the
/// reported proxy is the minimum of `S` over the largest half of the grid.
#[derive(Clone, Debug, Serialize)]
pub struct InitialDataReport {
    pub r_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    /// `Σ_V u₁ μ` over the truncation.
    pub total: f64,
    pub total_nonnegative: bool,
    /// Minimum of `s_values` over the largest half of the grid; a finite
    /// stand-in for the liminf, not the liminf itself.
    pub liminf_proxy: f64,
    pub liminf_proxy_nonnegative: bool,
}

pub fn initial_data_report(
    graph: &WeightedGraph,
    metric: &PseudoMetric,
    u1: &GraphFunction,
    r_grid: &[f64],
) -> Result<InitialDataReport, HypothesisError> {
    assert!(!r_grid.is_empty() && r_grid.windows(2).all(|w| w[0] < w[1]));
    let r_max = *r_grid.last().unwrap();
    require_extent(graph, metric, 2.0 * r_max)?;

    let mut s_values = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let mut plus = 0.0;
        let mut minus = 0.0;
        for x in 0..graph.len() {
            let d = metric.distance(x);
            let v = u1.value(x);
            if d <= r && v > 0.0 {
                plus += v * graph.mu(x);
            }
            if d <= 2.0 * r && v < 0.0 {
                minus += -v * graph.mu(x);
            }
        }
        s_values.push(plus - minus);
    }
    let total: f64 = (0..graph.len()).map(|x| u1.value(x) * graph.mu(x)).sum();
    let tail_start = r_grid.len() / 2;
    let liminf_proxy = s_values[tail_start..].iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(InitialDataReport {
        r_grid: r_grid.to_vec(),
        s_values,
        total,
        total_nonnegative: total >= 0.0,
        liminf_proxy,
        liminf_proxy_nonnegative: liminf_proxy >= 0.0,
    })
}
