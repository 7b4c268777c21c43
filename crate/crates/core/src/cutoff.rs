//! Test-function families and their numerically verified envelopes.
//!
//! Two families drive the nonexistence arguments: a compactly supported
//! space-time bump for nonnegative solutions, and an exponentially decaying
//! family for sign-changing solutions. Each comes with claimed upper bounds
//! on its time derivatives and Laplacian; [`verify_cutoff_bounds`] measures
//! the best empirical constants over a radius grid and counts indicator
//! violations (the quantity being nonzero where the claimed envelope
//! vanishes). The zero-propagation principle that forbids compactly
//! supported comparison functions is checked by [`zero_propagation_check`].

use serde::Serialize;
use thiserror::Error;

use crate::calculus::laplacian_into;
use crate::graph::{GraphFunction, WeightedGraph};
use crate::metric::PseudoMetric;
use crate::util::parallel_map;

#[derive(Debug, Error)]
pub enum CutoffError {
    #[error("decay profile is not nonincreasing at r = {r}: slope {slope}")]
    PsiNotMonotone { r: f64, slope: f64 },
    #[error("compact family needs theta1, theta2 >= 2 and theta1/theta2 >= (1+alpha)/2; got theta1={theta1}, theta2={theta2}, alpha={alpha}")]
    BadShape { theta1: f64, theta2: f64, alpha: f64 },
    #[error("exponential family needs R >= max(r0, 2 jump) = {needed}, got {r}")]
    RadiusTooSmall { r: f64, needed: f64 },
    #[error("{0}")]
    BadParameter(&'static str),
    #[error("bound verification needs distances up to {needed:.3}, truncation provides {available:.3}")]
    InsufficientTruncation { needed: f64, available: f64 },
    #[error("function must be nonnegative, got {value} at vertex {vertex}")]
    NegativeFunction { vertex: usize, value: f64 },
    #[error("graph must be connected")]
    Disconnected,
}

/// Quintic smoothstep bridge shared by the two [0,1]-valued profiles:
/// 1 on r ≤ 1, 0 on r ≥ 2, `1 − (10u³ − 15u⁴ + 6u⁵)` with `u = r − 1`
/// between. Second-order flat contact at both junctions.
fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

fn bump_d1(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        -u * u * (30.0 + u * (-60.0 + 30.0 * u))
    }
}

fn bump_d2(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        -u * (60.0 + u * (-180.0 + 120.0 * u))
    }
}

/// The three scalar profiles behind both families.
///
/// `phi` and `eta` are the [0,1]-valued bumps (identical shape, used in
/// space-time and in time respectively). `psi` is 1 on `[−j, 1]`, exactly
/// `e^{−δr}` on `[2, ∞)`, and a quintic Hermite bridge between that matches
/// value and two derivatives at both ends. Monotonicity of the bridge is
/// δ-dependent, so construction verifies it on a dense grid.
#[derive(Clone, Debug)]
pub struct ProfileSet {
    delta: f64,
    j: f64,
    s: f64,
    /// Bridge polynomial in `u = r − 1` on (1, 2).
    psi_c: [f64; 6],
    env_c1: f64,
    env_c2: f64,
}

pub fn make_profiles(delta: f64, j: f64, s: f64) -> Result<ProfileSet, CutoffError> {
    if !(delta > 0.0) {
        return Err(CutoffError::BadParameter("decay rate must be positive"));
    }
    if !(j >= 0.0) {
        return Err(CutoffError::BadParameter("jump bound must be nonnegative"));
    }
    if !(s > 1.0) {
        return Err(CutoffError::BadParameter("power s must exceed 1"));
    }
    // Hermite data at u = 1: value, slope, curvature of e^{−δ(1+u)}.
    let e = (-2.0 * delta).exp();
    let (va, b, c) = (e - 1.0, -delta * e, delta * delta * e);
    let psi_c = [
        1.0,
        0.0,
        0.0,
        10.0 * va - 4.0 * b + 0.5 * c,
        -15.0 * va + 7.0 * b - c,
        6.0 * va - 3.0 * b + 0.5 * c,
    ];
    let profiles =
        ProfileSet { delta, j, s, psi_c, env_c1: 0.0, env_c2: 0.0 };
    let grid = 10_000;
    for i in 0..=grid {
        let r = 1.0 + i as f64 / grid as f64;
        let slope = profiles.psi_d1(r);
        if slope > 1e-12 {
            return Err(CutoffError::PsiNotMonotone { r, slope });
        }
    }
    // Envelope constants over the region where psi/e^{−δr} is not constant.
    let mut c1 = f64::MIN;
    let mut c2 = f64::MAX;
    for i in 0..=grid {
        let r = -j + (2.0 + j) * i as f64 / grid as f64;
        let ratio = profiles.psi(r) * (delta * r).exp();
        c1 = c1.max(ratio);
        c2 = c2.min(ratio);
    }
    Ok(ProfileSet { env_c1: c1, env_c2: c2, ..profiles })
}

impl ProfileSet {
    pub fn phi(&self, r: f64) -> f64 {
        bump(r)
    }
    pub fn phi_d1(&self, r: f64) -> f64 {
        bump_d1(r)
    }
    pub fn phi_d2(&self, r: f64) -> f64 {
        bump_d2(r)
    }
    pub fn eta(&self, r: f64) -> f64 {
        bump(r)
    }
    pub fn eta_d1(&self, r: f64) -> f64 {
        bump_d1(r)
    }
    pub fn eta_d2(&self, r: f64) -> f64 {
        bump_d2(r)
    }

    pub fn psi(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            (-self.delta * r).exp()
        } else {
            let u = r - 1.0;
            let c = &self.psi_c;
            c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))))
        }
    }

    pub fn psi_d1(&self, r: f64) -> f64 {
        if r <= 1.0 {
            0.0
        } else if r >= 2.0 {
            -self.delta * (-self.delta * r).exp()
        } else {
            let u = r - 1.0;
            let c = &self.psi_c;
            c[1] + u * (2.0 * c[2] + u * (3.0 * c[3] + u * (4.0 * c[4] + u * 5.0 * c[5])))
        }
    }

    pub fn psi_d2(&self, r: f64) -> f64 {
        if r <= 1.0 {
            0.0
        } else if r >= 2.0 {
            self.delta * self.delta * (-self.delta * r).exp()
        } else {
            let u = r - 1.0;
            let c = &self.psi_c;
            2.0 * c[2] + u * (6.0 * c[3] + u * (12.0 * c[4] + u * 20.0 * c[5]))
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn jump(&self) -> f64 {
        self.j
    }
    pub fn power(&self) -> f64 {
        self.s
    }
    /// `(C₁, C₂)` with `C₂ e^{−δr} ≤ ψ(r) ≤ C₁ e^{−δr}` on the scanned range.
    pub fn psi_envelope(&self) -> (f64, f64) {
        (self.env_c1, self.env_c2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Compact,
    Exponential,
}

/// Parameters shared by both families. `theta` only matters for the compact
/// family and defaults to `(2(1+α), 4)`; `r0` is the smallest admissible
/// radius for the exponential family.
#[derive(Clone, Debug)]
pub struct CutoffParams {
    pub r: f64,
    pub alpha: f64,
    pub delta: f64,
    pub s: f64,
    pub theta: Option<(f64, f64)>,
    pub r0: f64,
}

impl CutoffParams {
    pub fn new(r: f64, alpha: f64, delta: f64, sigma: f64) -> Self {
        Self { r, alpha, delta, s: default_power(sigma), theta: None, r0: 2.0 }
    }
}

/// Smallest convenient integer power strictly above `2σ/(σ−1)`.
pub fn default_power(sigma: f64) -> f64 {
    assert!(sigma > 1.0);
    (2.0 * sigma / (sigma - 1.0)).ceil() + 1.0
}

/// One member of a test-function family, with its distances cached.
///
/// Compact: `φ_R(x,t) = φ((t^{θ₂} + d^{θ₁}) / R^{θ₁})`, supported in
/// `Q_R = B_{2^{1/θ₁}R} × [0, 2^{1/θ₂} R^{θ₁/θ₂}]`.
///
/// Exponential: `φ_R(x,t) = η^s(t / R^{(1+α)/2}) · ψ((d − j)/R)`, strictly
/// positive in space while `t < 2R^{(1+α)/2}`, with `∂_tφ_R(·,0) ≡ 0` and
/// `Δφ_R ≡ 0` on `B_R`.
#[derive(Clone, Debug)]
pub struct CutoffFamily {
    kind: FamilyKind,
    r: f64,
    theta1: f64,
    theta2: f64,
    s: f64,
    alpha: f64,
    delta: f64,
    j: f64,
    profiles: ProfileSet,
    dist: Vec<f64>,
    /// Compact: `d^{θ₁}` per vertex. Exponential: `ψ((d−j)/R)` per vertex.
    spatial: Vec<f64>,
    /// Exponential only: `Δ[ψ((d−j)/R)]`; the full Laplacian is `η^s` times
    /// this, since the time factor is spatially constant.
    lap_spatial: Vec<f64>,
}

pub fn cutoff_family(
    graph: &WeightedGraph,
    metric: &PseudoMetric,
    kind: FamilyKind,
    params: &CutoffParams,
) -> Result<CutoffFamily, CutoffError> {
    if !(params.r > 1.0 && params.r.is_finite()) {
        return Err(CutoffError::BadParameter("radius must exceed 1"));
    }
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(CutoffError::BadParameter("alpha must lie in [0, 1]"));
    }
    let j = metric.jump();
    let (theta1, theta2) = params.theta.unwrap_or((2.0 * (1.0 + params.alpha), 4.0));
    match kind {
        FamilyKind::Compact => {
            if theta1 < 2.0
                || theta2 < 2.0
                || theta1 / theta2 < (1.0 + params.alpha) / 2.0 - 1e-12
            {
                return Err(CutoffError::BadShape { theta1, theta2, alpha: params.alpha });
            }
        }
        FamilyKind::Exponential => {
            let needed = params.r0.max(2.0 * j);
            if params.r < needed {
                return Err(CutoffError::RadiusTooSmall { r: params.r, needed });
            }
        }
    }
    let profiles = make_profiles(params.delta, j, params.s)?;
    let dist: Vec<f64> = metric.distances().to_vec();
    let (spatial, lap_spatial) = match kind {
        FamilyKind::Compact => {
            let dpow = dist.iter().map(|&d| d.powf(theta1)).collect();
            (dpow, Vec::new())
        }
        FamilyKind::Exponential => {
            let psi_x: Vec<f64> =
                dist.iter().map(|&d| profiles.psi((d - j) / params.r)).collect();
            let mut lap = vec![0.0; graph.len()];
            laplacian_into(graph, &psi_x, &mut lap);
            (psi_x, lap)
        }
    };
    Ok(CutoffFamily {
        kind,
        r: params.r,
        theta1,
        theta2,
        s: params.s,
        alpha: params.alpha,
        delta: params.delta,
        j,
        profiles,
        dist,
        spatial,
        lap_spatial,
    })
}

impl CutoffFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }
    pub fn radius(&self) -> f64 {
        self.r
    }
    pub fn theta(&self) -> (f64, f64) {
        (self.theta1, self.theta2)
    }
    pub fn power(&self) -> f64 {
        self.s
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn jump(&self) -> f64 {
        self.j
    }
    pub fn profiles(&self) -> &ProfileSet {
        &self.profiles
    }
    pub fn distance(&self, x: usize) -> f64 {
        self.dist[x]
    }

    /// Time scale `R^{(1+α)/2}` of the exponential family.
    pub fn t_scale(&self) -> f64 {
        self.r.powf(0.5 * (1.0 + self.alpha))
    }

    /// Spatial extent of the support: `2^{1/θ₁} R` for the compact family,
    /// unbounded (`∞`) for the exponential one.
    pub fn support_radius(&self) -> f64 {
        match self.kind {
            FamilyKind::Compact => 2f64.powf(1.0 / self.theta1) * self.r,
            FamilyKind::Exponential => f64::INFINITY,
        }
    }

    /// Temporal extent of the support.
    pub fn support_time(&self) -> f64 {
        match self.kind {
            FamilyKind::Compact => {
                2f64.powf(1.0 / self.theta2) * self.r.powf(self.theta1 / self.theta2)
            }
            FamilyKind::Exponential => 2.0 * self.t_scale(),
        }
    }

    fn shape_arg(&self, x: usize, t: f64) -> f64 {
        (t.powf(self.theta2) + self.spatial[x]) / self.r.powf(self.theta1)
    }

    pub fn value(&self, x: usize, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Compact => self.profiles.phi(self.shape_arg(x, t)),
            FamilyKind::Exponential => {
                self.profiles.eta(t / self.t_scale()).powf(self.s) * self.spatial[x]
            }
        }
    }

    pub fn dt(&self, x: usize, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Compact => {
                let arg = self.shape_arg(x, t);
                self.profiles.phi_d1(arg) * self.theta2 * t.powf(self.theta2 - 1.0)
                    / self.r.powf(self.theta1)
            }
            FamilyKind::Exponential => {
                let ts = self.t_scale();
                let u = t / ts;
                let eta = self.profiles.eta(u);
                self.s / ts * eta.powf(self.s - 1.0) * self.profiles.eta_d1(u) * self.spatial[x]
            }
        }
    }

    pub fn dtt(&self, x: usize, t: f64) -> f64 {
        match self.kind {
            FamilyKind::Compact => {
                let arg = self.shape_arg(x, t);
                let rp = self.r.powf(self.theta1);
                let g1 = self.theta2 * t.powf(self.theta2 - 1.0) / rp;
                let g2 = self.theta2 * (self.theta2 - 1.0) * t.powf(self.theta2 - 2.0) / rp;
                self.profiles.phi_d2(arg) * g1 * g1 + self.profiles.phi_d1(arg) * g2
            }
            FamilyKind::Exponential => {
                let ts = self.t_scale();
                let u = t / ts;
                let eta = self.profiles.eta(u);
                let d1 = self.profiles.eta_d1(u);
                let d2 = self.profiles.eta_d2(u);
                let inner =
                    (self.s - 1.0) * eta.powf(self.s - 2.0) * d1 * d1 + eta.powf(self.s - 1.0) * d2;
                self.s / (ts * ts) * inner * self.spatial[x]
            }
        }
    }

    /// `φ_R(·, t)` for every vertex.
    pub fn values_at(&self, t: f64) -> Vec<f64> {
        match self.kind {
            FamilyKind::Compact => {
                let tp = t.powf(self.theta2);
                let inv = 1.0 / self.r.powf(self.theta1);
                self.spatial.iter().map(|&dp| self.profiles.phi((tp + dp) * inv)).collect()
            }
            FamilyKind::Exponential => {
                let scale = self.profiles.eta(t / self.t_scale()).powf(self.s);
                self.spatial.iter().map(|&p| scale * p).collect()
            }
        }
    }

    /// `Δφ_R(·, t)`. The exponential family factors through its cached
    /// spatial Laplacian; the compact family differences `values_at(t)`.
    pub fn laplacian_at(&self, graph: &WeightedGraph, t: f64) -> Vec<f64> {
        assert_eq!(graph.len(), self.dist.len());
        match self.kind {
            FamilyKind::Compact => {
                let vals = self.values_at(t);
                let mut out = vec![0.0; vals.len()];
                laplacian_into(graph, &vals, &mut out);
                out
            }
            FamilyKind::Exponential => {
                let scale = self.profiles.eta(t / self.t_scale()).powf(self.s);
                self.lap_spatial.iter().map(|&l| scale * l).collect()
            }
        }
    }

    /// Compact-family annulus `R^{θ₁} ≤ d^{θ₁} + t^{θ₂} ≤ 2R^{θ₁}` carrying
    /// the time-derivative envelopes.
    pub fn in_e_r(&self, x: usize, t: f64) -> bool {
        let v = self.spatial[x] + t.powf(self.theta2);
        let rp = self.r.powf(self.theta1);
        rp <= v && v <= 2.0 * rp
    }

    /// Wider annulus `(R/2)^{θ₁} ≤ d^{θ₁} + t^{θ₂} ≤ (4R)^{θ₁}` carrying the
    /// Laplacian envelope.
    pub fn in_f_r(&self, x: usize, t: f64) -> bool {
        let v = self.spatial[x] + t.powf(self.theta2);
        (self.r / 2.0).powf(self.theta1) <= v && v <= (4.0 * self.r).powf(self.theta1)
    }
}

/// Empirical constant and indicator bookkeeping for one claimed bound at one
/// radius. `constant` is the sup of |quantity| / envelope over samples where
/// the envelope is positive; `violations` counts samples with a nonzero
/// quantity where the envelope vanishes.
#[derive(Clone, Debug, Serialize)]
pub struct BoundEntry {
    pub r: f64,
    pub constant: f64,
    pub violations: usize,
    pub samples: usize,
}

/// Outcome of sweeping one family's bounds over an `R`-grid.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub family: FamilyKind,
    pub r_grid: Vec<f64>,
    /// Compact bound on `−Δφ_R`; exponential bound on `|Δφ_R|`.
    pub laplacian_bound: Vec<BoundEntry>,
    /// Compact only: `−Δ(φ_R^s)` against `R^{−(1+α)} φ_R^{s−1}` on the wide
    /// annulus.
    pub laplacian_power_bound: Option<Vec<BoundEntry>>,
    pub time_derivative_bound: Vec<BoundEntry>,
    pub second_time_bound: Vec<BoundEntry>,
    /// Compact only: samples with `φ_R > 0` outside the support box.
    pub support_violations: usize,
    /// Exponential only: interior vertices of `B_R` with a nonzero Laplacian.
    pub interior_zero_violations: usize,
    /// Exponential only: `max_x |∂_tφ_R(x, 0)|`, zero by construction.
    pub initial_dt_max: f64,
    /// Exponential only: sup of `max(φ, |∂_tφ|, |∂_ttφ|) e^{+δ d}` over
    /// samples. Finite on any truncation; grows with the window because the
    /// family only decays at rate `δ/R`.
    pub admissibility_constant: f64,
    /// Same sup against the family's own rate `e^{+δ(d−j)/R}`, which stays
    /// uniformly bounded.
    pub scaled_decay_constant: f64,
    pub constants_bounded: bool,
    pub all_indicators_clean: bool,
}

/// Max/min ratio of the positive constants across the grid; 1.0 when fewer
/// than two entries are positive.
pub fn constant_spread(entries: &[BoundEntry]) -> f64 {
    let pos: Vec<f64> = entries.iter().map(|e| e.constant).filter(|&c| c > 0.0).collect();
    if pos.len() < 2 {
        return 1.0;
    }
    let max = pos.iter().cloned().fold(f64::MIN, f64::max);
    let min = pos.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

struct FamilyScan {
    lap: BoundEntry,
    lap_power: Option<BoundEntry>,
    dt: BoundEntry,
    dtt: BoundEntry,
    support_violations: usize,
    interior_zero_violations: usize,
    initial_dt_max: f64,
    admissibility: f64,
    scaled_decay: f64,
}

fn scan_radius(
    graph: &WeightedGraph,
    fam: &CutoffFamily,
    sample_dt: Option<f64>,
) -> FamilyScan {
    let r = fam.r;
    let interior: Vec<usize> = (0..graph.len()).filter(|&x| !graph.is_clipped(x)).collect();
    // Overshoot the support in time by 10% so off-support behavior is
    // sampled too.
    let t_end = fam.support_time() * 1.1;
    let steps = match sample_dt {
        Some(dt) => (t_end / dt).ceil() as usize,
        None => 400,
    };
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();

    let mut lap = BoundEntry { r, constant: 0.0, violations: 0, samples: 0 };
    let mut lap_power = BoundEntry { r, constant: 0.0, violations: 0, samples: 0 };
    let mut dt_e = BoundEntry { r, constant: 0.0, violations: 0, samples: 0 };
    let mut dtt_e = BoundEntry { r, constant: 0.0, violations: 0, samples: 0 };
    let mut support_violations = 0;
    let mut interior_zero_violations = 0;
    let mut admissibility = 0.0f64;
    let mut scaled_decay = 0.0f64;

    match fam.kind {
        FamilyKind::Compact => {
            let rp = r.powf(fam.theta1);
            let ra1 = r.powf(1.0 + fam.alpha);
            let rtt = r.powf(fam.theta1 / fam.theta2);
            let e_lo = rp;
            let e_hi = 2.0 * rp;
            let f_lo = (r / 2.0).powf(fam.theta1);
            let f_hi = (4.0 * r).powf(fam.theta1);
            let sup_r = fam.support_radius();
            let sup_t = fam.support_time();
            let mut lap_vals = vec![0.0; graph.len()];
            let mut lap_pow_vals = vec![0.0; graph.len()];
            for &t in &times {
                let vals = fam.values_at(t);
                let powered: Vec<f64> = vals.iter().map(|&v| v.powf(fam.s)).collect();
                laplacian_into(graph, &vals, &mut lap_vals);
                laplacian_into(graph, &powered, &mut lap_pow_vals);
                let tp = t.powf(fam.theta2);
                let g1 = fam.theta2 * t.powf(fam.theta2 - 1.0) / rp;
                let g2 = fam.theta2 * (fam.theta2 - 1.0) * t.powf(fam.theta2 - 2.0) / rp;
                for &x in &interior {
                    let shell = fam.spatial[x] + tp;
                    let in_f = f_lo <= shell && shell <= f_hi;
                    let in_e = e_lo <= shell && shell <= e_hi;
                    let arg = shell / rp;

                    let q_lap = (-lap_vals[x]).max(0.0);
                    lap.samples += 1;
                    if in_f {
                        lap.constant = lap.constant.max(q_lap * ra1);
                    } else if q_lap > 0.0 {
                        lap.violations += 1;
                    }

                    let q_pow = (-lap_pow_vals[x]).max(0.0);
                    let env = vals[x].powf(fam.s - 1.0) / ra1;
                    lap_power.samples += 1;
                    if in_f && env > 0.0 {
                        lap_power.constant = lap_power.constant.max(q_pow / env);
                    } else if q_pow > 0.0 {
                        lap_power.violations += 1;
                    }

                    let d1 = fam.profiles.phi_d1(arg);
                    let q_dt = (d1 * g1).abs();
                    dt_e.samples += 1;
                    if in_e {
                        dt_e.constant = dt_e.constant.max(q_dt * rtt);
                    } else if q_dt > 0.0 {
                        dt_e.violations += 1;
                    }

                    let q_dtt = (fam.profiles.phi_d2(arg) * g1 * g1 + d1 * g2).abs();
                    dtt_e.samples += 1;
                    if in_e {
                        dtt_e.constant = dtt_e.constant.max(q_dtt * rtt * rtt);
                    } else if q_dtt > 0.0 {
                        dtt_e.violations += 1;
                    }

                    if (fam.dist[x] > sup_r || t > sup_t) && vals[x] != 0.0 {
                        support_violations += 1;
                    }
                }
            }
        }
        FamilyKind::Exponential => {
            let ra1 = r.powf(1.0 + fam.alpha);
            let ra_half = r.powf(0.5 * (1.0 + fam.alpha));
            let ts = fam.t_scale();
            let mut initial_dt = 0.0f64;
            for &x in &interior {
                initial_dt = initial_dt.max(fam.dt(x, 0.0).abs());
            }
            let decay: Vec<f64> =
                fam.dist.iter().map(|&d| (-fam.delta * d / r).exp()).collect();
            let adm_weight: Vec<f64> =
                fam.dist.iter().map(|&d| (fam.delta * d).exp()).collect();
            let j_shift = (-fam.delta * fam.j / r).exp();
            for &t in &times {
                let u = t / ts;
                let eta = fam.profiles.eta(u);
                let eta_d1 = fam.profiles.eta_d1(u);
                let eta_d2 = fam.profiles.eta_d2(u);
                let eta_s = eta.powf(fam.s);
                let dt_scale = fam.s / ts * eta.powf(fam.s - 1.0) * eta_d1;
                let dtt_scale = fam.s / (ts * ts)
                    * ((fam.s - 1.0) * eta.powf(fam.s - 2.0) * eta_d1 * eta_d1
                        + eta.powf(fam.s - 1.0) * eta_d2);
                let in_slab = ts <= t && t <= 2.0 * ts;
                let env_dt_t = if in_slab { eta.powf(fam.s - 1.0) / ra_half } else { 0.0 };
                let env_dtt_t = if in_slab { eta.powf(fam.s - 2.0) / ra1 } else { 0.0 };
                for &x in &interior {
                    let d = fam.dist[x];

                    let q_lap = (eta_s * fam.lap_spatial[x]).abs();
                    let env_lap = if d > r { eta_s * decay[x] / ra1 } else { 0.0 };
                    lap.samples += 1;
                    if env_lap > 0.0 {
                        lap.constant = lap.constant.max(q_lap / env_lap);
                    } else if q_lap > 0.0 {
                        if d <= r {
                            interior_zero_violations += 1;
                        }
                        lap.violations += 1;
                    }

                    let q_dt = (dt_scale * fam.spatial[x]).abs();
                    let env_dt = env_dt_t * decay[x];
                    dt_e.samples += 1;
                    if env_dt > 0.0 {
                        dt_e.constant = dt_e.constant.max(q_dt / env_dt);
                    } else if q_dt > 0.0 {
                        dt_e.violations += 1;
                    }

                    let q_dtt = (dtt_scale * fam.spatial[x]).abs();
                    let env_dtt = env_dtt_t * decay[x];
                    dtt_e.samples += 1;
                    if env_dtt > 0.0 {
                        dtt_e.constant = dtt_e.constant.max(q_dtt / env_dtt);
                    } else if q_dtt > 0.0 {
                        dtt_e.violations += 1;
                    }

                    let peak = (eta_s * fam.spatial[x]).max(q_dt).max(q_dtt);
                    admissibility = admissibility.max(peak * adm_weight[x]);
                    scaled_decay = scaled_decay.max(peak * j_shift / decay[x]);
                }
            }
            return FamilyScan {
                lap,
                lap_power: None,
                dt: dt_e,
                dtt: dtt_e,
                support_violations: 0,
                interior_zero_violations,
                initial_dt_max: initial_dt,
                admissibility,
                scaled_decay,
            };
        }
    }
    FamilyScan {
        lap,
        lap_power: Some(lap_power),
        dt: dt_e,
        dtt: dtt_e,
        support_violations,
        interior_zero_violations: 0,
        initial_dt_max: 0.0,
        admissibility: 0.0,
        scaled_decay: 0.0,
    }
}

/// Measures every claimed envelope of `fam`'s family over `r_grid`,
/// rebuilding the family at each radius with the same parameters. Radii are
/// scanned in parallel.
pub fn verify_cutoff_bounds(
    graph: &WeightedGraph,
    metric: &PseudoMetric,
    fam: &CutoffFamily,
    r_grid: &[f64],
    sample_dt: Option<f64>,
) -> Result<BoundReport, CutoffError> {
    if r_grid.is_empty() {
        return Err(CutoffError::BadParameter("radius grid must be nonempty"));
    }
    let r_max = r_grid.iter().cloned().fold(f64::MIN, f64::max);
    if fam.kind == FamilyKind::Compact && graph.clipped_count() > 0 {
        let needed = 4.0 * r_max;
        let available = metric.max_distance();
        if needed > available {
            return Err(CutoffError::InsufficientTruncation { needed, available });
        }
    }
    let mut params = CutoffParams {
        r: fam.r,
        alpha: fam.alpha,
        delta: fam.delta,
        s: fam.s,
        theta: Some((fam.theta1, fam.theta2)),
        r0: 2.0,
    };
    // Validate every radius up front so parallel workers cannot fail.
    let mut families = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        params.r = r;
        families.push(cutoff_family(graph, metric, fam.kind, &params)?);
    }
    let scans = parallel_map(families.len(), |i| scan_radius(graph, &families[i], sample_dt));

    let mut report = BoundReport {
        family: fam.kind,
        r_grid: r_grid.to_vec(),
        laplacian_bound: Vec::new(),
        laplacian_power_bound: if fam.kind == FamilyKind::Compact {
            Some(Vec::new())
        } else {
            None
        },
        time_derivative_bound: Vec::new(),
        second_time_bound: Vec::new(),
        support_violations: 0,
        interior_zero_violations: 0,
        initial_dt_max: 0.0,
        admissibility_constant: 0.0,
        scaled_decay_constant: 0.0,
        constants_bounded: false,
        all_indicators_clean: false,
    };
    for s in scans {
        report.laplacian_bound.push(s.lap);
        if let (Some(list), Some(entry)) = (report.laplacian_power_bound.as_mut(), s.lap_power) {
            list.push(entry);
        }
        report.time_derivative_bound.push(s.dt);
        report.second_time_bound.push(s.dtt);
        report.support_violations += s.support_violations;
        report.interior_zero_violations += s.interior_zero_violations;
        report.initial_dt_max = report.initial_dt_max.max(s.initial_dt_max);
        report.admissibility_constant = report.admissibility_constant.max(s.admissibility);
        report.scaled_decay_constant = report.scaled_decay_constant.max(s.scaled_decay);
    }
    report.constants_bounded = match fam.kind {
        FamilyKind::Compact => {
            constant_spread(&report.time_derivative_bound) <= 2.0
                && constant_spread(&report.second_time_bound) <= 2.0
        }
        FamilyKind::Exponential => constant_spread(&report.laplacian_bound) <= 2.0,
    };
    let total_violations = report
        .laplacian_bound
        .iter()
        .chain(report.laplacian_power_bound.iter().flatten())
        .chain(&report.time_derivative_bound)
        .chain(&report.second_time_bound)
        .map(|e| e.violations)
        .sum::<usize>()
        + report.support_violations
        + report.interior_zero_violations;
    report.all_indicators_clean = total_violations == 0;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationVerdict {
    /// Premise holds everywhere, some vertex vanishes, and propagation
    /// confirmed the function is identically zero.
    AllZero,
    /// Premise holds everywhere but the function never vanishes, so there is
    /// nothing to propagate.
    NoVanishingPoint,
    /// The differential premise fails at some vertex.
    PremiseViolated,
    /// Propagation from a vanishing vertex met a nonzero neighbor; this
    /// certifies a premise violation at the frontier vertex.
    Conflict,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropagationReport {
    pub verdict: PropagationVerdict,
    pub zero_vertex: Option<usize>,
    /// Vertices where `|Δψ^γ| ≤ C ψ^β F` fails (capped at 32).
    pub premise_violations: Vec<usize>,
    pub premise_violation_count: usize,
    /// Vertices confirmed zero by the propagation sweep.
    pub propagated: usize,
    /// For a conflict: path of vanishing vertices from the starting vertex
    /// to the frontier, ending at the offending nonzero neighbor.
    pub witness: Vec<usize>,
}

/// Checks the premise `|Δψ^γ| ≤ C ψ^β F` at every vertex, then propagates
/// zeros breadth-first: on a connected graph a nonnegative ψ obeying the
/// premise and vanishing somewhere must vanish everywhere.
pub fn zero_propagation_check(
    graph: &WeightedGraph,
    psi: &GraphFunction,
    gamma: f64,
    beta: f64,
    f: &GraphFunction,
    c: f64,
) -> Result<PropagationReport, CutoffError> {
    assert!(gamma > 0.0 && beta > 0.0 && c > 0.0);
    if !graph.is_connected() {
        return Err(CutoffError::Disconnected);
    }
    for x in 0..graph.len() {
        if psi.value(x) < 0.0 {
            return Err(CutoffError::NegativeFunction { vertex: x, value: psi.value(x) });
        }
        if f.value(x) < 0.0 {
            return Err(CutoffError::NegativeFunction { vertex: x, value: f.value(x) });
        }
    }
    let n = graph.len();
    let powered: Vec<f64> = (0..n).map(|x| psi.value(x).powf(gamma)).collect();
    let mut lap = vec![0.0; n];
    laplacian_into(graph, &powered, &mut lap);

    let mut premise_violations = Vec::new();
    let mut premise_violation_count = 0;
    for x in 0..n {
        let lhs = lap[x].abs();
        let rhs = c * psi.value(x).powf(beta) * f.value(x);
        let scale: f64 = graph
            .neighbors(x)
            .map(|(y, w)| w * (powered[x].abs() + powered[y].abs()))
            .sum::<f64>()
            / graph.mu(x);
        if lhs > rhs * (1.0 + 1e-9) + 1e-14 * scale {
            premise_violation_count += 1;
            if premise_violations.len() < 32 {
                premise_violations.push(x);
            }
        }
    }

    let zero_vertex = (0..n).find(|&x| psi.value(x) == 0.0);
    if premise_violation_count > 0 {
        return Ok(PropagationReport {
            verdict: PropagationVerdict::PremiseViolated,
            zero_vertex,
            premise_violations,
            premise_violation_count,
            propagated: 0,
            witness: Vec::new(),
        });
    }
    let Some(start) = zero_vertex else {
        return Ok(PropagationReport {
            verdict: PropagationVerdict::NoVanishingPoint,
            zero_vertex: None,
            premise_violations,
            premise_violation_count,
            propagated: 0,
            witness: Vec::new(),
        });
    };

    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut propagated = 1;
    while let Some(x) = queue.pop_front() {
        for (y, _) in graph.neighbors(x) {
            if seen[y] {
                continue;
            }
            if psi.value(y) != 0.0 {
                // Premise at x forces every neighbor of a zero to vanish;
                // reaching a nonzero value certifies a violation at x.
                let mut witness = vec![y, x];
                let mut p = parent[x];
                while p != usize::MAX {
                    witness.push(p);
                    p = parent[p];
                }
                witness.reverse();
                return Ok(PropagationReport {
                    verdict: PropagationVerdict::Conflict,
                    zero_vertex: Some(start),
                    premise_violations: vec![x],
                    premise_violation_count: 1,
                    propagated,
                    witness,
                });
            }
            seen[y] = true;
            parent[y] = x;
            propagated += 1;
            queue.push_back(y);
        }
    }
    Ok(PropagationReport {
        verdict: PropagationVerdict::AllZero,
        zero_vertex: Some(start),
        premise_violations,
        premise_violation_count,
        propagated,
        witness: Vec::new(),
    })
}
