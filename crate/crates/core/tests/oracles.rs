//! Cross-checks against independent reference implementations: dense
//! matrix algebra for the pairing identities, Floyd-Warshall for distances,
//! and a high-order integrator for the time stepper.

mod common;

use common::{random_function, random_graph};
use graphwave_core::calculus::{integration_by_parts_check, laplacian_apply};
use graphwave_core::graph::{homogeneous_tree, lattice_zn, GraphFunction, WeightedGraph};
use graphwave_core::hypothesis::Potential;
use graphwave_core::metric::PseudoMetric;
use graphwave_core::simulate::{integrate_wave, stable_dt, BoundaryPolicy, WaveConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Dense Laplacian as an explicit matrix, assembled straight from the
/// definition without touching the CSR iteration order.
fn dense_laplacian(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut mat = vec![vec![0.0; n]; n];
    for x in 0..n {
        let mu = g.mu(x);
        for (y, w) in g.neighbors(x) {
            mat[x][y] += w / mu;
            mat[x][x] -= w / mu;
        }
    }
    mat
}

fn matvec(mat: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    mat.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

#[test]
fn laplacian_matches_dense_matrix() {
    for seed in 0..40 {
        let g = random_graph(seed, 150);
        let f = random_function(seed ^ 0x5a5a, &g);
        let fast = laplacian_apply(&g, &f);
        let dense = matvec(&dense_laplacian(&g), f.values());
        let scale = dense.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for x in 0..g.len() {
            assert!(
                (fast.value(x) - dense[x]).abs() <= 1e-13 * scale,
                "seed {seed} vertex {x}"
            );
        }
    }
}

#[test]
fn pairing_identity_matches_dense_double_sum() {
    // The three pairings recomputed with dense linear algebra, summed in
    // plain index order.
    for seed in 100..200 {
        let g = random_graph(seed, 200);
        let f = random_function(seed ^ 0x11, &g);
        let h = random_function(seed ^ 0x22, &g);
        let triple = integration_by_parts_check(&g, &f, &h).expect("unclipped random graph");
        let mat = dense_laplacian(&g);
        let df = matvec(&mat, f.values());
        let dh = matvec(&mat, h.values());
        let n = g.len();
        let lhs: f64 = (0..n).map(|x| df[x] * h.value(x) * g.mu(x)).sum();
        let rhs: f64 = (0..n).map(|x| f.value(x) * dh[x] * g.mu(x)).sum();
        let mut middle = 0.0;
        for x in 0..n {
            for (y, w) in g.neighbors(x) {
                middle -= 0.5 * w * (f.value(y) - f.value(x)) * (h.value(y) - h.value(x));
            }
        }
        let scale = triple.scale.max(1.0);
        assert!((triple.lhs - lhs).abs() <= 1e-12 * scale, "seed {seed}");
        assert!((triple.middle - middle).abs() <= 1e-12 * scale, "seed {seed}");
        assert!((triple.rhs - rhs).abs() <= 1e-12 * scale, "seed {seed}");
        assert!(triple.agrees(1e-12), "seed {seed}: identity itself");
    }
}

/// Hop distances by Floyd-Warshall on the adjacency structure.
fn floyd_warshall_hops(g: &WeightedGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let big = 1e18;
    let mut d = vec![vec![big; n]; n];
    for x in 0..n {
        d[x][x] = 0.0;
        for (y, _) in g.neighbors(x) {
            d[x][y] = 1.0;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

#[test]
fn hop_metric_matches_floyd_warshall() {
    for seed in 300..320 {
        let g = random_graph(seed, 120);
        let m = PseudoMetric::combinatorial(&g).unwrap();
        let fw = floyd_warshall_hops(&g);
        let base = g.base_vertex();
        for x in 0..g.len() {
            assert_eq!(m.distance(x), fw[base][x], "seed {seed} vertex {x}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let a = rng.random_range(0..g.len());
            let b = rng.random_range(0..g.len());
            assert_eq!(m.distance_between(&g, a, b), fw[a][b], "seed {seed} pair {a},{b}");
        }
    }
}

#[test]
fn euclidean_metric_matches_coordinates() {
    let g = lattice_zn(2, 12.0).unwrap();
    let m = PseudoMetric::euclidean(&g).unwrap();
    for x in 0..g.len() {
        let c = g.coords(x).unwrap();
        let direct = ((c[0] * c[0] + c[1] * c[1]) as f64).sqrt();
        assert!((m.distance(x) - direct).abs() <= 1e-12 * direct.max(1.0));
        assert_eq!(m.distance_squared(x), (c[0] * c[0] + c[1] * c[1]) as f64);
    }
}

/// RK4 on the first-order system `(u, w)' = (w, Δu + v|u|^σ)`, exterior
/// edges damped to zero ghosts, time-independent potential.
fn rk4_reference(
    g: &WeightedGraph,
    potential: &Potential,
    sigma: f64,
    u0: &[f64],
    u1: &[f64],
    h: f64,
    steps: usize,
) -> Vec<Vec<f64>> {
    let n = g.len();
    let rhs = |u: &[f64], w: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut lap = vec![0.0; n];
        graphwave_core::calculus::laplacian_into(g, u, &mut lap);
        for x in 0..n {
            let ext = g.exterior_weight(x);
            if ext > 0.0 {
                lap[x] -= ext * u[x] / g.mu(x);
            }
            lap[x] += potential.value(x, 0.0) * u[x].abs().powf(sigma);
        }
        (w.to_vec(), lap)
    };
    let mut u = u0.to_vec();
    let mut w = u1.to_vec();
    let mut states = vec![u.clone()];
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    for _ in 0..steps {
        let (k1u, k1w) = rhs(&u, &w);
        let (k2u, k2w) = rhs(&axpy(&u, h / 2.0, &k1u), &axpy(&w, h / 2.0, &k1w));
        let (k3u, k3w) = rhs(&axpy(&u, h / 2.0, &k2u), &axpy(&w, h / 2.0, &k2w));
        let (k4u, k4w) = rhs(&axpy(&u, h, &k3u), &axpy(&w, h, &k3w));
        for x in 0..n {
            u[x] += h / 6.0 * (k1u[x] + 2.0 * k2u[x] + 2.0 * k3u[x] + k4u[x]);
            w[x] += h / 6.0 * (k1w[x] + 2.0 * k2w[x] + 2.0 * k3w[x] + k4w[x]);
        }
        states.push(u.clone());
    }
    states
}

fn leapfrog_vs_rk4(g: &WeightedGraph, u0: GraphFunction, u1: GraphFunction, sigma: f64) -> f64 {
    assert!(g.len() <= 50);
    let dt = 1.0 / 64.0;
    assert!(dt < stable_dt(g, 1.0));
    let mut cfg = WaveConfig::new(1.0);
    cfg.dt = Some(dt);
    cfg.boundary = BoundaryPolicy::ZeroExterior;
    let traj = integrate_wave(g, &Potential::one(), sigma, &u0, &u1, &cfg, None).unwrap();
    let refined = rk4_reference(g, &Potential::one(), sigma, u0.values(), u1.values(), dt / 100.0, 64 * 100);
    let scale = refined
        .iter()
        .flat_map(|s| s.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()))
        .max(1e-30);
    let mut worst = 0.0f64;
    for (k, snap) in traj.snapshots.iter().enumerate() {
        let reference = &refined[traj.snapshot_steps[k] * 100];
        for x in 0..g.len() {
            worst = worst.max((snap[x] - reference[x]).abs() / scale);
        }
    }
    worst
}

#[test]
fn leapfrog_agrees_with_rk4_on_line() {
    let g = lattice_zn(1, 10.0).unwrap();
    let u0 = GraphFunction::from_fn(&g, |x| {
        let c = g.coords(x).unwrap()[0] as f64;
        0.5 * (-c * c / 9.0).exp()
    });
    let u1 = GraphFunction::zeros(&g);
    let worst = leapfrog_vs_rk4(&g, u0, u1, 2.0);
    assert!(worst <= 1e-4, "relative deviation {worst}");
}

#[test]
fn leapfrog_agrees_with_rk4_on_tree() {
    let g = homogeneous_tree(2, 4).unwrap();
    assert!(g.len() <= 50);
    let u0 = GraphFunction::indicator(&g, g.base_vertex(), 0.8);
    let u1 = GraphFunction::indicator(&g, g.base_vertex(), 0.3);
    let worst = leapfrog_vs_rk4(&g, u0, u1, 3.0);
    assert!(worst <= 1e-4, "relative deviation {worst}");
}
