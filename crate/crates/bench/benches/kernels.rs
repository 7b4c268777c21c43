//! Hot-path benchmarks: Laplacian application, wave stepping, growth-check
//! sweeps, and metric/ball construction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use graphwave_core::calculus::laplacian_into;
use graphwave_core::graph::{lattice_zn, GraphFunction};
use graphwave_core::hypothesis::{growth_check, GrowthCondition, GrowthParams, Potential};
use graphwave_core::metric::PseudoMetric;
use graphwave_core::simulate::{integrate_wave, stable_dt, WaveConfig};

fn bench_laplacian(c: &mut Criterion) {
    let g = lattice_zn(2, 60.0).unwrap();
    let m = PseudoMetric::euclidean(&g).unwrap();
    let f: Vec<f64> = (0..g.len()).map(|x| (-m.distance(x) / 10.0).exp()).collect();
    let mut out = vec![0.0; g.len()];
    c.bench_function("laplacian_apply_z2_r60", |b| {
        b.iter(|| {
            laplacian_into(&g, black_box(&f), &mut out);
            black_box(out[0])
        })
    });
}

fn bench_wave_steps(c: &mut Criterion) {
    let g = lattice_zn(2, 40.0).unwrap();
    let m = PseudoMetric::euclidean(&g).unwrap();
    let u0 = GraphFunction::from_fn(&g, |x| {
        let d = m.distance(x);
        0.01 * (-d * d / 16.0).exp()
    });
    let u1 = GraphFunction::zeros(&g);
    let dt = stable_dt(&g, 0.5);
    let mut config = WaveConfig::new(dt * 50.0);
    config.dt = Some(dt);
    config.snapshot_stride = 1_000_000;
    c.bench_function("leapfrog_50_steps_z2_r40", |b| {
        b.iter(|| {
            let traj =
                integrate_wave(&g, &Potential::one(), 2.0, &u0, &u1, &config, None).unwrap();
            black_box(traj.sup_norms.len())
        })
    });
}

fn bench_growth_check(c: &mut Criterion) {
    let g = lattice_zn(2, 40.0).unwrap();
    let m = PseudoMetric::euclidean(&g).unwrap();
    let potential = Potential::one();
    let params = GrowthParams::new(vec![5.0, 10.0, 15.0, 20.0]);
    c.bench_function("growth_ball_volume_z2_r40", |b| {
        b.iter(|| {
            let v = growth_check(&g, &m, &potential, 2.0, 1.0, GrowthCondition::BallVolume, &params)
                .unwrap();
            black_box(v.sup_ratio)
        })
    });
}

fn bench_ball_construction(c: &mut Criterion) {
    let g = lattice_zn(2, 60.0).unwrap();
    c.bench_function("euclidean_metric_z2_r60", |b| {
        b.iter(|| {
            let m = PseudoMetric::euclidean(black_box(&g)).unwrap();
            black_box(m.max_distance())
        })
    });
    let m = PseudoMetric::euclidean(&g).unwrap();
    c.bench_function("closed_ball_z2_r60", |b| {
        b.iter(|| {
            let ball = m.closed_ball(black_box(30.0));
            black_box(ball.len())
        })
    });
}

criterion_group!(
    kernels,
    bench_laplacian,
    bench_wave_steps,
    bench_growth_check,
    bench_ball_construction
);
criterion_main!(kernels);
