//! Structural invariants under randomized inputs.

mod common;

use common::{random_function, random_graph, random_interior_function};
use graphwave_core::calculus::{integration_by_parts_check, laplacian_apply};
use graphwave_core::graph::{volume, GraphFunction};
use graphwave_core::metric::PseudoMetric;
use graphwave_core::simulate::stable_dt;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(seed in 0u64..1 << 48, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = random_graph(seed, 80);
        let f = random_function(seed ^ 1, &g);
        let h = random_function(seed ^ 2, &g);
        let combo = GraphFunction::from_fn(&g, |x| a * f.value(x) + b * h.value(x));
        let left = laplacian_apply(&g, &combo);
        let df = laplacian_apply(&g, &f);
        let dh = laplacian_apply(&g, &h);
        for x in 0..g.len() {
            let right = a * df.value(x) + b * dh.value(x);
            prop_assert!((left.value(x) - right).abs() <= 1e-12 * right.abs().max(1.0));
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero(seed in 0u64..1 << 48, c in -10.0f64..10.0) {
        let g = random_graph(seed, 80);
        let f = GraphFunction::constant(&g, c);
        let df = laplacian_apply(&g, &f);
        for x in 0..g.len() {
            prop_assert_eq!(df.value(x), 0.0);
        }
    }

    #[test]
    fn pairing_identity_holds(seed in 0u64..1 << 48) {
        let g = random_graph(seed, 120);
        let f = random_interior_function(seed ^ 3, &g);
        let h = random_function(seed ^ 4, &g);
        let triple = integration_by_parts_check(&g, &f, &h).unwrap();
        prop_assert!(triple.agrees(1e-12));
    }

    #[test]
    fn balls_nest_and_annuli_fill(seed in 0u64..1 << 48, r1 in 0.0f64..6.0, dr in 0.0f64..6.0) {
        let g = random_graph(seed, 120);
        let m = PseudoMetric::combinatorial(&g).unwrap();
        let r2 = r1 + dr;
        let small = m.closed_ball(r1);
        let big = m.closed_ball(r2);
        for x in small.iter() {
            prop_assert!(big.contains(x));
        }
        prop_assert!(volume(&g, &small) <= volume(&g, &big) + 1e-12);
        let ring = m.annulus(r1, r2);
        prop_assert_eq!(small.len() + ring.len(), big.len());
        for x in ring.iter() {
            prop_assert!(m.distance(x) > r1 && m.distance(x) <= r2);
        }
    }

    #[test]
    fn edge_displacement_bounded_by_jump(seed in 0u64..1 << 48) {
        let g = random_graph(seed, 120);
        let m = PseudoMetric::combinatorial(&g).unwrap();
        let j = m.jump();
        for x in 0..g.len() {
            for (y, _) in g.neighbors(x) {
                prop_assert!((m.distance(x) - m.distance(y)).abs() <= j + 1e-12);
            }
        }
    }

    #[test]
    fn stability_bound_scales_and_dominates(seed in 0u64..1 << 48, s in 0.05f64..1.0) {
        let g = random_graph(seed, 120);
        let full = stable_dt(&g, 1.0);
        prop_assert!((stable_dt(&g, s) - s * full).abs() <= 1e-12 * full);
        // The bound covers every row of the operator.
        for x in 0..g.len() {
            let row = 2.0 * g.row_weight_sum(x) / g.mu(x);
            prop_assert!(full <= 2.0 / row.sqrt() + 1e-12);
        }
    }

    #[test]
    fn symmetry_of_weights_and_positive_measure(seed in 0u64..1 << 48) {
        let g = random_graph(seed, 120);
        for x in 0..g.len() {
            prop_assert!(g.mu(x) > 0.0);
            for (y, w) in g.neighbors(x) {
                prop_assert!(w > 0.0);
                let back = g.neighbors(y).find(|&(z, _)| z == x).map(|(_, w)| w);
                prop_assert_eq!(back, Some(w));
            }
        }
    }
}
