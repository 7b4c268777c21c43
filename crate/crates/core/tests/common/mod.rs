//! Seeded random graphs and functions shared by the integration tests.

use graphwave_core::graph::{build_graph, GraphFunction, WeightedGraph};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Connected random graph: a random spanning tree plus extra edges, with
/// weights and measures in `[0.5, 2)`. Never clipped, at least 2 vertices.
pub fn random_graph(seed: u64, max_n: usize) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=max_n.max(2));
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((i, j, rng.random_range(0.5..2.0)));
    }
    let extra = rng.random_range(0..=n / 2);
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b && !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
            edges.push((a, b, rng.random_range(0.5..2.0)));
        }
    }
    let measure: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    build_graph(n, &edges, &measure).expect("random graph is valid by construction")
}

pub fn random_function(seed: u64, graph: &WeightedGraph) -> GraphFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GraphFunction::from_fn(graph, |_| rng.random_range(-1.0..1.0))
}

/// Same, but forced to zero on every clipped vertex.
#[allow(dead_code)]
pub fn random_interior_function(seed: u64, graph: &WeightedGraph) -> GraphFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GraphFunction::from_fn(graph, |x| {
        if graph.is_clipped(x) {
            0.0
        } else {
            rng.random_range(-1.0..1.0)
        }
    })
}
