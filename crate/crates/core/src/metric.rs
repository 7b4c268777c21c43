//! Pseudo-metrics on weighted graphs: symmetric, zero on the diagonal, and
//! satisfying the triangle inequality, but allowed to vanish off the
//! diagonal.
//!
//! A [`PseudoMetric`] caches the distance from every vertex to the graph's
//! base vertex, since every downstream quantity (balls, annuli, cutoff
//! profiles, growth sums) is a function of `d(base, ·)`. Pairwise distances
//! stay available for spot checks. The jump size, the largest distance
//! across any edge, controls how far the Laplacian can see in one step.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{VertexSet, WeightedGraph};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("graph is disconnected, distance from base is undefined")]
    Disconnected,
    #[error("metric requires integer coordinates, which this graph does not carry")]
    MissingCoordinates,
    #[error("metric requires a product graph with a fiber component")]
    MissingFiber,
    #[error("distance table must have {expected} entries, got {got}")]
    TableSize { expected: usize, got: usize },
    #[error("distance table entry ({x}, {y}) is negative or not finite")]
    BadTableEntry { x: usize, y: usize },
    #[error("distance table is not symmetric at ({x}, {y})")]
    NotSymmetric { x: usize, y: usize },
    #[error("distance table has nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality fails for table entries ({x}, {y}, {z})")]
    TriangleViolation { x: usize, y: usize, z: usize },
    #[error("vertex index {index} out of range for {len} vertices")]
    VertexOutOfRange { index: usize, len: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// Shortest-path hop count, ignoring edge weights.
    Combinatorial,
    /// Euclidean distance between integer coordinate labels.
    Euclidean,
    /// `sqrt(|x1-x2|^2 + d_W(w1,w2)^2)` on lattice×fiber products, where
    /// `d_W` is the hop distance inside the fiber.
    ProductEuclidean,
    /// Caller-supplied dense distance matrix.
    Table,
}

/// A pseudo-metric evaluated against one graph, with distances to the base
/// vertex precomputed.
#[derive(Clone, Debug)]
pub struct PseudoMetric {
    kind: MetricKind,
    base: usize,
    dist: Vec<f64>,
    /// Squared distances, computed exactly (integer arithmetic) where the
    /// kind allows; `dist[x]^2` otherwise.
    dist2: Vec<f64>,
    jump: f64,
    table: Option<Vec<f64>>,
}

fn bfs_hops(graph: &WeightedGraph, start: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    dist[start] = 0.0;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[x];
        for (y, _) in graph.neighbors(x) {
            if dist[y].is_infinite() {
                dist[y] = dx + 1.0;
                queue.push_back(y);
            }
        }
    }
    dist
}

fn coord_norm2(a: &[i64], b: &[i64]) -> f64 {
    let mut n2: i64 = 0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        n2 += d * d;
    }
    n2 as f64
}

impl PseudoMetric {
    /// Hop-count distance from the base vertex. Requires a connected graph.
    pub fn combinatorial(graph: &WeightedGraph) -> Result<Self, MetricError> {
        if !graph.is_connected() {
            return Err(MetricError::Disconnected);
        }
        let dist = bfs_hops(graph, graph.base_vertex());
        let dist2 = dist.iter().map(|d| d * d).collect();
        Ok(Self {
            kind: MetricKind::Combinatorial,
            base: graph.base_vertex(),
            dist,
            dist2,
            jump: if graph.edge_count() > 0 { 1.0 } else { 0.0 },
            table: None,
        })
    }

    /// Euclidean distance between coordinate labels. The square of the
    /// distance is exact integer arithmetic.
    pub fn euclidean(graph: &WeightedGraph) -> Result<Self, MetricError> {
        let base = graph.base_vertex();
        let origin = graph.coords(base).ok_or(MetricError::MissingCoordinates)?.to_vec();
        let mut dist = Vec::with_capacity(graph.len());
        let mut dist2 = Vec::with_capacity(graph.len());
        for x in 0..graph.len() {
            let n2 = coord_norm2(graph.coords(x).unwrap(), &origin);
            dist2.push(n2);
            dist.push(n2.sqrt());
        }
        let mut jump = 0.0f64;
        for x in 0..graph.len() {
            for (y, _) in graph.neighbors(x) {
                jump = jump.max(coord_norm2(graph.coords(x).unwrap(), graph.coords(y).unwrap()).sqrt());
            }
        }
        Ok(Self { kind: MetricKind::Euclidean, base, dist, dist2, jump, table: None })
    }

    /// Product distance `sqrt(|x1-x2|^2 + d_W(w1,w2)^2)` on lattice×fiber
    /// graphs. Requires the fiber to be connected.
    pub fn product(graph: &WeightedGraph) -> Result<Self, MetricError> {
        let base = graph.base_vertex();
        let w_count = graph.fiber_count().ok_or(MetricError::MissingFiber)?;
        let origin = graph.coords(base).unwrap().to_vec();
        let w_base = graph.fiber_index(base).unwrap();
        for w in 0..w_count {
            if !graph.fiber_distance(w_base, w).unwrap().is_finite() {
                return Err(MetricError::Disconnected);
            }
        }
        let mut dist = Vec::with_capacity(graph.len());
        let mut dist2 = Vec::with_capacity(graph.len());
        for x in 0..graph.len() {
            let dw = graph.fiber_distance(w_base, graph.fiber_index(x).unwrap()).unwrap();
            let n2 = coord_norm2(graph.coords(x).unwrap(), &origin) + dw * dw;
            dist2.push(n2);
            dist.push(n2.sqrt());
        }
        let mut jump = 0.0f64;
        for x in 0..graph.len() {
            for (y, _) in graph.neighbors(x) {
                let dw = graph
                    .fiber_distance(graph.fiber_index(x).unwrap(), graph.fiber_index(y).unwrap())
                    .unwrap();
                let d2 = coord_norm2(graph.coords(x).unwrap(), graph.coords(y).unwrap()) + dw * dw;
                jump = jump.max(d2.sqrt());
            }
        }
        Ok(Self { kind: MetricKind::ProductEuclidean, base, dist, dist2, jump, table: None })
    }

    /// Dense caller-supplied table, row-major with `n^2` entries. Validates
    /// symmetry, zero diagonal, nonnegativity, and the triangle inequality
    /// (exhaustively up to 128 vertices, on a deterministic sample of triples
    /// beyond that).
    pub fn from_table(graph: &WeightedGraph, table: Vec<f64>) -> Result<Self, MetricError> {
        let n = graph.len();
        if table.len() != n * n {
            return Err(MetricError::TableSize { expected: n * n, got: table.len() });
        }
        for x in 0..n {
            if table[x * n + x] != 0.0 {
                return Err(MetricError::NonzeroDiagonal(x));
            }
            for y in 0..n {
                let v = table[x * n + y];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(MetricError::BadTableEntry { x, y });
                }
                if v != table[y * n + x] {
                    return Err(MetricError::NotSymmetric { x, y });
                }
            }
        }
        let check = |x: usize, y: usize, z: usize| -> Result<(), MetricError> {
            let slack = 1e-9 * (1.0 + table[x * n + y] + table[y * n + z]);
            if table[x * n + z] > table[x * n + y] + table[y * n + z] + slack {
                return Err(MetricError::TriangleViolation { x, y, z });
            }
            Ok(())
        };
        if n <= 128 {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        check(x, y, z)?;
                    }
                }
            }
        } else {
            // Deterministic stride walk over triples; covers every vertex in
            // each role without an RNG dependency.
            for i in 0..(100 * n) {
                let x = i % n;
                let y = (i * 7 + 3) % n;
                let z = (i * 131 + 17) % n;
                check(x, y, z)?;
            }
        }

        let base = graph.base_vertex();
        let dist: Vec<f64> = (0..n).map(|x| table[base * n + x]).collect();
        let dist2 = dist.iter().map(|d| d * d).collect();
        let mut jump = 0.0f64;
        for x in 0..n {
            for (y, _) in graph.neighbors(x) {
                jump = jump.max(table[x * n + y]);
            }
        }
        Ok(Self { kind: MetricKind::Table, base, dist, dist2, jump, table: Some(table) })
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn base(&self) -> usize {
        self.base
    }

    /// `d(base, x)`.
    pub fn distance(&self, x: usize) -> f64 {
        self.dist[x]
    }

    /// `d(base, x)^2`, exact where the kind supports integer arithmetic.
    pub fn distance_squared(&self, x: usize) -> f64 {
        self.dist2[x]
    }

    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    /// Largest edge length: `max { d(x, y) : x ∼ y }`.
    pub fn jump(&self) -> f64 {
        self.jump
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().fold(0.0f64, |m, &d| m.max(d))
    }

    /// Pairwise distance. Combinatorial distances run one shortest-path
    /// search per call, so prefer [`PseudoMetric::distance`] for base
    /// distances.
    pub fn distance_between(&self, graph: &WeightedGraph, x: usize, y: usize) -> f64 {
        match self.kind {
            MetricKind::Combinatorial => {
                if x == y {
                    0.0
                } else {
                    bfs_hops(graph, x)[y]
                }
            }
            MetricKind::Euclidean => {
                coord_norm2(graph.coords(x).unwrap(), graph.coords(y).unwrap()).sqrt()
            }
            MetricKind::ProductEuclidean => {
                let dw = graph
                    .fiber_distance(graph.fiber_index(x).unwrap(), graph.fiber_index(y).unwrap())
                    .unwrap();
                (coord_norm2(graph.coords(x).unwrap(), graph.coords(y).unwrap()) + dw * dw).sqrt()
            }
            MetricKind::Table => self.table.as_ref().unwrap()[x * self.dist.len() + y],
        }
    }

    /// Closed ball `{x : d(base, x) ≤ r}`.
    pub fn closed_ball(&self, r: f64) -> VertexSet {
        VertexSet::from_sorted(
            self.dist
                .iter()
                .enumerate()
                .filter(|(_, &d)| d <= r)
                .map(|(i, _)| i as u32)
                .collect(),
        )
    }

    /// Annulus `{x : r1 < d(base, x) ≤ r2}`.
    pub fn annulus(&self, r1: f64, r2: f64) -> VertexSet {
        VertexSet::from_sorted(
            self.dist
                .iter()
                .enumerate()
                .filter(|(_, &d)| r1 < d && d <= r2)
                .map(|(i, _)| i as u32)
                .collect(),
        )
    }
}
