//! Weighted graphs `(V, ω, μ)`: symmetric nonnegative edge weights `ω` with
//! zero diagonal and a strictly positive vertex measure `μ`.
//!
//! Storage is compressed sparse rows over `u32` vertex ids, which keeps the
//! million-vertex trees and lattices used by the checkers comfortably in
//! memory. Builders for truncated integer lattices, rooted trees, and
//! lattice×fiber products record which vertices lost neighbors to the
//! truncation, so downstream code can tell faithful Laplacian values from
//! clipped ones.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("vertex index {index} out of range for {len} vertices")]
    VertexOutOfRange { index: usize, len: usize },
    #[error("loop edge at vertex {0} is not allowed")]
    LoopEdge(usize),
    #[error("edge weight for ({x}, {y}) must be positive and finite, got {weight}")]
    BadWeight { x: usize, y: usize, weight: f64 },
    #[error("conflicting duplicate weights for edge ({x}, {y}): {first} vs {second}")]
    ConflictingDuplicate { x: usize, y: usize, first: f64, second: f64 },
    #[error("vertex measure at {vertex} must be positive and finite, got {value}")]
    BadMeasure { vertex: usize, value: f64 },
    #[error("lattice radius must be nonnegative and finite, got {0}")]
    BadRadius(f64),
    #[error("lattice dimension must be at least 1")]
    BadDimension,
    #[error("tree branching factor must be at least 2, got {0}")]
    BadBranching(usize),
    #[error("requested graph would have {0} vertices, above the supported limit")]
    TooLarge(u128),
    #[error("fiber graph must be nonempty")]
    EmptyFiber,
    #[error("description line {line}: {message}")]
    Description { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which builder produced a graph. `Explicit` covers hand-assembled edge
/// lists and description files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    Explicit,
    Lattice { dim: usize },
    Tree { branching: usize, depth: usize },
    Product { dim: usize, fiber_count: usize },
}

/// Per-vertex coordinate labels. Metrics other than hop count need these.
#[derive(Clone, Debug)]
pub(crate) enum Labels {
    None,
    /// Flattened integer coordinates, `dim` entries per vertex.
    Lattice { dim: usize, coords: Vec<i64> },
    /// Lattice coordinates plus a fiber index per vertex, and the dense hop
    /// distance table of the fiber graph.
    Product {
        dim: usize,
        coords: Vec<i64>,
        fiber: Vec<u32>,
        fiber_count: usize,
        fiber_dist: Vec<f64>,
    },
}

/// A finite weighted graph with vertex measure.
///
/// Invariants enforced at construction: `ω(x,y) = ω(y,x) > 0` for every
/// stored edge, no loops, `μ > 0` everywhere. Disconnected graphs are
/// accepted but flagged, since most downstream statements assume
/// connectivity.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    weights: Vec<f64>,
    mu: Vec<f64>,
    /// Edge weight lost to truncation per vertex (0 where nothing was cut).
    exterior: Vec<f64>,
    clipped_count: usize,
    base: usize,
    degree_bound: f64,
    connected: bool,
    truncation_radius: Option<f64>,
    family: GraphFamily,
    pub(crate) labels: Labels,
}

impl WeightedGraph {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn mu(&self, x: usize) -> f64 {
        self.mu[x]
    }

    pub fn mu_values(&self) -> &[f64] {
        &self.mu
    }

    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.neighbors[range.clone()]
            .iter()
            .zip(&self.weights[range])
            .map(|(&n, &w)| (n as usize, w))
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Sum of stored edge weights at `x`, not counting truncated neighbors.
    pub fn row_weight_sum(&self, x: usize) -> f64 {
        let range = self.offsets[x]..self.offsets[x + 1];
        self.weights[range].iter().sum()
    }

    /// Weight of edges `x` lost to the truncation boundary.
    pub fn exterior_weight(&self, x: usize) -> f64 {
        self.exterior[x]
    }

    /// True when the truncation removed at least one neighbor of `x`, so the
    /// Laplacian at `x` differs from its untruncated value.
    pub fn is_clipped(&self, x: usize) -> bool {
        self.exterior[x] > 0.0
    }

    pub fn clipped_count(&self) -> usize {
        self.clipped_count
    }

    /// Distinguished origin: the lattice origin, tree root, or vertex 0.
    pub fn base_vertex(&self) -> usize {
        self.base
    }

    /// Re-centers the graph on a different origin. Metrics built afterwards
    /// measure distances from the new base.
    pub fn with_base_vertex(mut self, x: usize) -> Result<Self, GraphError> {
        if x >= self.len() {
            return Err(GraphError::VertexOutOfRange { index: x, len: self.len() });
        }
        self.base = x;
        Ok(self)
    }

    /// `max_x (Σ_y ω(x,y)) / μ(x)`, with truncated edges counted, so the
    /// value matches the untruncated graph for the built-in families.
    pub fn degree_bound(&self) -> f64 {
        self.degree_bound
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn truncation_radius(&self) -> Option<f64> {
        self.truncation_radius
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    /// Integer coordinates of `x` for lattice and product graphs.
    pub fn coords(&self, x: usize) -> Option<&[i64]> {
        match &self.labels {
            Labels::Lattice { dim, coords } | Labels::Product { dim, coords, .. } => {
                Some(&coords[x * dim..(x + 1) * dim])
            }
            Labels::None => None,
        }
    }

    /// Fiber index of `x` for product graphs.
    pub fn fiber_index(&self, x: usize) -> Option<usize> {
        match &self.labels {
            Labels::Product { fiber, .. } => Some(fiber[x] as usize),
            _ => None,
        }
    }

    pub fn fiber_count(&self) -> Option<usize> {
        match &self.labels {
            Labels::Product { fiber_count, .. } => Some(*fiber_count),
            _ => None,
        }
    }

    /// Hop distance between fiber vertices of a product graph.
    pub fn fiber_distance(&self, w1: usize, w2: usize) -> Option<f64> {
        match &self.labels {
            Labels::Product { fiber_count, fiber_dist, .. } => {
                Some(fiber_dist[w1 * fiber_count + w2])
            }
            _ => None,
        }
    }

    /// Serializes to the line-oriented description format:
    /// `graph <n>`, `base <x>`, one `mu <x> <value>` line per vertex, one
    /// `ext <x> <weight>` line per clipped vertex, and one
    /// `edge <x> <y> <weight>` line per undirected edge.
    pub fn to_description(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {}", self.len());
        let _ = writeln!(out, "base {}", self.base);
        for (x, m) in self.mu.iter().enumerate() {
            let _ = writeln!(out, "mu {x} {m}");
        }
        for (x, &w) in self.exterior.iter().enumerate() {
            if w > 0.0 {
                let _ = writeln!(out, "ext {x} {w}");
            }
        }
        for x in 0..self.len() {
            for (y, w) in self.neighbors(x) {
                if x < y {
                    let _ = writeln!(out, "edge {x} {y} {w}");
                }
            }
        }
        out
    }

    pub fn write_description_file(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_description())?;
        Ok(())
    }
}

/// A validated, sorted set of vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VertexSet {
    members: Vec<u32>,
}

impl VertexSet {
    pub fn new(graph: &WeightedGraph, indices: impl IntoIterator<Item = usize>) -> Result<Self, GraphError> {
        let len = graph.len();
        let mut members = Vec::new();
        for i in indices {
            if i >= len {
                return Err(GraphError::VertexOutOfRange { index: i, len });
            }
            members.push(i as u32);
        }
        members.sort_unstable();
        members.dedup();
        Ok(Self { members })
    }

    pub(crate) fn from_sorted(members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Self { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&(x as u32)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().map(|&i| i as usize)
    }
}

/// Total measure `Σ_{x∈S} μ(x)` of a vertex set.
pub fn volume(graph: &WeightedGraph, set: &VertexSet) -> f64 {
    set.iter().map(|x| graph.mu(x)).sum()
}

/// A real-valued function on the vertices of one graph.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFunction {
    values: Vec<f64>,
}

impl GraphFunction {
    pub fn from_values(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self, GraphError> {
        if values.len() != graph.len() {
            return Err(GraphError::VertexOutOfRange { index: values.len(), len: graph.len() });
        }
        Ok(Self { values })
    }

    pub fn from_fn(graph: &WeightedGraph, f: impl FnMut(usize) -> f64) -> Self {
        Self { values: (0..graph.len()).map(f).collect() }
    }

    pub fn constant(graph: &WeightedGraph, c: f64) -> Self {
        Self { values: vec![c; graph.len()] }
    }

    pub fn zeros(graph: &WeightedGraph) -> Self {
        Self::constant(graph, 0.0)
    }

    /// `amplitude` at `x`, zero elsewhere.
    pub fn indicator(graph: &WeightedGraph, x: usize, amplitude: f64) -> Self {
        let mut values = vec![0.0; graph.len()];
        values[x] = amplitude;
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Indices where the function is nonzero.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

struct Assembly {
    n: usize,
    /// Directed edge list; each undirected edge appears in both orientations.
    edges: Vec<(u32, u32, f64)>,
    mu: Vec<f64>,
    exterior: Vec<f64>,
    base: usize,
    truncation_radius: Option<f64>,
    family: GraphFamily,
    labels: Labels,
}

fn assemble(mut a: Assembly) -> WeightedGraph {
    a.edges.sort_unstable_by(|l, r| (l.0, l.1).cmp(&(r.0, r.1)));
    let mut offsets = vec![0usize; a.n + 1];
    for &(x, _, _) in &a.edges {
        offsets[x as usize + 1] += 1;
    }
    for i in 0..a.n {
        offsets[i + 1] += offsets[i];
    }
    let neighbors: Vec<u32> = a.edges.iter().map(|e| e.1).collect();
    let weights: Vec<f64> = a.edges.iter().map(|e| e.2).collect();

    let mut degree_bound = 0.0f64;
    for x in 0..a.n {
        let row: f64 = weights[offsets[x]..offsets[x + 1]].iter().sum();
        degree_bound = degree_bound.max((row + a.exterior[x]) / a.mu[x]);
    }

    let connected = {
        let mut seen = vec![false; a.n];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            let x = x as usize;
            for &y in &neighbors[offsets[x]..offsets[x + 1]] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == a.n
    };

    let clipped_count = a.exterior.iter().filter(|&&e| e > 0.0).count();

    WeightedGraph {
        offsets,
        neighbors,
        weights,
        mu: a.mu,
        exterior: a.exterior,
        clipped_count,
        base: a.base,
        degree_bound,
        connected,
        truncation_radius: a.truncation_radius,
        family: a.family,
        labels: a.labels,
    }
}

/// Builds a graph from an explicit undirected edge list and vertex measure.
///
/// Each `(x, y, ω)` may be listed in either orientation; listing a pair twice
/// is fine as long as the weights agree exactly. Loops, nonpositive weights,
/// and nonpositive measures are rejected. Disconnected input is accepted
/// (check [`WeightedGraph::is_connected`]).
pub fn build_graph(
    vertex_count: usize,
    edges: &[(usize, usize, f64)],
    measure: &[f64],
) -> Result<WeightedGraph, GraphError> {
    if vertex_count == 0 {
        return Err(GraphError::Empty);
    }
    if measure.len() != vertex_count {
        return Err(GraphError::BadMeasure { vertex: measure.len(), value: f64::NAN });
    }
    for (v, &m) in measure.iter().enumerate() {
        if !(m > 0.0 && m.is_finite()) {
            return Err(GraphError::BadMeasure { vertex: v, value: m });
        }
    }

    let mut seen: HashMap<(u32, u32), f64> = HashMap::new();
    for &(x, y, w) in edges {
        for &v in &[x, y] {
            if v >= vertex_count {
                return Err(GraphError::VertexOutOfRange { index: v, len: vertex_count });
            }
        }
        if x == y {
            return Err(GraphError::LoopEdge(x));
        }
        if !(w > 0.0 && w.is_finite()) {
            return Err(GraphError::BadWeight { x, y, weight: w });
        }
        let key = (x.min(y) as u32, x.max(y) as u32);
        if let Some(&prev) = seen.get(&key) {
            if prev != w {
                return Err(GraphError::ConflictingDuplicate {
                    x: key.0 as usize,
                    y: key.1 as usize,
                    first: prev,
                    second: w,
                });
            }
        } else {
            seen.insert(key, w);
        }
    }

    let mut directed = Vec::with_capacity(seen.len() * 2);
    for (&(x, y), &w) in &seen {
        directed.push((x, y, w));
        directed.push((y, x, w));
    }

    Ok(assemble(Assembly {
        n: vertex_count,
        edges: directed,
        mu: measure.to_vec(),
        exterior: vec![0.0; vertex_count],
        base: 0,
        truncation_radius: None,
        family: GraphFamily::Explicit,
        labels: Labels::None,
    }))
}

/// Enumerates integer points of the closed Euclidean ball `|x| ≤ radius` in
/// lexicographic order. Returns flattened coordinates.
fn enumerate_ball(dim: usize, radius: f64) -> Vec<i64> {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    let mut coords = Vec::new();
    let mut point = vec![0i64; dim];
    fn rec(point: &mut Vec<i64>, k: usize, dim: usize, r: i64, r2: f64, norm2: i64, out: &mut Vec<i64>) {
        if k == dim {
            out.extend_from_slice(point);
            return;
        }
        for c in -r..=r {
            let n2 = norm2 + c * c;
            if (n2 as f64) <= r2 {
                point[k] = c;
                rec(point, k + 1, dim, r, r2, n2, out);
            }
        }
    }
    rec(&mut point, 0, dim, r, r2, 0, &mut coords);
    coords
}

struct LatticeCore {
    coords: Vec<i64>,
    index: HashMap<Vec<i64>, u32>,
    edges: Vec<(u32, u32, f64)>,
    missing: Vec<f64>,
    origin: usize,
}

fn lattice_core(dim: usize, radius: f64) -> Result<LatticeCore, GraphError> {
    if dim == 0 {
        return Err(GraphError::BadDimension);
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(GraphError::BadRadius(radius));
    }
    let side = 2.0 * radius.floor() + 1.0;
    if side.powi(dim as i32) > 3.0e7 {
        return Err(GraphError::TooLarge(side.powi(dim as i32) as u128));
    }

    let coords = enumerate_ball(dim, radius);
    let n = coords.len() / dim;
    let mut index = HashMap::with_capacity(n);
    for i in 0..n {
        index.insert(coords[i * dim..(i + 1) * dim].to_vec(), i as u32);
    }
    let origin = index[&vec![0i64; dim]] as usize;

    let mut edges = Vec::new();
    let mut missing = vec![0.0f64; n];
    let mut probe = vec![0i64; dim];
    for i in 0..n {
        let p = &coords[i * dim..(i + 1) * dim];
        for k in 0..dim {
            for step in [-1i64, 1] {
                probe.copy_from_slice(p);
                probe[k] += step;
                match index.get(&probe) {
                    Some(&jj) => {
                        if step == 1 {
                            edges.push((i as u32, jj, 1.0));
                            edges.push((jj, i as u32, 1.0));
                        }
                    }
                    None => missing[i] += 1.0,
                }
            }
        }
    }
    Ok(LatticeCore { coords, index, edges, missing, origin })
}

/// Truncated integer lattice: vertices are the integer points with
/// `|x| ≤ radius` (closed Euclidean ball), nearest-neighbor edges of weight
/// 1, and `μ ≡ 2·dim`. The origin is the base vertex.
pub fn lattice_zn(dim: usize, radius: f64) -> Result<WeightedGraph, GraphError> {
    let core = lattice_core(dim, radius)?;
    let n = core.coords.len() / dim;
    let mu = vec![2.0 * dim as f64; n];
    Ok(assemble(Assembly {
        n,
        edges: core.edges,
        mu,
        exterior: core.missing,
        base: core.origin,
        truncation_radius: Some(radius),
        family: GraphFamily::Lattice { dim },
        labels: Labels::Lattice { dim, coords: core.coords },
    }))
}

/// Rooted tree in which every vertex of depth `< depth` has exactly
/// `branching` children; edges have weight 1 and `μ ≡ 1`. Vertices at the
/// final depth are truncation-clipped (they lose their children). The sphere
/// at hop distance `k` from the root has exactly `branching^k` vertices.
pub fn homogeneous_tree(branching: usize, depth: usize) -> Result<WeightedGraph, GraphError> {
    if branching < 2 {
        return Err(GraphError::BadBranching(branching));
    }
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=depth {
        total += level;
        level *= branching as u128;
        if total > 3.0e7 as u128 {
            return Err(GraphError::TooLarge(total));
        }
    }
    let n = total as usize;

    // BFS indexing: level k occupies [level_start(k), level_start(k+1)).
    // Children of the i-th vertex of level k sit contiguously in level k+1.
    let mut edges = Vec::with_capacity((n - 1) * 2);
    let mut level_start = 0usize;
    let mut level_size = 1usize;
    for _ in 0..depth {
        let next_start = level_start + level_size;
        for i in 0..level_size {
            let parent = (level_start + i) as u32;
            for c in 0..branching {
                let child = (next_start + i * branching + c) as u32;
                edges.push((parent, child, 1.0));
                edges.push((child, parent, 1.0));
            }
        }
        level_start = next_start;
        level_size *= branching;
    }

    let mut exterior = vec![0.0; n];
    for e in exterior.iter_mut().skip(level_start) {
        *e = branching as f64;
    }

    Ok(assemble(Assembly {
        n,
        edges,
        mu: vec![1.0; n],
        exterior,
        base: 0,
        truncation_radius: Some(depth as f64),
        family: GraphFamily::Tree { branching, depth },
        labels: Labels::None,
    }))
}

/// Product of a truncated lattice with a finite fiber graph `W`.
///
/// Vertices are pairs `(x, w)`; `(x1,w1) ∼ (x2,w2)` iff the lattice parts
/// are nearest neighbors and the fibers agree (weight 1), or the lattice
/// parts agree and `w1 ∼ w2` in `W` (weight `ω_W(w1,w2)`). The measure is
/// `μ(x,w) = max(2·dim, μ_W(w))` and the base vertex is `(0, fiber_base)`.
pub fn product_graph(
    dim: usize,
    radius: f64,
    fiber: &WeightedGraph,
    fiber_base: Option<usize>,
) -> Result<WeightedGraph, GraphError> {
    if fiber.is_empty() {
        return Err(GraphError::EmptyFiber);
    }
    let w_count = fiber.len();
    let w_base = fiber_base.unwrap_or(0);
    if w_base >= w_count {
        return Err(GraphError::VertexOutOfRange { index: w_base, len: w_count });
    }
    let core = lattice_core(dim, radius)?;
    let lat_n = core.coords.len() / dim;
    if (lat_n as u128) * (w_count as u128) > 3.0e7 as u128 {
        return Err(GraphError::TooLarge(lat_n as u128 * w_count as u128));
    }
    let n = lat_n * w_count;
    let at = |lat: u32, w: usize| lat * w_count as u32 + w as u32;

    let mut edges = Vec::new();
    for &(a, b, _) in &core.edges {
        // Lattice-direction edges, one per fiber layer. `core.edges` already
        // holds both orientations.
        for w in 0..w_count {
            edges.push((at(a, w), at(b, w), 1.0));
        }
    }
    for lat in 0..lat_n as u32 {
        for w1 in 0..w_count {
            for (w2, wt) in fiber.neighbors(w1) {
                edges.push((at(lat, w1), at(lat, w2), wt));
            }
        }
    }

    let mut mu = Vec::with_capacity(n);
    let mut exterior = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n * dim);
    let mut fiber_idx = Vec::with_capacity(n);
    let floor_mu = 2.0 * dim as f64;
    for lat in 0..lat_n {
        for w in 0..w_count {
            mu.push(floor_mu.max(fiber.mu(w)));
            exterior.push(core.missing[lat]);
            coords.extend_from_slice(&core.coords[lat * dim..(lat + 1) * dim]);
            fiber_idx.push(w as u32);
        }
    }

    // Hop distances inside the fiber; disconnected fibers yield +inf.
    let mut fiber_dist = vec![f64::INFINITY; w_count * w_count];
    for s in 0..w_count {
        let mut queue = std::collections::VecDeque::from([s]);
        fiber_dist[s * w_count + s] = 0.0;
        while let Some(v) = queue.pop_front() {
            let dv = fiber_dist[s * w_count + v];
            for (u, _) in fiber.neighbors(v) {
                if fiber_dist[s * w_count + u].is_infinite() {
                    fiber_dist[s * w_count + u] = dv + 1.0;
                    queue.push_back(u);
                }
            }
        }
    }

    let base = at(core.index[&vec![0i64; dim]], w_base) as usize;
    Ok(assemble(Assembly {
        n,
        edges,
        mu,
        exterior,
        base,
        truncation_radius: Some(radius),
        family: GraphFamily::Product { dim, fiber_count: w_count },
        labels: Labels::Product { dim, coords, fiber: fiber_idx, fiber_count: w_count, fiber_dist },
    }))
}

/// Parses the description format emitted by [`WeightedGraph::to_description`].
pub fn from_description(text: &str) -> Result<WeightedGraph, GraphError> {
    let mut lines = text.lines().enumerate();
    let err = |line: usize, message: String| GraphError::Description { line: line + 1, message };

    let (hdr_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| err(0, "empty description".into()))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some("graph") {
        return Err(err(hdr_line, "expected header `graph <vertex_count>`".into()));
    }
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| err(hdr_line, "bad vertex count in header".into()))?;
    if parts.next().is_some() {
        return Err(err(hdr_line, "trailing tokens after header".into()));
    }
    if n == 0 {
        return Err(GraphError::Empty);
    }

    let mut mu: Vec<Option<f64>> = vec![None; n];
    let mut edges = Vec::new();
    let mut base: Option<usize> = None;
    let mut exterior: Vec<f64> = vec![0.0; n];
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("base") => {
                let x: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad vertex in base line".into()))?;
                if x >= n {
                    return Err(err(ln, format!("base vertex {x} out of range")));
                }
                if base.replace(x).is_some() {
                    return Err(err(ln, "duplicate base line".into()));
                }
            }
            Some("ext") => {
                let x: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad vertex in ext line".into()))?;
                let w: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad weight in ext line".into()))?;
                if x >= n {
                    return Err(err(ln, format!("ext vertex {x} out of range")));
                }
                if !(w > 0.0 && w.is_finite()) {
                    return Err(err(ln, format!("ext weight must be positive, got {w}")));
                }
                if exterior[x] > 0.0 {
                    return Err(err(ln, format!("duplicate ext line for vertex {x}")));
                }
                exterior[x] = w;
            }
            Some("mu") => {
                let x: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad vertex in mu line".into()))?;
                let v: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad value in mu line".into()))?;
                if x >= n {
                    return Err(err(ln, format!("mu vertex {x} out of range")));
                }
                if mu[x].is_some() {
                    return Err(err(ln, format!("duplicate mu line for vertex {x}")));
                }
                mu[x] = Some(v);
            }
            Some("edge") => {
                let x: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad first vertex in edge line".into()))?;
                let y: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad second vertex in edge line".into()))?;
                let w: f64 = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(ln, "bad weight in edge line".into()))?;
                edges.push((x, y, w));
            }
            Some(other) => return Err(err(ln, format!("unknown directive `{other}`"))),
            None => unreachable!("blank lines skipped"),
        }
        if parts.next().is_some() {
            return Err(err(ln, "trailing tokens".into()));
        }
    }

    let measure: Vec<f64> = mu
        .into_iter()
        .enumerate()
        .map(|(x, m)| m.ok_or_else(|| GraphError::Description {
            line: 0,
            message: format!("missing mu line for vertex {x}"),
        }))
        .collect::<Result<_, _>>()?;

    let mut graph = build_graph(n, &edges, &measure)?;
    graph.base = base.unwrap_or(0);
    if exterior.iter().any(|&w| w > 0.0) {
        graph.clipped_count = exterior.iter().filter(|&&w| w > 0.0).count();
        let mut degree_bound = 0.0f64;
        for x in 0..n {
            let row: f64 = graph.neighbors(x).map(|(_, w)| w).sum();
            degree_bound = degree_bound.max((row + exterior[x]) / graph.mu[x]);
        }
        graph.degree_bound = degree_bound;
        graph.exterior = exterior;
    }
    Ok(graph)
}

pub fn from_description_file(path: &Path) -> Result<WeightedGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    from_description(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> WeightedGraph {
        build_graph(3, &[(0, 1, 1.0), (1, 2, 2.0)], &[1.0, 2.0, 1.0]).unwrap()
    }

    #[test]
    fn two_vertex_ratio() {
        let g = build_graph(2, &[(0, 1, 1.0)], &[1.0, 1.0]).unwrap();
        assert_eq!(g.degree_bound(), 1.0);
        assert_eq!(g.edge_count(), 1);
        assert!(g.is_connected());
    }

    #[test]
    fn loop_edge_rejected() {
        let e = build_graph(2, &[(1, 1, 1.0)], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(e, GraphError::LoopEdge(1)));
    }

    #[test]
    fn single_vertex_graph() {
        let g = build_graph(1, &[], &[3.0]).unwrap();
        assert_eq!(g.degree_bound(), 0.0);
        let all = VertexSet::new(&g, [0]).unwrap();
        assert_eq!(volume(&g, &all), 3.0);
    }

    #[test]
    fn duplicate_edges() {
        // Identical duplicates collapse; conflicting ones are an error.
        let g = build_graph(2, &[(0, 1, 1.5), (1, 0, 1.5)], &[1.0, 1.0]).unwrap();
        assert_eq!(g.edge_count(), 1);
        let e = build_graph(2, &[(0, 1, 1.5), (1, 0, 2.5)], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(e, GraphError::ConflictingDuplicate { .. }));
    }

    #[test]
    fn bad_weight_and_measure_rejected() {
        assert!(build_graph(2, &[(0, 1, 0.0)], &[1.0, 1.0]).is_err());
        assert!(build_graph(2, &[(0, 1, -1.0)], &[1.0, 1.0]).is_err());
        assert!(build_graph(2, &[(0, 1, f64::NAN)], &[1.0, 1.0]).is_err());
        assert!(build_graph(2, &[(0, 1, 1.0)], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn disconnected_flagged_not_fatal() {
        let g = build_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)], &[1.0; 4]).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn stored_weights_symmetric() {
        let g = path3();
        for x in 0..g.len() {
            for (y, w) in g.neighbors(x) {
                let back: Vec<_> = g.neighbors(y).filter(|&(z, _)| z == x).collect();
                assert_eq!(back, vec![(x, w)]);
            }
        }
    }

    #[test]
    fn lattice_1d_radius5() {
        let g = lattice_zn(1, 5.0).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.mu(0), 2.0);
        let all = VertexSet::new(&g, 0..g.len()).unwrap();
        assert_eq!(volume(&g, &all), 22.0);
        assert_eq!(g.coords(g.base_vertex()), Some(&[0i64][..]));
        // Endpoints lost one neighbor each.
        assert_eq!(g.clipped_count(), 2);
        assert_eq!(g.degree_bound(), 1.0);
    }

    #[test]
    fn lattice_radius_zero_single_point() {
        let g = lattice_zn(1, 0.0).unwrap();
        assert_eq!(g.len(), 1);
        let all = VertexSet::new(&g, [0]).unwrap();
        assert_eq!(volume(&g, &all), 2.0);
        assert!(g.is_clipped(0));
    }

    #[test]
    fn lattice_2d_radius1_cross() {
        let g = lattice_zn(2, 1.0).unwrap();
        assert_eq!(g.len(), 5);
        assert!((0..5).all(|x| g.mu(x) == 4.0));
        assert_eq!(g.edge_count(), 4);
        // The four arm points each lost three neighbors; the center kept all.
        assert_eq!(g.clipped_count(), 4);
        assert!(!g.is_clipped(g.base_vertex()));
    }

    #[test]
    fn lattice_interior_degree() {
        let g = lattice_zn(2, 6.0).unwrap();
        let base = g.base_vertex();
        assert_eq!(g.degree(base), 4);
        assert!(!g.is_clipped(base));
        assert_eq!(g.row_weight_sum(base), 4.0);
    }

    #[test]
    fn tree_counts() {
        let g = homogeneous_tree(2, 2).unwrap();
        assert_eq!(g.len(), 7);
        let all = VertexSet::new(&g, 0..7).unwrap();
        assert_eq!(volume(&g, &all), 7.0);

        let g3 = homogeneous_tree(3, 0).unwrap();
        assert_eq!(g3.len(), 1);

        // Leaves of the final level are clipped, everything above is not.
        let g = homogeneous_tree(2, 3).unwrap();
        assert_eq!(g.len(), 15);
        assert_eq!(g.clipped_count(), 8);
        assert_eq!(g.exterior_weight(14), 2.0);
        assert!(!g.is_clipped(0));
        // Interior degree N+1, mu = 1: degree bound comes from there.
        assert_eq!(g.degree_bound(), 3.0);
    }

    #[test]
    fn tree_branching_one_rejected() {
        assert!(matches!(homogeneous_tree(1, 3), Err(GraphError::BadBranching(1))));
    }

    #[test]
    fn product_measure_and_edges() {
        // Fiber: path on 3 vertices with one heavy measure and weight 5 edge.
        let w = build_graph(3, &[(0, 1, 5.0), (1, 2, 1.0)], &[1.0, 7.0, 1.0]).unwrap();
        let g = product_graph(1, 2.0, &w, Some(0)).unwrap();
        assert_eq!(g.len(), 15);

        let base = g.base_vertex();
        assert_eq!(g.coords(base), Some(&[0i64][..]));
        assert_eq!(g.fiber_index(base), Some(0));

        // mu = max(2*dim, mu_W): floor 2 lifts the light fibers.
        for x in 0..g.len() {
            let expect = if g.fiber_index(x) == Some(1) { 7.0 } else { 2.0 };
            assert_eq!(g.mu(x), expect);
        }

        // Fiber edge keeps its weight; lattice edge has weight 1; no edge
        // changes both components.
        for x in 0..g.len() {
            for (y, wt) in g.neighbors(x) {
                let same_coord = g.coords(x) == g.coords(y);
                let same_fiber = g.fiber_index(x) == g.fiber_index(y);
                assert!(same_coord ^ same_fiber);
                if same_coord {
                    let pair = (
                        g.fiber_index(x).unwrap().min(g.fiber_index(y).unwrap()),
                        g.fiber_index(x).unwrap().max(g.fiber_index(y).unwrap()),
                    );
                    let expect = if pair == (0, 1) { 5.0 } else { 1.0 };
                    assert_eq!(wt, expect);
                } else {
                    assert_eq!(wt, 1.0);
                }
            }
        }

        assert_eq!(g.fiber_distance(0, 2), Some(2.0));
        assert_eq!(g.fiber_count(), Some(3));
    }

    #[test]
    fn product_clipping_follows_lattice() {
        let w = build_graph(2, &[(0, 1, 1.0)], &[1.0, 1.0]).unwrap();
        let g = product_graph(1, 1.0, &w, None).unwrap();
        assert_eq!(g.len(), 6);
        for x in 0..g.len() {
            let c = g.coords(x).unwrap()[0];
            assert_eq!(g.is_clipped(x), c.abs() == 1, "coord {c}");
        }
    }

    #[test]
    fn volume_of_ball_slice() {
        let g = lattice_zn(1, 10.0).unwrap();
        let ball5 = VertexSet::new(
            &g,
            (0..g.len()).filter(|&x| g.coords(x).unwrap()[0].abs() <= 5),
        )
        .unwrap();
        assert_eq!(volume(&g, &ball5), 22.0);
        assert_eq!(volume(&g, &VertexSet::default()), 0.0);
    }

    #[test]
    fn vertex_set_validates() {
        let g = path3();
        assert!(VertexSet::new(&g, [0, 5]).is_err());
        let s = VertexSet::new(&g, [2, 0, 2]).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
    }

    #[test]
    fn description_round_trip() {
        let g = path3();
        let text = g.to_description();
        let h = from_description(&text).unwrap();
        assert_eq!(h.len(), g.len());
        assert_eq!(h.edge_count(), g.edge_count());
        for x in 0..g.len() {
            assert_eq!(h.mu(x), g.mu(x));
            let mut a: Vec<_> = g.neighbors(x).collect();
            let mut b: Vec<_> = h.neighbors(x).collect();
            a.sort_by(|l, r| l.0.cmp(&r.0));
            b.sort_by(|l, r| l.0.cmp(&r.0));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn description_keeps_base_and_exterior() {
        let g = lattice_zn(1, 3.0).unwrap();
        assert!(g.clipped_count() > 0 && g.base_vertex() != 0);
        let h = from_description(&g.to_description()).unwrap();
        assert_eq!(h.base_vertex(), g.base_vertex());
        assert_eq!(h.clipped_count(), g.clipped_count());
        assert_eq!(h.degree_bound(), g.degree_bound());
        for x in 0..g.len() {
            assert_eq!(h.exterior_weight(x), g.exterior_weight(x));
        }
    }

    #[test]
    fn description_parse_errors() {
        assert!(from_description("").is_err());
        assert!(from_description("graf 3").is_err());
        assert!(from_description("graph 2\nmu 0 1\nmu 1 1\nedge 0 0 1").is_err());
        assert!(from_description("graph 2\nmu 0 1\nedge 0 1 1").is_err()); // missing mu 1
        assert!(from_description("graph 2\nmu 0 1\nmu 1 1\nbogus 1 2").is_err());
        assert!(from_description("graph 2\nmu 0 1\nmu 1 1\nmu 1 2").is_err());
    }

    #[test]
    fn description_preserves_float_weights() {
        let g = build_graph(2, &[(0, 1, 0.1 + 0.2)], &[1.5, 2.5]).unwrap();
        let h = from_description(&g.to_description()).unwrap();
        let w_g = g.neighbors(0).next().unwrap().1;
        let w_h = h.neighbors(0).next().unwrap().1;
        assert_eq!(w_g.to_bits(), w_h.to_bits());
        assert_eq!(h.mu(0), 1.5);
    }
}
