//! Encoders from directed Hamiltonian path instances to negative-chain
//! pricing instances, and a brute-force Hamiltonian-path checker used to
//! verify them at desk scale.
//!
//! Given a digraph `H` on `n` vertices, [`reduce_ham_path_to_chain`] builds
//! a pricing instance with one altruist `a`: every arc of `H` gets reduced
//! weight -1 and every vertex gets an edge from `a` with reduced weight
//! `n - 2`, with chain cap `K = n`. A chain from `a` over `m` arcs of `H`
//! then weighs `n - 2 - m`, which is negative only when `m = n - 1`, i.e.
//! exactly when the chain traces a Hamiltonian path. The instance encodes
//! reduced weights as negated edge weights under all-zero duals.
//!
//! [`reduce_ham_path_to_general_pricing`] additionally expands every arc of
//! `H` into a run of `L` edges whose reduced weights sum to -1, so every
//! cycle of the output has at least `2L > L` edges and cycle pricing can
//! never answer for chain pricing on these instances.

use itertools::Itertools;
use serde::Deserialize;
use thiserror::Error;

use crate::instance::{DualVector, Edge, Instance, VertexId, VertexKind};

/// Vertex count above which [`ham_path_exists`] refuses to enumerate.
pub const HAM_PATH_MAX_VERTICES: usize = 10;

/// A plain digraph: `n` vertices `0..n`, arcs sorted, no duplicates or
/// self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DigraphError {
    #[error("arc ({0}, {1}) is out of range for {2} vertices")]
    ArcOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("the construction needs at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("cycle cap must be at least 2, got {0}")]
    BadCycleCap(usize),
    #[error("brute-force Hamiltonian path check limited to {max} vertices, got {n}")]
    TooLarge { n: usize, max: usize },
}

impl Digraph {
    pub fn new(n: usize, mut arcs: Vec<(usize, usize)>) -> Result<Self, DigraphError> {
        arcs.sort_unstable();
        for &(src, dst) in &arcs {
            if src >= n || dst >= n {
                return Err(DigraphError::ArcOutOfRange(src, dst, n));
            }
            if src == dst {
                return Err(DigraphError::SelfLoop(src));
            }
        }
        for w in arcs.windows(2) {
            if w[0] == w[1] {
                return Err(DigraphError::DuplicateArc(w[0].0, w[0].1));
            }
        }
        Ok(Digraph { n, arcs })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn has_arc(&self, src: usize, dst: usize) -> bool {
        self.arcs.binary_search(&(src, dst)).is_ok()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DigraphDoc {
    n: usize,
    #[serde(default)]
    arcs: Vec<(usize, usize)>,
}

#[derive(Debug, Error)]
pub enum DigraphParseError {
    #[error("malformed digraph document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid digraph: {0}")]
    Invalid(#[from] DigraphError),
}

/// Parses `{"n": int, "arcs": [[src, dst], ...]}`.
pub fn parse_digraph(text: &str) -> Result<Digraph, DigraphParseError> {
    let doc: DigraphDoc = serde_json::from_str(text)?;
    Ok(Digraph::new(doc.n, doc.arcs)?)
}

/// Canonical text form of a digraph document.
pub fn serialize_digraph(h: &Digraph) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!("  \"n\": {}", h.n));
    if h.arcs.is_empty() {
        s.push_str(",\n  \"arcs\": []\n}\n");
    } else {
        s.push_str(",\n  \"arcs\": [\n");
        let lines: Vec<String> =
            h.arcs.iter().map(|&(a, b)| format!("    [{a}, {b}]")).collect();
        s.push_str(&lines.join(",\n"));
        s.push_str("\n  ]\n}\n");
    }
    s
}

/// Where a constructed vertex came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Image of vertex `i` of the source digraph.
    Original(usize),
    /// The added altruist.
    Altruist,
    /// The `index`-th interior vertex (1-based) on the expansion of arc
    /// `(src, dst)`.
    ArcSegment { src: usize, dst: usize, index: usize },
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub instance: Instance,
    /// All-zero duals: the instance encodes reduced weights directly as
    /// negated edge weights.
    pub dual_hint: DualVector,
    /// Provenance per constructed vertex id.
    pub source_map: Vec<Provenance>,
}

/// Weight that encodes reduced weight `r` under zero duals.
fn w(r: f64) -> f64 {
    -r
}

/// Encodes directed Hamiltonian path as negative-chain pricing: `H` has a
/// Hamiltonian path iff the output instance has a positive-price chain, and
/// every such chain has reduced weight exactly -1. Chain cap is `n`; the
/// cycle cap is set to the smallest legal value since the negative-chain
/// question ignores cycles.
pub fn reduce_ham_path_to_chain(h: &Digraph) -> Result<ReductionOutput, ReductionError> {
    let n = h.num_vertices();
    if n < 2 {
        return Err(ReductionError::TooSmall(n));
    }
    let altruist = VertexId(n);
    let mut vertices: Vec<(VertexId, VertexKind)> =
        (0..n).map(|i| (VertexId(i), VertexKind::Pair)).collect();
    vertices.push((altruist, VertexKind::Altruist));

    let mut edges: Vec<Edge> = h
        .arcs()
        .iter()
        .map(|&(src, dst)| Edge { src: VertexId(src), dst: VertexId(dst), weight: w(-1.0) })
        .collect();
    for v in 0..n {
        edges.push(Edge { src: altruist, dst: VertexId(v), weight: w(n as f64 - 2.0) });
    }

    let instance = Instance::new(vertices, edges, 2, n);
    debug_assert!(instance.is_valid());
    let dual_hint = DualVector::zeros(&instance);
    let mut source_map: Vec<Provenance> = (0..n).map(Provenance::Original).collect();
    source_map.push(Provenance::Altruist);
    Ok(ReductionOutput { instance, dual_hint, source_map })
}

/// The edge-expansion variant for general pricing (cycles up to `l` plus
/// chains): every arc of `H` becomes a run of `l` edges with reduced
/// weights -1, 0, ..., 0 through fresh interior vertices, so the shortest
/// cycle of the output has `2l` edges and the cycle cap can never be met.
/// The chain cap `1 + (n-1) * l` admits exactly the image of a Hamiltonian
/// path (altruist edge plus `n - 1` expanded arcs).
pub fn reduce_ham_path_to_general_pricing(
    h: &Digraph,
    l: usize,
) -> Result<ReductionOutput, ReductionError> {
    let n = h.num_vertices();
    if n < 2 {
        return Err(ReductionError::TooSmall(n));
    }
    if l < 2 {
        return Err(ReductionError::BadCycleCap(l));
    }

    let altruist = VertexId(n);
    let mut vertices: Vec<(VertexId, VertexKind)> =
        (0..n).map(|i| (VertexId(i), VertexKind::Pair)).collect();
    vertices.push((altruist, VertexKind::Altruist));
    let mut source_map: Vec<Provenance> = (0..n).map(Provenance::Original).collect();
    source_map.push(Provenance::Altruist);

    let mut edges = Vec::new();
    let mut next_id = n + 1;
    for &(src, dst) in h.arcs() {
        // src -> s_1 -> ... -> s_{l-1} -> dst, reduced weights -1, 0, ..., 0.
        let mut tail = VertexId(src);
        for index in 1..l {
            let fresh = VertexId(next_id);
            next_id += 1;
            vertices.push((fresh, VertexKind::Pair));
            source_map.push(Provenance::ArcSegment { src, dst, index });
            let r = if index == 1 { -1.0 } else { 0.0 };
            edges.push(Edge { src: tail, dst: fresh, weight: w(r) });
            tail = fresh;
        }
        let r = if l == 1 { -1.0 } else { 0.0 };
        edges.push(Edge { src: tail, dst: VertexId(dst), weight: w(r) });
    }
    for v in 0..n {
        edges.push(Edge { src: altruist, dst: VertexId(v), weight: w(n as f64 - 2.0) });
    }

    let chain_cap = 1 + (n - 1) * l;
    let instance = Instance::new(vertices, edges, l, chain_cap);
    debug_assert!(instance.is_valid());
    let dual_hint = DualVector::zeros(&instance);
    Ok(ReductionOutput { instance, dual_hint, source_map })
}

/// Brute-force Hamiltonian path test: true iff some permutation of the
/// vertices is a directed path in `H`. Deterministic; refuses graphs above
/// [`HAM_PATH_MAX_VERTICES`].
pub fn ham_path_exists(h: &Digraph) -> Result<bool, ReductionError> {
    let n = h.num_vertices();
    if n > HAM_PATH_MAX_VERTICES {
        return Err(ReductionError::TooLarge { n, max: HAM_PATH_MAX_VERTICES });
    }
    Ok((0..n)
        .permutations(n)
        .any(|perm| perm.windows(2).all(|w| h.has_arc(w[0], w[1]))))
}

/// Length of a shortest directed cycle of at most `cap` edges, or `None` if
/// no such cycle exists. Exhaustive search rooted at each cycle's minimal
/// vertex; intended for the small caps the reductions are verified with.
pub fn min_cycle_length(instance: &Instance, cap: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    let vertex_ids: Vec<VertexId> = instance.vertices().iter().map(|&(id, _)| id).collect();
    for &root in &vertex_ids {
        let mut on_path = vec![false; instance.num_vertices()];
        on_path[root.0] = true;
        let mut path = vec![root];
        dfs_cycles(instance, cap, root, &mut path, &mut on_path, &mut best);
    }
    best
}

fn dfs_cycles(
    instance: &Instance,
    cap: usize,
    root: VertexId,
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    best: &mut Option<usize>,
) {
    let u = *path.last().unwrap();
    if path.len() >= 2 && path.len() <= cap && instance.edge_between(u, root).is_some() {
        let len = path.len();
        if best.is_none_or(|b| len < b) {
            *best = Some(len);
        }
    }
    if path.len() >= cap {
        return;
    }
    for e in instance.out_edges(u) {
        let v = e.dst;
        if v <= root || on_path[v.0] {
            continue;
        }
        path.push(v);
        on_path[v.0] = true;
        dfs_cycles(instance, cap, root, path, on_path, best);
        on_path[v.0] = false;
        path.pop();
    }
}
