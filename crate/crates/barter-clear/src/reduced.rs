//! The pricing transform.
//!
//! The price of a cycle or chain is its edge weight total minus the dual
//! values of the vertices it uses. In the reduced graph every edge carries
//!
//! ```text
//! r(u, v) = delta(v) - w(u, v)            when u is a pair
//! r(u, v) = delta(u) + delta(v) - w(u, v) when u is an altruist
//! ```
//!
//! A chain visits one more vertex than it has edges; charging the altruist's
//! dual on its outgoing edge is what makes the accounting close, so a column
//! has positive price exactly when its image in the reduced graph has
//! negative total weight, for chains and cycles alike.

use std::fmt;

use thiserror::Error;

use crate::instance::{DualVector, Edge, Instance, VertexId, VertexKind, Violation};

/// Absolute tolerance for the internal cross-check between the two routes
/// that compute a column's value (price from weights and duals, reduced
/// weight from per-edge labels).
pub const PRICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ReducedError {
    #[error("no dual value for vertex {0}")]
    MissingDual(VertexId),
    #[error("instance is invalid: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error(transparent)]
    BadBody(#[from] BodyError),
}

#[derive(Debug, Error, PartialEq)]
pub enum BodyError {
    #[error("a cycle or chain needs at least 2 vertices, got {0}")]
    TooShort(usize),
    #[error("vertex {0} appears more than once")]
    RepeatedVertex(VertexId),
    #[error("required edge ({0} -> {1}) is not in the graph")]
    MissingEdge(VertexId, VertexId),
    #[error("vertex {vertex} has kind {actual}, expected {expected}")]
    WrongKind { vertex: VertexId, expected: VertexKind, actual: VertexKind },
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
}

fn check_simple(vertices: &[VertexId]) -> Result<(), BodyError> {
    if vertices.len() < 2 {
        return Err(BodyError::TooShort(vertices.len()));
    }
    let mut sorted = vertices.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(BodyError::RepeatedVertex(w[0]));
        }
    }
    Ok(())
}

/// A simple directed path that starts at an altruist. Length is counted in
/// edges: `vertices.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chain {
    vertices: Vec<VertexId>,
}

impl Chain {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self, BodyError> {
        check_simple(&vertices)?;
        Ok(Chain { vertices })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// A simple directed cycle among pairs, stored in canonical rotation with
/// the smallest vertex first so equal cycles compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    vertices: Vec<VertexId>,
}

impl Cycle {
    pub fn new(vertices: Vec<VertexId>) -> Result<Self, BodyError> {
        check_simple(&vertices)?;
        let min_pos = vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(i, _)| i)
            .unwrap();
        let mut rotated = Vec::with_capacity(vertices.len());
        rotated.extend_from_slice(&vertices[min_pos..]);
        rotated.extend_from_slice(&vertices[..min_pos]);
        Ok(Cycle { vertices: rotated })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColumnBody {
    Cycle(Cycle),
    Chain(Chain),
}

impl ColumnBody {
    pub fn vertices(&self) -> &[VertexId] {
        match self {
            ColumnBody::Cycle(c) => c.vertices(),
            ColumnBody::Chain(c) => c.vertices(),
        }
    }

    pub fn edge_count(&self) -> usize {
        match self {
            ColumnBody::Cycle(c) => c.edge_count(),
            ColumnBody::Chain(c) => c.edge_count(),
        }
    }

    pub fn arcs(&self) -> Vec<(VertexId, VertexId)> {
        match self {
            ColumnBody::Cycle(c) => c.arcs().collect(),
            ColumnBody::Chain(c) => c.arcs().collect(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ColumnBody::Cycle(_) => "cycle",
            ColumnBody::Chain(_) => "chain",
        }
    }

    /// Structural validity against an instance: all arcs present, cycles use
    /// pairs only, chains start at an altruist and continue through pairs.
    /// Length caps are contextual (the pricers and the clearing layer
    /// enforce them) and are deliberately not checked here.
    pub fn validate_in(&self, instance: &Instance) -> Result<(), BodyError> {
        let expect_kind = |v: VertexId, expected: VertexKind| -> Result<(), BodyError> {
            match instance.kind_of(v) {
                None => Err(BodyError::UnknownVertex(v)),
                Some(actual) if actual != expected => {
                    Err(BodyError::WrongKind { vertex: v, expected, actual })
                }
                Some(_) => Ok(()),
            }
        };
        match self {
            ColumnBody::Cycle(c) => {
                for &v in c.vertices() {
                    expect_kind(v, VertexKind::Pair)?;
                }
            }
            ColumnBody::Chain(c) => {
                expect_kind(c.vertices()[0], VertexKind::Altruist)?;
                for &v in &c.vertices()[1..] {
                    expect_kind(v, VertexKind::Pair)?;
                }
            }
        }
        for (u, v) in self.arcs() {
            if instance.edge_between(u, v).is_none() {
                return Err(BodyError::MissingEdge(u, v));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ColumnBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.vertices().iter().map(|v| v.to_string()).collect();
        write!(f, "{} [{}]", self.kind_name(), ids.join(", "))
    }
}

/// A cycle or chain together with its weight, its price under the duals it
/// was built from, and its reduced weight. The three values are computed by
/// two independent routes and cross-checked at construction:
/// `reduced_weight = -price` always holds to within [`PRICE_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    body: ColumnBody,
    weight: f64,
    price: f64,
    reduced_weight: f64,
}

impl Column {
    fn assemble(body: ColumnBody, weight: f64, price: f64, reduced_weight: f64) -> Column {
        assert!(
            (reduced_weight + price).abs() <= PRICE_TOLERANCE,
            "reduced weight {reduced_weight} must equal -price {price}"
        );
        Column { body, weight, price, reduced_weight }
    }

    pub fn body(&self) -> &ColumnBody {
        &self.body
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn reduced_weight(&self) -> f64 {
        self.reduced_weight
    }

    pub fn vertices(&self) -> &[VertexId] {
        self.body.vertices()
    }
}

/// Reduced weight of one edge under the two-case formula.
pub fn reduced_weight_of_edge(
    edge: &Edge,
    src_kind: VertexKind,
    duals: &DualVector,
) -> Result<f64, ReducedError> {
    let d_dst = duals.get(edge.dst).ok_or(ReducedError::MissingDual(edge.dst))?;
    match src_kind {
        VertexKind::Pair => Ok(d_dst - edge.weight),
        VertexKind::Altruist => {
            let d_src = duals.get(edge.src).ok_or(ReducedError::MissingDual(edge.src))?;
            Ok(d_src + d_dst - edge.weight)
        }
    }
}

/// An instance edge annotated with its reduced weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub weight: f64,
    pub reduced: f64,
}

/// The instance graph re-weighted under a dual vector. Topology is identical
/// to the source instance; each edge additionally carries its reduced weight.
/// Also keeps the duals and original weights so that witnesses found during
/// a search can be priced into full [`Column`]s without the instance at hand.
#[derive(Debug, Clone)]
pub struct ReducedGraph {
    kinds: Vec<VertexKind>,
    delta: Vec<f64>,
    edges: Vec<ReducedEdge>,
    out_start: Vec<usize>,
    altruists: Vec<VertexId>,
    min_reduced: f64,
}

impl ReducedGraph {
    pub fn num_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v.0]
    }

    pub fn delta(&self, v: VertexId) -> f64 {
        self.delta[v.0]
    }

    pub fn edges(&self) -> &[ReducedEdge] {
        &self.edges
    }

    pub fn out_edges(&self, u: VertexId) -> &[ReducedEdge] {
        &self.edges[self.out_start[u.0]..self.out_start[u.0 + 1]]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<&ReducedEdge> {
        let span = self.out_edges(u);
        span.binary_search_by_key(&v, |e| e.dst).ok().map(|i| &span[i])
    }

    pub fn altruists(&self) -> &[VertexId] {
        &self.altruists
    }

    pub fn pairs(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.kinds
            .iter()
            .enumerate()
            .filter(|&(_, k)| *k == VertexKind::Pair)
            .map(|(i, _)| VertexId(i))
    }

    /// Most negative reduced weight over all edges (0 when edgeless); used
    /// by the exact pricer's admissible pruning bound.
    pub fn min_reduced(&self) -> f64 {
        self.min_reduced
    }

    /// Prices a body against this graph's weights and duals. Validity checks
    /// mirror [`ColumnBody::validate_in`]; the price/reduced-weight
    /// cross-check runs at construction.
    pub fn column(&self, body: ColumnBody) -> Result<Column, ReducedError> {
        let expect_kind = |v: VertexId, expected: VertexKind| -> Result<(), BodyError> {
            if v.0 >= self.kinds.len() {
                return Err(BodyError::UnknownVertex(v));
            }
            let actual = self.kinds[v.0];
            if actual != expected {
                return Err(BodyError::WrongKind { vertex: v, expected, actual });
            }
            Ok(())
        };
        match &body {
            ColumnBody::Cycle(c) => {
                for &v in c.vertices() {
                    expect_kind(v, VertexKind::Pair)?;
                }
            }
            ColumnBody::Chain(c) => {
                expect_kind(c.vertices()[0], VertexKind::Altruist)?;
                for &v in &c.vertices()[1..] {
                    expect_kind(v, VertexKind::Pair)?;
                }
            }
        }
        let mut weight = 0.0;
        let mut reduced = 0.0;
        for (u, v) in body.arcs() {
            let e = self
                .edge_between(u, v)
                .ok_or(BodyError::MissingEdge(u, v))?;
            weight += e.weight;
            reduced += e.reduced;
        }
        let dual_sum: f64 = body.vertices().iter().map(|&v| self.delta[v.0]).sum();
        let price = weight - dual_sum;
        Ok(Column::assemble(body, weight, price, reduced))
    }
}

/// Builds the reduced graph for `instance` under `duals`. The instance must
/// validate and the duals must cover every vertex.
pub fn build_reduced_graph(
    instance: &Instance,
    duals: &DualVector,
) -> Result<ReducedGraph, ReducedError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(ReducedError::InvalidInstance(violations));
    }
    let n = instance.num_vertices();
    let mut kinds = Vec::with_capacity(n);
    let mut delta = Vec::with_capacity(n);
    let mut altruists = Vec::new();
    for &(id, kind) in instance.vertices() {
        kinds.push(kind);
        delta.push(duals.get(id).ok_or(ReducedError::MissingDual(id))?);
        if kind == VertexKind::Altruist {
            altruists.push(id);
        }
    }

    let mut edges = Vec::with_capacity(instance.edges().len());
    for e in instance.edges() {
        let src_kind = instance.kind_of(e.src).expect("validated");
        let reduced = reduced_weight_of_edge(e, src_kind, duals)?;
        edges.push(ReducedEdge { src: e.src, dst: e.dst, weight: e.weight, reduced });
    }

    let mut out_start = vec![0usize; n + 1];
    for e in &edges {
        out_start[e.src.0 + 1] += 1;
    }
    for i in 0..n {
        out_start[i + 1] += out_start[i];
    }
    let min_reduced = edges.iter().map(|e| e.reduced).fold(0.0f64, f64::min);

    Ok(ReducedGraph { kinds, delta, edges, out_start, altruists, min_reduced })
}

/// Prices a cycle or chain directly from the instance and duals. This is the
/// reference route: it recomputes the reduced weight edge by edge with
/// [`reduced_weight_of_edge`] and asserts it equals the negated price.
pub fn price_of(
    body: &ColumnBody,
    instance: &Instance,
    duals: &DualVector,
) -> Result<Column, ReducedError> {
    body.validate_in(instance)?;
    let mut weight = 0.0;
    let mut reduced = 0.0;
    for (u, v) in body.arcs() {
        let edge = instance.edge_between(u, v).expect("validated body");
        let src_kind = instance.kind_of(u).expect("validated body");
        weight += edge.weight;
        reduced += reduced_weight_of_edge(edge, src_kind, duals)?;
    }
    let mut dual_sum = 0.0;
    for &v in body.vertices() {
        dual_sum += duals.get(v).ok_or(ReducedError::MissingDual(v))?;
    }
    let price = weight - dual_sum;
    Ok(Column::assemble(body.clone(), weight, price, reduced))
}
