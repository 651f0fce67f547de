//! Compatibility-graph data model: vertices, weighted edges, caps, dual
//! values, validation, canonical JSON documents, and instance generators.
//!
//! An [`Instance`] is immutable after construction and stores its vertices
//! and edges in canonical sorted order, so structurally equal instances
//! compare equal and serialize to identical text.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a vertex. Valid instances use dense ids `0..n`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role of a vertex: a patient-donor pair, or an altruistic donor who gives
/// without receiving and therefore can only start a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Pair,
    Altruist,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Pair => write!(f, "pair"),
            VertexKind::Altruist => write!(f, "altruist"),
        }
    }
}

/// A feasible transplant from the donor at `src` to the patient at `dst`,
/// weighted by its value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// A directed compatibility graph with cycle cap `L` and chain cap `K`
/// (chain length is counted in edges: a chain with `K` edges visits `K + 1`
/// vertices including the altruist).
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    vertices: Vec<(VertexId, VertexKind)>,
    edges: Vec<Edge>,
    cycle_cap: usize,
    chain_cap: usize,
}

/// A single invariant violation reported by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVertexId(VertexId),
    /// Ids must be exactly `0..n` for an instance with `n` vertices.
    NonDenseVertexIds,
    SelfLoop(VertexId),
    EdgeIntoAltruist { src: VertexId, dst: VertexId },
    DuplicateEdge { src: VertexId, dst: VertexId },
    UndeclaredEndpoint { src: VertexId, dst: VertexId, missing: VertexId },
    NonFiniteWeight { src: VertexId, dst: VertexId },
    BadCycleCap(usize),
    BadChainCap(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId(v) => write!(f, "duplicate vertex id {v}"),
            Violation::NonDenseVertexIds => write!(f, "vertex ids are not dense in 0..n"),
            Violation::SelfLoop(v) => write!(f, "self-loop at vertex {v}"),
            Violation::EdgeIntoAltruist { src, dst } => {
                write!(f, "edge into altruist ({src} -> {dst})")
            }
            Violation::DuplicateEdge { src, dst } => {
                write!(f, "duplicate edge ({src} -> {dst})")
            }
            Violation::UndeclaredEndpoint { src, dst, missing } => {
                write!(f, "edge ({src} -> {dst}) references undeclared vertex {missing}")
            }
            Violation::NonFiniteWeight { src, dst } => {
                write!(f, "edge ({src} -> {dst}) has a non-finite weight")
            }
            Violation::BadCycleCap(l) => write!(f, "cycle cap L must be at least 2, got {l}"),
            Violation::BadChainCap(k) => write!(f, "chain cap K must be at least 1, got {k}"),
        }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid instance: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("duals key {0:?} is not a vertex id")]
    BadDualKey(String),
}

#[derive(Debug, Error)]
pub enum SerializeError {
    #[error("cannot serialize invalid instance: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("dual value for vertex {0} is not finite")]
    NonFiniteDual(VertexId),
}

impl Instance {
    /// Builds an instance, normalizing vertex and edge order. Invariants are
    /// not checked here; call [`Instance::validate`].
    pub fn new(
        mut vertices: Vec<(VertexId, VertexKind)>,
        mut edges: Vec<Edge>,
        cycle_cap: usize,
        chain_cap: usize,
    ) -> Self {
        vertices.sort_by_key(|&(id, kind)| (id, kind));
        edges.sort_by(|a, b| {
            (a.src, a.dst)
                .cmp(&(b.src, b.dst))
                .then(a.weight.total_cmp(&b.weight))
        });
        Instance { vertices, edges, cycle_cap, chain_cap }
    }

    pub fn vertices(&self) -> &[(VertexId, VertexKind)] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn cycle_cap(&self) -> usize {
        self.cycle_cap
    }

    pub fn chain_cap(&self) -> usize {
        self.chain_cap
    }

    pub fn kind_of(&self, v: VertexId) -> Option<VertexKind> {
        self.vertices
            .binary_search_by_key(&v, |&(id, _)| id)
            .ok()
            .map(|i| self.vertices[i].1)
    }

    pub fn pairs(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .filter(|&&(_, k)| k == VertexKind::Pair)
            .map(|&(id, _)| id)
    }

    pub fn altruists(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .filter(|&&(_, k)| k == VertexKind::Altruist)
            .map(|&(id, _)| id)
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs().count()
    }

    pub fn num_altruists(&self) -> usize {
        self.altruists().count()
    }

    /// Out-edges of `u`, contiguous because edges are sorted by `(src, dst)`.
    pub fn out_edges(&self, u: VertexId) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.src < u);
        let hi = self.edges.partition_point(|e| e.src <= u);
        &self.edges[lo..hi]
    }

    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<&Edge> {
        self.out_edges(u)
            .binary_search_by_key(&v, |e| e.dst)
            .ok()
            .map(|i| &self.out_edges(u)[i])
    }

    /// Copy of this instance keeping only edges that satisfy `keep`.
    /// Used by branch and price to build child subproblems.
    pub fn with_edges_filtered(&self, keep: impl Fn(&Edge) -> bool) -> Instance {
        Instance {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).copied().collect(),
            cycle_cap: self.cycle_cap,
            chain_cap: self.chain_cap,
        }
    }

    pub fn has_integer_weights(&self) -> bool {
        self.edges.iter().all(|e| e.weight.fract() == 0.0)
    }

    /// Checks every instance invariant and returns all violations found,
    /// in deterministic order. An empty result means the instance is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut seen = BTreeSet::new();
        for &(id, _) in &self.vertices {
            if !seen.insert(id) {
                out.push(Violation::DuplicateVertexId(id));
            }
        }
        let dense = seen.len() == self.vertices.len()
            && seen.iter().enumerate().all(|(i, &id)| id.0 == i);
        if !self.vertices.is_empty() && !dense {
            out.push(Violation::NonDenseVertexIds);
        }

        if self.cycle_cap < 2 {
            out.push(Violation::BadCycleCap(self.cycle_cap));
        }
        if self.chain_cap < 1 {
            out.push(Violation::BadChainCap(self.chain_cap));
        }

        let mut seen_edges = BTreeSet::new();
        for e in &self.edges {
            if e.src == e.dst {
                out.push(Violation::SelfLoop(e.src));
            }
            for endpoint in [e.src, e.dst] {
                if self.kind_of(endpoint).is_none() {
                    out.push(Violation::UndeclaredEndpoint {
                        src: e.src,
                        dst: e.dst,
                        missing: endpoint,
                    });
                }
            }
            if self.kind_of(e.dst) == Some(VertexKind::Altruist) {
                out.push(Violation::EdgeIntoAltruist { src: e.src, dst: e.dst });
            }
            if !e.weight.is_finite() {
                out.push(Violation::NonFiniteWeight { src: e.src, dst: e.dst });
            }
            if !seen_edges.insert((e.src, e.dst)) {
                out.push(Violation::DuplicateEdge { src: e.src, dst: e.dst });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

/// Per-vertex dual values from the LP relaxation. Values are arbitrary reals
/// at this boundary; nothing downstream may assume nonnegativity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DualVector {
    delta: BTreeMap<VertexId, f64>,
}

impl DualVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// All-zero duals for every vertex of `instance`.
    pub fn zeros(instance: &Instance) -> Self {
        let delta = instance.vertices().iter().map(|&(id, _)| (id, 0.0)).collect();
        DualVector { delta }
    }

    pub fn insert(&mut self, v: VertexId, value: f64) {
        self.delta.insert(v, value);
    }

    pub fn get(&self, v: VertexId) -> Option<f64> {
        self.delta.get(&v).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.delta.iter().map(|(&v, &x)| (v, x))
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }
}

impl FromIterator<(VertexId, f64)> for DualVector {
    fn from_iter<T: IntoIterator<Item = (VertexId, f64)>>(iter: T) -> Self {
        DualVector { delta: iter.into_iter().collect() }
    }
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    #[serde(rename = "L")]
    cycle_cap: usize,
    #[serde(rename = "K")]
    chain_cap: usize,
    #[serde(default)]
    vertices: Vec<VertexDoc>,
    #[serde(default)]
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: VertexId,
    kind: VertexKind,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DualsDoc {
    delta: BTreeMap<String, f64>,
}

/// Parses and validates an instance document. The accepted schema is
/// `{"L": int, "K": int, "vertices": [{"id", "kind"}], "edges": [{"src",
/// "dst", "w"}]}`; `vertices` and `edges` default to empty.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    let instance = Instance::new(
        doc.vertices.into_iter().map(|v| (v.id, v.kind)).collect(),
        doc.edges,
        doc.cycle_cap,
        doc.chain_cap,
    );
    let violations = instance.validate();
    if violations.is_empty() {
        Ok(instance)
    } else {
        Err(ParseError::Invalid(violations))
    }
}

fn json_f64(x: f64) -> String {
    // Finiteness is checked before serialization, so this cannot fail.
    serde_json::to_string(&x).expect("finite float serializes")
}

/// Serializes a valid instance to its canonical text form: fixed key order,
/// one vertex or edge per line, empty sections omitted. Byte-identical
/// output for structurally equal instances.
pub fn serialize_instance(instance: &Instance) -> Result<String, SerializeError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(SerializeError::Invalid(violations));
    }
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!(
        "  \"L\": {},\n  \"K\": {}",
        instance.cycle_cap(),
        instance.chain_cap()
    ));
    if !instance.vertices().is_empty() {
        s.push_str(",\n  \"vertices\": [\n");
        let lines: Vec<String> = instance
            .vertices()
            .iter()
            .map(|&(id, kind)| format!("    {{\"id\": {id}, \"kind\": \"{kind}\"}}"))
            .collect();
        s.push_str(&lines.join(",\n"));
        s.push_str("\n  ]");
    }
    if !instance.edges().is_empty() {
        s.push_str(",\n  \"edges\": [\n");
        let lines: Vec<String> = instance
            .edges()
            .iter()
            .map(|e| {
                format!(
                    "    {{\"src\": {}, \"dst\": {}, \"w\": {}}}",
                    e.src,
                    e.dst,
                    json_f64(e.weight)
                )
            })
            .collect();
        s.push_str(&lines.join(",\n"));
        s.push_str("\n  ]");
    }
    s.push_str("\n}\n");
    Ok(s)
}

/// Parses a duals document: `{"delta": {"<id>": number, ...}}`.
pub fn parse_duals(text: &str) -> Result<DualVector, ParseError> {
    let doc: DualsDoc = serde_json::from_str(text)?;
    let mut duals = DualVector::new();
    for (key, value) in doc.delta {
        let id: usize = key.parse().map_err(|_| ParseError::BadDualKey(key.clone()))?;
        duals.insert(VertexId(id), value);
    }
    Ok(duals)
}

/// Serializes duals canonically, keys in ascending numeric order.
pub fn serialize_duals(duals: &DualVector) -> Result<String, SerializeError> {
    for (v, x) in duals.iter() {
        if !x.is_finite() {
            return Err(SerializeError::NonFiniteDual(v));
        }
    }
    let mut s = String::new();
    s.push_str("{\n  \"delta\": {");
    if duals.is_empty() {
        s.push_str("}\n}\n");
        return Ok(s);
    }
    s.push('\n');
    let lines: Vec<String> = duals
        .iter()
        .map(|(v, x)| format!("    \"{v}\": {}", json_f64(x)))
        .collect();
    s.push_str(&lines.join(",\n"));
    s.push_str("\n  }\n}\n");
    Ok(s)
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Parameters for [`generate_random`]. Pairs take ids `0..num_pairs`,
/// altruists the ids after them. Weights are integers drawn uniformly from
/// `weight_min..=weight_max` so downstream test arithmetic stays exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub num_pairs: usize,
    pub num_altruists: usize,
    pub edge_density: f64,
    pub weight_min: i64,
    pub weight_max: i64,
    pub cycle_cap: usize,
    pub chain_cap: usize,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("edge density must lie in (0, 1], got {0}")]
    BadDensity(f64),
    #[error("empty weight range {0}..={1}")]
    EmptyWeightRange(i64, i64),
    #[error("caps out of range: L={l}, K={k}")]
    BadCaps { l: usize, k: usize },
}

/// Generates a random valid instance, a pure function of its parameters.
/// Every pair-to-pair and altruist-to-pair arc is included independently
/// with probability `edge_density`.
pub fn generate_random(params: &GenParams) -> Result<Instance, GenError> {
    if !(params.edge_density > 0.0 && params.edge_density <= 1.0) {
        return Err(GenError::BadDensity(params.edge_density));
    }
    if params.weight_min > params.weight_max {
        return Err(GenError::EmptyWeightRange(params.weight_min, params.weight_max));
    }
    if params.cycle_cap < 2 || params.chain_cap < 1 {
        return Err(GenError::BadCaps { l: params.cycle_cap, k: params.chain_cap });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let total = params.num_pairs + params.num_altruists;
    let mut vertices = Vec::with_capacity(total);
    for id in 0..params.num_pairs {
        vertices.push((VertexId(id), VertexKind::Pair));
    }
    for id in params.num_pairs..total {
        vertices.push((VertexId(id), VertexKind::Altruist));
    }

    // Fixed iteration order (src ascending, then dst ascending over pairs)
    // keeps the RNG stream, and hence the instance, a function of the seed.
    let mut edges = Vec::new();
    for src in 0..total {
        for dst in 0..params.num_pairs {
            if src == dst {
                continue;
            }
            if rng.gen_bool(params.edge_density) {
                let w = rng.gen_range(params.weight_min..=params.weight_max);
                edges.push(Edge {
                    src: VertexId(src),
                    dst: VertexId(dst),
                    weight: w as f64,
                });
            }
        }
    }

    let instance = Instance::new(vertices, edges, params.cycle_cap, params.chain_cap);
    debug_assert!(instance.is_valid());
    Ok(instance)
}

/// Random integer-valued duals for every vertex, uniform in
/// `dual_min..=dual_max`, deterministic in the seed.
pub fn generate_random_duals(
    instance: &Instance,
    dual_min: i64,
    dual_max: i64,
    seed: u64,
) -> DualVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    instance
        .vertices()
        .iter()
        .map(|&(id, _)| (id, rng.gen_range(dual_min..=dual_max) as f64))
        .collect()
}

/// The six-vertex counterexample on which the round-based chain heuristic
/// misses the only positive-price chain while the exact pricer finds it.
///
/// Vertex 0 is the altruist; 1..=5 are pairs. Duals are all zero, so every
/// edge's reduced weight is the negation of its stored weight and the
/// reduced graph carries exactly the labels 0 and 1 on the altruist edges,
/// -2 on the edge 4 -> 1, and 0 elsewhere. Caps are L = 3, K = 5. The only
/// positive-price chain is (0, 5, 2, 3, 4, 1) with reduced weight -1.
pub fn counterexample_instance() -> (Instance, DualVector) {
    let a = VertexId(0);
    let p = |i: usize| VertexId(i);
    let vertices = vec![
        (a, VertexKind::Altruist),
        (p(1), VertexKind::Pair),
        (p(2), VertexKind::Pair),
        (p(3), VertexKind::Pair),
        (p(4), VertexKind::Pair),
        (p(5), VertexKind::Pair),
    ];
    let e = |src: usize, dst: usize, weight: f64| Edge { src: p(src), dst: p(dst), weight };
    let edges = vec![
        e(0, 1, 0.0),
        e(0, 5, -1.0),
        e(1, 2, 0.0),
        e(2, 3, 0.0),
        e(3, 4, 0.0),
        e(4, 1, 2.0),
        e(5, 2, 0.0),
    ];
    let instance = Instance::new(vertices, edges, 3, 5);
    let duals = DualVector::zeros(&instance);
    debug_assert!(instance.is_valid());
    (instance, duals)
}
