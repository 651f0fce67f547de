//! The weighted clearing problem: pick a maximum-weight vertex-disjoint set
//! of cap-respecting cycles and chains.
//!
//! Four solvers of increasing sophistication live here. Full column
//! enumeration and brute-force packing search are the desk-scale oracles;
//! the restricted master LP over a column pool feeds duals to the pricing
//! module; column generation grows the pool until the exact pricers certify
//! that no positive-price column remains; and branch and price drives the
//! whole loop to integer optimality by branching on edges, which keeps every
//! child subproblem an ordinary instance on a subgraph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{DualVector, Instance, VertexId, Violation};
use crate::pricing::{
    cycle_pricing_bellman_ford_with, exact_chain_pricing_with, ChainSearchOptions,
};
use crate::reduced::{
    build_reduced_graph, price_of, Chain, Column, ColumnBody, Cycle, ReducedError,
};
use crate::simplex::{self, SimplexError};

/// Guards for the exhaustive operations.
pub const ENUMERATION_MAX_PAIRS: usize = 12;
pub const ENUMERATION_MAX_CHAIN_CAP: usize = 6;
pub const BRANCH_AND_PRICE_MAX_PAIRS: usize = 12;

/// Columns with price above this threshold count as positive during column
/// generation; keeps LP rounding noise from masquerading as progress.
pub const PRICING_POSITIVE_TOLERANCE: f64 = 1e-7;
/// A primal value within this distance of 0 or 1 counts as integral.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ClearingError {
    #[error(
        "instance too large for full enumeration: {pairs} pairs (max {max_pairs}), \
         K={chain_cap} (max {max_chain_cap})"
    )]
    EnumerationGuard {
        pairs: usize,
        max_pairs: usize,
        chain_cap: usize,
        max_chain_cap: usize,
    },
    #[error("instance too large for branch and price: {pairs} pairs (max {max})")]
    BranchGuard { pairs: usize, max: usize },
    #[error("invalid instance: {0:?}")]
    InvalidInstance(Vec<Violation>),
    #[error("LP failure: {0}")]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Reduced(#[from] ReducedError),
    #[error("column generation stalled: pricing returned a column already in the pool")]
    Stalled,
    #[error("no branching edge available on a fractional LP")]
    NoBranchingEdge,
    #[error("{kind} of {len} edges exceeds the cap of {cap}")]
    CapExceeded { kind: &'static str, len: usize, cap: usize },
    #[error("columns overlap at vertex {0}")]
    OverlappingColumns(VertexId),
    #[error("malformed solution document: {0}")]
    SolutionJson(#[from] serde_json::Error),
}

// ---------------------------------------------------------------------------
// Column pool
// ---------------------------------------------------------------------------

/// A deduplicated set of columns with per-vertex incidence lists, the data
/// the restricted master is built from.
#[derive(Debug, Clone)]
pub struct ColumnPool {
    columns: Vec<Column>,
    by_body: BTreeMap<ColumnBody, usize>,
    incidence: Vec<Vec<usize>>,
}

impl ColumnPool {
    pub fn new(num_vertices: usize) -> Self {
        ColumnPool {
            columns: Vec::new(),
            by_body: BTreeMap::new(),
            incidence: vec![Vec::new(); num_vertices],
        }
    }

    /// Adds a column unless a column with the same body is already present.
    /// Returns whether the pool grew.
    pub fn push(&mut self, column: Column) -> bool {
        if self.by_body.contains_key(column.body()) {
            return false;
        }
        let idx = self.columns.len();
        self.by_body.insert(column.body().clone(), idx);
        for &v in column.vertices() {
            self.incidence[v.0].push(idx);
        }
        self.columns.push(column);
        true
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn contains(&self, body: &ColumnBody) -> bool {
        self.by_body.contains_key(body)
    }

    pub fn incident_to(&self, v: VertexId) -> &[usize] {
        &self.incidence[v.0]
    }
}

// ---------------------------------------------------------------------------
// Packing solutions and the solution document
// ---------------------------------------------------------------------------

/// A vertex-disjoint, cap-respecting set of columns. Construction
/// re-validates the whole structure, so any `PackingSolution` that exists is
/// well-formed.
#[derive(Debug, Clone)]
pub struct PackingSolution {
    columns: Vec<Column>,
    total_weight: f64,
}

impl PackingSolution {
    pub fn empty() -> Self {
        PackingSolution { columns: Vec::new(), total_weight: 0.0 }
    }

    /// Validates disjointness, per-body structure, and caps against
    /// `instance`, and sorts the columns canonically.
    pub fn validated(
        mut columns: Vec<Column>,
        instance: &Instance,
    ) -> Result<Self, ClearingError> {
        let mut used = vec![false; instance.num_vertices()];
        for column in &columns {
            column.body().validate_in(instance).map_err(ReducedError::from)?;
            let (kind, len, cap) = match column.body() {
                ColumnBody::Cycle(c) => ("cycle", c.edge_count(), instance.cycle_cap()),
                ColumnBody::Chain(c) => ("chain", c.edge_count(), instance.chain_cap()),
            };
            if len > cap {
                return Err(ClearingError::CapExceeded { kind, len, cap });
            }
            for &v in column.vertices() {
                if used[v.0] {
                    return Err(ClearingError::OverlappingColumns(v));
                }
                used[v.0] = true;
            }
        }
        columns.sort_by(|a, b| a.body().cmp(b.body()));
        let total_weight = columns.iter().map(|c| c.weight()).sum();
        Ok(PackingSolution { columns, total_weight })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolutionColumnDoc {
    pub kind: String,
    pub vertices: Vec<usize>,
    pub weight: f64,
}

/// Parsed form of the solution document
/// `{"objective": number, "columns": [{"kind", "vertices", "weight"}]}`.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolutionDoc {
    pub objective: f64,
    #[serde(default)]
    pub columns: Vec<SolutionColumnDoc>,
}

pub fn parse_solution(text: &str) -> Result<SolutionDoc, ClearingError> {
    Ok(serde_json::from_str(text)?)
}

/// Canonical text form of a packing: fixed key order, one column per line.
pub fn serialize_packing(solution: &PackingSolution) -> String {
    let mut s = String::new();
    s.push_str("{\n");
    s.push_str(&format!(
        "  \"objective\": {}",
        serde_json::to_string(&solution.total_weight()).expect("finite")
    ));
    if solution.columns().is_empty() {
        s.push_str(",\n  \"columns\": []\n}\n");
        return s;
    }
    s.push_str(",\n  \"columns\": [\n");
    let lines: Vec<String> = solution
        .columns()
        .iter()
        .map(|c| {
            let ids: Vec<String> = c.vertices().iter().map(|v| v.to_string()).collect();
            format!(
                "    {{\"kind\": \"{}\", \"vertices\": [{}], \"weight\": {}}}",
                c.body().kind_name(),
                ids.join(", "),
                serde_json::to_string(&c.weight()).expect("finite")
            )
        })
        .collect();
    s.push_str(&lines.join(",\n"));
    s.push_str("\n  ]\n}\n");
    s
}

// ---------------------------------------------------------------------------
// Enumeration and the brute-force oracle
// ---------------------------------------------------------------------------

fn ensure_valid(instance: &Instance) -> Result<(), ClearingError> {
    let violations = instance.validate();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(ClearingError::InvalidInstance(violations))
    }
}

/// Enumerates every feasible column: all simple cycles of at most `L` edges
/// (found once each from their minimal vertex) and all simple
/// altruist-rooted chains of 1..=`K` edges. Columns are priced at zero
/// duals, so `price == weight` for pool entries.
pub fn enumerate_columns(instance: &Instance) -> Result<ColumnPool, ClearingError> {
    ensure_valid(instance)?;
    let pairs = instance.num_pairs();
    if pairs > ENUMERATION_MAX_PAIRS || instance.chain_cap() > ENUMERATION_MAX_CHAIN_CAP {
        return Err(ClearingError::EnumerationGuard {
            pairs,
            max_pairs: ENUMERATION_MAX_PAIRS,
            chain_cap: instance.chain_cap(),
            max_chain_cap: ENUMERATION_MAX_CHAIN_CAP,
        });
    }

    let zero = DualVector::zeros(instance);
    let mut pool = ColumnPool::new(instance.num_vertices());

    let mut bodies: Vec<ColumnBody> = Vec::new();
    let pair_ids: Vec<VertexId> = instance.pairs().collect();
    for &root in &pair_ids {
        let mut on_path = vec![false; instance.num_vertices()];
        on_path[root.0] = true;
        let mut path = vec![root];
        collect_cycles(instance, root, &mut path, &mut on_path, &mut bodies);
    }
    let altruists: Vec<VertexId> = instance.altruists().collect();
    for &a in &altruists {
        let mut on_path = vec![false; instance.num_vertices()];
        on_path[a.0] = true;
        let mut path = vec![a];
        collect_chains(instance, &mut path, &mut on_path, &mut bodies);
    }

    for body in bodies {
        let column = price_of(&body, instance, &zero)?;
        pool.push(column);
    }
    Ok(pool)
}

fn collect_cycles(
    instance: &Instance,
    root: VertexId,
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<ColumnBody>,
) {
    let u = *path.last().unwrap();
    if path.len() >= 2 && instance.edge_between(u, root).is_some() {
        out.push(ColumnBody::Cycle(Cycle::new(path.clone()).expect("simple")));
    }
    if path.len() >= instance.cycle_cap() {
        return;
    }
    for e in instance.out_edges(u) {
        let v = e.dst;
        if v <= root || on_path[v.0] || instance.kind_of(v) != Some(crate::instance::VertexKind::Pair) {
            continue;
        }
        path.push(v);
        on_path[v.0] = true;
        collect_cycles(instance, root, path, on_path, out);
        on_path[v.0] = false;
        path.pop();
    }
}

fn collect_chains(
    instance: &Instance,
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<ColumnBody>,
) {
    if path.len() > instance.chain_cap() {
        return;
    }
    let u = *path.last().unwrap();
    for e in instance.out_edges(u) {
        let v = e.dst;
        if on_path[v.0] {
            continue;
        }
        path.push(v);
        on_path[v.0] = true;
        out.push(ColumnBody::Chain(Chain::new(path.clone()).expect("simple")));
        collect_chains(instance, path, on_path, out);
        on_path[v.0] = false;
        path.pop();
    }
}

/// Exhaustive clearing oracle: the optimal packing by depth-first search
/// over the enumerated columns in canonical order, include-before-exclude,
/// with vertex-conflict and remaining-positive-weight pruning. Only
/// strictly better packings replace the incumbent, so ties resolve to the
/// first optimum in column order.
pub fn brute_force_clearing(instance: &Instance) -> Result<PackingSolution, ClearingError> {
    let pool = enumerate_columns(instance)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| pool.columns()[a].body().cmp(pool.columns()[b].body()));
    // Non-positive columns never improve a packing's weight.
    let candidates: Vec<&Column> = order
        .into_iter()
        .map(|i| &pool.columns()[i])
        .filter(|c| c.weight() > 0.0)
        .collect();

    let mut suffix_bound = vec![0.0; candidates.len() + 1];
    for i in (0..candidates.len()).rev() {
        suffix_bound[i] = suffix_bound[i + 1] + candidates[i].weight();
    }

    struct Search<'a> {
        candidates: &'a [&'a Column],
        suffix_bound: &'a [f64],
        used: Vec<bool>,
        chosen: Vec<usize>,
        best_weight: f64,
        best: Vec<usize>,
    }
    impl Search<'_> {
        fn run(&mut self, i: usize, weight: f64) {
            if weight > self.best_weight {
                self.best_weight = weight;
                self.best = self.chosen.clone();
            }
            if i == self.candidates.len() || weight + self.suffix_bound[i] <= self.best_weight
            {
                return;
            }
            let column = self.candidates[i];
            if column.vertices().iter().all(|v| !self.used[v.0]) {
                for v in column.vertices() {
                    self.used[v.0] = true;
                }
                self.chosen.push(i);
                self.run(i + 1, weight + column.weight());
                self.chosen.pop();
                for v in column.vertices() {
                    self.used[v.0] = false;
                }
            }
            self.run(i + 1, weight);
        }
    }

    let mut search = Search {
        candidates: &candidates,
        suffix_bound: &suffix_bound,
        used: vec![false; instance.num_vertices()],
        chosen: Vec::new(),
        best_weight: 0.0,
        best: Vec::new(),
    };
    search.run(0, 0.0);

    let columns = search.best.iter().map(|&i| candidates[i].clone()).collect();
    PackingSolution::validated(columns, instance)
}

// ---------------------------------------------------------------------------
// Restricted master
// ---------------------------------------------------------------------------

/// An optimal solution of the restricted master LP: `max sum w_c x_c`
/// subject to one "used at most once" constraint per vertex.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    /// Aligned with the pool's column order.
    pub primal: Vec<f64>,
    pub duals: DualVector,
}

impl LpSolution {
    /// Optimality certificate checks: primal feasibility, dual sign, strong
    /// duality, and complementary slackness, all within tolerance.
    pub fn verify(&self, pool: &ColumnPool, instance: &Instance) -> Result<(), String> {
        for (i, &x) in self.primal.iter().enumerate() {
            if x < -1e-9 {
                return Err(format!("primal {i} negative: {x}"));
            }
        }
        for &(v, _) in instance.vertices() {
            let load: f64 = pool.incident_to(v).iter().map(|&i| self.primal[i]).sum();
            if load > 1.0 + 1e-9 {
                return Err(format!("vertex {v} overloaded: {load}"));
            }
        }
        let mut dual_obj = 0.0;
        for &(v, _) in instance.vertices() {
            let d = self.duals.get(v).ok_or_else(|| format!("no dual for {v}"))?;
            if d < -1e-9 {
                return Err(format!("dual for {v} negative: {d}"));
            }
            dual_obj += d;
        }
        if self.objective > dual_obj + 1e-6 {
            return Err(format!(
                "weak duality violated: primal {} > dual {dual_obj}",
                self.objective
            ));
        }
        if (self.objective - dual_obj).abs() > 1e-6 {
            return Err(format!(
                "strong duality residual too large: primal {} dual {dual_obj}",
                self.objective
            ));
        }
        // Complementary slackness: every used column has zero price, every
        // positive dual sits on a saturated vertex.
        for (i, column) in pool.columns().iter().enumerate() {
            if self.primal[i] > 1e-7 {
                let dual_sum: f64 = column
                    .vertices()
                    .iter()
                    .map(|&v| self.duals.get(v).unwrap_or(0.0))
                    .sum();
                let price = column.weight() - dual_sum;
                if price.abs() > 1e-6 {
                    return Err(format!("basic column {i} has price {price}"));
                }
            }
        }
        for &(v, _) in instance.vertices() {
            let d = self.duals.get(v).unwrap_or(0.0);
            if d > 1e-7 {
                let load: f64 = pool.incident_to(v).iter().map(|&i| self.primal[i]).sum();
                if (load - 1.0).abs() > 1e-6 {
                    return Err(format!(
                        "vertex {v} has dual {d} but load {load}"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Solves the restricted master over `pool` with the in-repo simplex.
pub fn solve_restricted_master(
    pool: &ColumnPool,
    instance: &Instance,
) -> Result<LpSolution, ClearingError> {
    ensure_valid(instance)?;
    let n = instance.num_vertices();
    let cols = pool.len();
    let objective: Vec<f64> = pool.columns().iter().map(|c| c.weight()).collect();
    let mut rows = vec![vec![0.0; cols]; n];
    for (v, _) in instance.vertices() {
        for &i in pool.incident_to(*v) {
            rows[v.0][i] = 1.0;
        }
    }
    let rhs = vec![1.0; n];
    let solution = simplex::solve_max(&objective, &rows, &rhs)?;
    let duals: DualVector = instance
        .vertices()
        .iter()
        .map(|&(id, _)| (id, solution.duals[id.0]))
        .collect();
    let lp = LpSolution { objective: solution.objective, primal: solution.x, duals };
    debug_assert_eq!(lp.verify(pool, instance), Ok(()));
    Ok(lp)
}

// ---------------------------------------------------------------------------
// Column generation
// ---------------------------------------------------------------------------

/// Cheap initial pool: every single-edge chain and every 2-cycle.
pub fn seed_pool(instance: &Instance) -> Result<ColumnPool, ClearingError> {
    ensure_valid(instance)?;
    let zero = DualVector::zeros(instance);
    let mut pool = ColumnPool::new(instance.num_vertices());
    for a in instance.altruists() {
        for e in instance.out_edges(a) {
            let chain = ColumnBody::Chain(Chain::new(vec![a, e.dst]).expect("two vertices"));
            pool.push(price_of(&chain, instance, &zero)?);
        }
    }
    for u in instance.pairs() {
        for e in instance.out_edges(u) {
            let v = e.dst;
            if v > u && instance.edge_between(v, u).is_some() {
                let cycle = ColumnBody::Cycle(Cycle::new(vec![u, v]).expect("two vertices"));
                pool.push(price_of(&cycle, instance, &zero)?);
            }
        }
    }
    Ok(pool)
}

#[derive(Debug, Clone, Copy)]
pub struct ColgenOptions {
    /// Threads handed to the exact chain pricer.
    pub threads: usize,
    /// Positive-price threshold; see [`PRICING_POSITIVE_TOLERANCE`].
    pub tolerance: f64,
}

impl Default for ColgenOptions {
    fn default() -> Self {
        ColgenOptions { threads: 1, tolerance: PRICING_POSITIVE_TOLERANCE }
    }
}

/// Column generation to LP optimality: alternately solve the restricted
/// master and price against its duals, adding every positive-price witness
/// (one cycle and one chain per round at most), until the exact pricers
/// certify that no positive-price column remains. Because the chain pricer
/// is complete, termination is an optimality proof for the full model, and
/// the restricted objective is non-decreasing along the way.
pub fn column_generation(
    instance: &Instance,
    seed: ColumnPool,
) -> Result<(LpSolution, ColumnPool), ClearingError> {
    column_generation_with(instance, seed, &ColgenOptions::default())
}

pub fn column_generation_with(
    instance: &Instance,
    seed: ColumnPool,
    opts: &ColgenOptions,
) -> Result<(LpSolution, ColumnPool), ClearingError> {
    ensure_valid(instance)?;
    let mut pool = seed;
    let mut previous_objective = f64::NEG_INFINITY;
    loop {
        let lp = solve_restricted_master(&pool, instance)?;
        debug_assert!(
            lp.objective >= previous_objective - 1e-9,
            "restricted master regressed: {} -> {}",
            previous_objective,
            lp.objective
        );
        previous_objective = lp.objective;

        let rg = build_reduced_graph(instance, &lp.duals)?;
        let mut witnesses: Vec<Column> = Vec::new();
        let cycle = cycle_pricing_bellman_ford_with(&rg, instance.cycle_cap(), opts.tolerance);
        if let Some(w) = cycle.witness {
            witnesses.push(w);
        }
        let chain = exact_chain_pricing_with(
            &rg,
            instance.chain_cap(),
            &ChainSearchOptions {
                threads: opts.threads,
                tolerance: opts.tolerance,
                ..Default::default()
            },
        );
        if let Some(w) = chain.witness {
            witnesses.push(w);
        }

        if witnesses.is_empty() {
            return Ok((lp, pool));
        }
        let mut grew = false;
        for w in witnesses {
            grew |= pool.push(w);
        }
        if !grew {
            // An optimal dual solution prices every pool column at <= 0, so
            // a "new" positive-price witness must be genuinely new.
            return Err(ClearingError::Stalled);
        }
    }
}

// ---------------------------------------------------------------------------
// Branch and price
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchAndPriceStats {
    pub nodes_explored: usize,
}

/// Solves the clearing problem to provable integer optimality. Depth-first
/// branch and bound; every node's LP is solved by column generation on the
/// node's subgraph. Fractional nodes branch on an edge `(u, v)` of a
/// fractional column: the left child deletes the edge, the right child
/// forces it by deleting all competing out-edges of `u` and in-edges of `v`.
/// Only edges with at least one competing sibling are eligible, which
/// guarantees both children are strictly smaller than their parent.
pub fn branch_and_price(instance: &Instance) -> Result<PackingSolution, ClearingError> {
    branch_and_price_detailed(instance).map(|(solution, _)| solution)
}

pub fn branch_and_price_detailed(
    instance: &Instance,
) -> Result<(PackingSolution, BranchAndPriceStats), ClearingError> {
    branch_and_price_with(instance, &ColgenOptions::default())
}

pub fn branch_and_price_with(
    instance: &Instance,
    colgen_opts: &ColgenOptions,
) -> Result<(PackingSolution, BranchAndPriceStats), ClearingError> {
    ensure_valid(instance)?;
    let pairs = instance.num_pairs();
    if pairs > BRANCH_AND_PRICE_MAX_PAIRS {
        return Err(ClearingError::BranchGuard { pairs, max: BRANCH_AND_PRICE_MAX_PAIRS });
    }
    let integer_weights = instance.has_integer_weights();

    let mut incumbent = PackingSolution::empty();
    let mut stats = BranchAndPriceStats::default();
    let mut stack: Vec<Instance> = vec![instance.clone()];

    let beats_incumbent = |candidate: f64, best: f64| -> bool {
        if integer_weights {
            candidate.round() > best.round()
        } else {
            candidate > best + 1e-9
        }
    };
    let bound_is_dead = |bound: f64, best: f64| -> bool {
        if integer_weights {
            (bound + INTEGRALITY_TOLERANCE).floor() <= best.round()
        } else {
            bound <= best + 1e-9
        }
    };

    while let Some(node) = stack.pop() {
        stats.nodes_explored += 1;
        let (lp, pool) = column_generation_with(&node, seed_pool(&node)?, colgen_opts)?;
        if bound_is_dead(lp.objective, incumbent.total_weight()) {
            continue;
        }

        let fractional: Vec<usize> = (0..pool.len())
            .filter(|&i| {
                let x = lp.primal[i];
                x > INTEGRALITY_TOLERANCE && x < 1.0 - INTEGRALITY_TOLERANCE
            })
            .collect();

        if fractional.is_empty() {
            let chosen: Vec<Column> = (0..pool.len())
                .filter(|&i| lp.primal[i] >= 0.5)
                .map(|i| pool.columns()[i].clone())
                .collect();
            // Columns of a subgraph are columns of the original instance.
            let candidate = PackingSolution::validated(chosen, instance)?;
            if beats_incumbent(candidate.total_weight(), incumbent.total_weight()) {
                incumbent = candidate;
            }
            continue;
        }

        // Contention of an edge: total fractional mass of columns using it.
        let mut contention: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        for &i in &fractional {
            for arc in pool.columns()[i].body().arcs() {
                *contention.entry(arc).or_insert(0.0) += lp.primal[i];
            }
        }
        let has_sibling = |&(u, v): &(VertexId, VertexId)| -> bool {
            node.out_edges(u).iter().any(|e| e.dst != v)
                || node.edges().iter().any(|e| e.dst == v && e.src != u)
        };
        let branch_arc = contention
            .iter()
            .filter(|(arc, _)| has_sibling(arc))
            .max_by(|(arc_a, x_a), (arc_b, x_b)| {
                x_a.total_cmp(x_b).then_with(|| arc_b.cmp(arc_a))
            })
            .map(|(&arc, _)| arc);
        let Some((u, v)) = branch_arc else {
            // Unreachable for packing LPs: a fractional basic solution
            // always leaves some contended edge with a sibling.
            return Err(ClearingError::NoBranchingEdge);
        };

        let left = node.with_edges_filtered(|e| !(e.src == u && e.dst == v));
        let right = node.with_edges_filtered(|e| {
            let competes_out = e.src == u && e.dst != v;
            let competes_in = e.dst == v && e.src != u;
            !(competes_out || competes_in)
        });
        debug_assert!(left.edges().len() < node.edges().len());
        debug_assert!(right.edges().len() < node.edges().len());
        // Depth-first, left (edge deleted) explored first.
        stack.push(right);
        stack.push(left);
    }

    Ok((incumbent, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        counterexample_instance, generate_random, Edge, GenParams, VertexKind,
    };

    fn pair_graph(edges: Vec<(usize, usize, f64)>, n: usize, l: usize, k: usize) -> Instance {
        Instance::new(
            (0..n).map(|i| (VertexId(i), VertexKind::Pair)).collect(),
            edges
                .into_iter()
                .map(|(s, d, w)| Edge { src: VertexId(s), dst: VertexId(d), weight: w })
                .collect(),
            l,
            k,
        )
    }

    #[test]
    fn counterexample_column_census() {
        let (instance, _) = counterexample_instance();
        let pool = enumerate_columns(&instance).unwrap();
        let cycles = pool
            .columns()
            .iter()
            .filter(|c| matches!(c.body(), ColumnBody::Cycle(_)))
            .count();
        let chains = pool.len() - cycles;
        // L = 3 admits no cycle; the altruist reaches 4 prefixes through
        // vertex 1 and 5 through vertex 5 (hand enumeration of the 7 edges).
        assert_eq!(cycles, 0);
        assert_eq!(chains, 9);
        let bodies: Vec<&ColumnBody> = pool.columns().iter().map(|c| c.body()).collect();
        let chain_of = |raw: &[usize]| {
            ColumnBody::Chain(
                Chain::new(raw.iter().map(|&i| VertexId(i)).collect()).unwrap(),
            )
        };
        assert!(bodies.contains(&&chain_of(&[0, 1])));
        assert!(bodies.contains(&&chain_of(&[0, 1, 2, 3, 4])));
        assert!(bodies.contains(&&chain_of(&[0, 5, 2, 3, 4, 1])));
    }

    #[test]
    fn three_pair_complete_digraph_has_five_cycles() {
        let edges = vec![
            (0, 1, 1.0),
            (0, 2, 1.0),
            (1, 0, 1.0),
            (1, 2, 1.0),
            (2, 0, 1.0),
            (2, 1, 1.0),
        ];
        let instance = pair_graph(edges, 3, 3, 1);
        let pool = enumerate_columns(&instance).unwrap();
        // Three 2-cycles plus two orientations of the triangle.
        assert_eq!(pool.len(), 5);
    }

    #[test]
    fn empty_instance_has_empty_pool() {
        let instance = Instance::new(vec![], vec![], 3, 4);
        assert!(enumerate_columns(&instance).unwrap().is_empty());
    }

    #[test]
    fn enumeration_guard_trips() {
        let instance = pair_graph(vec![], 13, 3, 4);
        assert!(matches!(
            enumerate_columns(&instance),
            Err(ClearingError::EnumerationGuard { pairs: 13, .. })
        ));
    }

    #[test]
    fn brute_force_single_cycle() {
        let instance = pair_graph(vec![(0, 1, 3.0), (1, 0, 4.0)], 2, 3, 1);
        let best = brute_force_clearing(&instance).unwrap();
        assert_eq!(best.total_weight(), 7.0);
        assert_eq!(best.columns().len(), 1);
    }

    #[test]
    fn brute_force_conflicting_cycles() {
        // Cycles (0,1) weight 3 and (1,2) weight 5 share vertex 1.
        let instance = pair_graph(
            vec![(0, 1, 1.0), (1, 0, 2.0), (1, 2, 2.0), (2, 1, 3.0)],
            3,
            3,
            1,
        );
        let best = brute_force_clearing(&instance).unwrap();
        assert_eq!(best.total_weight(), 5.0);
        let chosen = &best.columns()[0];
        assert_eq!(chosen.vertices(), &[VertexId(1), VertexId(2)]);
    }

    #[test]
    fn brute_force_on_the_counterexample() {
        let (instance, _) = counterexample_instance();
        let best = brute_force_clearing(&instance).unwrap();
        // The long chain (0,5,2,3,4,1) at weight 1 beats every alternative.
        assert_eq!(best.total_weight(), 1.0);
        assert_eq!(best.columns().len(), 1);
        assert_eq!(
            best.columns()[0].vertices(),
            &[VertexId(0), VertexId(5), VertexId(2), VertexId(3), VertexId(4), VertexId(1)]
        );
    }

    #[test]
    fn restricted_master_single_column() {
        let instance = pair_graph(vec![(0, 1, 2.0), (1, 0, 2.0)], 2, 3, 1);
        let pool = enumerate_columns(&instance).unwrap();
        assert_eq!(pool.len(), 1);
        let lp = solve_restricted_master(&pool, &instance).unwrap();
        assert!((lp.objective - 4.0).abs() < 1e-9);
        let dual_sum: f64 = lp.duals.iter().map(|(_, d)| d).sum();
        assert!((dual_sum - 4.0).abs() < 1e-9);
        lp.verify(&pool, &instance).unwrap();
    }

    #[test]
    fn restricted_master_two_disjoint_columns() {
        let instance = pair_graph(
            vec![(0, 1, 1.0), (1, 0, 1.0), (2, 3, 1.5), (3, 2, 1.5)],
            4,
            3,
            1,
        );
        let pool = enumerate_columns(&instance).unwrap();
        let lp = solve_restricted_master(&pool, &instance).unwrap();
        assert!((lp.objective - 5.0).abs() < 1e-9);
        lp.verify(&pool, &instance).unwrap();
    }

    #[test]
    fn restricted_master_duality_on_random_pools() {
        for seed in 0..20u64 {
            let params = GenParams {
                num_pairs: 6,
                num_altruists: 1,
                edge_density: 0.5,
                weight_min: 1,
                weight_max: 6,
                cycle_cap: 3,
                chain_cap: 3,
                seed,
            };
            let instance = generate_random(&params).unwrap();
            let pool = enumerate_columns(&instance).unwrap();
            let lp = solve_restricted_master(&pool, &instance).unwrap();
            lp.verify(&pool, &instance).unwrap();
        }
    }

    #[test]
    fn colgen_matches_full_pool_on_the_counterexample() {
        let (instance, _) = counterexample_instance();
        let seed = seed_pool(&instance).unwrap();
        let (lp, pool) = column_generation(&instance, seed).unwrap();
        let full = enumerate_columns(&instance).unwrap();
        let full_lp = solve_restricted_master(&full, &instance).unwrap();
        assert!((lp.objective - full_lp.objective).abs() <= 1e-6);
        assert!(pool.len() <= full.len());
    }

    #[test]
    fn colgen_trivial_when_nothing_is_positive() {
        let instance = pair_graph(vec![(0, 1, -1.0), (1, 0, 0.0)], 2, 3, 1);
        let seed = seed_pool(&instance).unwrap();
        let (lp, pool) = column_generation(&instance, seed).unwrap();
        assert_eq!(lp.objective, 0.0);
        // Nothing beyond the seed was generated.
        assert_eq!(pool.len(), 1);
    }

    #[test]
    fn branch_and_price_on_fractional_two_cycles() {
        // Three mutually overlapping 2-cycles: LP optimum 3 at x = 1/2, the
        // integer optimum picks one cycle. Forces at least one branching.
        let edges = vec![
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
            (0, 2, 1.0),
            (2, 0, 1.0),
        ];
        let instance = pair_graph(edges, 3, 2, 1);
        let (solution, stats) = branch_and_price_detailed(&instance).unwrap();
        assert_eq!(solution.total_weight(), 2.0);
        assert!(stats.nodes_explored > 1);
        let brute = brute_force_clearing(&instance).unwrap();
        assert_eq!(solution.total_weight(), brute.total_weight());
    }

    #[test]
    fn branch_and_price_solves_integral_root_in_one_node() {
        // Two disjoint 2-cycles: the LP is integral at the root.
        let instance = pair_graph(
            vec![(0, 1, 2.0), (1, 0, 2.0), (2, 3, 1.0), (3, 2, 1.0)],
            4,
            3,
            1,
        );
        let (solution, stats) = branch_and_price_detailed(&instance).unwrap();
        assert_eq!(solution.total_weight(), 6.0);
        assert_eq!(stats.nodes_explored, 1);
    }

    #[test]
    fn branch_and_price_matches_brute_force_on_the_counterexample() {
        let (instance, _) = counterexample_instance();
        let solution = branch_and_price(&instance).unwrap();
        let brute = brute_force_clearing(&instance).unwrap();
        assert_eq!(solution.total_weight(), brute.total_weight());
    }

    #[test]
    fn branch_guard_trips() {
        let instance = pair_graph(vec![], 13, 3, 4);
        assert!(matches!(
            branch_and_price(&instance),
            Err(ClearingError::BranchGuard { pairs: 13, .. })
        ));
    }

    #[test]
    fn solution_document_round_trips() {
        let (instance, _) = counterexample_instance();
        let best = brute_force_clearing(&instance).unwrap();
        let text = serialize_packing(&best);
        let doc = parse_solution(&text).unwrap();
        assert_eq!(doc.objective, best.total_weight());
        assert_eq!(doc.columns.len(), best.columns().len());
        assert_eq!(doc.columns[0].kind, "chain");
        assert_eq!(doc.columns[0].vertices, vec![0, 5, 2, 3, 4, 1]);
    }
}
