//! Pricing-problem solvers over a [`ReducedGraph`].
//!
//! Positive-price columns are exactly the negative-weight structures of the
//! reduced graph, so each solver here hunts for negative cycles or chains:
//!
//! * [`heuristic_chain_pricing`] — the polynomial round-based search with one
//!   path label per vertex and loop prevention. Sound (every witness is a
//!   real negative chain) but incomplete: it can answer "none" although a
//!   negative chain exists, because a cheap label can evict the path that
//!   would have reached the negative edge.
//! * [`exact_chain_pricing`] — depth-first search over simple paths from
//!   each altruist, complete by exhaustiveness, exponential in the worst
//!   case, with an admissible lower-bound prune.
//! * [`cycle_pricing_bellman_ford`] — the label-based variant for cycles run
//!   from every pair vertex with canonical-root deduplication.
//! * [`oracle_pricing`] — full enumeration of all negative cycles and chains
//!   for small graphs; the test oracle everything else is compared against.
//!
//! All solvers are pure functions of the reduced graph, deterministic, and
//! altruist searches are independent of each other.

use std::thread;

use thiserror::Error;

use crate::instance::{VertexId, VertexKind};
use crate::reduced::{Chain, Column, ColumnBody, Cycle, ReducedGraph};

/// Vertex count above which [`oracle_pricing`] refuses to enumerate.
pub const ORACLE_MAX_VERTICES: usize = 14;

#[derive(Debug, Error)]
pub enum PricingError {
    #[error("graph too large for the enumeration oracle: {vertices} vertices (max {max})")]
    TooLarge { vertices: usize, max: usize },
}

/// Best-known path from a source altruist, at most one per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLabel {
    pub at: VertexId,
    pub path: Vec<VertexId>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingAlgorithm {
    HeuristicChain,
    ExactChain,
    CycleBellmanFord,
    Oracle,
}

impl PricingAlgorithm {
    pub fn name(&self) -> &'static str {
        match self {
            PricingAlgorithm::HeuristicChain => "heuristic_chain",
            PricingAlgorithm::ExactChain => "exact_chain",
            PricingAlgorithm::CycleBellmanFord => "cycle_bellman_ford",
            PricingAlgorithm::Oracle => "oracle",
        }
    }
}

/// Work counters: `labels_expanded` counts label writes in the round-based
/// searches, `nodes_visited` counts edge expansions in the DFS searches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PricingStats {
    pub labels_expanded: u64,
    pub nodes_visited: u64,
}

#[derive(Debug, Clone)]
pub struct PricingResult {
    pub found: bool,
    pub witness: Option<Column>,
    pub algorithm: PricingAlgorithm,
    pub stats: PricingStats,
}

impl PricingResult {
    fn not_found(algorithm: PricingAlgorithm, stats: PricingStats) -> Self {
        PricingResult { found: false, witness: None, algorithm, stats }
    }
}

/// Knobs for [`exact_chain_pricing_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSearchOptions {
    /// Explore the whole space and report the most negative witness
    /// (ties broken by lexicographic vertex sequence). When false, the
    /// search stops at the first witness in deterministic DFS order.
    pub best: bool,
    /// Enable the admissible prune `W + b * mu >= 0`. Disabling it is only
    /// useful to test that pruning never changes the answer.
    pub prune: bool,
    /// Per-altruist searches are independent; values above 1 run them on
    /// that many OS threads. The merged result is identical to the
    /// sequential one: lowest-id altruist's witness (first-found mode) or
    /// the global minimum (best mode).
    pub threads: usize,
    /// A weight counts as negative when it is `< -tolerance`. The column
    /// generation loop passes a small positive value so that numerical
    /// noise in LP duals cannot masquerade as a positive-price column.
    pub tolerance: f64,
}

impl Default for ChainSearchOptions {
    fn default() -> Self {
        ChainSearchOptions { best: false, prune: true, threads: 1, tolerance: 0.0 }
    }
}

// ---------------------------------------------------------------------------
// Heuristic chain pricing
// ---------------------------------------------------------------------------

/// One round-based search from a single altruist. Rounds are synchronous:
/// round 1 seeds labels from the altruist's out-edges, and every later round
/// relaxes pair-to-pair edges against the previous round's labels, so after
/// round `r` a label holds a path of at most `r` edges. A relaxation of
/// `(u, v)` is permitted only when `v` is not already on `u`'s labeled path,
/// and only strict improvements replace a label (ties keep the incumbent).
///
/// `observer` sees the label table after every round (1-based round index).
/// Returns the first strictly negative label found at the end of any round,
/// scanning vertices in ascending order, unless `run_all_rounds` forces the
/// full `k` rounds (used by the tracing entry point).
fn heuristic_from_altruist(
    rg: &ReducedGraph,
    k: usize,
    source: VertexId,
    run_all_rounds: bool,
    stats: &mut PricingStats,
    mut observer: impl FnMut(usize, &[Option<PathLabel>]),
) -> Option<(Vec<VertexId>, f64)> {
    let n = rg.num_vertices();
    let mut labels: Vec<Option<PathLabel>> = vec![None; n];
    let mut negative: Option<(Vec<VertexId>, f64)> = None;

    let scan_negative = |labels: &[Option<PathLabel>]| -> Option<(Vec<VertexId>, f64)> {
        labels
            .iter()
            .flatten()
            .find(|l| l.weight < 0.0)
            .map(|l| (l.path.clone(), l.weight))
    };

    for round in 1..=k {
        if round == 1 {
            for e in rg.out_edges(source) {
                let improves = match &labels[e.dst.0] {
                    None => true,
                    Some(l) => e.reduced < l.weight,
                };
                if improves {
                    labels[e.dst.0] = Some(PathLabel {
                        at: e.dst,
                        path: vec![source, e.dst],
                        weight: e.reduced,
                    });
                    stats.labels_expanded += 1;
                }
            }
        } else {
            let prev = labels.clone();
            for e in rg.edges() {
                if rg.kind(e.src) != VertexKind::Pair || rg.kind(e.dst) != VertexKind::Pair {
                    continue;
                }
                let Some(base) = &prev[e.src.0] else { continue };
                if base.path.contains(&e.dst) {
                    continue; // loop prevention
                }
                let candidate = base.weight + e.reduced;
                let improves = match &labels[e.dst.0] {
                    None => true,
                    Some(l) => candidate < l.weight,
                };
                if improves {
                    let mut path = base.path.clone();
                    path.push(e.dst);
                    labels[e.dst.0] = Some(PathLabel { at: e.dst, path, weight: candidate });
                    stats.labels_expanded += 1;
                }
            }
        }
        observer(round, &labels);
        if negative.is_none() {
            negative = scan_negative(&labels);
            if negative.is_some() && !run_all_rounds {
                return negative;
            }
        }
    }
    negative
}

/// The polynomial chain-pricing heuristic: round-based search from every
/// altruist, one label per vertex, loop prevention, strict improvement.
/// Sound but incomplete; [`exact_chain_pricing`] is the complete reference.
pub fn heuristic_chain_pricing(rg: &ReducedGraph, k: usize) -> PricingResult {
    let mut stats = PricingStats::default();
    for &a in rg.altruists() {
        if let Some((path, _)) = heuristic_from_altruist(rg, k, a, false, &mut stats, |_, _| {})
        {
            let chain = Chain::new(path).expect("search paths are simple");
            let column = rg
                .column(ColumnBody::Chain(chain))
                .expect("search chains are valid");
            return PricingResult {
                found: true,
                witness: Some(column),
                algorithm: PricingAlgorithm::HeuristicChain,
                stats,
            };
        }
    }
    PricingResult::not_found(PricingAlgorithm::HeuristicChain, stats)
}

/// Label tables of the heuristic search from one altruist, snapshotted after
/// every round (index 0 holds the round-1 table). Runs all `k` rounds even
/// if a negative label appears early.
pub fn heuristic_chain_rounds(
    rg: &ReducedGraph,
    k: usize,
    source: VertexId,
) -> Vec<Vec<Option<PathLabel>>> {
    let mut snapshots = Vec::with_capacity(k);
    let mut stats = PricingStats::default();
    heuristic_from_altruist(rg, k, source, true, &mut stats, |_, labels| {
        snapshots.push(labels.to_vec());
    });
    snapshots
}

// ---------------------------------------------------------------------------
// Exact chain pricing
// ---------------------------------------------------------------------------

struct ChainDfs<'a> {
    rg: &'a ReducedGraph,
    k: usize,
    opts: ChainSearchOptions,
    mu: f64,
    on_path: Vec<bool>,
    path: Vec<VertexId>,
    best: Option<(f64, Vec<VertexId>)>,
    stats: PricingStats,
}

impl<'a> ChainDfs<'a> {
    fn record(&mut self, weight: f64, path: Vec<VertexId>) {
        let better = match &self.best {
            None => true,
            Some((bw, bp)) => weight < *bw || (weight == *bw && path < *bp),
        };
        if better {
            self.best = Some((weight, path));
        }
    }

    /// Returns a witness immediately in first-found mode; in best mode the
    /// return value is always `None` and `self.best` accumulates.
    fn dfs(&mut self, u: VertexId, weight: f64, edges_used: usize) -> Option<(f64, Vec<VertexId>)> {
        for i in 0..self.rg.out_edges(u).len() {
            let e = self.rg.out_edges(u)[i];
            let v = e.dst;
            if self.rg.kind(v) != VertexKind::Pair || self.on_path[v.0] {
                continue;
            }
            self.stats.nodes_visited += 1;
            let w2 = weight + e.reduced;
            if w2 < -self.opts.tolerance {
                let mut path = self.path.clone();
                path.push(v);
                if !self.opts.best {
                    return Some((w2, path));
                }
                self.record(w2, path);
            }
            let remaining = self.k - (edges_used + 1);
            if remaining > 0 {
                // No extension of this path can dip below the threshold once
                // W + b * mu clears it; mu underestimates every future edge.
                let reachable =
                    !self.opts.prune || w2 + remaining as f64 * self.mu < -self.opts.tolerance;
                if reachable {
                    self.on_path[v.0] = true;
                    self.path.push(v);
                    let hit = self.dfs(v, w2, edges_used + 1);
                    self.path.pop();
                    self.on_path[v.0] = false;
                    if hit.is_some() {
                        return hit;
                    }
                }
            }
        }
        None
    }
}

fn exact_search_one(
    rg: &ReducedGraph,
    k: usize,
    opts: ChainSearchOptions,
    source: VertexId,
) -> (Option<(f64, Vec<VertexId>)>, PricingStats) {
    let mut dfs = ChainDfs {
        rg,
        k,
        opts,
        mu: rg.min_reduced().min(0.0),
        on_path: vec![false; rg.num_vertices()],
        path: vec![source],
        best: None,
        stats: PricingStats::default(),
    };
    dfs.on_path[source.0] = true;
    let hit = dfs.dfs(source, 0.0, 0);
    let found = if opts.best { dfs.best } else { hit };
    (found, dfs.stats)
}

/// Complete chain pricer: finds a negative simple path of at most `k` edges
/// rooted at some altruist iff one exists. Exponential worst case.
pub fn exact_chain_pricing(rg: &ReducedGraph, k: usize) -> PricingResult {
    exact_chain_pricing_with(rg, k, &ChainSearchOptions::default())
}

type SourceOutcome = (VertexId, Option<(f64, Vec<VertexId>)>, PricingStats);

pub fn exact_chain_pricing_with(
    rg: &ReducedGraph,
    k: usize,
    opts: &ChainSearchOptions,
) -> PricingResult {
    let sources = rg.altruists().to_vec();
    let mut per_source: Vec<SourceOutcome> = Vec::new();

    if opts.threads <= 1 {
        for &a in &sources {
            let (found, stats) = exact_search_one(rg, k, *opts, a);
            let early = !opts.best && found.is_some();
            per_source.push((a, found, stats));
            if early {
                break;
            }
        }
    } else {
        // Independent searches; the deterministic merge below makes the
        // outcome identical regardless of scheduling.
        let chunks: Vec<Vec<VertexId>> = (0..opts.threads)
            .map(|t| sources.iter().copied().skip(t).step_by(opts.threads).collect())
            .collect();
        let results = thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        chunk
                            .iter()
                            .map(|&a| {
                                let (found, stats) = exact_search_one(rg, k, *opts, a);
                                (a, found, stats)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("search panicked")).collect::<Vec<_>>()
        });
        per_source = results;
        per_source.sort_by_key(|(a, _, _)| *a);
    }

    let mut stats = PricingStats::default();
    for (_, _, s) in &per_source {
        stats.labels_expanded += s.labels_expanded;
        stats.nodes_visited += s.nodes_visited;
    }

    // Sequential first-found mode stops at the lowest-id altruist with a
    // witness; everything else merges associatively by (weight, sequence).
    let merged: Option<(f64, Vec<VertexId>)> = if !opts.best && opts.threads <= 1 {
        per_source.iter().find_map(|(_, found, _)| found.clone())
    } else {
        let mut best: Option<(f64, Vec<VertexId>)> = None;
        for (_, found, _) in &per_source {
            if let Some((w, path)) = found {
                let better = match &best {
                    None => true,
                    Some((bw, bp)) => w < bw || (w == bw && path < bp),
                };
                if better {
                    best = Some((*w, path.clone()));
                }
            }
        }
        best
    };

    match merged {
        Some((_, path)) => {
            let chain = Chain::new(path).expect("search paths are simple");
            let column = rg
                .column(ColumnBody::Chain(chain))
                .expect("search chains are valid");
            PricingResult {
                found: true,
                witness: Some(column),
                algorithm: PricingAlgorithm::ExactChain,
                stats,
            }
        }
        None => PricingResult::not_found(PricingAlgorithm::ExactChain, stats),
    }
}

// ---------------------------------------------------------------------------
// Cycle pricing
// ---------------------------------------------------------------------------

/// Bellman-Ford-style negative-cycle search with one path label per vertex
/// and loop prevention, run from each pair vertex as the canonical root:
/// only vertices with ids above the root participate, and cycles close only
/// through the arc back to the root, so each cycle is examined from its
/// minimal vertex exactly once. Completeness is an empirical property
/// checked against [`oracle_pricing`] in the test suite, not an assumption.
pub fn cycle_pricing_bellman_ford(rg: &ReducedGraph, l: usize) -> PricingResult {
    cycle_pricing_bellman_ford_with(rg, l, 0.0)
}

pub fn cycle_pricing_bellman_ford_with(
    rg: &ReducedGraph,
    l: usize,
    tolerance: f64,
) -> PricingResult {
    let n = rg.num_vertices();
    let mut stats = PricingStats::default();

    for source in rg.pairs() {
        let mut labels: Vec<Option<PathLabel>> = vec![None; n];
        labels[source.0] =
            Some(PathLabel { at: source, path: vec![source], weight: 0.0 });

        for _round in 1..l {
            let prev = labels.clone();
            for e in rg.edges() {
                if e.dst <= source
                    || rg.kind(e.src) != VertexKind::Pair
                    || rg.kind(e.dst) != VertexKind::Pair
                {
                    continue;
                }
                let Some(base) = &prev[e.src.0] else { continue };
                if base.path.contains(&e.dst) {
                    continue;
                }
                let candidate = base.weight + e.reduced;
                let improves = match &labels[e.dst.0] {
                    None => true,
                    Some(l) => candidate < l.weight,
                };
                if improves {
                    let mut path = base.path.clone();
                    path.push(e.dst);
                    labels[e.dst.0] =
                        Some(PathLabel { at: e.dst, path, weight: candidate });
                    stats.labels_expanded += 1;
                }
            }
            // Close candidate cycles through the arc back to the root.
            for slot in &labels {
                let Some(label) = slot else { continue };
                if label.at == source {
                    continue;
                }
                let Some(back) = rg.edge_between(label.at, source) else { continue };
                let cycle_len = label.path.len();
                let total = label.weight + back.reduced;
                if cycle_len <= l && total < -tolerance {
                    let cycle = Cycle::new(label.path.clone()).expect("simple path");
                    let column = rg
                        .column(ColumnBody::Cycle(cycle))
                        .expect("closed cycles are valid");
                    return PricingResult {
                        found: true,
                        witness: Some(column),
                        algorithm: PricingAlgorithm::CycleBellmanFord,
                        stats,
                    };
                }
            }
        }
    }
    PricingResult::not_found(PricingAlgorithm::CycleBellmanFord, stats)
}

// ---------------------------------------------------------------------------
// Enumeration oracle
// ---------------------------------------------------------------------------

/// Every negative structure of the graph, exhaustively enumerated: all
/// simple cycles of at most `l` edges and all simple altruist-rooted paths
/// of 1..=`k` edges, filtered to strictly negative reduced weight, sorted by
/// (weight, vertex sequence). Refuses graphs above [`ORACLE_MAX_VERTICES`].
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub neg_cycles: Vec<Column>,
    pub neg_chains: Vec<Column>,
}

impl OracleReport {
    pub fn min_chain_weight(&self) -> Option<f64> {
        self.neg_chains.first().map(|c| c.reduced_weight())
    }

    pub fn min_cycle_weight(&self) -> Option<f64> {
        self.neg_cycles.first().map(|c| c.reduced_weight())
    }
}

pub fn oracle_pricing(
    rg: &ReducedGraph,
    l: usize,
    k: usize,
) -> Result<OracleReport, PricingError> {
    let n = rg.num_vertices();
    if n > ORACLE_MAX_VERTICES {
        return Err(PricingError::TooLarge { vertices: n, max: ORACLE_MAX_VERTICES });
    }

    let mut neg_chains = Vec::new();
    for &a in rg.altruists() {
        let mut path = vec![a];
        let mut on_path = vec![false; n];
        on_path[a.0] = true;
        enumerate_chains(rg, k, &mut path, &mut on_path, 0.0, &mut neg_chains);
    }

    let mut neg_cycles = Vec::new();
    let pairs: Vec<VertexId> = rg.pairs().collect();
    for &s in &pairs {
        let mut path = vec![s];
        let mut on_path = vec![false; n];
        on_path[s.0] = true;
        enumerate_cycles(rg, l, s, &mut path, &mut on_path, 0.0, &mut neg_cycles);
    }

    let mut chains: Vec<Column> = neg_chains
        .into_iter()
        .map(|(path, _)| {
            rg.column(ColumnBody::Chain(Chain::new(path).expect("simple")))
                .expect("enumerated chains are valid")
        })
        .collect();
    let mut cycles: Vec<Column> = neg_cycles
        .into_iter()
        .map(|(path, _)| {
            rg.column(ColumnBody::Cycle(Cycle::new(path).expect("simple")))
                .expect("enumerated cycles are valid")
        })
        .collect();
    let sort_key = |c: &Column| (c.reduced_weight(), c.vertices().to_vec());
    chains.sort_by(|a, b| {
        sort_key(a).0.total_cmp(&sort_key(b).0).then_with(|| a.vertices().cmp(b.vertices()))
    });
    cycles.sort_by(|a, b| {
        sort_key(a).0.total_cmp(&sort_key(b).0).then_with(|| a.vertices().cmp(b.vertices()))
    });
    Ok(OracleReport { neg_cycles: cycles, neg_chains: chains })
}

fn enumerate_chains(
    rg: &ReducedGraph,
    k: usize,
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    weight: f64,
    out: &mut Vec<(Vec<VertexId>, f64)>,
) {
    if path.len() > k {
        return;
    }
    let u = *path.last().unwrap();
    for e in rg.out_edges(u) {
        let v = e.dst;
        if rg.kind(v) != VertexKind::Pair || on_path[v.0] {
            continue;
        }
        let w2 = weight + e.reduced;
        path.push(v);
        on_path[v.0] = true;
        if w2 < 0.0 {
            out.push((path.clone(), w2));
        }
        enumerate_chains(rg, k, path, on_path, w2, out);
        on_path[v.0] = false;
        path.pop();
    }
}

fn enumerate_cycles(
    rg: &ReducedGraph,
    l: usize,
    root: VertexId,
    path: &mut Vec<VertexId>,
    on_path: &mut Vec<bool>,
    weight: f64,
    out: &mut Vec<(Vec<VertexId>, f64)>,
) {
    let u = *path.last().unwrap();
    // Close back to the canonical root.
    if path.len() >= 2 && path.len() <= l {
        if let Some(back) = rg.edge_between(u, root) {
            let total = weight + back.reduced;
            if total < 0.0 {
                out.push((path.clone(), total));
            }
        }
    }
    if path.len() >= l {
        return;
    }
    for e in rg.out_edges(u) {
        let v = e.dst;
        if v <= root || rg.kind(v) != VertexKind::Pair || on_path[v.0] {
            continue;
        }
        path.push(v);
        on_path[v.0] = true;
        enumerate_cycles(rg, l, root, path, on_path, weight + e.reduced, out);
        on_path[v.0] = false;
        path.pop();
    }
}
