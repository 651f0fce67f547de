//! Clearing and pricing engine for barter exchanges.
//!
//! A barter market (kidney exchange being the canonical example) is modeled
//! as a directed compatibility graph over patient-donor pairs and altruistic
//! donors. The clearing problem asks for a maximum-weight vertex-disjoint set
//! of cycles of length at most `L` and altruist-rooted chains of at most `K`
//! edges. This crate solves it at desk scale with column generation and
//! branch and price, and ships the pricing-problem machinery that drives it:
//!
//! * [`instance`] — the graph data model, validation, canonical JSON
//!   serialization, and deterministic random generators.
//! * [`reduced`] — the pricing transform: column prices under LP duals and
//!   the reduced graph in which positive-price columns appear as
//!   negative-weight cycles and chains.
//! * [`pricing`] — the polynomial round-based chain heuristic (sound but
//!   incomplete), an exact exponential chain pricer, a Bellman-Ford-style
//!   cycle pricer, and an exhaustive enumeration oracle.
//! * [`reduction`] — encoders that turn directed Hamiltonian path instances
//!   into negative-chain pricing instances, plus a brute-force
//!   Hamiltonian-path checker for verification.
//! * [`clearing`] — column enumeration, a dense-tableau restricted master LP,
//!   column generation, branch and price, and a brute-force clearing oracle.
//! * [`cli`] — the command-line front end (`solve`, `price`, `counterexample`,
//!   `reduce`, `gen`, `bench`).

pub mod cli;
pub mod clearing;
pub mod instance;
pub mod pricing;
pub mod reduced;
pub mod reduction;
pub mod simplex;
