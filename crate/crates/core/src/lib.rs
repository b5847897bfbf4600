//! Maximum-matching size estimation behind query-counted graph oracles.
//!
//! The crate provides:
//! - [`graph`]: simple-graph storage, the adjacency-list and adjacency-matrix
//!   query models with exact accounting, and edge-list / adjacency file I/O;
//! - [`exact`]: ground-truth matchers run on fully materialized graphs
//!   (maximum matching, greedy and random-greedy maximal matching, vertex
//!   cover certification);
//! - [`instances`]: seeded generators for layered hard instances, near-regular
//!   bipartite graphs, and random test corpora;
//! - [`edcs`]: the bounded-edge-degree subgraph engine built from sampled
//!   edges, with the underfull-edge predicate;
//! - [`local`]: per-vertex local computation: degree estimation, the
//!   approximate-matching membership oracle, and the random-greedy maximal
//!   matching oracle with virtual dummy neighbors;
//! - [`estimate`]: the top-level matching-size estimators and their reports.

pub mod edcs;
pub mod error;
pub mod estimate;
pub mod exact;
pub mod graph;
pub mod hash;
pub mod instances;
pub mod local;

pub use error::{Error, Result};
pub use graph::{Graph, OracleSession, QueryModel, Side};
