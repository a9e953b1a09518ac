//! Rainbow and conflict-free perfect matchings in dense balanced bipartite graphs.
//!
//! The crate is organised around a handful of building blocks:
//!
//! - [`graph`]: balanced edge-coloured bipartite graphs, colourings, conflict systems
//!   and the seeded instance generators.
//! - [`matching`]: perfect matchings, conflict-freeness, switchable edges and the
//!   6-cycle switch.
//! - [`sampler`]: the alternating-cycle switch chain and the conflict-free matching
//!   search (restart sampling, switch repair, exact fallback).
//! - [`structure`]: robust neighbourhoods, robust-expander testing, the
//!   expander/extremal classifier and the superextremal refinement.
//! - [`extremal`]: the construction for near-split graphs (greedy cross matching,
//!   colour-subset selection, residual graph, dense core).
//! - [`reductions`]: the counterexample family, Δ-factor blow-ups and the rainbow
//!   embedding auxiliary graph.
//! - [`oracle`]: exhaustive ground truth used to cross-check everything above.
//! - [`cli`]: the command surface behind the `rainbow` binary.
//!
//! ```
//! use rainbow_matching::graph::ColoredBipartiteGraph;
//! use rainbow_matching::params::ParamSet;
//! use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
//!
//! // K_{3,3} coloured like the addition table of Z_3: a Latin square.
//! let g = ColoredBipartiteGraph::complete(3, |a, b| ((a + b) % 3) as u64);
//! let f = g.conflicts_from_coloring();
//! let report = find_conflict_free_pm(&g, &f, &SearchOptions::from_params(&ParamSet::default()));
//! assert!(report.outcome.is_found());
//! ```

pub mod cli;
pub mod extremal;
pub mod graph;
pub mod matching;
pub mod oracle;
pub mod params;
pub mod reductions;
pub mod sampler;
pub mod structure;
mod util;

pub use graph::{Color, ColoredBipartiteGraph, ConflictSystem, Edge, Side, Vertex};
pub use matching::Matching;
pub use params::ParamSet;
