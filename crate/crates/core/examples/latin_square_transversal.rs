//! A Latin square of order n is a proper n-edge-colouring of K_{n,n}; a rainbow
//! perfect matching is a transversal. Cyclic squares of even order have none.
//!
//! cargo run --example latin_square_transversal -- [max order]

use rainbow_matching::oracle::exists_conflict_free_pm;
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::{ColoredBipartiteGraph, ParamSet};

fn main() {
    let max: usize = std::env::args().nth(1).map_or(7, |a| a.parse().expect("order"));
    let opts = SearchOptions::from_params(&ParamSet::default());
    for n in 2..=max {
        let g = ColoredBipartiteGraph::complete(n, |a, b| ((a + b) % n) as u64);
        let f = g.conflicts_from_coloring();
        let report = find_conflict_free_pm(&g, &f, &opts);
        let cells: Vec<String> = report
            .outcome
            .matching()
            .map(|m| m.edges().map(|e| format!("({},{})", e.a, e.b)).collect())
            .unwrap_or_default();
        let oracle = exists_conflict_free_pm(&g, &f, 10_000_000).decided();
        println!("Z_{n}: transversal {:?} (oracle {oracle:?}) {}", report.outcome.is_found(), cells.join(" "));
    }
}
