//! Generate a Dirac instance, find a rainbow perfect matching, check it.
//!
//! cargo run --example quickstart -- [n] [bound] [seed]

use rainbow_matching::graph::generate::random_dirac_instance;
use rainbow_matching::matching::is_rainbow;
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::ParamSet;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let n = args.first().copied().unwrap_or(10) as usize;
    let bound = args.get(1).copied().unwrap_or(2) as usize;
    let seed = args.get(2).copied().unwrap_or(1);

    let params = ParamSet::default();
    let g = random_dirac_instance(n, bound, &params, seed).expect("instance");
    println!("n = {n}, {} edges, min degree {}, colour bound {}", g.edge_count(), g.min_degree(), g.coloring_bound());

    let report = find_conflict_free_pm(&g, &g.conflicts_from_coloring(), &SearchOptions { seed, ..SearchOptions::from_params(&params) });
    match report.outcome.matching() {
        Some(m) => {
            assert!(m.is_perfect() && is_rainbow(m, &g));
            println!("rainbow perfect matching ({} phase, {} switches):", report.phase, report.switches);
            for e in m.edges() {
                println!("  a{} - b{}  colour {}", e.a, e.b, g.color_of(e).unwrap());
            }
        }
        None => println!("no rainbow perfect matching: {:?}", report.outcome),
    }
}
