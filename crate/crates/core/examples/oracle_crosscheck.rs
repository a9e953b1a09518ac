//! Compare the search against the exhaustive oracle on random small instances.
//!
//! cargo run --example oracle_crosscheck -- [instances per size]

use rainbow_matching::graph::generate::random_dirac_instance;
use rainbow_matching::oracle::exists_conflict_free_pm;
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::ParamSet;

fn main() {
    let per_size: u64 = std::env::args().nth(1).map_or(50, |a| a.parse().expect("count"));
    let params = ParamSet::default();
    println!("{:>3} {:>6} {:>8} {:>8} {:>9}", "n", "bound", "found", "none", "disagree");
    for n in 3..=8usize {
        for bound in [n.div_ceil(4), n / 2] {
            let (mut found, mut none, mut disagree) = (0, 0, 0);
            for seed in 0..per_size {
                let g = random_dirac_instance(n, bound.max(1), &params, seed).unwrap();
                let f = g.conflicts_from_coloring();
                let ours = find_conflict_free_pm(&g, &f, &SearchOptions { seed, ..SearchOptions::from_params(&params) });
                let truth = exists_conflict_free_pm(&g, &f, 10_000_000).decided();
                if truth != Some(ours.outcome.is_found()) {
                    disagree += 1;
                }
                if ours.outcome.is_found() { found += 1 } else { none += 1 }
            }
            println!("{n:>3} {:>6} {found:>8} {none:>8} {disagree:>9}", bound.max(1));
        }
    }
}
