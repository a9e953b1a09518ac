//! The tight family: Dirac graphs with every colour used (t+1)^2 times and no
//! rainbow perfect matching.
//!
//! cargo run --example counterexample -- [t]

use rainbow_matching::oracle::exists_conflict_free_pm;
use rainbow_matching::reductions::{check_deficiency, counterexample};
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::ParamSet;

fn main() {
    let t: usize = std::env::args().nth(1).map_or(1, |a| a.parse().expect("t"));
    let (g, meta) = counterexample(t).expect("t >= 1");
    let check = check_deficiency(&g, &meta.partition);
    println!("t = {t}: side size {}, min degree {}, colour bound {}", g.n(), g.min_degree(), g.coloring_bound());
    println!("|A1| = {}, |B1| = {}, A1 sees only B1: {}", check.a1_size, check.b1_size, check.a1_only_sees_b1);
    println!(
        "a perfect matching needs {} edges between A2 and B1 but only {} colours appear there",
        check.required_cross_edges, check.cross_colors
    );

    let f = g.conflicts_from_coloring();
    let report = find_conflict_free_pm(&g, &f, &SearchOptions::from_params(&ParamSet::default()));
    println!("search: {:?} via {}", report.outcome, report.phase);
    if t == 1 {
        println!("exhaustive oracle: {:?}", exists_conflict_free_pm(&g, &f, 10_000_000).decided());
    }
}
