//! Rainbow 2-factor of a properly coloured K_n via a bipartite blow-up.
//!
//! cargo run --example delta_factor -- [n]

use rainbow_matching::reductions::{delta_factor_blowup, extract_factor, SimpleGraph};
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::ParamSet;

fn main() {
    let n: usize = std::env::args().nth(1).map_or(6, |a| a.parse().expect("n"));
    let g = SimpleGraph::complete(n, |u, v| (u * n + v) as u64);
    let (q, map) = delta_factor_blowup(&g, 2).expect("even delta");
    println!("K{n} -> bipartite blow-up with side size {}, {} edges", q.n(), q.edge_count());
    let report = find_conflict_free_pm(&q, &q.conflicts_from_coloring(), &SearchOptions::from_params(&ParamSet::default()));
    let m = report.outcome.matching().expect("rainbow perfect matching of the blow-up");
    let x = extract_factor(&g, &q, &map, m).expect("factor");
    let h = x.to_graph(n).expect("graph");
    println!("factor edges (u, v, colour): {:?}", h.edges());
    println!("simple {}, rainbow {}, 2-regular {}", x.simple, h.is_rainbow(), (0..n).all(|v| h.degree(v) == 2));
}
