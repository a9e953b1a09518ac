//! The near-split construction step by step on a superextremal instance.
//!
//! cargo run --example extremal_pipeline -- [k] [ell] [seed]

use rainbow_matching::extremal::extremal_rainbow_pm;
use rainbow_matching::graph::generate::superextremal_instance;
use rainbow_matching::matching::is_rainbow;
use rainbow_matching::ParamSet;

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let k = args.first().copied().unwrap_or(10);
    let ell = args.get(1).copied().unwrap_or(2);
    let seed = args.get(2).copied().unwrap_or(0) as u64;

    let (g, p) = superextremal_instance(k, ell, 2, seed).expect("instance");
    println!("n = {}, |A1| = {}, |B1| = {}, l = {}", g.n(), p.a1.len(), p.b1.len(), p.ell());
    let out = extremal_rainbow_pm(&g, &p, &ParamSet { seed, ..ParamSet::default() }).expect("pipeline");
    let t = &out.trace;
    println!("attempts: {}", t.attempts);
    println!("greedy cross matching: {} edges (i* = {})", t.greedy.len(), t.i_star);
    if let Some(s) = &t.subset {
        println!("colour subset: {} colours via {:?}, {} tries", s.colors.len(), s.branch, s.attempts);
    }
    println!("M* = {:?}", out.m_star);
    println!("residual side size {}, core edges {}", t.n_h, t.core_edges);
    for c in &t.residual_checks {
        println!("  {}", serde_json::to_string(c).unwrap());
    }
    println!("search phase on the residual: {}", t.search_phase);
    assert!(out.matching.is_perfect() && is_rainbow(&out.matching, &g));
    println!("verified rainbow perfect matching of size {}", out.matching.edges().count());
}
