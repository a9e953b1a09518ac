//! The alternating-cycle switch chain on K_{3,3}: with 4- and 6-cycles it is
//! uniform over all 6 perfect matchings; with 6-cycles alone it keeps parity.
//!
//! cargo run --example switch_chain -- [samples]

use rainbow_matching::graph::generate::complete_rainbow;
use rainbow_matching::oracle::enumerate_perfect_matchings;
use rainbow_matching::sampler::{frequency_report, sample_matchings, ChainConfig, SampleSchedule};

fn main() {
    let samples: usize = std::env::args().nth(1).map_or(30_000, |a| a.parse().expect("samples"));
    let g = complete_rainbow(3);
    let all = enumerate_perfect_matchings(&g, 100).matchings;
    for cycles in [vec![4, 6], vec![6]] {
        let cfg = ChainConfig { cycle_lengths: cycles.clone(), steps: 0, laziness: 0.5, seed: 11 };
        let draws = sample_matchings(&g, &cfg, samples, SampleSchedule::for_size(3)).expect("chain runs");
        let report = frequency_report(&draws, Some(&all));
        println!("cycles {cycles:?}: {} states visited", report.states_visited);
        for s in &report.states {
            println!("  {:?}  {:.4}", s.permutation, s.frequency);
        }
        println!("  max deviation from 1/6: {:.4}", report.max_abs_deviation.unwrap());
    }
}
