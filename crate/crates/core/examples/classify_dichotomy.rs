//! Every Dirac graph is a robust expander or close to the split extremal shape.
//!
//! cargo run --example classify_dichotomy

use rainbow_matching::graph::generate::{complete_rainbow, near_split, random_dirac_instance};
use rainbow_matching::structure::{certificate_holds, classify, refine_to_superextremal, Verdict};
use rainbow_matching::{ColoredBipartiteGraph, ParamSet};

fn main() {
    let params = ParamSet::default();
    let instances: Vec<(&str, ColoredBipartiteGraph)> = vec![
        ("K_{8,8}", complete_rainbow(8)),
        ("near-split m=4", near_split(4).0),
        ("random n=10", random_dirac_instance(10, 2, &params, 3).unwrap()),
    ];
    for (name, g) in &instances {
        let c = classify(g, &params).expect("Dirac input");
        print!("{name:16} ");
        match &c.verdict {
            Verdict::RobustExpander { nu, tau, sets_checked, .. } => {
                println!("robust ({nu}, {tau})-expander, {sets_checked} sets checked");
            }
            Verdict::Extremal { epsilon, partition, witness_side, witness, .. } => {
                println!("{epsilon}-extremal, witness {witness_side:?}{witness:?}");
                println!("{:16} A1 = {:?}, B1 = {:?}", "", partition.a1, partition.b1);
                // the default nu-constants are tuned for large n
                let small = ParamSet { nu1: 0.2, nu2: 0.3, nu4: 0.3, ..params.clone() };
                match refine_to_superextremal(g, partition, &small) {
                    Ok(r) => println!("{:16} superextremal with l = {}", "", r.partition.ell()),
                    Err(e) => println!("{:16} refinement: {e}", ""),
                }
            }
        }
        assert!(certificate_holds(g, &c));
    }
}
