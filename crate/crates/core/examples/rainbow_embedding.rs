//! Embedding a bipartite template into a coloured host as a rainbow copy.
//!
//! cargo run --example rainbow_embedding

use rainbow_matching::reductions::{embedding_auxiliary, embedding_fixture, extract_embedding};
use rainbow_matching::sampler::{find_conflict_free_pm, SearchOptions};
use rainbow_matching::ParamSet;

fn main() {
    let inst = embedding_fixture();
    println!("host: {} vertices, {} edges; template: {:?}", inst.host.n, inst.host.edges.len(), inst.template);
    let aux = embedding_auxiliary(&inst).expect("aux");
    println!(
        "auxiliary graph: side {}, {} edges, min degree {}, {} conflict pairs, bound {}",
        aux.q.n(),
        aux.q.edge_count(),
        aux.min_degree,
        aux.conflicts.len(),
        aux.conflicts.bound()
    );
    let report = find_conflict_free_pm(&aux.q, &aux.conflicts, &SearchOptions::from_params(&ParamSet::default()));
    let m = report.outcome.matching().expect("conflict-free perfect matching");
    let emb = extract_embedding(&inst, &aux, m).expect("embedding");
    println!("vertex map (template -> host): {:?}", emb.mapping);
    println!("rainbow copy (u, v, colour): {:?}", emb.edges);
}
