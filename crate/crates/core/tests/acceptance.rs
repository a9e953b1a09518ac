//! One line per acceptance criterion; exits non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use rainbow_matching::cli::{execute, Cli};
use rainbow_matching::extremal::{extremal_rainbow_pm, select_color_subset, BoxesConfig, ColorMultiset, SubsetBranch};
use rainbow_matching::graph::generate::{
    complete_rainbow, disjoint_halves, near_split, random_dirac_instance, random_min_degree, superextremal_instance,
};
use rainbow_matching::matching::{is_rainbow, switchable_edges};
use rainbow_matching::oracle::{count_6cycles_through, enumerate_perfect_matchings, exists_conflict_free_pm};
use rainbow_matching::reductions::{
    check_deficiency, counterexample, delta_factor_blowup, embedding_auxiliary, embedding_fixture, extract_embedding,
    extract_factor, SimpleGraph,
};
use rainbow_matching::sampler::{
    find_conflict_free_pm, frequency_report, sample_matchings, ChainConfig, SampleSchedule, SearchOptions,
};
use rainbow_matching::structure::{certificate_holds, classify, is_extremal, is_robust_expander, ExpanderMode, Verdict};
use rainbow_matching::{ColoredBipartiteGraph, Edge, Matching, ParamSet};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cli(args: &[&str]) -> (i32, Value) {
    let parsed = Cli::try_parse_from(std::iter::once("rainbow").chain(args.iter().copied())).expect("valid arguments");
    let (exec, _) = execute(&parsed);
    (exec.code, exec.output)
}

fn write(dir: &Path, name: &str, v: &impl serde::Serialize) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn counterexample_exhaustive() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (code, graph) = cli(&["gen", "counterexample", "--t", "1"]);
    ensure(code == 0, || format!("gen exit {code}"))?;
    let file = write(dir.path(), "ce.json", &graph);
    let g = ColoredBipartiteGraph::from_file(&serde_json::from_value(graph).unwrap()).unwrap();
    ensure(g.is_dirac(), || "not Dirac".into())?;
    ensure(g.coloring_bound() == 4, || format!("colour bound {}", g.coloring_bound()))?;

    let (code, out) = cli(&["solve", &file]);
    ensure(code == 1 && out["outcome"] == "proved_none", || format!("solve exit {code}, outcome {}", out["outcome"]))?;

    let all = enumerate_perfect_matchings(&g, 10_000_000);
    ensure(!all.truncated, || "enumeration truncated".into())?;
    let rainbow = all.matchings.iter().filter(|m| is_rainbow(m, &g)).count();
    ensure(rainbow == 0, || format!("{rainbow} rainbow matchings found"))?;
    Ok(format!("exit 1 proved_none; {} perfect matchings enumerated, 0 rainbow", all.total_count))
}

fn counterexample_structural() -> Outcome {
    let mut parts = Vec::new();
    for t in 1..=3usize {
        let (g, meta) = counterexample(t).map_err(|e| e.to_string())?;
        let m = 2 * t;
        let check = check_deficiency(&g, &meta.partition);
        ensure(check.a1_size == (m - 1) * (t + 1), || format!("t={t}: |A1| = {}", check.a1_size))?;
        ensure(check.b1_size == (m + 1) * (t + 1), || format!("t={t}: |B1| = {}", check.b1_size))?;
        ensure(check.a1_only_sees_b1, || format!("t={t}: A1 has neighbours outside B1"))?;
        ensure(check.required_cross_edges == m + 2, || format!("t={t}: required {}", check.required_cross_edges))?;
        ensure(check.cross_colors == m + 1, || format!("t={t}: {} cross colours", check.cross_colors))?;
        parts.push(format!("t={t}: need {} > {} available", m + 2, m + 1));
    }
    Ok(parts.join("; "))
}

fn switchable_counts() -> Outcome {
    let mut checked = 0;
    for n in 3..=5usize {
        let g = complete_rainbow(n);
        let expected = (n - 1) * (n - 2);
        for m in enumerate_perfect_matchings(&g, 1_000_000).matchings {
            for x in m.edges() {
                let s = switchable_edges(&g, &m, x).map_err(|e| e.to_string())?.len();
                let c = count_6cycles_through(&g, &m, x);
                ensure(s == expected && c == expected, || format!("n={n} x={x}: {s} switchable, {c} cycles"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (M, x) pairs equal (n-1)(n-2)"))
}

fn solver_oracle_agreement() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let params = ParamSet::default();
    let (mut decided, mut found, mut none) = (0, 0, 0);
    for n in 4..=7usize {
        let bound = n.div_ceil(4);
        for i in 0..200u64 {
            let seed = (n as u64) * 10_000 + i;
            let g = random_dirac_instance(n, bound, &params, seed).map_err(|e| e.to_string())?;
            let f = g.conflicts_from_coloring();
            let file = write(dir.path(), "g.json", &g.to_file());
            let (code, out) = cli(&["solve", &file, "--seed", &seed.to_string()]);
            let Some(truth) = exists_conflict_free_pm(&g, &f, 10_000_000).decided() else { continue };
            decided += 1;
            let solved = code == 0;
            ensure(solved == truth, || format!("n={n} seed={seed}: solver {solved}, oracle {truth}"))?;
            if solved {
                let pairs: Vec<Edge> = serde_json::from_value(out["matching"].clone()).unwrap();
                let m = Matching::from_pairs(n, pairs).map_err(|e| e.to_string())?;
                ensure(m.is_perfect() && m.validate_in(&g).is_ok() && is_rainbow(&m, &g), || {
                    format!("n={n} seed={seed}: witness fails verification")
                })?;
                found += 1;
            } else {
                none += 1;
            }
        }
    }
    Ok(format!("{decided}/800 decided, all agree ({found} found, {none} none)"))
}

fn chain_uniformity() -> Outcome {
    let g = complete_rainbow(3);
    let cfg = ChainConfig { cycle_lengths: vec![4, 6], steps: 0, laziness: 0.5, seed: 2024 };
    let schedule = SampleSchedule::for_size(3);
    let samples = sample_matchings(&g, &cfg, 60_000, schedule).map_err(|e| e.to_string())?;
    let all = enumerate_perfect_matchings(&g, 1_000).matchings;
    let report = frequency_report(&samples, Some(&all));
    let worst = report.max_abs_deviation.unwrap_or(f64::INFINITY);
    ensure(report.states_visited == 6, || format!("{} states visited", report.states_visited))?;
    ensure(report.states.iter().all(|s| (s.frequency - 1.0 / 6.0).abs() <= 0.02), || format!("max deviation {worst:.4}"))?;

    let cfg6 = ChainConfig { cycle_lengths: vec![6], ..cfg };
    let samples = sample_matchings(&g, &cfg6, 20_000, schedule).map_err(|e| e.to_string())?;
    let visited: BTreeSet<Vec<usize>> = samples.iter().map(|m| m.as_permutation().unwrap()).collect();
    ensure(visited.len() == 3, || format!("{{6}} only visited {} states", visited.len()))?;
    Ok(format!("{{4,6}}: max |freq - 1/6| = {worst:.4}; {{6}}: 3 states"))
}

fn dichotomy() -> Outcome {
    let params = ParamSet::default();
    let mut corpus: Vec<(String, ColoredBipartiteGraph)> = Vec::new();
    for n in 2..=12 {
        corpus.push((format!("K{n},{n}"), complete_rainbow(n)));
    }
    for m in 1..=5 {
        corpus.push((format!("near-split m={m}"), near_split(m).0));
    }
    for h in 1..=6 {
        corpus.push((format!("halves h={h}"), disjoint_halves(h).0));
    }
    corpus.push(("counterexample t=1".into(), counterexample(1).unwrap().0));
    corpus.push(("superextremal k=4 l=2".into(), superextremal_instance(4, 2, 2, 1).unwrap().0));
    for n in 3..=12 {
        for seed in 0..3 {
            corpus.push((format!("random n={n} seed={seed}"), random_dirac_instance(n, 2, &params, seed).unwrap()));
        }
    }
    let (mut expanders, mut extremal) = (0, 0);
    for (name, g) in &corpus {
        ensure(g.is_dirac(), || format!("{name} is not Dirac"))?;
        let c = classify(g, &params).map_err(|e| format!("{name}: {e}"))?;
        ensure(certificate_holds(g, &c), || format!("{name}: certificate does not re-validate"))?;
        match &c.verdict {
            Verdict::RobustExpander { .. } => expanders += 1,
            Verdict::Extremal { epsilon, partition, .. } => {
                ensure(is_extremal(g, partition, *epsilon).holds, || format!("{name}: P1-P3 fail"))?;
                extremal += 1;
            }
        }
        if name.starts_with('K') {
            ensure(c.is_expander(), || format!("{name} not classified expander"))?;
        }
        if name.starts_with("near-split") && g.n() >= 5 {
            ensure(!c.is_expander(), || format!("{name} not classified extremal"))?;
        }
    }
    Ok(format!("{} instances: {expanders} expander, {extremal} extremal, all certificates re-validate", corpus.len()))
}

fn conflicts_expander_step() -> Outcome {
    let nu = 0.1 / 8.0;
    for i in 0..50u64 {
        let n = 4 + (i as usize % 9);
        let min_degree = (0.6 * n as f64).ceil() as usize;
        let g = random_min_degree(n, min_degree, 1, 0.6, 10_000, 900 + i).map_err(|e| e.to_string())?;
        let v = is_robust_expander(&g, nu, 0.25, ExpanderMode::Exact, 16).map_err(|e| e.to_string())?;
        ensure(v.is_expander(), || format!("graph {i} (n={n}) has a non-expanding set"))?;
    }
    Ok("50/50 graphs are robust (1/80, 1/4)-expanders, exact".into())
}

fn boxes_postconditions() -> Outcome {
    let big_n = 200;
    let (mu, nu, eta) = (0.05, 0.1, 0.3);
    let mut attempts = Vec::new();
    let mut sampled = 0;
    for inst in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + inst);
        // each colour's total multiplicity stays within mu N = 10
        let mut budget: Vec<usize> = Vec::new();
        let mut c: Vec<Vec<u64>> = Vec::new();
        for _ in 0..big_n {
            let size = rng.gen_range(20..=60);
            let mut ci = Vec::new();
            while ci.len() < size {
                let reuse = !budget.is_empty() && rng.gen_bool(0.7);
                let col = if reuse { rng.gen_range(0..budget.len()) } else { budget.push(0); budget.len() - 1 };
                let k = rng.gen_range(1..=3).min(size - ci.len());
                if budget[col] + k <= 10 {
                    budget[col] += k;
                    ci.extend(std::iter::repeat_n(col as u64, k));
                }
            }
            c.push(ci);
        }
        let c: Vec<ColorMultiset> = c.into_iter().map(|v| v.into_iter().collect()).collect();
        let ell = rng.gen_range(3..=30usize);
        let alpha = 4.0;
        let mut palette: Vec<u64> = (0..budget.len() as u64).collect();
        palette.shuffle(&mut rng);
        let u: BTreeSet<u64> = palette.into_iter().take(4 * ell).collect();
        let cfg = BoxesConfig { mu, nu, eta, alpha, epsilon: 0.25, retry_cap: 1000, seed: inst };
        let t = select_color_subset(&c, &u, ell, &cfg).map_err(|e| format!("instance {inst}: {e}"))?;
        ensure(!t.warnings.iter().any(|w| w.starts_with("(B")), || format!("instance {inst}: {:?}", t.warnings))?;
        ensure(t.colors.len() >= ell && t.colors.is_subset(&u), || format!("instance {inst}: |T| = {}", t.colors.len()))?;
        for (i, ci) in c.iter().enumerate() {
            let kept = ci.total() - ci.count_in(&t.colors);
            // (1 - 0.3)|C_i| in exact integers
            ensure(10 * kept >= 7 * ci.total(), || format!("instance {inst}: (T2) fails at C_{i}"))?;
        }
        sampled += usize::from(t.branch == SubsetBranch::Sampled);
        attempts.push(t.attempts);
    }
    let mean = attempts.iter().sum::<u64>() as f64 / attempts.len() as f64;
    let max = attempts.iter().max().unwrap();
    Ok(format!("100/100 satisfy (T1),(T2); {sampled} sampled, attempts mean {mean:.2} max {max}"))
}

fn superextremal_pipeline() -> Outcome {
    let params = ParamSet::default();
    for seed in 0..20u64 {
        let (g, p) = superextremal_instance(10, 2, 2, seed).map_err(|e| e.to_string())?;
        let out = extremal_rainbow_pm(&g, &p, &ParamSet { seed, ..params.clone() }).map_err(|e| format!("seed {seed}: {e}"))?;
        let m = &out.matching;
        ensure(m.is_perfect() && m.validate_in(&g).is_ok() && is_rainbow(m, &g), || format!("seed {seed}: not a rainbow PM"))?;
        ensure(out.m_star.len() as i64 == p.ell(), || format!("seed {seed}: |M*| = {}", out.m_star.len()))?;
        ensure(
            out.m_star.iter().all(|e| p.a1.contains(&e.a) && p.b2.contains(&e.b) && m.contains(*e)),
            || format!("seed {seed}: M* not inside E(A1,B2) and the matching"),
        )?;
    }
    Ok("20/20 instances (n=22, l=2, bound 2) give verified rainbow PMs containing M*".into())
}

fn factor_round_trip() -> Outcome {
    let mut parts = Vec::new();
    for n in [4usize, 6] {
        let g = SimpleGraph::complete(n, |u, v| (u * n + v) as u64);
        let (q, map) = delta_factor_blowup(&g, 2).map_err(|e| e.to_string())?;
        ensure(2 * q.n() == 2 * n, || format!("K{n}: 2N = {} but Delta n = {}", 2 * q.n(), 2 * n))?;
        let opts = SearchOptions::from_params(&ParamSet::default());
        let report = find_conflict_free_pm(&q, &q.conflicts_from_coloring(), &opts);
        let m = report.outcome.matching().ok_or_else(|| format!("K{n}: no rainbow PM of the blow-up"))?;
        let x = extract_factor(&g, &q, &map, m).map_err(|e| e.to_string())?;
        let h = x.to_graph(n).map_err(|e| e.to_string())?;
        let degrees: Vec<usize> = (0..n).map(|v| h.degree(v)).collect();
        ensure(degrees.iter().all(|&d| d == 2), || format!("K{n}: degrees {degrees:?}"))?;
        ensure(x.simple && h.is_rainbow() && h.edges().len() == n, || format!("K{n}: not simple and rainbow"))?;
        parts.push(format!("K{n}: {} edges", h.edges().len()));
    }
    Ok(format!("{}; spanning, 2-regular, simple, rainbow", parts.join(", ")))
}

fn embedding_round_trip() -> Outcome {
    let inst = embedding_fixture();
    let aux = embedding_auxiliary(&inst).map_err(|e| e.to_string())?;
    let report = find_conflict_free_pm(&aux.q, &aux.conflicts, &SearchOptions::from_params(&ParamSet::default()));
    let m = report.outcome.matching().ok_or("no conflict-free matching of Q")?;
    let emb = extract_embedding(&inst, &aux, m).map_err(|e| e.to_string())?;

    // independent check of f: bijection, R maps onto J, R rainbow and inside the host
    let f: BTreeMap<usize, usize> = emb.mapping.iter().copied().collect();
    let image: BTreeSet<usize> = f.values().copied().collect();
    ensure(image.len() == 8, || "f is not a bijection".into())?;
    let j: BTreeSet<(usize, usize)> = inst.template.iter().copied().collect();
    let mapped: BTreeSet<(usize, usize)> = emb.edges.iter().map(|&(a, b, _)| (f[&a], f[&b])).collect();
    ensure(mapped == j && emb.edges.len() == j.len(), || "f(R) != J".into())?;
    let host = SimpleGraph::from_file(&inst.host).unwrap();
    ensure(emb.edges.iter().all(|&(a, b, c)| host.color(a, b) == Some(c)), || "R leaves the host".into())?;
    let colors: BTreeSet<u64> = emb.edges.iter().map(|&(_, _, c)| c).collect();
    ensure(colors.len() == emb.edges.len(), || "R is not rainbow".into())?;

    // conflict pairs straight from the definition: edges at distinct A-vertices whose stars share a colour
    let qe: Vec<Edge> = aux.q.edges().map(|(e, _)| e).collect();
    let star = |e: Edge| -> Vec<u64> {
        let a = inst.a_side[e.a];
        aux.slots[e.b].iter().map(|&b| host.color(a, b).unwrap()).collect()
    };
    let mut pairs = BTreeSet::new();
    let mut incidence: BTreeMap<Edge, usize> = BTreeMap::new();
    for (i, &e) in qe.iter().enumerate() {
        for &h in qe[i + 1..].iter().filter(|h| h.a != e.a) {
            let mut all = star(e);
            all.extend(star(h));
            let distinct: BTreeSet<u64> = all.iter().copied().collect();
            if distinct.len() < all.len() {
                pairs.insert((e.min(h), e.max(h)));
                *incidence.entry(e).or_default() += 1;
                *incidence.entry(h).or_default() += 1;
            }
        }
    }
    let direct_bound = incidence.values().copied().max().unwrap_or(0);
    let built: BTreeSet<(Edge, Edge)> = aux.conflicts.pairs().collect();
    ensure(built == pairs, || format!("F_Q has {} pairs, definition gives {}", built.len(), pairs.len()))?;
    ensure(aux.conflicts.bound() == direct_bound, || format!("bound {} vs {direct_bound}", aux.conflicts.bound()))?;
    Ok(format!("R isomorphic to J and rainbow; F_Q {} pair(s), bound {direct_bound}", pairs.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 11] = [
        ("counterexample exhaustive", Duration::from_secs(5), counterexample_exhaustive),
        ("counterexample structural", Duration::from_secs(1), counterexample_structural),
        ("switchable count equals 6-cycle count", Duration::from_secs(10), switchable_counts),
        ("solver-oracle agreement", Duration::from_secs(120), solver_oracle_agreement),
        ("chain uniformity", Duration::from_secs(30), chain_uniformity),
        ("dichotomy executability", Duration::from_secs(60), dichotomy),
        ("conflict-mode expander step", Duration::from_secs(60), conflicts_expander_step),
        ("colour-subset postconditions", Duration::from_secs(60), boxes_postconditions),
        ("superextremal pipeline", Duration::from_secs(120), superextremal_pipeline),
        ("delta-factor round trip", Duration::from_secs(5), factor_round_trip),
        ("embedding round trip", Duration::from_secs(5), embedding_round_trip),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS  {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
