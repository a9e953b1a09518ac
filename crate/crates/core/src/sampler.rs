//! Random perfect matchings, the alternating-cycle switch chain and the
//! conflict-free matching search.
//!
//! The chain moves by rotating partners along alternating cycles. A 6-cycle move
//! rotates the partners of three A-vertices, which is an even permutation of the
//! A→B map, so a chain restricted to 6-cycles never leaves the sign class of its
//! start (on `K_{3,3}` it sees 3 of the 6 matchings). The default chain therefore
//! also proposes 4-cycle swaps, which flip the sign and make the chain irreducible
//! on dense graphs. Proposals are uniform over ordered vertex tuples, so the
//! proposal kernel is symmetric and the lazy chain's stationary law is uniform on
//! its communicating class.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColoredBipartiteGraph, ConflictSystem, Edge};
use crate::matching::{
    find_perfect_matching, is_conflict_free, maximum_matching_ordered, switchable_edges, violated_pairs,
    Matching, SwitchMove,
};
use crate::oracle::{self, OracleVerdict};
use crate::params::ParamSet;
use crate::util::{derive_seed, rng_from};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("graph has no perfect matching")]
    NoPerfectMatching,
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Allowed alternating-cycle lengths, a non-empty subset of `{4, 6}`.
    pub cycle_lengths: Vec<usize>,
    pub steps: u64,
    /// Probability of staying put at each step.
    pub laziness: f64,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { cycle_lengths: vec![4, 6], steps: 1000, laziness: 0.5, seed: 0 }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.cycle_lengths.is_empty() {
            return Err(SamplerError::InvalidConfig("cycle_lengths is empty".into()));
        }
        if let Some(l) = self.cycle_lengths.iter().find(|&&l| l != 4 && l != 6) {
            return Err(SamplerError::InvalidConfig(format!("unsupported cycle length {l}")));
        }
        if !(0.0..1.0).contains(&self.laziness) {
            return Err(SamplerError::InvalidConfig(format!("laziness {} not in [0, 1)", self.laziness)));
        }
        Ok(())
    }
}

/// A perfect matching found by augmenting paths over shuffled vertex and neighbour
/// orders; `None` iff the graph has none.
pub fn random_perfect_matching(g: &ColoredBipartiteGraph, seed: u64) -> Option<Matching> {
    let mut rng = rng_from(seed);
    random_pm_with(g, &mut rng)
}

fn random_pm_with<R: Rng>(g: &ColoredBipartiteGraph, rng: &mut R) -> Option<Matching> {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    let adjacency: Vec<Vec<usize>> = (0..g.n())
        .map(|a| {
            let mut l = g.neighbors_a(a).to_vec();
            l.shuffle(rng);
            l
        })
        .collect();
    let m = maximum_matching_ordered(g, &order, &adjacency);
    m.is_perfect().then_some(m)
}

/// Picks `k` distinct indices from `0..n` uniformly as an ordered tuple.
fn distinct<R: Rng>(n: usize, k: usize, rng: &mut R) -> Option<Vec<usize>> {
    (n >= k).then(|| rand::seq::index::sample(rng, n, k).into_vec())
}

/// One step of the switch chain. Invalid proposals leave `m` unchanged.
pub fn chain_step<R: Rng>(g: &ColoredBipartiteGraph, m: &Matching, cfg: &ChainConfig, rng: &mut R) -> Matching {
    let mut out = m.clone();
    chain_step_in_place(g, &mut out, cfg, rng);
    out
}

fn chain_step_in_place<R: Rng>(g: &ColoredBipartiteGraph, m: &mut Matching, cfg: &ChainConfig, rng: &mut R) -> bool {
    if rng.gen::<f64>() < cfg.laziness {
        return false;
    }
    let len = *cfg.cycle_lengths.choose(rng).expect("validated non-empty");
    let n = g.n();
    match len {
        4 => {
            let Some(t) = distinct(n, 2, rng) else { return false };
            let (a, c) = (t[0], t[1]);
            let (b, d) = (m.partner_of_a(a).unwrap(), m.partner_of_a(c).unwrap());
            if g.has_edge(a, d) && g.has_edge(c, b) {
                m.rotate_partners(&[a, c]);
                return true;
            }
        }
        _ => {
            let Some(t) = distinct(n, 3, rng) else { return false };
            // a1 takes M(a), a takes M(a2), a2 takes M(a1)
            let (a1, a, a2) = (t[0], t[1], t[2]);
            let p = |v| m.partner_of_a(v).unwrap();
            if g.has_edge(a1, p(a)) && g.has_edge(a, p(a2)) && g.has_edge(a2, p(a1)) {
                m.rotate_partners(&[a1, a, a2]);
                return true;
            }
        }
    }
    false
}

/// Burn-in and thinning for [`sample_matchings`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSchedule {
    pub burn_in: u64,
    pub stride: u64,
    /// Restart a fresh chain (new random start and burn-in) for every sample.
    pub independent_chains: bool,
}

impl SampleSchedule {
    /// Burn-in `20·n·ln n` and stride `2·n·ln n`, rounded up, with small floors.
    pub fn for_size(n: usize) -> Self {
        let nlogn = (n as f64) * (n.max(2) as f64).ln();
        SampleSchedule {
            burn_in: (20.0 * nlogn).ceil() as u64 + 100,
            stride: (2.0 * nlogn).ceil().max(1.0) as u64 + 2,
            independent_chains: false,
        }
    }
}

/// Draws `count` perfect matchings from the switch chain.
pub fn sample_matchings(
    g: &ColoredBipartiteGraph,
    cfg: &ChainConfig,
    count: usize,
    schedule: SampleSchedule,
) -> Result<Vec<Matching>, SamplerError> {
    cfg.validate()?;
    let mut rng = rng_from(cfg.seed);
    let mut start = random_pm_with(g, &mut rng).ok_or(SamplerError::NoPerfectMatching)?;
    let mut out = Vec::with_capacity(count);
    let burn = |m: &mut Matching, rng: &mut _| {
        for _ in 0..schedule.burn_in {
            chain_step_in_place(g, m, cfg, rng);
        }
    };
    burn(&mut start, &mut rng);
    let mut current = start;
    for i in 0..count {
        if schedule.independent_chains && i > 0 {
            current = random_pm_with(g, &mut rng).expect("graph has a perfect matching");
            burn(&mut current, &mut rng);
        } else if i > 0 {
            for _ in 0..schedule.stride {
                chain_step_in_place(g, &mut current, cfg, &mut rng);
            }
        }
        out.push(current.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateFrequency {
    /// The matching as its A→B permutation.
    pub permutation: Vec<usize>,
    pub count: u64,
    pub frequency: f64,
}

/// Empirical distribution of sampled matchings against a uniform target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub samples: u64,
    pub states_visited: usize,
    /// Size of the target state space when known.
    pub target_states: Option<usize>,
    pub expected_frequency: Option<f64>,
    pub max_abs_deviation: Option<f64>,
    /// Pearson statistic against the uniform target; degrees of freedom = target − 1.
    pub chi_square: Option<f64>,
    /// Target states never visited.
    pub unvisited: Vec<Vec<usize>>,
    pub even_sign_samples: u64,
    pub odd_sign_samples: u64,
    pub states: Vec<StateFrequency>,
}

/// Tallies `samples`; `target` lists every state the chain should reach.
pub fn frequency_report(samples: &[Matching], target: Option<&[Matching]>) -> FrequencyReport {
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let (mut even, mut odd) = (0, 0);
    for m in samples {
        let perm = m.as_permutation().expect("samples are perfect");
        match m.permutation_sign() {
            Some(1) => even += 1,
            _ => odd += 1,
        }
        *counts.entry(perm).or_insert(0) += 1;
    }
    let total = samples.len() as u64;
    let mut unvisited = Vec::new();
    let (mut expected, mut max_dev, mut chi) = (None, None, None);
    if let Some(target) = target {
        let k = target.len();
        let p = 1.0 / k as f64;
        let mut dev: f64 = 0.0;
        let mut stat = 0.0;
        for t in target {
            let perm = t.as_permutation().expect("target states are perfect");
            let c = counts.get(&perm).copied().unwrap_or(0);
            if c == 0 {
                unvisited.push(perm);
            }
            let f = c as f64 / total.max(1) as f64;
            dev = dev.max((f - p).abs());
            let e = p * total as f64;
            stat += (c as f64 - e).powi(2) / e;
        }
        expected = Some(p);
        max_dev = Some(dev);
        chi = Some(stat);
    }
    FrequencyReport {
        samples: total,
        states_visited: counts.len(),
        target_states: target.map(<[Matching]>::len),
        expected_frequency: expected,
        max_abs_deviation: max_dev,
        chi_square: chi,
        unvisited,
        even_sign_samples: even,
        odd_sign_samples: odd,
        states: counts
            .into_iter()
            .map(|(permutation, count)| StateFrequency {
                permutation,
                count,
                frequency: count as f64 / total.max(1) as f64,
            })
            .collect(),
    }
}

/// Budgets and switches for [`find_conflict_free_pm`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub mu: f64,
    /// Cap on restarts; the actual count is `min(⌈e^{√μ n}⌉, restart_budget)`.
    pub restart_budget: u64,
    /// Chain steps used to scramble each restart.
    pub scramble_steps: u64,
    /// Switches allowed in the repair phase.
    pub repair_steps: u64,
    pub exact_threshold: usize,
    pub oracle_node_cap: u64,
    pub seed: u64,
    pub jobs: usize,
}

impl SearchOptions {
    pub fn from_params(p: &ParamSet) -> Self {
        SearchOptions {
            mu: p.mu,
            restart_budget: p.restart_budget,
            scramble_steps: 64,
            repair_steps: p.chain_steps,
            exact_threshold: p.exact_threshold,
            oracle_node_cap: p.oracle_node_cap,
            seed: p.seed,
            jobs: 1,
        }
    }

    pub fn restarts_for(&self, n: usize) -> u64 {
        let heuristic = (self.mu.sqrt() * n as f64).exp().ceil();
        (heuristic.min(self.restart_budget as f64) as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoneProof {
    /// The graph has no perfect matching at all.
    NoPerfectMatching,
    /// The exhaustive search finished without finding a conflict-free one.
    ExhaustiveSearch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    Found { matching: Matching },
    Exhausted,
    ProvedNone { proof: NoneProof },
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }

    pub fn matching(&self) -> Option<&Matching> {
        match self {
            SearchOutcome::Found { matching } => Some(matching),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    #[serde(flatten)]
    pub outcome: SearchOutcome,
    /// Phase that settled the outcome: `restart`, `repair`, `exact` or `precheck`.
    pub phase: String,
    pub restarts: u64,
    pub switches: u64,
    pub repairs: u64,
    pub exact_ran: bool,
    pub elapsed_ms: f64,
}

#[derive(Default)]
struct Tally {
    restarts: u64,
    switches: u64,
    repairs: u64,
}

/// Violated pairs that involve at least one edge of `touched`, counted once.
fn violations_touching(m: &Matching, f: &ConflictSystem, touched: &[Edge]) -> usize {
    let mut seen: Vec<(Edge, Edge)> = Vec::new();
    for &e in touched {
        if !m.contains(e) {
            continue;
        }
        for &g in f.conflicts_of(e) {
            if m.contains(g) {
                let p = if e < g { (e, g) } else { (g, e) };
                if !seen.contains(&p) {
                    seen.push(p);
                }
            }
        }
    }
    seen.len()
}

struct Candidate {
    next: Matching,
    delta: i64,
    fresh: usize,
}

/// Scores a switch: change in violated pairs, and new pairs created by incoming edges.
fn score(g: &ColoredBipartiteGraph, m: &Matching, f: &ConflictSystem, mv: &SwitchMove) -> Candidate {
    let out = mv.outgoing();
    let inc = mv.incoming();
    let mut next = m.clone();
    next.rotate_partners(&[mv.x.a, mv.y.a, mv.partner_of_b]);
    debug_assert!(inc.iter().all(|&e| g.contains(e) && next.contains(e)));
    let before = violations_touching(m, f, &out);
    let after = violations_touching(&next, f, &inc);
    Candidate { next, delta: after as i64 - before as i64, fresh: after }
}

/// Restart sampling followed by switch repair, for one worker.
fn heuristic_search(
    g: &ColoredBipartiteGraph,
    f: &ConflictSystem,
    opts: &SearchOptions,
    seed: u64,
    stop: &AtomicBool,
    tally: &mut Tally,
) -> Option<(Matching, &'static str)> {
    let mut rng = rng_from(seed);
    let cfg = ChainConfig::default();
    let mut best: Option<(usize, Matching)> = None;
    for _ in 0..opts.restarts_for(g.n()) {
        if stop.load(Ordering::Relaxed) {
            return None;
        }
        tally.restarts += 1;
        let mut m = random_pm_with(g, &mut rng)?;
        for _ in 0..opts.scramble_steps {
            chain_step_in_place(g, &mut m, &cfg, &mut rng);
        }
        let v = violated_pairs(&m, f).len();
        if v == 0 {
            return Some((m, "restart"));
        }
        if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
            best = Some((v, m));
        }
    }
    let (_, mut m) = best?;
    for step in 0..opts.repair_steps {
        if step % 64 == 0 && stop.load(Ordering::Relaxed) {
            return None;
        }
        let violated = violated_pairs(&m, f);
        let Some(&(e1, e2)) = violated.choose(&mut rng) else {
            return Some((m, "repair"));
        };
        let mut members = [e1, e2];
        members.shuffle(&mut rng);
        let mut moved = false;
        for z in members {
            let ys = switchable_edges(g, &m, z).expect("z is a matched edge of a perfect matching");
            if ys.is_empty() {
                continue;
            }
            let cands: Vec<Candidate> = ys
                .iter()
                .map(|&y| score(g, &m, f, &SwitchMove::new(g, &m, z, y).expect("switchable")))
                .collect();
            let min_delta = cands.iter().map(|c| c.delta).min().unwrap();
            let pool: Vec<&Candidate> = if min_delta < 0 {
                cands.iter().filter(|c| c.delta == min_delta).collect()
            } else {
                let clean: Vec<&Candidate> = cands.iter().filter(|c| c.fresh == 0).collect();
                if clean.is_empty() {
                    cands.iter().collect()
                } else {
                    clean
                }
            };
            let pick = pool.choose(&mut rng).unwrap();
            if pick.delta < 0 {
                tally.repairs += 1;
            }
            m = pick.next.clone();
            tally.switches += 1;
            moved = true;
            break;
        }
        if !moved {
            // no 6-cycle through either member: fall back to a 4-cycle swap
            let four = ChainConfig { cycle_lengths: vec![4], laziness: 0.0, ..ChainConfig::default() };
            if chain_step_in_place(g, &mut m, &four, &mut rng) {
                tally.switches += 1;
            }
        }
    }
    violated_pairs(&m, f).is_empty().then_some((m, "repair"))
}

/// Searches for a perfect matching of `g` containing no pair of `f`.
///
/// Phases: restart sampling, then switch repair from the best restart, then (for
/// side sizes up to `exact_threshold`) the exhaustive oracle. `ProvedNone` is
/// only reported when the graph has no perfect matching or the oracle finished.
pub fn find_conflict_free_pm(g: &ColoredBipartiteGraph, f: &ConflictSystem, opts: &SearchOptions) -> SearchReport {
    let start = Instant::now();
    let report = |outcome, phase: &str, t: &Tally, exact_ran| SearchReport {
        outcome,
        phase: phase.to_string(),
        restarts: t.restarts,
        switches: t.switches,
        repairs: t.repairs,
        exact_ran,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let mut total = Tally::default();
    if find_perfect_matching(g).is_none() {
        return report(SearchOutcome::ProvedNone { proof: NoneProof::NoPerfectMatching }, "precheck", &total, false);
    }

    let stop = AtomicBool::new(false);
    let jobs = opts.jobs.max(1);
    let results: Vec<(Option<(Matching, &'static str)>, Tally)> = if jobs == 1 {
        let mut t = Tally::default();
        let r = heuristic_search(g, f, opts, derive_seed(opts.seed, 0), &stop, &mut t);
        vec![(r, t)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..jobs)
                .map(|w| {
                    let stop = &stop;
                    s.spawn(move || {
                        let mut t = Tally::default();
                        let r = heuristic_search(g, f, opts, derive_seed(opts.seed, w as u64), stop, &mut t);
                        if r.is_some() {
                            stop.store(true, Ordering::Relaxed);
                        }
                        (r, t)
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
        })
    };
    let mut found = None;
    for (r, t) in results {
        total.restarts += t.restarts;
        total.switches += t.switches;
        total.repairs += t.repairs;
        if found.is_none() {
            found = r;
        }
    }
    if let Some((m, phase)) = found {
        assert!(m.is_perfect() && is_conflict_free(&m, f), "search produced an invalid matching");
        return report(SearchOutcome::Found { matching: m }, phase, &total, false);
    }

    if g.n() <= opts.exact_threshold {
        return match oracle::exists_conflict_free_pm(g, f, opts.oracle_node_cap) {
            OracleVerdict::Yes { witness } => {
                assert!(witness.validate_in(g).is_ok() && is_conflict_free(&witness, f));
                report(SearchOutcome::Found { matching: witness }, "exact", &total, true)
            }
            OracleVerdict::No { .. } => {
                report(SearchOutcome::ProvedNone { proof: NoneProof::ExhaustiveSearch }, "exact", &total, true)
            }
            OracleVerdict::Unknown { .. } => report(SearchOutcome::Exhausted, "exact", &total, true),
        };
    }
    report(SearchOutcome::Exhausted, "repair", &total, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{complete_rainbow, perfect_matching_only, random_dirac_instance};
    use crate::matching::apply_swap;
    use crate::oracle::enumerate_perfect_matchings;
    use std::collections::{BTreeSet, VecDeque};

    fn identity(n: usize) -> Matching {
        Matching::from_permutation(&(0..n).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn random_pm_covers_k33() {
        let g = complete_rainbow(3);
        let seen: BTreeSet<Vec<usize>> =
            (0..1000).map(|s| random_perfect_matching(&g, s).unwrap().as_permutation().unwrap()).collect();
        assert_eq!(seen.len(), 6);
        let hall = ColoredBipartiteGraph::rainbow_colored(2, [(0, 0), (1, 0)]).unwrap();
        assert!(random_perfect_matching(&hall, 0).is_none());
        assert_eq!(random_perfect_matching(&g, 5), random_perfect_matching(&g, 5));
    }

    #[test]
    fn chain_on_rigid_graph_never_moves() {
        let g = perfect_matching_only(4);
        let mut rng = rng_from(1);
        let mut m = identity(4);
        for _ in 0..200 {
            m = chain_step(&g, &m, &ChainConfig::default(), &mut rng);
        }
        assert_eq!(m, identity(4));
    }

    /// States reachable from `start` using every valid move of the given lengths.
    fn orbit(g: &ColoredBipartiteGraph, start: &Matching, lengths: &[usize]) -> BTreeSet<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        seen.insert(start.as_permutation().unwrap());
        while let Some(m) = queue.pop_front() {
            let n = g.n();
            let mut next = Vec::new();
            if lengths.contains(&4) {
                for a in 0..n {
                    for c in a + 1..n {
                        if let Ok(s) = apply_swap(g, &m, a, c) {
                            next.push(s);
                        }
                    }
                }
            }
            if lengths.contains(&6) {
                for x in m.edges() {
                    for y in switchable_edges(g, &m, x).unwrap() {
                        let mv = SwitchMove::new(g, &m, x, y).unwrap();
                        next.push(crate::matching::apply_switch(g, &m, &mv).unwrap());
                    }
                }
            }
            for s in next {
                if seen.insert(s.as_permutation().unwrap()) {
                    queue.push_back(s);
                }
            }
        }
        seen
    }

    #[test]
    fn six_cycles_alone_keep_sign() {
        let g = complete_rainbow(3);
        let o6 = orbit(&g, &identity(3), &[6]);
        assert_eq!(o6.len(), 3);
        for p in &o6 {
            assert_eq!(Matching::from_permutation(p).unwrap().permutation_sign(), Some(1));
        }
        assert_eq!(orbit(&g, &identity(3), &[4, 6]).len(), 6);

        let cfg = ChainConfig { cycle_lengths: vec![6], ..ChainConfig::default() };
        let mut rng = rng_from(3);
        let mut m = identity(3);
        for _ in 0..500 {
            m = chain_step(&g, &m, &cfg, &mut rng);
            assert_eq!(m.permutation_sign(), Some(1));
        }
    }

    #[test]
    fn sampler_reaches_uniform_on_k33() {
        let g = complete_rainbow(3);
        let cfg = ChainConfig { seed: 11, ..ChainConfig::default() };
        let samples = sample_matchings(&g, &cfg, 6000, SampleSchedule::for_size(3)).unwrap();
        let target = enumerate_perfect_matchings(&g, 1000).matchings;
        let r = frequency_report(&samples, Some(&target));
        assert_eq!(r.states_visited, 6);
        assert!(r.max_abs_deviation.unwrap() < 0.03, "{r:?}");
        assert!(r.unvisited.is_empty());
    }

    #[test]
    fn sampler_degenerate_cases() {
        let g = perfect_matching_only(3);
        let s = sample_matchings(&g, &ChainConfig::default(), 20, SampleSchedule::for_size(3)).unwrap();
        assert!(s.iter().all(|m| *m == identity(3)));
        let hall = ColoredBipartiteGraph::rainbow_colored(2, [(0, 0), (1, 0)]).unwrap();
        assert_eq!(
            sample_matchings(&hall, &ChainConfig::default(), 1, SampleSchedule::for_size(2)).unwrap_err(),
            SamplerError::NoPerfectMatching
        );
        let bad = ChainConfig { cycle_lengths: vec![8], ..ChainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = ChainConfig { cycle_lengths: vec![], ..ChainConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn search_on_distinct_colours_is_immediate() {
        let g = complete_rainbow(5);
        let r = find_conflict_free_pm(&g, &g.conflicts_from_coloring(), &SearchOptions::from_params(&ParamSet::default()));
        assert!(r.outcome.is_found());
        assert_eq!(r.repairs, 0);
        assert_eq!(r.phase, "restart");
    }

    #[test]
    fn search_matches_oracle_on_small_instances() {
        let params = ParamSet::default();
        let opts = SearchOptions::from_params(&params);
        for seed in 0..20 {
            let g = random_dirac_instance(6, 2, &params, seed).unwrap();
            let f = g.conflicts_from_coloring();
            let r = find_conflict_free_pm(&g, &f, &opts);
            let truth = oracle::exists_conflict_free_pm(&g, &f, params.oracle_node_cap).decided().unwrap();
            assert_eq!(r.outcome.is_found(), truth, "seed {seed}");
            if let Some(m) = r.outcome.matching() {
                assert!(m.validate_in(&g).is_ok() && is_conflict_free(m, &f));
            }
        }
    }

    #[test]
    fn search_reports_proofs() {
        let mono = ColoredBipartiteGraph::complete(3, |_, _| 0);
        let r = find_conflict_free_pm(&mono, &mono.conflicts_from_coloring(), &SearchOptions::from_params(&ParamSet::default()));
        assert_eq!(r.outcome, SearchOutcome::ProvedNone { proof: NoneProof::ExhaustiveSearch });
        assert!(r.exact_ran);

        let hall = ColoredBipartiteGraph::rainbow_colored(2, [(0, 0), (1, 0)]).unwrap();
        let r = find_conflict_free_pm(&hall, &ConflictSystem::default(), &SearchOptions::from_params(&ParamSet::default()));
        assert_eq!(r.outcome, SearchOutcome::ProvedNone { proof: NoneProof::NoPerfectMatching });

        let opts = SearchOptions { exact_threshold: 2, ..SearchOptions::from_params(&ParamSet::default()) };
        let r = find_conflict_free_pm(&mono, &mono.conflicts_from_coloring(), &SearchOptions { repair_steps: 10, ..opts });
        assert_eq!(r.outcome, SearchOutcome::Exhausted);
    }

    #[test]
    fn parallel_search_finds_transversal() {
        // cyclic Latin square of order 7 has transversals
        let g = ColoredBipartiteGraph::complete(7, |a, b| ((a + b) % 7) as u64);
        let opts = SearchOptions { jobs: 3, exact_threshold: 0, ..SearchOptions::from_params(&ParamSet::default()) };
        let r = find_conflict_free_pm(&g, &g.conflicts_from_coloring(), &opts);
        assert!(r.outcome.is_found(), "{r:?}");
    }

    #[test]
    fn restart_budget_formula() {
        let opts = SearchOptions::from_params(&ParamSet::default());
        // e^{sqrt(0.02) * 8} = 3.10...
        assert_eq!(opts.restarts_for(8), 4);
        assert_eq!(opts.restarts_for(1000), 200);
    }
}
