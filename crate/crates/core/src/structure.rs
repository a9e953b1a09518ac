//! Robust expansion, the expander/extremal classifier and superextremal refinement.
//!
//! The robust neighbourhood `RN_ν(X)` of a one-sided set `X` is the set of
//! opposite-side vertices with at least `⌈νn⌉` neighbours in `X`. A graph is a robust
//! `(ν, τ)`-expander when every one-sided `X` with `τn ≤ |X| ≤ (1−τ)n` satisfies
//! `|RN_ν(X)| ≥ |X| + νn`. A failing set yields a near-split partition, which
//! [`refine_to_superextremal`] tightens into one with per-vertex degree control.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{mask, ColoredBipartiteGraph, Side, Vertex};
use crate::params::ParamSet;
use crate::util::{at_least, ceil_tol, floor_tol, rng_from};

const TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("vertex set mixes sides A and B")]
    MixedSides,
    #[error("exact expander test limited to side size {limit} (got {n})")]
    TooLargeForExact { n: usize, limit: usize },
    #[error("graph is not Dirac: minimum degree {min_degree} < {threshold}")]
    NotDirac { min_degree: usize, threshold: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("refinement failed at {property}")]
    RefinementFailed { property: String, report: Box<SuperextremalReport> },
}

/// Partitions `A = A1 ∪ A2` and `B = B1 ∪ B2`, each part kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPair {
    #[serde(rename = "A1")]
    pub a1: Vec<usize>,
    #[serde(rename = "A2")]
    pub a2: Vec<usize>,
    #[serde(rename = "B1")]
    pub b1: Vec<usize>,
    #[serde(rename = "B2")]
    pub b2: Vec<usize>,
}

fn check_cover(n: usize, p: &[usize], q: &[usize], side: &str) -> Result<(), StructureError> {
    let mut seen = vec![false; n];
    for &v in p.iter().chain(q) {
        if v >= n {
            return Err(StructureError::InvalidPartition(format!("{side}{v} out of range")));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(StructureError::InvalidPartition(format!("{side}{v} in both parts")));
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(StructureError::InvalidPartition(format!("side {side} not covered")));
    }
    Ok(())
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

impl PartitionPair {
    pub fn new(
        n: usize,
        a1: Vec<usize>,
        a2: Vec<usize>,
        b1: Vec<usize>,
        b2: Vec<usize>,
    ) -> Result<Self, StructureError> {
        let p = PartitionPair { a1: sorted(a1), a2: sorted(a2), b1: sorted(b1), b2: sorted(b2) };
        p.validate(n)?;
        Ok(p)
    }

    pub fn validate(&self, n: usize) -> Result<(), StructureError> {
        check_cover(n, &self.a1, &self.a2, "a")?;
        check_cover(n, &self.b1, &self.b2, "b")
    }

    /// `ℓ = |A1| − |B1|`.
    pub fn ell(&self) -> i64 {
        self.a1.len() as i64 - self.b1.len() as i64
    }

    /// Exchanges the labels of both sides: `A1 ↔ A2`, `B1 ↔ B2`.
    pub fn swap_labels(&mut self) {
        std::mem::swap(&mut self.a1, &mut self.a2);
        std::mem::swap(&mut self.b1, &mut self.b2);
    }

    /// Part index (1 or 2) of every vertex on `side`.
    pub fn part_of(&self, n: usize, side: Side) -> Vec<u8> {
        let (first, second) = match side {
            Side::A => (&self.a1, &self.a2),
            Side::B => (&self.b1, &self.b2),
        };
        let mut out = vec![0; n];
        first.iter().for_each(|&v| out[v] = 1);
        second.iter().for_each(|&v| out[v] = 2);
        out
    }
}

/// Number of pairs in `E(X, Y)` for `X ⊆ A`, `Y ⊆ B`.
pub fn edges_between(g: &ColoredBipartiteGraph, xs: &[usize], ys: &[usize]) -> usize {
    let ym = mask(g.n(), ys);
    xs.iter().map(|&a| g.degree_into(Vertex::a(a), &ym)).sum()
}

fn one_side(x: &[Vertex]) -> Result<Option<Side>, StructureError> {
    match x.first() {
        None => Ok(None),
        Some(first) if x.iter().all(|v| v.side == first.side) => Ok(Some(first.side)),
        Some(_) => Err(StructureError::MixedSides),
    }
}

/// Minimum count `⌈νn⌉` used by robust neighbourhoods.
pub fn rn_threshold(n: usize, nu: f64) -> usize {
    at_least(nu * n as f64)
}

fn rn_indices(g: &ColoredBipartiteGraph, side: Side, members: &[bool], threshold: usize) -> Vec<usize> {
    let opposite = side.opposite();
    (0..g.n())
        .filter(|&v| g.degree_into(Vertex { side: opposite, index: v }, members) >= threshold)
        .collect()
}

/// `RN_ν(X)`: opposite-side vertices with at least `⌈νn⌉` neighbours in `X`.
pub fn robust_neighborhood(
    g: &ColoredBipartiteGraph,
    x: &[Vertex],
    nu: f64,
) -> Result<Vec<Vertex>, StructureError> {
    let Some(side) = one_side(x)? else {
        let threshold = rn_threshold(g.n(), nu);
        // only a zero threshold admits anything into the neighbourhood of ∅
        return Ok(if threshold == 0 {
            (0..g.n()).map(Vertex::a).chain((0..g.n()).map(Vertex::b)).collect()
        } else {
            Vec::new()
        });
    };
    let members = mask(g.n(), &x.iter().map(|v| v.index).collect::<Vec<_>>());
    let opposite = side.opposite();
    Ok(rn_indices(g, side, &members, rn_threshold(g.n(), nu))
        .into_iter()
        .map(|index| Vertex { side: opposite, index })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpanderMode {
    /// Every set in the size window, on both sides.
    Exact,
    /// Random and structured candidate sets; can refute but never certify.
    Randomized { trials: usize, seed: u64 },
}

/// A set violating robust expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpansionWitness {
    pub side: Side,
    pub set: Vec<usize>,
    pub rn_size: usize,
    /// `|X| + ⌈νn⌉`, the size `RN_ν(X)` would need.
    pub required: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ExpanderVerdict {
    /// No violating set found among `sets_checked`; `certified` only in exact mode.
    Expander { sets_checked: u64, certified: bool },
    Witness(ExpansionWitness),
}

impl ExpanderVerdict {
    pub fn is_expander(&self) -> bool {
        matches!(self, ExpanderVerdict::Expander { .. })
    }
}

/// Inclusive size window `⌈τn⌉ ..= ⌊(1−τ)n⌋`, clamped to `1..n`.
pub fn size_window(n: usize, tau: f64) -> (usize, usize) {
    let lo = ceil_tol(tau * n as f64).max(1) as usize;
    let hi = floor_tol((1.0 - tau) * n as f64).max(0) as usize;
    (lo, hi.min(n))
}

struct BitContext {
    /// `nbr[side][v]`: neighbourhood of opposite-side vertex `v` as a bitmask over `side`.
    nbr: [Vec<u32>; 2],
    threshold: usize,
    slack: usize,
}

impl BitContext {
    fn new(g: &ColoredBipartiteGraph, nu: f64) -> Self {
        let n = g.n();
        let to_mask = |list: &[usize]| list.iter().fold(0u32, |m, &u| m | (1 << u));
        BitContext {
            nbr: [
                (0..n).map(|b| to_mask(g.neighbors_b(b))).collect(),
                (0..n).map(|a| to_mask(g.neighbors_a(a))).collect(),
            ],
            threshold: rn_threshold(n, nu),
            slack: rn_threshold(n, nu),
        }
    }

    fn rn_size(&self, side: Side, x: u32) -> usize {
        let list = &self.nbr[side as usize];
        list.iter().filter(|&&m| (m & x).count_ones() as usize >= self.threshold).count()
    }
}

/// Visits every size-`k` subset of `0..n` as a bitmask in increasing numeric order.
fn for_each_subset(n: usize, k: usize, mut visit: impl FnMut(u32) -> bool) {
    if k == 0 || k > n {
        return;
    }
    let limit = 1u64 << n;
    let mut x: u64 = (1u64 << k) - 1;
    while x < limit {
        if !visit(x as u32) {
            return;
        }
        // Gosper's hack
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
}

fn bits(x: u32) -> Vec<usize> {
    (0..32).filter(|&i| x & (1 << i) != 0).collect()
}

/// All violating sets in the window, sides A then B, sizes ascending.
fn exact_scan(
    g: &ColoredBipartiteGraph,
    nu: f64,
    tau: f64,
    stop_at_first: bool,
) -> (u64, Vec<ExpansionWitness>) {
    let ctx = BitContext::new(g, nu);
    let (lo, hi) = size_window(g.n(), tau);
    let mut checked = 0u64;
    let mut witnesses = Vec::new();
    'outer: for side in [Side::A, Side::B] {
        for k in lo..=hi {
            let mut done = false;
            for_each_subset(g.n(), k, |x| {
                checked += 1;
                let rn = ctx.rn_size(side, x);
                if rn < k + ctx.slack {
                    witnesses.push(ExpansionWitness {
                        side,
                        set: bits(x),
                        rn_size: rn,
                        required: k + ctx.slack,
                    });
                    if stop_at_first {
                        done = true;
                        return false;
                    }
                }
                true
            });
            if done {
                break 'outer;
            }
        }
    }
    (checked, witnesses)
}

fn check_set(
    g: &ColoredBipartiteGraph,
    side: Side,
    set: &[usize],
    threshold: usize,
) -> Option<ExpansionWitness> {
    let rn = rn_indices(g, side, &mask(g.n(), set), threshold).len();
    (rn < set.len() + threshold).then(|| ExpansionWitness {
        side,
        set: sorted(set.to_vec()),
        rn_size: rn,
        required: set.len() + threshold,
    })
}

fn randomized_scan(
    g: &ColoredBipartiteGraph,
    nu: f64,
    tau: f64,
    trials: usize,
    seed: u64,
) -> (u64, Option<ExpansionWitness>) {
    let n = g.n();
    let threshold = rn_threshold(n, nu);
    let (lo, hi) = size_window(n, tau);
    if lo > hi {
        return (0, None);
    }
    let mut checked = 0u64;
    for side in [Side::A, Side::B] {
        let opposite = side.opposite();
        // structured candidates: neighbourhoods, then low-degree prefixes
        let mut candidates: Vec<Vec<usize>> = (0..n)
            .map(|v| g.neighbors(Vertex { side: opposite, index: v }).to_vec())
            .filter(|s| (lo..=hi).contains(&s.len()))
            .collect();
        let mut by_degree: Vec<usize> = (0..n).collect();
        by_degree.sort_by_key(|&v| g.degree(Vertex { side, index: v }));
        candidates.extend((lo..=hi).map(|k| by_degree[..k].to_vec()));
        for set in &candidates {
            checked += 1;
            if let Some(w) = check_set(g, side, set, threshold) {
                return (checked, Some(w));
            }
        }
    }
    let mut rng = rng_from(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for trial in 0..trials {
        let side = if trial % 2 == 0 { Side::A } else { Side::B };
        let k = rng.gen_range(lo..=hi);
        pool.shuffle(&mut rng);
        checked += 1;
        if let Some(w) = check_set(g, side, &pool[..k], threshold) {
            return (checked, Some(w));
        }
    }
    (checked, None)
}

/// Tests robust `(ν, τ)`-expansion.
pub fn is_robust_expander(
    g: &ColoredBipartiteGraph,
    nu: f64,
    tau: f64,
    mode: ExpanderMode,
    exact_limit: usize,
) -> Result<ExpanderVerdict, StructureError> {
    match mode {
        ExpanderMode::Exact => {
            if g.n() > exact_limit.min(31) {
                return Err(StructureError::TooLargeForExact { n: g.n(), limit: exact_limit.min(31) });
            }
            let (checked, mut ws) = exact_scan(g, nu, tau, true);
            Ok(match ws.pop() {
                Some(w) => ExpanderVerdict::Witness(w),
                None => ExpanderVerdict::Expander { sets_checked: checked, certified: true },
            })
        }
        ExpanderMode::Randomized { trials, seed } => {
            let (checked, w) = randomized_scan(g, nu, tau, trials, seed);
            Ok(match w {
                Some(w) => ExpanderVerdict::Witness(w),
                None => ExpanderVerdict::Expander { sets_checked: checked, certified: false },
            })
        }
    }
}

/// One evaluated inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub ok: bool,
    /// Measured quantity (a size, a count, or a worst-case degree).
    pub value: f64,
    /// Bound it is compared with.
    pub bound: f64,
    pub detail: String,
}

impl PropertyCheck {
    pub(crate) fn at_most(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        PropertyCheck { name: name.into(), ok: value <= bound + TOL, value, bound, detail: detail.into() }
    }

    pub(crate) fn at_least(name: &str, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        PropertyCheck { name: name.into(), ok: value + TOL >= bound, value, bound, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    pub epsilon: f64,
    pub checks: Vec<PropertyCheck>,
    pub holds: bool,
}

/// Evaluates P1 `||A1|−|A2|| ≤ εn`, P2 `||B1|−|B2|| ≤ εn`, P3 `e(A1,B2) ≤ εn²`.
pub fn is_extremal(g: &ColoredBipartiteGraph, p: &PartitionPair, epsilon: f64) -> ExtremalReport {
    let n = g.n() as f64;
    let diff = |x: &[usize], y: &[usize]| (x.len() as f64 - y.len() as f64).abs();
    let checks = vec![
        PropertyCheck::at_most("P1", diff(&p.a1, &p.a2), epsilon * n, "||A1|-|A2||"),
        PropertyCheck::at_most("P2", diff(&p.b1, &p.b2), epsilon * n, "||B1|-|B2||"),
        PropertyCheck::at_most(
            "P3",
            edges_between(g, &p.a1, &p.b2) as f64,
            epsilon * n * n,
            "e(A1,B2)",
        ),
    ];
    let holds = checks.iter().all(|c| c.ok);
    ExtremalReport { epsilon, checks, holds }
}

/// The partition read off a failing set `X`.
///
/// For `X ⊆ A`: `A1 = X`, `B1 = RN(X)`. For `X ⊆ B` the roles mirror so that few
/// edges still run from `A1` to `B2`: `B2 = X`, `A2 = RN(X)`.
pub fn witness_partition(g: &ColoredBipartiteGraph, w: &ExpansionWitness, nu: f64) -> PartitionPair {
    let n = g.n();
    let rn = rn_indices(g, w.side, &mask(n, &w.set), rn_threshold(n, nu));
    let rest = |set: &[usize]| {
        let m = mask(n, set);
        (0..n).filter(|&v| !m[v]).collect::<Vec<_>>()
    };
    let p = match w.side {
        Side::A => PartitionPair::new(n, w.set.clone(), rest(&w.set), rn.clone(), rest(&rn)),
        Side::B => PartitionPair::new(n, rest(&rn), rn.clone(), rest(&w.set), w.set.clone()),
    };
    p.expect("witness partition covers both sides")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    #[serde(rename = "expander")]
    RobustExpander { nu: f64, tau: f64, sets_checked: u64, certified: bool },
    #[serde(rename = "extremal")]
    Extremal {
        nu: f64,
        tau: f64,
        epsilon: f64,
        partition: PartitionPair,
        witness_side: Side,
        witness: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    #[serde(flatten)]
    pub verdict: Verdict,
    /// Set when the ε-ladder ran out and the verdict fell back to randomized testing.
    pub warning: Option<String>,
    /// ε values tried, in order.
    pub epsilon_ladder: Vec<f64>,
}

impl Classification {
    pub fn is_expander(&self) -> bool {
        matches!(self.verdict, Verdict::RobustExpander { .. })
    }

    pub fn partition(&self) -> Option<&PartitionPair> {
        match &self.verdict {
            Verdict::Extremal { partition, .. } => Some(partition),
            Verdict::RobustExpander { .. } => None,
        }
    }
}

fn epsilon_ladder(params: &ParamSet) -> Vec<f64> {
    let mut out = Vec::new();
    let mut eps = params.epsilon;
    while eps <= params.epsilon_max + TOL && out.len() < 64 {
        out.push(eps);
        if params.epsilon_ladder_factor <= 1.0 {
            break;
        }
        eps *= params.epsilon_ladder_factor;
    }
    if out.last().is_some_and(|&last| last < params.epsilon_max - TOL) {
        out.push(params.epsilon_max);
    }
    out
}

/// Expander-or-extremal classification of a Dirac graph.
///
/// Small graphs are scanned exactly; every violating set is tried as the source of
/// a near-split partition, at each ε of the ladder. If no partition passes P1–P3,
/// the result falls back to the randomized expander verdict with a warning.
pub fn classify(g: &ColoredBipartiteGraph, params: &ParamSet) -> Result<Classification, StructureError> {
    if !g.is_dirac() {
        return Err(StructureError::NotDirac { min_degree: g.min_degree(), threshold: g.dirac_threshold() });
    }
    let (nu, tau) = (params.nu, params.tau);
    let exact = g.n() <= params.expander_exact_threshold.min(31);
    let (checked, witnesses) = if exact {
        exact_scan(g, nu, tau, false)
    } else {
        let (checked, w) = randomized_scan(g, nu, tau, params.expander_trials, params.seed);
        (checked, w.into_iter().collect())
    };
    if witnesses.is_empty() {
        return Ok(Classification {
            verdict: Verdict::RobustExpander { nu, tau, sets_checked: checked, certified: exact },
            warning: None,
            epsilon_ladder: Vec::new(),
        });
    }
    let partitions: Vec<(PartitionPair, &ExpansionWitness)> =
        witnesses.iter().map(|w| (witness_partition(g, w, nu), w)).collect();
    let ladder = epsilon_ladder(params);
    for (i, &epsilon) in ladder.iter().enumerate() {
        if let Some((p, w)) = partitions.iter().find(|(p, _)| is_extremal(g, p, epsilon).holds) {
            return Ok(Classification {
                verdict: Verdict::Extremal {
                    nu,
                    tau,
                    epsilon,
                    partition: p.clone(),
                    witness_side: w.side,
                    witness: w.set.clone(),
                },
                warning: None,
                epsilon_ladder: ladder[..=i].to_vec(),
            });
        }
    }
    let (checked, _) = randomized_scan(g, nu, tau, params.expander_trials, params.seed);
    Ok(Classification {
        verdict: Verdict::RobustExpander { nu, tau, sets_checked: checked, certified: false },
        warning: Some(format!(
            "{} expansion witnesses found but none gives an extremal partition up to epsilon {}",
            witnesses.len(),
            params.epsilon_max
        )),
        epsilon_ladder: ladder,
    })
}

/// Re-checks the certificate carried by a classification.
///
/// Extremal verdicts re-run P1–P3; certified expander verdicts re-run the exact
/// scan. Uncertified expander verdicts carry nothing to re-check and return false.
pub fn certificate_holds(g: &ColoredBipartiteGraph, c: &Classification) -> bool {
    match &c.verdict {
        Verdict::Extremal { epsilon, partition, .. } => {
            partition.validate(g.n()).is_ok() && is_extremal(g, partition, *epsilon).holds
        }
        Verdict::RobustExpander { nu, tau, certified, .. } => {
            *certified && exact_scan(g, *nu, *tau, true).1.is_empty()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperextremalReport {
    pub ell: i64,
    pub checks: Vec<PropertyCheck>,
    pub holds: bool,
}

impl SuperextremalReport {
    pub fn first_violation(&self) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| !c.ok)
    }
}

/// Degrees of `vs` (on `side`) into `targets`.
fn degrees(g: &ColoredBipartiteGraph, side: Side, vs: &[usize], targets: &[usize]) -> Vec<usize> {
    let m = mask(g.n(), targets);
    vs.iter().map(|&v| g.degree_into(Vertex { side, index: v }, &m)).collect()
}

/// Evaluates Q1–Q9 for the partition.
pub fn check_superextremal(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    nu1: f64,
    nu2: f64,
) -> SuperextremalReport {
    let n = g.n() as f64;
    let ell = p.ell();
    let mut checks = Vec::new();
    let high = n / 2.0 - nu1 * n;
    let parts = [(&p.a1, &p.b1, 1), (&p.a2, &p.b2, 2)];

    // Q1/Q3: all but ν1 n vertices of each part have in-part degree ≥ n/2 − ν1 n
    for (q, side) in [("Q1", Side::A), ("Q3", Side::B)] {
        for (a_part, b_part, i) in parts {
            let (from, to) = if side == Side::A { (a_part, b_part) } else { (b_part, a_part) };
            let low = degrees(g, side, from, to).iter().filter(|&&d| (d as f64) + TOL < high).count();
            checks.push(PropertyCheck::at_most(
                q,
                low as f64,
                nu1 * n,
                format!("part {i}: vertices below n/2 - nu1 n"),
            ));
        }
    }
    // Q2/Q4: every vertex has in-part degree ≥ ν2 n
    for (q, side) in [("Q2", Side::A), ("Q4", Side::B)] {
        for (a_part, b_part, i) in parts {
            let (from, to) = if side == Side::A { (a_part, b_part) } else { (b_part, a_part) };
            let min = degrees(g, side, from, to).into_iter().min().map_or(f64::INFINITY, |d| d as f64);
            checks.push(PropertyCheck::at_least(q, min, nu2 * n, format!("part {i}: minimum in-part degree")));
        }
    }
    let size = |v: &Vec<usize>| v.len() as f64;
    checks.push(PropertyCheck::at_most("Q5", (size(&p.a1) - size(&p.b1)).abs(), nu1 * n, "||A1|-|B1||"));
    checks.push(PropertyCheck::at_most("Q5", (size(&p.a1) - size(&p.a2)).abs(), nu1 * n, "||A1|-|A2||"));

    let cross_a = degrees(g, Side::A, &p.a1, &p.b2);
    let cross_b = degrees(g, Side::B, &p.b2, &p.a1);
    let max_of = |d: &[usize]| d.iter().copied().max().map_or(0.0, |x| x as f64);
    let min_of = |d: &[usize]| d.iter().copied().min().map_or(f64::INFINITY, |x| x as f64);
    if ell == 0 {
        for q in ["Q6", "Q7"] {
            checks.push(PropertyCheck::at_most(q, 0.0, nu2 * n, "vacuous: |A1| = |B1|"));
        }
    } else {
        checks.push(PropertyCheck::at_most("Q6", max_of(&cross_a), nu2 * n, "max e(v,B2), v in A1"));
        checks.push(PropertyCheck::at_most("Q7", max_of(&cross_b), nu2 * n, "max e(v,A1), v in B2"));
    }
    checks.push(PropertyCheck::at_least("Q8", size(&p.a1), size(&p.b1), "|A1| >= |B1|"));

    let half = ell as f64 / 2.0;
    let (min_a, min_b) = (min_of(&cross_a), min_of(&cross_b));
    let q9 = if min_a + TOL >= half {
        PropertyCheck::at_least("Q9", min_a, half, "min e(v,B2), v in A1")
    } else {
        PropertyCheck::at_least("Q9", min_b, half, "min e(v,A1), v in B2")
    };
    checks.push(q9);

    let holds = checks.iter().all(|c| c.ok);
    SuperextremalReport { ell, checks, holds }
}

/// Intermediate sets of the refinement, for tracing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTrace {
    pub x1_1: Vec<usize>,
    pub x2_1: Vec<usize>,
    pub y1_1: Vec<usize>,
    pub y2_1: Vec<usize>,
    pub x1_2: Vec<usize>,
    pub x2_2: Vec<usize>,
    pub y1_2: Vec<usize>,
    pub y2_2: Vec<usize>,
    pub relabeled: bool,
    pub x1_3: Vec<usize>,
    pub y2_3: Vec<usize>,
    pub x1_4: Vec<usize>,
    pub y2_4: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub partition: PartitionPair,
    pub trace: RefinementTrace,
    pub report: SuperextremalReport,
}

fn filter_by_degree(
    g: &ColoredBipartiteGraph,
    side: Side,
    from: &[usize],
    to: &[usize],
    keep: impl Fn(f64) -> bool,
) -> Vec<usize> {
    from.iter()
        .zip(degrees(g, side, from, to))
        .filter(|&(_, d)| keep(d as f64))
        .map(|(&v, _)| v)
        .collect()
}

fn minus(set: &[usize], remove: &[usize]) -> Vec<usize> {
    let r: BTreeSet<usize> = remove.iter().copied().collect();
    set.iter().copied().filter(|v| !r.contains(v)).collect()
}

fn union(x: &[usize], y: &[usize]) -> Vec<usize> {
    let s: BTreeSet<usize> = x.iter().chain(y).copied().collect();
    s.into_iter().collect()
}

/// Turns an extremal partition into a `(ν1, ν2)`-superextremal one.
///
/// Vertices with in-part degree at most `n/4` change parts, labels are swapped if
/// needed so that `|A1| ≥ |B1|`, and then up to `|A1|−|B1|` vertices with cross
/// degree at least `ν4 n` (highest cross degree first, `A1` before `B2`) move to
/// the other part. The result is re-checked against Q1–Q9.
pub fn refine_to_superextremal(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    params: &ParamSet,
) -> Result<Refinement, StructureError> {
    p.validate(g.n())?;
    let n = g.n() as f64;
    let weak = n / 2.0 - params.nu3 * n;
    let quarter = n / 4.0;
    let le = |t: f64| move |d: f64| d <= t + TOL;

    let x1_1 = filter_by_degree(g, Side::A, &p.a1, &p.b1, le(weak));
    let x2_1 = filter_by_degree(g, Side::A, &p.a2, &p.b2, le(weak));
    let y1_1 = filter_by_degree(g, Side::B, &p.b1, &p.a1, le(weak));
    let y2_1 = filter_by_degree(g, Side::B, &p.b2, &p.a2, le(weak));
    let x1_2 = filter_by_degree(g, Side::A, &p.a1, &p.b1, le(quarter));
    let x2_2 = filter_by_degree(g, Side::A, &p.a2, &p.b2, le(quarter));
    let y1_2 = filter_by_degree(g, Side::B, &p.b1, &p.a1, le(quarter));
    let y2_2 = filter_by_degree(g, Side::B, &p.b2, &p.a2, le(quarter));

    let mut q = PartitionPair {
        a1: union(&minus(&p.a1, &x1_2), &x2_2),
        a2: union(&minus(&p.a2, &x2_2), &x1_2),
        b1: union(&minus(&p.b1, &y1_2), &y2_2),
        b2: union(&minus(&p.b2, &y2_2), &y1_2),
    };
    let relabeled = q.a1.len() < q.b1.len();
    if relabeled {
        q.swap_labels();
    }

    let cross = params.nu4 * n;
    let mut x1_3: Vec<(usize, usize)> = q
        .a1
        .iter()
        .zip(degrees(g, Side::A, &q.a1, &q.b2))
        .filter(|&(_, d)| d as f64 + TOL >= cross)
        .map(|(&v, d)| (v, d))
        .collect();
    let mut y2_3: Vec<(usize, usize)> = q
        .b2
        .iter()
        .zip(degrees(g, Side::B, &q.b2, &q.a1))
        .filter(|&(_, d)| d as f64 + TOL >= cross)
        .map(|(&v, d)| (v, d))
        .collect();
    // stable: highest cross degree first, ties by index
    x1_3.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
    y2_3.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));

    let d = q.a1.len() - q.b1.len();
    let take_x = x1_3.len().min(d);
    let take_y = y2_3.len().min(d - take_x);
    let x1_4 = sorted(x1_3[..take_x].iter().map(|&(v, _)| v).collect());
    let y2_4 = sorted(y2_3[..take_y].iter().map(|&(v, _)| v).collect());

    let partition = PartitionPair {
        a1: minus(&q.a1, &x1_4),
        a2: union(&q.a2, &x1_4),
        b1: union(&q.b1, &y2_4),
        b2: minus(&q.b2, &y2_4),
    };
    let trace = RefinementTrace {
        x1_1,
        x2_1,
        y1_1,
        y2_1,
        x1_2,
        x2_2,
        y1_2,
        y2_2,
        relabeled,
        x1_3: sorted(x1_3.into_iter().map(|(v, _)| v).collect()),
        y2_3: sorted(y2_3.into_iter().map(|(v, _)| v).collect()),
        x1_4,
        y2_4,
    };
    let report = check_superextremal(g, &partition, params.nu1, params.nu2);
    if let Some(bad) = report.first_violation() {
        return Err(StructureError::RefinementFailed {
            property: bad.name.clone(),
            report: Box::new(report),
        });
    }
    Ok(Refinement { partition, trace, report })
}

/// Moon–Moser: with degrees sorted ascending on both sides, `d(r_k) > k` and
/// `d(s_k) > k` for all `1 ≤ k ≤ m/2`. Sufficient for a Hamiltonian cycle.
pub fn moon_moser_check(f: &ColoredBipartiteGraph) -> bool {
    let m = f.n();
    if m == 0 {
        return false;
    }
    [Side::A, Side::B].into_iter().all(|side| {
        let mut ds: Vec<usize> = (0..m).map(|v| f.degree(Vertex { side, index: v })).collect();
        ds.sort_unstable();
        (1..=m / 2).all(|k| ds[k - 1] > k)
    })
}
