//! Rainbow perfect matchings in near-split graphs.
//!
//! Given a superextremal partition with `ℓ = |A1| − |B1| ≥ 1`, the pipeline picks a
//! rainbow matching `M*` of size `ℓ` inside `E(A1, B2)` whose colours are spread
//! thinly over every vertex, deletes its vertices and colours to get a balanced
//! residual graph `H`, keeps the dense core `H_*`, and completes `M*` with a
//! rainbow perfect matching of `H_*`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{mask, Color, ColoredBipartiteGraph, Edge, Side, Vertex};
use crate::matching::{find_perfect_matching, is_rainbow, Matching};
use crate::params::ParamSet;
use crate::sampler::{find_conflict_free_pm, SearchOptions};
use crate::structure::{check_superextremal, moon_moser_check, PartitionPair, PropertyCheck};
use crate::util::{derive_seed, floor_tol, rng_from};

/// Independent pipeline attempts, each with a fresh greedy order and sampling seed.
pub const PIPELINE_ATTEMPTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Precondition,
    Greedy,
    ColorSubset,
    Residual,
    Core,
    Search,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Precondition => "precondition",
            Stage::Greedy => "greedy",
            Stage::ColorSubset => "color_subset",
            Stage::Residual => "residual",
            Stage::Core => "core",
            Stage::Search => "search",
            Stage::Verify => "verify",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExtremalError {
    #[error("edge pool of E(A1,B2) exhausted after {step} of {target} greedy steps")]
    PoolExhausted { step: usize, target: usize },
    #[error("no admissible colour subset after {attempts} attempts (worst (T2) margin {worst_margin:.3})")]
    RetriesExhausted { attempts: u64, worst_margin: f64 },
    #[error("only {available} usable colours, need {needed}")]
    NotEnoughColors { available: usize, needed: usize },
    #[error("dense core has no perfect matching")]
    NoPerfectMatching,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("stage {stage} failed: {detail}")]
    StageFailed { stage: Stage, detail: String },
}

/// A finite multiset of colours.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ColorMultiset {
    counts: BTreeMap<Color, usize>,
    total: usize,
}

impl FromIterator<Color> for ColorMultiset {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for c in iter {
            *counts.entry(c).or_insert(0) += 1;
            total += 1;
        }
        ColorMultiset { counts, total }
    }
}

impl ColorMultiset {
    /// Drops zero multiplicities.
    pub fn from_counts<I: IntoIterator<Item = (Color, usize)>>(counts: I) -> Self {
        let counts: BTreeMap<Color, usize> = counts.into_iter().filter(|&(_, k)| k > 0).collect();
        let total = counts.values().sum();
        ColorMultiset { counts, total }
    }

    /// Colours on the edges at `v`.
    pub fn at_vertex(g: &ColoredBipartiteGraph, v: Vertex) -> Self {
        g.neighbors(v)
            .iter()
            .map(|&u| match v.side {
                Side::A => g.color(v.index, u),
                Side::B => g.color(u, v.index),
            })
            .map(|c| c.expect("neighbour implies edge"))
            .collect()
    }

    pub fn multiplicity(&self, c: Color) -> usize {
        self.counts.get(&c).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Color, usize)> + '_ {
        self.counts.iter().map(|(&c, &k)| (c, k))
    }

    /// `A ∩⁺ B`: full multiplicity of every colour of `B`.
    pub fn intersect_plus(&self, b: &BTreeSet<Color>) -> Self {
        Self::from_counts(self.iter().filter(|(c, _)| b.contains(c)))
    }

    /// `A ∖⁺ B`: every colour of `B` removed entirely.
    pub fn minus_plus(&self, b: &BTreeSet<Color>) -> Self {
        Self::from_counts(self.iter().filter(|(c, _)| !b.contains(c)))
    }

    /// `|A ∩⁺ B|` without building the multiset.
    pub fn count_in(&self, b: &BTreeSet<Color>) -> usize {
        self.iter().filter(|(c, _)| b.contains(c)).map(|(_, k)| k).sum()
    }
}

/// `i* = ⌊ℓ/(10ν₃)⌋`, raised to `ℓ` when smaller so that `M*` can have size `ℓ`.
pub fn i_star(ell: usize, nu3: f64) -> usize {
    (floor_tol(ell as f64 / (10.0 * nu3)).max(0) as usize).max(ell)
}

/// The edges of `E(A1, B2)` in the order the greedy scans them.
pub fn cross_edge_order(g: &ColoredBipartiteGraph, p: &PartitionPair, seed: u64) -> Vec<Edge> {
    let b2 = mask(g.n(), &p.b2);
    let mut edges: Vec<Edge> =
        p.a1.iter().flat_map(|&a| g.neighbors_a(a).iter().filter(|&&b| b2[b]).map(move |&b| Edge::new(a, b))).collect();
    edges.shuffle(&mut rng_from(seed));
    edges
}

/// Rainbow matching in `E(A1, B2)` built by always taking the first surviving edge.
///
/// An edge survives while it misses every chosen vertex and colour. The target
/// size is `i*` unless overridden; `ℓ = 0` gives the empty matching.
pub fn greedy_cross_matching(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    i_star_override: Option<usize>,
    nu3: f64,
    seed: u64,
) -> Result<Matching, ExtremalError> {
    let ell = p.ell();
    if ell < 0 {
        return Err(ExtremalError::InvalidInput(format!("|A1| - |B1| = {ell} is negative")));
    }
    let mut m = Matching::empty(g.n());
    if ell == 0 && i_star_override.is_none() {
        return Ok(m);
    }
    let target = i_star_override.unwrap_or_else(|| i_star(ell as usize, nu3));
    let mut used = BTreeSet::new();
    for e in cross_edge_order(g, p, seed) {
        if m.size() == target {
            break;
        }
        let c = g.color_of(e).unwrap();
        if m.partner_of_a(e.a).is_none() && m.partner_of_b(e.b).is_none() && !used.contains(&c) {
            m.insert(e).expect("endpoints are free");
            used.insert(c);
        }
    }
    if m.size() < target {
        return Err(ExtremalError::PoolExhausted { step: m.size(), target });
    }
    Ok(m)
}

/// Constants of the colour-subset selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxesConfig {
    pub mu: f64,
    pub nu: f64,
    pub eta: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub retry_cap: u64,
    pub seed: u64,
}

impl BoxesConfig {
    pub fn from_params(p: &ParamSet) -> Self {
        BoxesConfig {
            mu: p.mu,
            nu: p.nu,
            eta: p.eta,
            alpha: p.alpha,
            epsilon: p.epsilon,
            retry_cap: p.retry_cap,
            seed: p.seed,
        }
    }

    /// Sampling probability `δ = 3/α`, capped at 1.
    pub fn delta(&self) -> f64 {
        (3.0 / self.alpha).min(1.0)
    }

    /// `m_* = ε/(10α²) · N/ln N`.
    pub fn m_star(&self, big_n: usize) -> f64 {
        if big_n < 2 {
            return big_n as f64;
        }
        self.epsilon / (10.0 * self.alpha * self.alpha) * big_n as f64 / (big_n as f64).ln()
    }

    /// Number of dyadic levels `s = ⌈log₂(μN/m_*)⌉`, at least 0.
    pub fn levels(&self, big_n: usize) -> usize {
        let ratio = self.mu * big_n as f64 / self.m_star(big_n);
        if ratio <= 1.0 {
            0
        } else {
            ratio.log2().ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicLevel {
    pub j: usize,
    /// `p_i^j`: total multiplicity at this level.
    pub p_size: usize,
    /// `S_i^j`: the colours at this level.
    pub support: Vec<Color>,
}

impl DyadicLevel {
    pub fn support_size(&self) -> usize {
        self.support.len()
    }
}

/// Colours of one multiset grouped by multiplicity.
///
/// Level `j ∈ 1..=s` holds multiplicities in `[2^{-j}μN, 2^{-(j-1)}μN]`; a value on
/// a shared endpoint goes to the smaller `j`, and anything above `μN` to level 1.
/// The rest form the light part `Q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicProfile {
    pub levels: Vec<DyadicLevel>,
    pub heavy_total: usize,
    pub light: ColorMultiset,
}

impl DyadicProfile {
    pub fn new(c: &ColorMultiset, mu_n: f64, s: usize) -> Self {
        let mut levels: Vec<DyadicLevel> =
            (1..=s).map(|j| DyadicLevel { j, p_size: 0, support: Vec::new() }).collect();
        let mut light = Vec::new();
        for (color, k) in c.iter() {
            let level = (1..=s).find(|&j| k as f64 + 1e-9 >= mu_n / f64::powi(2.0, j as i32));
            match level {
                Some(j) => {
                    levels[j - 1].p_size += k;
                    levels[j - 1].support.push(color);
                }
                None => light.push((color, k)),
            }
        }
        let heavy_total = levels.iter().map(|l| l.p_size).sum();
        DyadicProfile { levels, heavy_total, light: ColorMultiset::from_counts(light) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetBranch {
    /// `ℓ ≤ 2α`: an `ℓ`-subset of `U`.
    Arbitrary,
    /// `δ`-sampling followed by removal of activated dense levels.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColorSubset {
    pub colors: BTreeSet<Color>,
    pub branch: SubsetBranch,
    pub attempts: u64,
    /// `min_i |C_i ∖⁺ T| − (1−η)|C_i|`.
    pub t2_margin: f64,
    /// Colours dropped from the sample because of activation.
    pub removed: usize,
    /// (B1)/(B2) violations found on the input.
    pub warnings: Vec<String>,
}

fn t2_margin(c: &[ColorMultiset], t: &BTreeSet<Color>, eta: f64) -> f64 {
    c.iter()
        .map(|ci| (ci.total() - ci.count_in(t)) as f64 - (1.0 - eta) * ci.total() as f64)
        .fold(f64::INFINITY, f64::min)
}

fn hypothesis_warnings(c: &[ColorMultiset], cfg: &BoxesConfig) -> Vec<String> {
    let big_n = c.len() as f64;
    let mut warnings = Vec::new();
    let out_of_range = c.iter().filter(|ci| (ci.total() as f64) + 1e-9 < cfg.nu * big_n || ci.total() as f64 > big_n).count();
    if out_of_range > 0 {
        warnings.push(format!("(B1): {out_of_range} multisets outside [nu N, N]"));
    }
    let mut spread: BTreeMap<Color, usize> = BTreeMap::new();
    for (color, k) in c.iter().flat_map(ColorMultiset::iter) {
        *spread.entry(color).or_insert(0) += k;
    }
    let heavy = spread.values().filter(|&&k| k as f64 > cfg.mu * big_n + 1e-9).count();
    if heavy > 0 {
        warnings.push(format!("(B2): {heavy} colours with total multiplicity above mu N"));
    }
    warnings
}

/// Chooses `T ⊆ U` with `|T| ≥ ℓ` and `|C_i ∖⁺ T| ≥ (1−η)|C_i|` for every `i`.
///
/// Both properties are rechecked before returning; failed draws are retried up to
/// `retry_cap` times.
pub fn select_color_subset(
    c: &[ColorMultiset],
    u: &BTreeSet<Color>,
    ell: usize,
    cfg: &BoxesConfig,
) -> Result<ColorSubset, ExtremalError> {
    if u.len() < ell {
        return Err(ExtremalError::InvalidInput(format!("|U| = {} is below ell = {ell}", u.len())));
    }
    let mut warnings = hypothesis_warnings(c, cfg);
    let expected = (cfg.alpha * ell as f64).ceil() as usize;
    if u.len() != expected {
        warnings.push(format!("|U| = {} differs from ceil(alpha ell) = {expected}", u.len()));
    }
    let mut rng = rng_from(cfg.seed);
    let mut worst = f64::INFINITY;
    let universe: Vec<Color> = u.iter().copied().collect();

    if (ell as f64) <= 2.0 * cfg.alpha {
        for attempt in 1..=cfg.retry_cap.max(1) {
            let t: BTreeSet<Color> = if attempt == 1 {
                universe[..ell].iter().copied().collect()
            } else {
                universe.choose_multiple(&mut rng, ell).copied().collect()
            };
            let margin = t2_margin(c, &t, cfg.eta);
            if margin >= -1e-9 {
                return Ok(ColorSubset {
                    colors: t,
                    branch: SubsetBranch::Arbitrary,
                    attempts: attempt,
                    t2_margin: margin,
                    removed: 0,
                    warnings,
                });
            }
            worst = worst.min(margin);
        }
        return Err(ExtremalError::RetriesExhausted { attempts: cfg.retry_cap.max(1), worst_margin: worst });
    }

    let big_n = c.len();
    let mu_n = cfg.mu * big_n as f64;
    let s = cfg.levels(big_n);
    let delta = cfg.delta();
    let dense = 1.0 / cfg.mu.sqrt();
    // dense levels of susceptible multisets: only these can be activated
    let watched: Vec<Vec<BTreeSet<Color>>> = c
        .iter()
        .filter(|ci| ci.count_in(u) as f64 + 1e-9 >= cfg.eta * ci.total() as f64)
        .map(|ci| {
            DyadicProfile::new(ci, mu_n, s)
                .levels
                .into_iter()
                .filter(|l| l.support_size() as f64 + 1e-9 >= f64::powf(2.0, (l.j as f64 - 1.0) / 2.0) * dense)
                .map(|l| l.support.into_iter().collect())
                .collect()
        })
        .collect();
    for attempt in 1..=cfg.retry_cap.max(1) {
        let t0: BTreeSet<Color> = universe.iter().copied().filter(|_| rng.gen_bool(delta)).collect();
        let mut drop = BTreeSet::new();
        for level in watched.iter().flatten() {
            let hit = level.iter().filter(|col| t0.contains(col)).count();
            if hit as f64 + 1e-9 >= 2.0 * delta * level.len() as f64 {
                drop.extend(level.iter().copied());
            }
        }
        let t: BTreeSet<Color> = t0.difference(&drop).copied().collect();
        let margin = t2_margin(c, &t, cfg.eta);
        if t.len() >= ell && margin >= -1e-9 {
            return Ok(ColorSubset {
                removed: t0.len() - t.len(),
                colors: t,
                branch: SubsetBranch::Sampled,
                attempts: attempt,
                t2_margin: margin,
                warnings,
            });
        }
        worst = worst.min(margin);
    }
    Err(ExtremalError::RetriesExhausted { attempts: cfg.retry_cap.max(1), worst_margin: worst })
}

/// The graph left after deleting `M*`'s vertices and colours, on its own indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGraph {
    pub host: ColoredBipartiteGraph,
    pub partition: PartitionPair,
    pub n_h: usize,
    pub removed_colors: BTreeSet<Color>,
    /// Original A-index of every residual A-vertex.
    pub a_origin: Vec<usize>,
    /// Original B-index of every residual B-vertex.
    pub b_origin: Vec<usize>,
}

impl ResidualGraph {
    /// `g` itself with nothing removed.
    pub fn from_graph(g: &ColoredBipartiteGraph, p: &PartitionPair) -> Self {
        ResidualGraph {
            host: g.clone(),
            partition: p.clone(),
            n_h: g.n(),
            removed_colors: BTreeSet::new(),
            a_origin: (0..g.n()).collect(),
            b_origin: (0..g.n()).collect(),
        }
    }

    /// (R1)–(R5) for the inherited partition; `n` is the original side size.
    pub fn margins(&self, n: usize, eta1: f64, nu1: f64, nu2: f64) -> Vec<PropertyCheck> {
        let h = &self.host;
        let n_h = self.n_h as f64;
        let high = (1.0 - eta1) * n_h / 2.0;
        let p = &self.partition;
        let mut checks = Vec::new();
        for (name_low, name_min, side) in [("R1", "R2", Side::A), ("R3", "R4", Side::B)] {
            for (i, (xs, ys)) in [(&p.a1, &p.b1), (&p.a2, &p.b2)].into_iter().enumerate() {
                let (from, to) = if side == Side::A { (xs, ys) } else { (ys, xs) };
                let target = mask(h.n(), to);
                let ds: Vec<usize> = from.iter().map(|&v| h.degree_into(Vertex { side, index: v }, &target)).collect();
                let low = ds.iter().filter(|&&d| (d as f64) + 1e-9 < high).count();
                let part = i + 1;
                checks.push(PropertyCheck::at_most(
                    name_low,
                    low as f64,
                    nu1 * n as f64,
                    format!("part {part}: vertices below (1-eta1) n_H/2"),
                ));
                let min = ds.iter().copied().min().map_or(f64::INFINITY, |d| d as f64);
                checks.push(PropertyCheck::at_least(name_min, min, nu2 * n_h, format!("part {part}: minimum degree")));
            }
        }
        let len = |v: &Vec<usize>| v.len() as f64;
        checks.push(PropertyCheck::at_most("R5", (len(&p.a1) - len(&p.b1)).abs(), 0.0, "|A1^H| = |B1^H|"));
        checks.push(PropertyCheck::at_most("R5", (len(&p.a2) - len(&p.b2)).abs(), 0.0, "|A2^H| = |B2^H|"));
        checks.push(PropertyCheck::at_most("R5", len(&p.a1) - len(&p.a2), nu1 * n_h, "|A1^H| - |A2^H|"));
        checks
    }
}

/// Keeps the first `ℓ` edges of `M_{i*}` (in edge order) whose colours lie in `T`,
/// then deletes their vertices and every edge carrying one of their colours.
pub fn build_residual(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    m_istar: &Matching,
    t: &BTreeSet<Color>,
    ell: usize,
) -> Result<(Matching, ResidualGraph), ExtremalError> {
    let n = g.n();
    let picked: Vec<Edge> = m_istar.edges().filter(|&e| t.contains(&g.color_of(e).unwrap())).take(ell).collect();
    if picked.len() < ell {
        return Err(ExtremalError::NotEnoughColors { available: picked.len(), needed: ell });
    }
    let m_star = Matching::from_pairs(n, picked.iter().copied()).expect("sub-matching of a matching");
    let removed_colors: BTreeSet<Color> = picked.iter().map(|&e| g.color_of(e).unwrap()).collect();

    let a_origin: Vec<usize> = (0..n).filter(|&a| m_star.partner_of_a(a).is_none()).collect();
    let b_origin: Vec<usize> = (0..n).filter(|&b| m_star.partner_of_b(b).is_none()).collect();
    let mut a_new = vec![usize::MAX; n];
    let mut b_new = vec![usize::MAX; n];
    a_origin.iter().enumerate().for_each(|(i, &a)| a_new[a] = i);
    b_origin.iter().enumerate().for_each(|(i, &b)| b_new[b] = i);
    let edges = g
        .edges()
        .filter(|&(e, c)| a_new[e.a] != usize::MAX && b_new[e.b] != usize::MAX && !removed_colors.contains(&c))
        .map(|(e, c)| (a_new[e.a], b_new[e.b], c));
    let n_h = a_origin.len();
    let host = ColoredBipartiteGraph::new(n_h, edges).expect("relabelled subgraph is valid");
    let relabel = |part: &[usize], map: &[usize]| -> Vec<usize> {
        part.iter().map(|&v| map[v]).filter(|&v| v != usize::MAX).collect()
    };
    let partition = PartitionPair::new(
        n_h,
        relabel(&p.a1, &a_new),
        relabel(&p.a2, &a_new),
        relabel(&p.b1, &b_new),
        relabel(&p.b2, &b_new),
    )
    .map_err(|e| ExtremalError::InvalidInput(e.to_string()))?;
    Ok((m_star, ResidualGraph { host, partition, n_h, removed_colors, a_origin, b_origin }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreComponent {
    pub part: usize,
    pub size: usize,
    pub edges: usize,
    /// Moon–Moser degree condition on this component (a sufficient condition only).
    pub moon_moser: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Core {
    /// `H_*` on the residual indices.
    pub graph: ColoredBipartiteGraph,
    pub components: Vec<CoreComponent>,
    pub matching: Matching,
}

/// `H_*`: part-respecting edges `ab` of `H` with
/// `max(e_H(a, B_i), e_H(b, A_i)) ≥ (1−η) n_H / 2`.
pub fn build_core(h: &ResidualGraph, eta: f64) -> Result<Core, ExtremalError> {
    let g = &h.host;
    let n = g.n();
    let threshold = (1.0 - eta) * h.n_h as f64 / 2.0;
    let p = &h.partition;
    let a_part = p.part_of(n, Side::A);
    let b_part = p.part_of(n, Side::B);
    let (b1, b2, a1, a2) = (mask(n, &p.b1), mask(n, &p.b2), mask(n, &p.a1), mask(n, &p.a2));
    let deg_a: Vec<usize> =
        (0..n).map(|a| g.degree_into(Vertex::a(a), if a_part[a] == 1 { &b1 } else { &b2 })).collect();
    let deg_b: Vec<usize> =
        (0..n).map(|b| g.degree_into(Vertex::b(b), if b_part[b] == 1 { &a1 } else { &a2 })).collect();
    let graph = g.filter_edges(|e, _| {
        a_part[e.a] == b_part[e.b] && deg_a[e.a].max(deg_b[e.b]) as f64 + 1e-9 >= threshold
    });
    let components = [(1, &p.a1, &p.b1), (2, &p.a2, &p.b2)]
        .into_iter()
        .map(|(part, xs, ys)| {
            let sub = graph.induced(xs, ys).ok();
            CoreComponent {
                part,
                size: xs.len(),
                edges: sub.as_ref().map_or(0, ColoredBipartiteGraph::edge_count),
                moon_moser: xs.is_empty() || sub.as_ref().is_some_and(moon_moser_check),
            }
        })
        .collect();
    let matching = find_perfect_matching(&graph).ok_or(ExtremalError::NoPerfectMatching)?;
    Ok(Core { graph, components, matching })
}

/// What each stage of the last attempt produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExtremalTrace {
    pub ell: i64,
    pub i_star: usize,
    pub attempts: u64,
    pub greedy: Vec<Edge>,
    pub subset: Option<ColorSubset>,
    pub m_star: Vec<Edge>,
    pub n_h: usize,
    pub residual_checks: Vec<PropertyCheck>,
    pub core_edges: usize,
    pub moon_moser: Vec<bool>,
    pub search_phase: String,
    pub search_switches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalOutcome {
    pub matching: Matching,
    pub m_star: Vec<Edge>,
    pub trace: ExtremalTrace,
}

fn stage(stage: Stage, e: impl fmt::Display) -> ExtremalError {
    ExtremalError::StageFailed { stage, detail: e.to_string() }
}

fn attempt(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    params: &ParamSet,
    seed: u64,
    trace: &mut ExtremalTrace,
) -> Result<(Matching, Vec<Edge>), ExtremalError> {
    let n = g.n();
    let ell = p.ell() as usize;
    let (m_star, residual) = if ell == 0 {
        (Matching::empty(n), ResidualGraph::from_graph(g, p))
    } else {
        let m_istar = greedy_cross_matching(g, p, None, params.nu3, seed).map_err(|e| stage(Stage::Greedy, e))?;
        trace.greedy = m_istar.to_pairs();
        let u: BTreeSet<Color> = m_istar.edges().map(|e| g.color_of(e).unwrap()).collect();
        let c: Vec<ColorMultiset> = [Side::A, Side::B]
            .into_iter()
            .flat_map(|side| (0..n).map(move |index| Vertex { side, index }))
            .map(|v| ColorMultiset::at_vertex(g, v))
            .collect();
        let cfg = BoxesConfig {
            mu: params.mu,
            nu: params.nu3 / 2.0,
            eta: params.eta / 2.0,
            alpha: trace.i_star as f64 / ell as f64,
            epsilon: params.epsilon,
            retry_cap: params.retry_cap,
            seed: derive_seed(seed, 1),
        };
        let subset = select_color_subset(&c, &u, ell, &cfg).map_err(|e| stage(Stage::ColorSubset, e))?;
        let t = subset.colors.clone();
        trace.subset = Some(subset);
        build_residual(g, p, &m_istar, &t, ell).map_err(|e| stage(Stage::Residual, e))?
    };
    trace.m_star = m_star.to_pairs();
    trace.n_h = residual.n_h;
    trace.residual_checks = residual.margins(n, params.eta, params.nu1, params.nu2);

    let core = build_core(&residual, params.eta).map_err(|e| stage(Stage::Core, e))?;
    trace.core_edges = core.graph.edge_count();
    trace.moon_moser = core.components.iter().map(|c| c.moon_moser).collect();

    let opts = SearchOptions { seed: derive_seed(seed, 2), ..SearchOptions::from_params(params) };
    let report = find_conflict_free_pm(&core.graph, &core.graph.conflicts_from_coloring(), &opts);
    trace.search_phase = report.phase.clone();
    trace.search_switches = report.switches;
    let m_h = report.outcome.matching().ok_or_else(|| stage(Stage::Search, format!("{:?} on H_*", report.outcome)))?;

    let mut full = m_star.clone();
    for e in m_h.edges() {
        full.insert(Edge::new(residual.a_origin[e.a], residual.b_origin[e.b])).map_err(|e| stage(Stage::Verify, e))?;
    }
    let a1 = mask(n, &p.a1);
    let b2 = mask(n, &p.b2);
    if !full.is_perfect() || full.validate_in(g).is_err() || !is_rainbow(&full, g) {
        return Err(stage(Stage::Verify, "assembled matching is not a rainbow perfect matching"));
    }
    if !m_star.edges().all(|e| a1[e.a] && b2[e.b]) {
        return Err(stage(Stage::Verify, "M* leaves E(A1,B2)"));
    }
    Ok((full, m_star.to_pairs()))
}

/// Runs greedy → colour subset → residual → core → search and verifies the result.
///
/// The partition must pass the (ν₁, ν₂) superextremal check. Up to
/// [`PIPELINE_ATTEMPTS`] seeds are tried; the error reports the last failure.
pub fn extremal_rainbow_pm(
    g: &ColoredBipartiteGraph,
    p: &PartitionPair,
    params: &ParamSet,
) -> Result<ExtremalOutcome, ExtremalError> {
    p.validate(g.n()).map_err(|e| stage(Stage::Precondition, e))?;
    let report = check_superextremal(g, p, params.nu1, params.nu2);
    if let Some(v) = report.first_violation() {
        return Err(stage(
            Stage::Precondition,
            format!("{} fails: {} (value {}, bound {})", v.name, v.detail, v.value, v.bound),
        ));
    }
    let ell = p.ell() as usize;
    let mut last = None;
    for k in 0..PIPELINE_ATTEMPTS {
        let mut trace = ExtremalTrace {
            ell: p.ell(),
            i_star: if ell == 0 { 0 } else { i_star(ell, params.nu3) },
            attempts: k + 1,
            ..Default::default()
        };
        match attempt(g, p, params, derive_seed(params.seed, k), &mut trace) {
            Ok((matching, m_star)) => return Ok(ExtremalOutcome { matching, m_star, trace }),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{disjoint_halves, superextremal_instance};
    use crate::matching::is_conflict_free;
    use crate::oracle::{exists_conflict_free_pm, OracleVerdict};
    use crate::reductions::counterexample;
    use proptest::prelude::*;

    fn set(xs: &[Color]) -> BTreeSet<Color> {
        xs.iter().copied().collect()
    }

    #[test]
    fn multiset_operators() {
        let a: ColorMultiset = [1, 1, 1, 2].into_iter().collect();
        assert_eq!(a.intersect_plus(&set(&[1])), ColorMultiset::from_counts([(1, 3)]));
        assert_eq!(a.minus_plus(&set(&[1])), ColorMultiset::from_counts([(2, 1)]));
        assert_eq!(a.intersect_plus(&set(&[])).total(), 0);
        assert_eq!(a.minus_plus(&set(&[])), a);
        assert_eq!(ColorMultiset::from_counts([(5, 0)]).distinct(), 0);
    }

    proptest! {
        #[test]
        fn multiset_split_conserves_total(xs in prop::collection::vec(0u64..8, 0..40), b in prop::collection::btree_set(0u64..8, 0..8)) {
            let a: ColorMultiset = xs.iter().copied().collect();
            prop_assert_eq!(a.total(), xs.len());
            prop_assert_eq!(a.intersect_plus(&b).total() + a.minus_plus(&b).total(), a.total());
            prop_assert_eq!(a.count_in(&b), a.intersect_plus(&b).total());
        }
    }

    fn small_cross() -> (ColoredBipartiteGraph, PartitionPair) {
        // A1 = 0..4, A2 = {4,5}, B1 = {0,1}, B2 = 2..6, A1 × B2 complete
        let mut edges = Vec::new();
        for a in 0..6 {
            for b in 0..6 {
                if (a < 4 && b < 2) || (a >= 4 && b >= 2) || (a < 4 && b >= 2) {
                    edges.push((a, b));
                }
            }
        }
        let g = ColoredBipartiteGraph::rainbow_colored(6, edges).unwrap();
        let p = PartitionPair::new(6, vec![0, 1, 2, 3], vec![4, 5], vec![0, 1], vec![2, 3, 4, 5]).unwrap();
        (g, p)
    }

    #[test]
    fn greedy_sizes() {
        let (g, p) = small_cross();
        assert_eq!(p.ell(), 2);
        assert_eq!(i_star(2, 0.1), 2);
        assert_eq!(i_star(3, 0.05), 6);
        let m = greedy_cross_matching(&g, &p, Some(3), 0.1, 4).unwrap();
        assert_eq!(m.size(), 3);
        assert!(is_rainbow(&m, &g));
        let (h, hp) = disjoint_halves(2);
        assert_eq!(greedy_cross_matching(&h, &hp, None, 0.1, 0).unwrap().size(), 0);
    }

    #[test]
    fn greedy_replays_on_counterexample() {
        // swapping labels turns E(A2,B1) into the cross part: one colour per block
        let (g, meta) = counterexample(1).unwrap();
        let mut p = meta.partition.clone();
        p.swap_labels();
        assert_eq!(p.ell(), 4);
        for seed in 0..5 {
            let order = cross_edge_order(&g, &p, seed);
            let mut replay: Vec<Edge> = Vec::new();
            for &e in &order {
                let fresh = replay.iter().all(|f| f.a != e.a && f.b != e.b && g.color_of(*f) != g.color_of(e));
                if fresh && replay.len() < 2 {
                    replay.push(e);
                }
            }
            let m = greedy_cross_matching(&g, &p, Some(2), 0.1, seed).unwrap();
            replay.sort();
            assert_eq!(m.to_pairs(), replay);
        }
        // three block colours cannot support i* = 4 edges
        assert_eq!(
            greedy_cross_matching(&g, &p, None, 0.1, 0).unwrap_err(),
            ExtremalError::PoolExhausted { step: 3, target: 4 }
        );
    }

    fn cfg(alpha: f64) -> BoxesConfig {
        BoxesConfig { mu: 0.25, nu: 0.1, eta: 0.2, alpha, epsilon: 0.25, retry_cap: 200, seed: 3 }
    }

    #[test]
    fn small_ell_takes_arbitrary_subset() {
        let c: Vec<ColorMultiset> = (0..10).map(|i| (i * 10..i * 10 + 10).collect()).collect();
        let u = set(&[0, 11, 22, 33]);
        let t = select_color_subset(&c, &u, 1, &BoxesConfig { alpha: 2.0, ..cfg(2.0) }).unwrap();
        assert_eq!(t.branch, SubsetBranch::Arbitrary);
        assert_eq!(t.colors.len(), 1);
        assert!(t.colors.is_subset(&u));
    }

    #[test]
    fn distinct_colours_pass_t2() {
        let c: Vec<ColorMultiset> = (0..40).map(|i| (i * 40..i * 40 + 40).collect()).collect();
        let u: BTreeSet<Color> = (0..1600).step_by(7).take(120).collect();
        let t = select_color_subset(&c, &u, 30, &cfg(4.0)).unwrap();
        assert_eq!(t.branch, SubsetBranch::Sampled);
        assert_eq!(t.removed, 0);
        assert!(t.colors.len() >= 30);
        assert!(t.t2_margin >= 0.0);
    }

    #[test]
    fn activated_heavy_colours_are_excluded() {
        // C_0 has colours 0 and 1 five times each; with mu N = 10 both sit on level 1
        let mut c: Vec<ColorMultiset> = Vec::new();
        let mut first = vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        first.extend(1000..1030);
        c.push(first.into_iter().collect());
        for i in 1..40u64 {
            c.push((2000 + 40 * i..2040 + 40 * i).collect());
        }
        let mut u: BTreeSet<Color> = (10..308).collect();
        u.extend([0, 1]);
        assert_eq!(u.len(), 300);
        let profile = DyadicProfile::new(&c[0], 10.0, cfg(12.0).levels(40));
        assert_eq!(profile.levels[0].support, vec![0, 1]);
        for seed in 0..20 {
            let t = select_color_subset(&c, &u, 25, &BoxesConfig { seed, ..cfg(12.0) }).unwrap();
            assert!(!t.colors.contains(&0) && !t.colors.contains(&1));
            for ci in &c {
                let kept: usize = ci.iter().filter(|(col, _)| !t.colors.contains(col)).map(|(_, k)| k).sum();
                assert!(kept as f64 >= 0.8 * ci.total() as f64);
            }
        }
    }

    #[test]
    fn dyadic_boundaries_go_low() {
        let c = ColorMultiset::from_counts([(1, 5), (2, 3), (3, 1), (4, 12)]);
        let p = DyadicProfile::new(&c, 10.0, 2);
        assert_eq!(p.levels[0].support, vec![1, 4]);
        assert_eq!(p.levels[1].support, vec![2]);
        assert_eq!(p.light, ColorMultiset::from_counts([(3, 1)]));
        assert_eq!(p.heavy_total + p.light.total(), c.total());
    }

    #[test]
    fn residual_with_forced_cross_edge() {
        // A1 = {0,1,2}, A2 = {3,4}, B1 = {0,1}, B2 = {2,3,4}; a2b2 is the only cross edge
        let mut edges = Vec::new();
        let mut next = 100;
        for a in 0..5 {
            for b in 0..5 {
                if (a < 3 && b < 2) || (a >= 3 && b >= 2) {
                    let c = if (a, b) == (3, 3) { 7 } else { next };
                    next += 1;
                    edges.push((a, b, c));
                }
            }
        }
        edges.push((2, 2, 7));
        let g = ColoredBipartiteGraph::new(5, edges).unwrap();
        let p = PartitionPair::new(5, vec![0, 1, 2], vec![3, 4], vec![0, 1], vec![2, 3, 4]).unwrap();
        let m = greedy_cross_matching(&g, &p, None, 0.1, 0).unwrap();
        let (m_star, h) = build_residual(&g, &p, &m, &set(&[7]), 1).unwrap();
        assert_eq!(m_star.to_pairs(), vec![Edge::new(2, 2)]);
        assert_eq!(h.n_h, 4);
        let gone = g.edges().filter(|&(e, c)| e.a == 2 || e.b == 2 || c == 7).count();
        assert_eq!(h.host.edge_count(), g.edge_count() - gone);
        assert_eq!(h.host.edge_count(), 7);
        assert_eq!((h.partition.a1.len(), h.partition.b1.len()), (2, 2));
        assert!(h.host.edges().all(|(_, c)| c != 7));
        assert_eq!(
            build_residual(&g, &p, &m, &set(&[]), 1).unwrap_err(),
            ExtremalError::NotEnoughColors { available: 0, needed: 1 }
        );

        let (g, p) = disjoint_halves(2);
        let (m_star, h) = build_residual(&g, &p, &Matching::empty(4), &set(&[]), 0).unwrap();
        assert_eq!(m_star.size(), 0);
        assert_eq!(h.host, g);
    }

    fn halves_with(edges: &[(usize, usize)]) -> ResidualGraph {
        let g = ColoredBipartiteGraph::rainbow_colored(8, edges.iter().copied()).unwrap();
        let lo: Vec<usize> = (0..4).collect();
        let hi: Vec<usize> = (4..8).collect();
        ResidualGraph::from_graph(&g, &PartitionPair::new(8, lo.clone(), hi.clone(), lo, hi).unwrap())
    }

    fn complete_block(lo: usize) -> Vec<(usize, usize)> {
        (lo..lo + 4).flat_map(|a| (lo..lo + 4).map(move |b| (a, b))).collect()
    }

    #[test]
    fn core_keeps_dense_edges() {
        let (g, p) = disjoint_halves(4);
        let core = build_core(&ResidualGraph::from_graph(&g, &p), 0.25).unwrap();
        assert_eq!(core.graph, g);
        assert!(core.components.iter().all(|c| c.moon_moser));

        // a0 sees only b0, b1 (degree 2 < 3) but both have degree 4
        let mut edges: Vec<_> = complete_block(0).into_iter().filter(|&(a, b)| a != 0 || b < 2).collect();
        edges.extend(complete_block(4));
        let h = halves_with(&edges);
        let core = build_core(&h, 0.25).unwrap();
        assert_eq!(core.graph.edge_count(), h.host.edge_count());
        assert!(core.graph.has_edge(0, 0) && core.graph.has_edge(0, 1));
    }

    #[test]
    fn core_drops_sparse_pairs() {
        // a0–b0 is the only edge at either endpoint
        let mut edges: Vec<_> = complete_block(0).into_iter().filter(|&(a, b)| (a == 0) == (b == 0)).collect();
        edges.extend(complete_block(4));
        let h = halves_with(&edges);
        assert_eq!(build_core(&h, 0.25).unwrap_err(), ExtremalError::NoPerfectMatching);
    }

    #[test]
    fn pipeline_on_disjoint_halves() {
        let (g, p) = disjoint_halves(3);
        let out = extremal_rainbow_pm(&g, &p, &ParamSet { nu2: 0.3, ..ParamSet::default() }).unwrap();
        assert!(out.matching.is_perfect() && is_rainbow(&out.matching, &g));
        assert!(out.m_star.is_empty());
    }

    #[test]
    fn pipeline_on_superextremal_instances() {
        let params = ParamSet { nu1: 0.2, nu2: 0.3, nu3: 0.05, eta: 0.5, ..ParamSet::default() };
        for seed in 0..4 {
            let (g, p) = superextremal_instance(4, 2, 2, seed).unwrap();
            let out = extremal_rainbow_pm(&g, &p, &params).unwrap();
            let f = g.conflicts_from_coloring();
            assert!(out.matching.is_perfect() && is_conflict_free(&out.matching, &f));
            assert_eq!(out.m_star.len(), 2);
            assert!(out.m_star.iter().all(|e| p.a1.contains(&e.a) && p.b2.contains(&e.b) && out.matching.contains(*e)));
            assert_eq!(exists_conflict_free_pm(&g, &f, 10_000_000).decided(), Some(true));
        }
    }

    #[test]
    fn pipeline_refuses_counterexample() {
        let (g, meta) = counterexample(1).unwrap();
        let err = extremal_rainbow_pm(&g, &meta.partition, &ParamSet::default()).unwrap_err();
        assert!(matches!(err, ExtremalError::StageFailed { stage: Stage::Precondition, .. }));
        assert!(matches!(exists_conflict_free_pm(&g, &g.conflicts_from_coloring(), 10_000_000), OracleVerdict::No { .. }));
    }
}
