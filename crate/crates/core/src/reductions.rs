//! The counterexample family, Δ-factor blow-ups and rainbow embeddings.
//!
//! A rainbow Δ-factor of a simple graph `G` comes from a rainbow perfect matching
//! of the bipartite blow-up `Q` that has `Δ/2` copies of each vertex on either
//! side. A rainbow copy of a bipartite template `J` comes from a conflict-free
//! perfect matching of the auxiliary graph that matches host vertices `a` to
//! template neighbourhoods `N_{a'}` they contain.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Color, ColoredBipartiteGraph, ConflictSystem, Edge, GraphError};
use crate::matching::{is_rainbow, Matching};
use crate::structure::PartitionPair;
use crate::util::rng_from;

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("vertex {0} has a self-loop")]
    SelfLoop(usize),
    #[error("edge {{{0}, {1}}} listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("vertex index {index} out of range for {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("delta must be even and positive (got {0})")]
    OddDelta(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matching is not rainbow; extracted multigraph attached")]
    NotRainbowInput { extraction: Box<FactorExtraction> },
    #[error("host colouring is not proper")]
    NotProperColoring,
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("no admissible split after {attempts} attempts")]
    RetriesExhausted { attempts: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// JSON wire form: `{ "n": int, "edges": [[u, v, color], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleGraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, Color)>,
}

/// A simple edge-coloured graph on `0..n`; edges stored with `u < v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleGraph {
    n: usize,
    table: Vec<Option<Color>>,
    edges: Vec<(usize, usize, Color)>,
}

impl SimpleGraph {
    pub fn new<I>(n: usize, edges: I) -> Result<Self, ReductionError>
    where
        I: IntoIterator<Item = (usize, usize, Color)>,
    {
        let mut table = vec![None; n * n];
        let mut list = Vec::new();
        for (u, v, c) in edges {
            for index in [u, v] {
                if index >= n {
                    return Err(ReductionError::IndexOutOfRange { index, n });
                }
            }
            if u == v {
                return Err(ReductionError::SelfLoop(u));
            }
            let (u, v) = (u.min(v), u.max(v));
            if table[u * n + v].is_some() {
                return Err(ReductionError::DuplicateEdge(u, v));
            }
            table[u * n + v] = Some(c);
            table[v * n + u] = Some(c);
            list.push((u, v, c));
        }
        list.sort_unstable();
        Ok(SimpleGraph { n, table, edges: list })
    }

    /// `K_n` with colours `color(u, v)`, `u < v`.
    pub fn complete(n: usize, mut color: impl FnMut(usize, usize) -> Color) -> Self {
        let edges: Vec<_> =
            (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).map(|(u, v)| (u, v, color(u, v))).collect();
        Self::new(n, edges).expect("complete graph is simple")
    }

    pub fn from_file(f: &SimpleGraphFile) -> Result<Self, ReductionError> {
        Self::new(f.n, f.edges.iter().copied())
    }

    pub fn to_file(&self) -> SimpleGraphFile {
        SimpleGraphFile { n: self.n, edges: self.edges.clone() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, Color)] {
        &self.edges
    }

    pub fn color(&self, u: usize, v: usize) -> Option<Color> {
        (u < self.n && v < self.n).then(|| self.table[u * self.n + v]).flatten()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.color(u, v).is_some()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).filter(|&u| self.has_edge(v, u)).count()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Minimum degree at least `⌈n/2⌉`.
    pub fn is_dirac(&self) -> bool {
        self.min_degree() >= self.n.div_ceil(2)
    }

    pub fn coloring_bound(&self) -> usize {
        let mut sizes: BTreeMap<Color, usize> = BTreeMap::new();
        for &(_, _, c) in &self.edges {
            *sizes.entry(c).or_insert(0) += 1;
        }
        sizes.into_values().max().unwrap_or(0)
    }

    pub fn is_properly_colored(&self) -> bool {
        (0..self.n).all(|v| {
            let mut seen = BTreeSet::new();
            (0..self.n).filter_map(|u| self.color(v, u)).all(|c| seen.insert(c))
        })
    }

    pub fn is_rainbow(&self) -> bool {
        self.coloring_bound() <= 1
    }
}

/// Block layout and deficiency counts of the counterexample graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleMeta {
    pub t: usize,
    pub m: usize,
    pub block_size: usize,
    pub side_size: usize,
    /// `(t+1)²`, the size of every colour class.
    pub color_bound: usize,
    pub partition: PartitionPair,
    /// Blocks of `A1` then `A2`.
    pub a_blocks: Vec<Vec<usize>>,
    /// Blocks of `B1` then `B2`.
    pub b_blocks: Vec<Vec<usize>>,
    /// `|B1| − |A1| = m + 2`: edges of `E(A2, B1)` any perfect matching needs.
    pub required_cross_edges: usize,
    /// `m + 1`: one per colour on `E(A2, B1)`, the most a rainbow matching can use.
    pub available_cross_colors: usize,
}

/// Dirac graph with a `(t+1)²`-bounded colouring and no rainbow perfect matching.
///
/// With `m = 2t` and blocks of size `t+1`: `A1` has `m−1` blocks, `A2` has `m+1`,
/// `B1` has `m+1`, `B2` has `m−1`. `G[A1,B1]` and `G[A2,B2]` are complete and
/// `G[A2^i, B1^i]` is complete for each `i`. Each block pair carries one colour.
pub fn counterexample(t: usize) -> Result<(ColoredBipartiteGraph, CounterexampleMeta), ReductionError> {
    if t == 0 {
        return Err(ReductionError::InvalidArgument("t must be at least 1".into()));
    }
    let m = 2 * t;
    let s = t + 1;
    let n = 4 * t * (t + 1);
    let blocks = |count: usize, offset: usize| -> Vec<Vec<usize>> {
        (0..count).map(|k| ((offset + k) * s..(offset + k + 1) * s).collect()).collect()
    };
    let a_blocks: Vec<Vec<usize>> = blocks(m - 1, 0).into_iter().chain(blocks(m + 1, m - 1)).collect();
    let b_blocks: Vec<Vec<usize>> = blocks(m + 1, 0).into_iter().chain(blocks(m - 1, m + 1)).collect();
    let (a1_blocks, a2_blocks) = a_blocks.split_at(m - 1);
    let (b1_blocks, b2_blocks) = b_blocks.split_at(m + 1);
    let nb = b_blocks.len();

    let mut edges = Vec::new();
    let mut connect = |ai: usize, bi: usize| {
        let color = (ai * nb + bi) as Color;
        for &a in &a_blocks[ai] {
            for &b in &b_blocks[bi] {
                edges.push((a, b, color));
            }
        }
    };
    for ai in 0..a1_blocks.len() {
        for bi in 0..b1_blocks.len() {
            connect(ai, bi);
        }
    }
    for ai in 0..a2_blocks.len() {
        for bi in 0..b2_blocks.len() {
            connect(m - 1 + ai, m + 1 + bi);
        }
        connect(m - 1 + ai, ai);
    }
    let g = ColoredBipartiteGraph::new(n, edges)?;
    let flat = |bs: &[Vec<usize>]| bs.iter().flatten().copied().collect::<Vec<_>>();
    let partition = PartitionPair::new(n, flat(a1_blocks), flat(a2_blocks), flat(b1_blocks), flat(b2_blocks))
        .expect("block layout covers both sides");
    let meta = CounterexampleMeta {
        t,
        m,
        block_size: s,
        side_size: n,
        color_bound: s * s,
        required_cross_edges: partition.b1.len() - partition.a1.len(),
        available_cross_colors: m + 1,
        partition,
        a_blocks,
        b_blocks,
    };
    Ok((g, meta))
}

/// Direct recount of the counterexample's deficiency argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeficiencyCheck {
    pub a1_size: usize,
    pub b1_size: usize,
    /// `N(A1) ⊆ B1`, so `B1` needs `|B1| − |A1|` partners from `A2`.
    pub a1_only_sees_b1: bool,
    pub required_cross_edges: usize,
    /// Distinct colours on `E(A2, B1)`.
    pub cross_colors: usize,
    pub holds: bool,
}

pub fn check_deficiency(g: &ColoredBipartiteGraph, p: &PartitionPair) -> DeficiencyCheck {
    let b1: BTreeSet<usize> = p.b1.iter().copied().collect();
    let a1_only_sees_b1 = p.a1.iter().all(|&a| g.neighbors_a(a).iter().all(|b| b1.contains(b)));
    let cross_colors: BTreeSet<Color> = p
        .a2
        .iter()
        .flat_map(|&a| g.neighbors_a(a).iter().filter(|b| b1.contains(b)).map(move |&b| g.color(a, b).unwrap()))
        .collect();
    let required = p.b1.len().saturating_sub(p.a1.len());
    DeficiencyCheck {
        a1_size: p.a1.len(),
        b1_size: p.b1.len(),
        a1_only_sees_b1,
        required_cross_edges: required,
        cross_colors: cross_colors.len(),
        holds: a1_only_sees_b1 && required > cross_colors.len(),
    }
}

/// Vertex bookkeeping for the Δ-factor blow-up.
///
/// Copy `i ∈ 1..=Δ/2` of `v` sits on side A at index `v·Δ/2 + i − 1`; copy
/// `i ∈ Δ/2+1..=Δ` sits on side B at index `v·Δ/2 + i − Δ/2 − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlowupMap {
    pub delta: usize,
    pub origin_vertices: usize,
    /// Whether the source graph met the Dirac condition (the blow-up is Dirac iff it does).
    pub source_is_dirac: bool,
}

impl BlowupMap {
    pub fn half(&self) -> usize {
        self.delta / 2
    }

    pub fn side_size(&self) -> usize {
        self.origin_vertices * self.half()
    }

    /// `(v, i)` for an A-side index.
    pub fn origin_a(&self, index: usize) -> (usize, usize) {
        (index / self.half(), index % self.half() + 1)
    }

    /// `(v, i)` for a B-side index.
    pub fn origin_b(&self, index: usize) -> (usize, usize) {
        (index / self.half(), index % self.half() + self.half() + 1)
    }

    pub fn a_index(&self, v: usize, i: usize) -> usize {
        v * self.half() + i - 1
    }

    pub fn b_index(&self, v: usize, i: usize) -> usize {
        v * self.half() + i - self.half() - 1
    }
}

/// The bipartite blow-up `Q` with `u_{v,i} u_{w,j} ∈ E(Q)` iff `vw ∈ E(G)`.
pub fn delta_factor_blowup(g: &SimpleGraph, delta: usize) -> Result<(ColoredBipartiteGraph, BlowupMap), ReductionError> {
    if delta == 0 || delta % 2 == 1 {
        return Err(ReductionError::OddDelta(delta));
    }
    if delta > g.n() {
        return Err(ReductionError::InvalidArgument(format!("delta {delta} exceeds {} vertices", g.n())));
    }
    let map = BlowupMap { delta, origin_vertices: g.n(), source_is_dirac: g.is_dirac() };
    let h = map.half();
    let mut edges = Vec::new();
    for &(v, w, c) in g.edges() {
        for (x, y) in [(v, w), (w, v)] {
            for i in 1..=h {
                for j in h + 1..=delta {
                    edges.push((map.a_index(x, i), map.b_index(y, j), c));
                }
            }
        }
    }
    Ok((ColoredBipartiteGraph::new(map.side_size(), edges)?, map))
}

/// The multigraph read off a perfect matching of the blow-up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorExtraction {
    /// One entry per matching edge, as `(min, max, colour)`; may repeat.
    pub edges: Vec<(usize, usize, Color)>,
    pub simple: bool,
    pub rainbow: bool,
    pub regular: bool,
}

impl FactorExtraction {
    pub fn to_graph(&self, n: usize) -> Result<SimpleGraph, ReductionError> {
        SimpleGraph::new(n, self.edges.iter().copied())
    }
}

/// `H = { vw : u_{v,i} u_{w,j} ∈ M }`, checked for simplicity, regularity and
/// rainbowness. A non-rainbow `M` yields `NotRainbowInput` with the extraction.
pub fn extract_factor(
    g: &SimpleGraph,
    q: &ColoredBipartiteGraph,
    map: &BlowupMap,
    m: &Matching,
) -> Result<FactorExtraction, ReductionError> {
    if !m.is_perfect() || m.n() != q.n() {
        return Err(ReductionError::InvalidArgument("matching is not a perfect matching of Q".into()));
    }
    let mut edges = Vec::new();
    let mut degree = vec![0usize; g.n()];
    for e in m.edges() {
        let (v, _) = map.origin_a(e.a);
        let (w, _) = map.origin_b(e.b);
        let c = g.color(v, w).ok_or_else(|| ReductionError::InvalidArgument(format!("{e} is not a blow-up edge")))?;
        degree[v] += 1;
        degree[w] += 1;
        edges.push((v.min(w), v.max(w), c));
    }
    edges.sort_unstable();
    let distinct: BTreeSet<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let colors: BTreeSet<Color> = edges.iter().map(|&(_, _, c)| c).collect();
    let extraction = FactorExtraction {
        simple: distinct.len() == edges.len(),
        rainbow: colors.len() == edges.len(),
        regular: degree.iter().all(|&d| d == map.delta),
        edges,
    };
    if !is_rainbow(m, q) || !extraction.simple {
        return Err(ReductionError::NotRainbowInput { extraction: Box::new(extraction) });
    }
    Ok(extraction)
}

/// Host graph, bipartite split and the placed template `J ⊆ G'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingInstance {
    pub host: SimpleGraphFile,
    pub a_side: Vec<usize>,
    pub b_side: Vec<usize>,
    /// Template edges `(a, b)` with `a ∈ a_side`, `b ∈ b_side`.
    pub template: Vec<(usize, usize)>,
}

/// The auxiliary graph on `A ∪ Γ` with its conflict system.
///
/// Q-index `i` on side A is host vertex `a_side[i]`; Q-index `j` on side B is the
/// slot holding `N_{a_side[j]}`. Slots stay distinct even when two neighbourhoods
/// coincide. Every Q-edge gets its own colour; only `conflicts` matters.
#[derive(Debug, Clone)]
pub struct EmbeddingAux {
    pub q: ColoredBipartiteGraph,
    pub conflicts: ConflictSystem,
    /// `N_{a_side[j]}` as host B-vertices, sorted.
    pub slots: Vec<Vec<usize>>,
    /// Largest template degree on side A.
    pub max_slot_size: usize,
    pub min_degree: usize,
}

struct Checked {
    host: SimpleGraph,
    slots: Vec<Vec<usize>>,
}

fn check_instance(inst: &EmbeddingInstance) -> Result<Checked, ReductionError> {
    let host = SimpleGraph::from_file(&inst.host)?;
    let n = host.n();
    if inst.a_side.len() != inst.b_side.len() {
        return Err(ReductionError::InvalidArgument("sides must have equal size".into()));
    }
    let mut seen = vec![false; n];
    for &v in inst.a_side.iter().chain(&inst.b_side) {
        if v >= n {
            return Err(ReductionError::IndexOutOfRange { index: v, n });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(ReductionError::InvalidArgument(format!("vertex {v} on both sides")));
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(ReductionError::InvalidArgument("split must cover every host vertex".into()));
    }
    let a_pos: BTreeMap<usize, usize> = inst.a_side.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    let b_set: BTreeSet<usize> = inst.b_side.iter().copied().collect();
    let mut slots = vec![Vec::new(); inst.a_side.len()];
    let mut seen_edges = BTreeSet::new();
    for &(a, b) in &inst.template {
        let (Some(&i), true) = (a_pos.get(&a), b_set.contains(&b)) else {
            return Err(ReductionError::InvalidArgument(format!("template edge ({a}, {b}) does not cross the split")));
        };
        if !host.has_edge(a, b) {
            return Err(ReductionError::InvalidArgument(format!("template edge ({a}, {b}) is not a host edge")));
        }
        if !seen_edges.insert((a, b)) {
            return Err(ReductionError::DuplicateEdge(a, b));
        }
        slots[i].push(b);
    }
    slots.iter_mut().for_each(|s| s.sort_unstable());
    Ok(Checked { host, slots })
}

/// Builds `Q` (edge `a_i N_{a_j}` iff `N_{a_j} ⊆ N_G(a_i)`) and `F_Q`.
///
/// Two Q-edges at different A-vertices conflict when their host stars
/// `E_G(a_i, N_{a_j})` share a colour. Stars at the same A-vertex never share a
/// colour because the host colouring must be proper.
pub fn embedding_auxiliary(inst: &EmbeddingInstance) -> Result<EmbeddingAux, ReductionError> {
    let c = check_instance(inst)?;
    if !c.host.is_properly_colored() {
        return Err(ReductionError::NotProperColoring);
    }
    let m = inst.a_side.len();
    let mut edges = Vec::new();
    let mut star_colors: BTreeMap<Edge, BTreeSet<Color>> = BTreeMap::new();
    for (i, &a) in inst.a_side.iter().enumerate() {
        for (j, slot) in c.slots.iter().enumerate() {
            if slot.iter().all(|&b| c.host.has_edge(a, b)) {
                edges.push((i, j, (i * m + j) as Color));
                let colors = slot.iter().map(|&b| c.host.color(a, b).unwrap()).collect();
                star_colors.insert(Edge::new(i, j), colors);
            }
        }
    }
    let q = ColoredBipartiteGraph::new(m, edges)?;
    let mut by_color: BTreeMap<Color, Vec<Edge>> = BTreeMap::new();
    for (&e, colors) in &star_colors {
        for &col in colors {
            by_color.entry(col).or_default().push(e);
        }
    }
    let mut pairs = BTreeSet::new();
    for list in by_color.values() {
        for (k, &e) in list.iter().enumerate() {
            for &f in &list[k + 1..] {
                if e.a != f.a {
                    pairs.insert((e.min(f), e.max(f)));
                }
            }
        }
    }
    let conflicts = ConflictSystem::new(pairs).expect("pairs are distinct and irreflexive");
    Ok(EmbeddingAux {
        min_degree: q.min_degree(),
        max_slot_size: c.slots.iter().map(Vec::len).max().unwrap_or(0),
        q,
        conflicts,
        slots: c.slots,
    })
}

/// A verified rainbow copy of the template.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    /// `f(u) = v` for every host vertex, as `(u, v)` pairs; identity on side B.
    pub mapping: Vec<(usize, usize)>,
    /// Edges of `R` as `(a, b, colour)`.
    pub edges: Vec<(usize, usize, Color)>,
}

/// Reads `R` and `f` off a conflict-free perfect matching of `Q` and verifies
/// that `f` maps `R` onto `J` and that `R` is rainbow.
pub fn extract_embedding(inst: &EmbeddingInstance, aux: &EmbeddingAux, m: &Matching) -> Result<Embedding, ReductionError> {
    let c = check_instance(inst)?;
    if !m.is_perfect() || m.n() != inst.a_side.len() {
        return Err(ReductionError::VerificationFailed("matching is not perfect on Q".into()));
    }
    let mut f: BTreeMap<usize, usize> = inst.b_side.iter().map(|&b| (b, b)).collect();
    let mut r = Vec::new();
    for e in m.edges() {
        if !aux.q.contains(e) {
            return Err(ReductionError::VerificationFailed(format!("{e} is not an edge of Q")));
        }
        let a = inst.a_side[e.a];
        f.insert(a, inst.a_side[e.b]);
        for &b in &c.slots[e.b] {
            let col = c
                .host
                .color(a, b)
                .ok_or_else(|| ReductionError::VerificationFailed(format!("({a}, {b}) is not a host edge")))?;
            r.push((a, b, col));
        }
    }
    r.sort_unstable();
    let image: BTreeSet<usize> = f.values().copied().collect();
    if image.len() != c.host.n() {
        return Err(ReductionError::VerificationFailed("f is not a bijection".into()));
    }
    let j: BTreeSet<(usize, usize)> = inst.template.iter().copied().collect();
    let mapped: BTreeSet<(usize, usize)> = r.iter().map(|&(a, b, _)| (f[&a], f[&b])).collect();
    if mapped != j || r.len() != j.len() {
        return Err(ReductionError::VerificationFailed("f does not map R onto J".into()));
    }
    let colors: BTreeSet<Color> = r.iter().map(|&(_, _, col)| col).collect();
    if colors.len() != r.len() {
        return Err(ReductionError::VerificationFailed("R is not rainbow".into()));
    }
    Ok(Embedding { mapping: f.into_iter().collect(), edges: r })
}

/// Random balanced bipartition with every cross degree at least
/// `(1 − 1/(2Δ) + γ/2)·m`, where `m = n/2`.
pub fn random_balanced_split(
    g: &SimpleGraph,
    delta: usize,
    gamma: f64,
    retry_cap: u64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ReductionError> {
    let n = g.n();
    if n % 2 == 1 || delta == 0 {
        return Err(ReductionError::InvalidArgument("need an even vertex count and delta >= 1".into()));
    }
    let m = n / 2;
    let bound = (1.0 - 1.0 / (2.0 * delta as f64) + gamma / 2.0) * m as f64;
    let need = crate::util::at_least(bound);
    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..retry_cap {
        order.shuffle(&mut rng);
        let (a, b) = order.split_at(m);
        let ok = a.iter().all(|&u| b.iter().filter(|&&v| g.has_edge(u, v)).count() >= need)
            && b.iter().all(|&v| a.iter().filter(|&&u| g.has_edge(u, v)).count() >= need);
        if ok {
            let (mut a, mut b) = (a.to_vec(), b.to_vec());
            a.sort_unstable();
            b.sort_unstable();
            return Ok((a, b));
        }
    }
    Err(ReductionError::RetriesExhausted { attempts: retry_cap })
}

/// Largest host for [`find_template`].
pub const TEMPLATE_SEARCH_LIMIT: usize = 16;

/// Places a balanced bipartite pattern inside the split host by backtracking.
///
/// Pattern side A maps into `a_side` and pattern side B into `b_side`, injectively,
/// with every pattern edge landing on a host edge. Returns the template edges.
pub fn find_template(
    host: &SimpleGraph,
    a_side: &[usize],
    b_side: &[usize],
    pattern: &ColoredBipartiteGraph,
) -> Result<Option<Vec<(usize, usize)>>, ReductionError> {
    if host.n() > TEMPLATE_SEARCH_LIMIT {
        return Err(ReductionError::InvalidArgument(format!(
            "template search limited to {TEMPLATE_SEARCH_LIMIT} host vertices"
        )));
    }
    if pattern.n() != a_side.len() || a_side.len() != b_side.len() {
        return Err(ReductionError::InvalidArgument("pattern sides must match the split".into()));
    }
    // place A-vertices by decreasing pattern degree, each followed by its B-neighbours
    let k = pattern.n();
    let mut order: Vec<(bool, usize)> = Vec::new();
    let mut placed_b = vec![false; k];
    let mut a_order: Vec<usize> = (0..k).collect();
    a_order.sort_by_key(|&a| std::cmp::Reverse(pattern.neighbors_a(a).len()));
    for a in a_order {
        order.push((true, a));
        for &b in pattern.neighbors_a(a) {
            if !std::mem::replace(&mut placed_b[b], true) {
                order.push((false, b));
            }
        }
    }
    order.extend((0..k).filter(|&b| !placed_b[b]).map(|b| (false, b)));

    struct State<'a> {
        host: &'a SimpleGraph,
        a_side: &'a [usize],
        b_side: &'a [usize],
        pattern: &'a ColoredBipartiteGraph,
        order: Vec<(bool, usize)>,
        phi_a: Vec<Option<usize>>,
        phi_b: Vec<Option<usize>>,
        used_a: Vec<bool>,
        used_b: Vec<bool>,
    }
    fn go(s: &mut State<'_>, depth: usize) -> bool {
        if depth == s.order.len() {
            return true;
        }
        let (is_a, v) = s.order[depth];
        for slot in 0..s.a_side.len() {
            let ok = if is_a {
                !s.used_a[slot]
                    && s.pattern.neighbors_a(v).iter().all(|&b| {
                        s.phi_b[b].is_none_or(|hb| s.host.has_edge(s.a_side[slot], s.b_side[hb]))
                    })
            } else {
                !s.used_b[slot]
                    && s.pattern.neighbors_b(v).iter().all(|&a| {
                        s.phi_a[a].is_none_or(|ha| s.host.has_edge(s.a_side[ha], s.b_side[slot]))
                    })
            };
            if !ok {
                continue;
            }
            if is_a {
                s.phi_a[v] = Some(slot);
                s.used_a[slot] = true;
            } else {
                s.phi_b[v] = Some(slot);
                s.used_b[slot] = true;
            }
            if go(s, depth + 1) {
                return true;
            }
            if is_a {
                s.phi_a[v] = None;
                s.used_a[slot] = false;
            } else {
                s.phi_b[v] = None;
                s.used_b[slot] = false;
            }
        }
        false
    }
    let mut s = State {
        host,
        a_side,
        b_side,
        pattern,
        order,
        phi_a: vec![None; k],
        phi_b: vec![None; k],
        used_a: vec![false; k],
        used_b: vec![false; k],
    };
    if !go(&mut s, 0) {
        return Ok(None);
    }
    let mut j: Vec<(usize, usize)> = pattern
        .edges()
        .map(|(e, _)| (a_side[s.phi_a[e.a].unwrap()], b_side[s.phi_b[e.b].unwrap()]))
        .collect();
    j.sort_unstable();
    Ok(Some(j))
}

/// The 4+4 embedding fixture: host `K_{4,4}` minus a perfect matching between
/// `A = {0,1,2,3}` and `B = {4,5,6,7}`, template an 8-cycle, and a proper colouring
/// in which the template edges `a0b1` and `a3b2` share a colour.
pub fn embedding_fixture() -> EmbeddingInstance {
    let b = |j: usize| 4 + j;
    let mut edges = Vec::new();
    let mut next = 10;
    for i in 0..4 {
        for j in (0..4).filter(|&j| j != i) {
            let color = if (i, j) == (0, 1) || (i, j) == (3, 2) {
                0
            } else {
                next += 1;
                next
            };
            edges.push((i, b(j), color));
        }
    }
    let template = [(0, 1), (2, 1), (2, 0), (3, 0), (3, 2), (1, 2), (1, 3), (0, 3)]
        .into_iter()
        .map(|(i, j)| (i, b(j)))
        .collect();
    EmbeddingInstance {
        host: SimpleGraphFile { n: 8, edges },
        a_side: vec![0, 1, 2, 3],
        b_side: vec![4, 5, 6, 7],
        template,
    }
}
