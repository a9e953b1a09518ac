//! Balanced edge-coloured bipartite graphs.
//!
//! Vertices on side A and side B are both indexed `0..n`. Edges are identified by
//! their canonical `(a, b)` pair, so conflict systems and matchings keep referring to
//! the same edges after subgraph operations that preserve indices.

mod conflicts;
pub mod generate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conflicts::{ConflictError, ConflictFile, ConflictSystem};

/// Opaque colour identifier.
pub type Color = u64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({a}, {b}) listed more than once")]
    DuplicateEdge { a: usize, b: usize },
    #[error("vertex index {index} out of range for side size {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("sides have different sizes ({a} vs {b})")]
    Unbalanced { a: usize, b: usize },
    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u64 },
    #[error("invalid generator argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Vertex {
    pub side: Side,
    pub index: usize,
}

impl Vertex {
    pub fn a(index: usize) -> Self {
        Vertex { side: Side::A, index }
    }

    pub fn b(index: usize) -> Self {
        Vertex { side: Side::B, index }
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::A => write!(f, "a{}", self.index),
            Side::B => write!(f, "b{}", self.index),
        }
    }
}

/// Canonical edge identifier: `a` on side A, `b` on side B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub const fn new(a: usize, b: usize) -> Self {
        Edge { a, b }
    }

    /// True when the two edges share an endpoint.
    pub fn touches(&self, other: &Edge) -> bool {
        self.a == other.a || self.b == other.b
    }
}

impl From<(usize, usize)> for Edge {
    fn from((a, b): (usize, usize)) -> Self {
        Edge { a, b }
    }
}

impl From<Edge> for (usize, usize) {
    fn from(e: Edge) -> Self {
        (e.a, e.b)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}b{}", self.a, self.b)
    }
}

/// JSON wire form: `{ "n": int, "edges": [[a, b, color], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, Color)>,
}

/// A balanced bipartite graph with one colour per edge.
///
/// Immutable after construction. Colour lookups use a dense `n × n` table, which is
/// the right trade-off at the sizes this crate targets (side sizes in the hundreds).
#[derive(Clone, PartialEq)]
pub struct ColoredBipartiteGraph {
    n: usize,
    table: Vec<Option<Color>>,
    adj_a: Vec<Vec<usize>>,
    adj_b: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for ColoredBipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColoredBipartiteGraph")
            .field("n", &self.n)
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl ColoredBipartiteGraph {
    /// Validated construction from an edge list.
    pub fn new<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, Color)>,
    {
        let mut table = vec![None; n * n];
        let mut adj_a = vec![Vec::new(); n];
        let mut adj_b = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (a, b, c) in edges {
            for index in [a, b] {
                if index >= n {
                    return Err(GraphError::IndexOutOfRange { index, n });
                }
            }
            let slot = &mut table[a * n + b];
            if slot.is_some() {
                return Err(GraphError::DuplicateEdge { a, b });
            }
            *slot = Some(c);
            adj_a[a].push(b);
            adj_b[b].push(a);
            edge_count += 1;
        }
        adj_a.iter_mut().for_each(|l| l.sort_unstable());
        adj_b.iter_mut().for_each(|l| l.sort_unstable());
        Ok(ColoredBipartiteGraph { n, table, adj_a, adj_b, edge_count })
    }

    /// `K_{n,n}` with colours given by `color(a, b)`.
    pub fn complete(n: usize, mut color: impl FnMut(usize, usize) -> Color) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| (a, b, color(a, b)))
            .collect();
        Self::new(n, edges).expect("complete graph is valid")
    }

    /// Graph on the given edges with every edge receiving its own colour.
    pub fn rainbow_colored<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, edges.into_iter().enumerate().map(|(i, (a, b))| (a, b, i as Color)))
    }

    pub fn from_file(file: &GraphFile) -> Result<Self, GraphError> {
        Self::new(file.n, file.edges.iter().copied())
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile { n: self.n, edges: self.edges().map(|(e, c)| (e.a, e.b, c)).collect() }
    }

    /// Vertices per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// All edges in `(a, b)` lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, Color)> + '_ {
        self.adj_a.iter().enumerate().flat_map(move |(a, nbrs)| {
            nbrs.iter().map(move |&b| (Edge::new(a, b), self.table[a * self.n + b].unwrap()))
        })
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.table[a * self.n + b].is_some()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.has_edge(e.a, e.b)
    }

    pub fn color(&self, a: usize, b: usize) -> Option<Color> {
        if a < self.n && b < self.n {
            self.table[a * self.n + b]
        } else {
            None
        }
    }

    pub fn color_of(&self, e: Edge) -> Option<Color> {
        self.color(e.a, e.b)
    }

    pub fn neighbors_a(&self, a: usize) -> &[usize] {
        &self.adj_a[a]
    }

    pub fn neighbors_b(&self, b: usize) -> &[usize] {
        &self.adj_b[b]
    }

    pub fn neighbors(&self, v: Vertex) -> &[usize] {
        match v.side {
            Side::A => &self.adj_a[v.index],
            Side::B => &self.adj_b[v.index],
        }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.neighbors(v).len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj_a.iter().chain(&self.adj_b).map(Vec::len).min().unwrap_or(0)
    }

    /// Degree bar for the Dirac condition: `⌈n/2⌉`.
    pub fn dirac_threshold(&self) -> usize {
        self.n.div_ceil(2)
    }

    /// Every vertex has degree at least `⌈n/2⌉`.
    pub fn is_dirac(&self) -> bool {
        self.min_degree() >= self.dirac_threshold()
    }

    /// Largest colour class size; 0 for an edgeless graph.
    pub fn coloring_bound(&self) -> usize {
        self.color_class_sizes().into_values().max().unwrap_or(0)
    }

    pub fn color_class_sizes(&self) -> BTreeMap<Color, usize> {
        let mut sizes = BTreeMap::new();
        for (_, c) in self.edges() {
            *sizes.entry(c).or_insert(0) += 1;
        }
        sizes
    }

    pub fn color_classes(&self) -> BTreeMap<Color, Vec<Edge>> {
        let mut classes: BTreeMap<Color, Vec<Edge>> = BTreeMap::new();
        for (e, c) in self.edges() {
            classes.entry(c).or_default().push(e);
        }
        classes
    }

    /// No two edges at a common vertex share a colour.
    pub fn is_properly_colored(&self) -> bool {
        let check = |adj: &Vec<Vec<usize>>, row: bool| {
            adj.iter().enumerate().all(|(v, nbrs)| {
                let mut seen = std::collections::HashSet::new();
                nbrs.iter().all(|&u| {
                    let c = if row { self.color(v, u) } else { self.color(u, v) };
                    seen.insert(c.unwrap())
                })
            })
        };
        check(&self.adj_a, true) && check(&self.adj_b, false)
    }

    /// The conflict system `{ {e, f} : χ(e) = χ(f) }`.
    pub fn conflicts_from_coloring(&self) -> ConflictSystem {
        let mut pairs = Vec::new();
        for class in self.color_classes().into_values() {
            for (i, &e) in class.iter().enumerate() {
                for &f in &class[i + 1..] {
                    pairs.push((e, f));
                }
            }
        }
        ConflictSystem::new(pairs).expect("colour classes give distinct pairs")
    }

    /// Same vertex set, keeping only the edges accepted by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(Edge, Color) -> bool) -> Self {
        let edges: Vec<_> =
            self.edges().filter(|&(e, c)| keep(e, c)).map(|(e, c)| (e.a, e.b, c)).collect();
        Self::new(self.n, edges).expect("subgraph of a valid graph")
    }

    /// Induced subgraph on `a_set × b_set`, reindexed to `0..k` in the given order.
    pub fn induced(&self, a_set: &[usize], b_set: &[usize]) -> Result<Self, GraphError> {
        if a_set.len() != b_set.len() {
            return Err(GraphError::Unbalanced { a: a_set.len(), b: b_set.len() });
        }
        let mut b_pos = vec![usize::MAX; self.n];
        for (i, &b) in b_set.iter().enumerate() {
            if b >= self.n {
                return Err(GraphError::IndexOutOfRange { index: b, n: self.n });
            }
            b_pos[b] = i;
        }
        let mut edges = Vec::new();
        for (i, &a) in a_set.iter().enumerate() {
            if a >= self.n {
                return Err(GraphError::IndexOutOfRange { index: a, n: self.n });
            }
            for &b in &self.adj_a[a] {
                if b_pos[b] != usize::MAX {
                    edges.push((i, b_pos[b], self.table[a * self.n + b].unwrap()));
                }
            }
        }
        Self::new(a_set.len(), edges)
    }

    /// Number of neighbours of `v` inside `set` (indices on the opposite side).
    pub fn degree_into(&self, v: Vertex, set: &[bool]) -> usize {
        self.neighbors(v).iter().filter(|&&u| set[u]).count()
    }
}

/// Membership mask of `0..n` for a list of indices.
pub fn mask(n: usize, members: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in members {
        m[i] = true;
    }
    m
}
