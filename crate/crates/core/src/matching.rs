//! Matchings, conflict-freeness, switchable edges and cycle switches.
//!
//! For a perfect matching `M` and `x = a1b1 ∈ M`, an edge `y = ab ∉ M` is
//! *switchable* when `a1 b1 a2 b a b2` is a 6-cycle of the host graph, where
//! `a2 = M⁻¹(b)` and `b2 = M(a)`. Exchanging the three matching edges of the cycle
//! for the three others gives a new perfect matching containing `y` and not `x`;
//! on the A→B map this is a 3-cycle rotation of partners.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColoredBipartiteGraph, ConflictSystem, Edge};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("vertex b{0} is matched twice")]
    NotInjective(usize),
    #[error("vertex a{0} is matched twice")]
    RepeatedA(usize),
    #[error("pair {0} is not an edge of the host graph")]
    NotAnEdge(Edge),
    #[error("index out of range in pair {0}")]
    OutOfRange(Edge),
    #[error("edge {0} is not in the matching")]
    NotInMatching(Edge),
    #[error("matching is not perfect")]
    NotPerfect,
    #[error("invalid switch: {0}")]
    InvalidMove(String),
}

/// A partial injection A → B.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matching {
    a_to_b: Vec<Option<usize>>,
    b_to_a: Vec<Option<usize>>,
    size: usize,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching { a_to_b: vec![None; n], b_to_a: vec![None; n], size: 0 }
    }

    /// Builds a matching on side size `n`, checking injectivity but not host edges.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self, MatchingError>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut m = Matching::empty(n);
        for e in pairs {
            if e.a >= n || e.b >= n {
                return Err(MatchingError::OutOfRange(e));
            }
            if m.a_to_b[e.a].is_some() {
                return Err(MatchingError::RepeatedA(e.a));
            }
            if m.b_to_a[e.b].is_some() {
                return Err(MatchingError::NotInjective(e.b));
            }
            m.a_to_b[e.a] = Some(e.b);
            m.b_to_a[e.b] = Some(e.a);
            m.size += 1;
        }
        Ok(m)
    }

    /// Builds from a complete permutation `a -> perm[a]`.
    pub fn from_permutation(perm: &[usize]) -> Result<Self, MatchingError> {
        Self::from_pairs(perm.len(), perm.iter().enumerate().map(|(a, &b)| Edge::new(a, b)))
    }

    /// Checks every pair against the host graph.
    pub fn validate_in(&self, g: &ColoredBipartiteGraph) -> Result<(), MatchingError> {
        if self.a_to_b.len() != g.n() {
            return Err(MatchingError::OutOfRange(Edge::new(self.a_to_b.len(), g.n())));
        }
        for e in self.edges() {
            if !g.contains(e) {
                return Err(MatchingError::NotAnEdge(e));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a_to_b.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_perfect(&self) -> bool {
        self.size == self.a_to_b.len()
    }

    pub fn partner_of_a(&self, a: usize) -> Option<usize> {
        self.a_to_b.get(a).copied().flatten()
    }

    pub fn partner_of_b(&self, b: usize) -> Option<usize> {
        self.b_to_a.get(b).copied().flatten()
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.partner_of_a(e.a) == Some(e.b)
    }

    /// Matched pairs in increasing `a` order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.a_to_b.iter().enumerate().filter_map(|(a, b)| b.map(|b| Edge::new(a, b)))
    }

    /// A→B map of a perfect matching as a permutation vector.
    pub fn as_permutation(&self) -> Option<Vec<usize>> {
        self.a_to_b.iter().copied().collect()
    }

    /// Sign of the permutation `a -> M(a)` for a perfect matching: `+1` even, `-1` odd.
    pub fn permutation_sign(&self) -> Option<i8> {
        let perm = self.as_permutation()?;
        let mut seen = vec![false; perm.len()];
        let mut transpositions = 0;
        for start in 0..perm.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                v = perm[v];
                len += 1;
            }
            transpositions += len - 1;
        }
        Some(if transpositions % 2 == 0 { 1 } else { -1 })
    }

    pub fn insert(&mut self, e: Edge) -> Result<(), MatchingError> {
        if self.a_to_b[e.a].is_some() {
            return Err(MatchingError::RepeatedA(e.a));
        }
        if self.b_to_a[e.b].is_some() {
            return Err(MatchingError::NotInjective(e.b));
        }
        self.a_to_b[e.a] = Some(e.b);
        self.b_to_a[e.b] = Some(e.a);
        self.size += 1;
        Ok(())
    }

    /// Reassigns the partners of the listed A-vertices: `a_i` takes `M(a_{i+1})`
    /// (indices mod k). All listed vertices must be matched and distinct.
    pub(crate) fn rotate_partners(&mut self, cycle: &[usize]) {
        let partners: Vec<usize> = cycle.iter().map(|&a| self.a_to_b[a].unwrap()).collect();
        let k = cycle.len();
        for (i, &a) in cycle.iter().enumerate() {
            let b = partners[(i + 1) % k];
            self.a_to_b[a] = Some(b);
            self.b_to_a[b] = Some(a);
        }
    }

    /// Wire form: list of `[a, b]` pairs sorted by `a`.
    pub fn to_pairs(&self) -> Vec<Edge> {
        self.edges().collect()
    }
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

/// Wire form of a matching file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatchingFile(pub Vec<Edge>);

impl MatchingFile {
    pub fn into_matching(self, n: usize) -> Result<Matching, MatchingError> {
        Matching::from_pairs(n, self.0)
    }
}

/// No conflict pair of `f` lies inside `m`.
pub fn is_conflict_free(m: &Matching, f: &ConflictSystem) -> bool {
    m.edges().all(|e| f.conflicts_of(e).iter().all(|&g| !m.contains(g)))
}

/// Conflict pairs of `f` contained in `m`, each listed once.
pub fn violated_pairs(m: &Matching, f: &ConflictSystem) -> Vec<(Edge, Edge)> {
    let mut out = Vec::new();
    for e in m.edges() {
        for &g in f.conflicts_of(e) {
            if e < g && m.contains(g) {
                out.push((e, g));
            }
        }
    }
    out
}

/// Every colour appears at most once on `m`.
pub fn is_rainbow(m: &Matching, g: &ColoredBipartiteGraph) -> bool {
    let mut seen = std::collections::HashSet::new();
    m.edges().all(|e| g.color_of(e).is_some_and(|c| seen.insert(c)))
}

/// Maximum matching by augmenting paths (Hopcroft–Karp), scanning vertices and
/// neighbours in the supplied orders.
pub(crate) fn maximum_matching_ordered(
    g: &ColoredBipartiteGraph,
    a_order: &[usize],
    adjacency: &[Vec<usize>],
) -> Matching {
    let n = g.n();
    let mut a_to_b: Vec<Option<usize>> = vec![None; n];
    let mut b_to_a: Vec<Option<usize>> = vec![None; n];
    const INF: usize = usize::MAX;
    let mut dist = vec![INF; n];
    loop {
        // BFS layers from free A-vertices
        let mut queue = VecDeque::new();
        for &a in a_order {
            if a_to_b[a].is_none() {
                dist[a] = 0;
                queue.push_back(a);
            } else {
                dist[a] = INF;
            }
        }
        let mut found = false;
        while let Some(a) = queue.pop_front() {
            for &b in &adjacency[a] {
                match b_to_a[b] {
                    None => found = true,
                    Some(a2) if dist[a2] == INF => {
                        dist[a2] = dist[a] + 1;
                        queue.push_back(a2);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        for &a in a_order {
            if a_to_b[a].is_none() {
                augment(a, adjacency, &mut a_to_b, &mut b_to_a, &mut dist);
            }
        }
    }
    let size = a_to_b.iter().filter(|b| b.is_some()).count();
    Matching { a_to_b, b_to_a, size }
}

fn augment(
    a: usize,
    adjacency: &[Vec<usize>],
    a_to_b: &mut [Option<usize>],
    b_to_a: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &b in &adjacency[a] {
        let next = b_to_a[b];
        let ok = match next {
            None => true,
            Some(a2) => {
                dist[a2] == dist[a].wrapping_add(1) && augment(a2, adjacency, a_to_b, b_to_a, dist)
            }
        };
        if ok {
            a_to_b[a] = Some(b);
            b_to_a[b] = Some(a);
            return true;
        }
    }
    dist[a] = usize::MAX;
    false
}

/// Maximum matching in the natural vertex order.
pub fn maximum_matching(g: &ColoredBipartiteGraph) -> Matching {
    let order: Vec<usize> = (0..g.n()).collect();
    let adjacency: Vec<Vec<usize>> = (0..g.n()).map(|a| g.neighbors_a(a).to_vec()).collect();
    maximum_matching_ordered(g, &order, &adjacency)
}

/// A perfect matching if one exists; deterministic.
pub fn find_perfect_matching(g: &ColoredBipartiteGraph) -> Option<Matching> {
    let m = maximum_matching(g);
    m.is_perfect().then_some(m)
}

/// A 6-cycle switch, canonicalised by `(x, y)`.
///
/// The partners are recomputed from the current matching whenever a move is built,
/// so a stored move can never refer to a stale matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwitchMove {
    /// Matching edge `a1b1` leaving the matching.
    pub x: Edge,
    /// Non-matching edge `ab` entering the matching.
    pub y: Edge,
    /// `a2` with `a2 b ∈ M`.
    pub partner_of_b: usize,
    /// `b2` with `a b2 ∈ M`.
    pub partner_of_a: usize,
}

impl SwitchMove {
    /// Validates `(x, y)` against `m` and `g` and fills in the partners.
    pub fn new(
        g: &ColoredBipartiteGraph,
        m: &Matching,
        x: Edge,
        y: Edge,
    ) -> Result<SwitchMove, MatchingError> {
        if !m.contains(x) {
            return Err(MatchingError::NotInMatching(x));
        }
        if m.contains(y) {
            return Err(MatchingError::InvalidMove(format!("{y} is already matched")));
        }
        if !g.contains(y) {
            return Err(MatchingError::NotAnEdge(y));
        }
        let a2 = m
            .partner_of_b(y.b)
            .ok_or_else(|| MatchingError::InvalidMove(format!("b{} is unmatched", y.b)))?;
        let b2 = m
            .partner_of_a(y.a)
            .ok_or_else(|| MatchingError::InvalidMove(format!("a{} is unmatched", y.a)))?;
        let mv = SwitchMove { x, y, partner_of_b: a2, partner_of_a: b2 };
        mv.check(g)?;
        Ok(mv)
    }

    /// The six cycle vertices `a1, b1, a2, b, a, b2` pairwise distinct and all six
    /// cycle edges present.
    fn check(&self, g: &ColoredBipartiteGraph) -> Result<(), MatchingError> {
        let (a1, b1) = (self.x.a, self.x.b);
        let (a, b) = (self.y.a, self.y.b);
        let (a2, b2) = (self.partner_of_b, self.partner_of_a);
        if a1 == a2 || a1 == a || a2 == a || b1 == b || b1 == b2 || b == b2 {
            return Err(MatchingError::InvalidMove("cycle vertices are not distinct".into()));
        }
        for (u, v) in [(a1, b1), (a2, b1), (a2, b), (a, b), (a, b2), (a1, b2)] {
            if !g.has_edge(u, v) {
                return Err(MatchingError::InvalidMove(format!("missing cycle edge a{u}b{v}")));
            }
        }
        Ok(())
    }

    /// Edges leaving the matching: `x`, `a2 b`, `a b2`.
    pub fn outgoing(&self) -> [Edge; 3] {
        [
            self.x,
            Edge::new(self.partner_of_b, self.y.b),
            Edge::new(self.y.a, self.partner_of_a),
        ]
    }

    /// Edges entering the matching: `a2 b1`, `a b`, `a1 b2`.
    pub fn incoming(&self) -> [Edge; 3] {
        [
            Edge::new(self.partner_of_b, self.x.b),
            self.y,
            Edge::new(self.x.a, self.partner_of_a),
        ]
    }

    /// The move undoing this one on the switched matching.
    pub fn reversed(&self) -> SwitchMove {
        SwitchMove {
            x: self.y,
            y: self.x,
            partner_of_b: self.partner_of_b,
            partner_of_a: self.partner_of_a,
        }
    }
}

/// Edges `y` that are `(x, M)`-switchable, in `(a, b)` order.
pub fn switchable_edges(
    g: &ColoredBipartiteGraph,
    m: &Matching,
    x: Edge,
) -> Result<Vec<Edge>, MatchingError> {
    if !m.is_perfect() {
        return Err(MatchingError::NotPerfect);
    }
    if !m.contains(x) {
        return Err(MatchingError::NotInMatching(x));
    }
    Ok(switchable_unchecked(g, m, x))
}

/// Walks `b1 → a2 → b = M(a2) → a → b2 = M(a)` and keeps closing edges `a1 b2`.
fn switchable_unchecked(g: &ColoredBipartiteGraph, m: &Matching, x: Edge) -> Vec<Edge> {
    let (a1, b1) = (x.a, x.b);
    let mut out = Vec::new();
    for &a2 in g.neighbors_b(b1) {
        if a2 == a1 {
            continue;
        }
        let b = m.a_to_b[a2].unwrap();
        for &a in g.neighbors_b(b) {
            if a == a2 || a == a1 {
                continue;
            }
            let b2 = m.a_to_b[a].unwrap();
            if g.has_edge(a1, b2) {
                out.push(Edge::new(a, b));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Applies a 6-cycle switch: `M − {x, a2b, ab2} ∪ {a2b1, ab, a1b2}`.
pub fn apply_switch(
    g: &ColoredBipartiteGraph,
    m: &Matching,
    mv: &SwitchMove,
) -> Result<Matching, MatchingError> {
    let fresh = SwitchMove::new(g, m, mv.x, mv.y)?;
    if fresh != *mv {
        return Err(MatchingError::InvalidMove("partners do not match the matching".into()));
    }
    let mut out = m.clone();
    // a1 takes M(a) = b2, a takes M(a2) = b, a2 takes M(a1) = b1
    out.rotate_partners(&[mv.x.a, mv.y.a, mv.partner_of_b]);
    Ok(out)
}

/// Applies the 4-cycle swap exchanging the partners of `a` and `a_other`, if both
/// cross edges exist.
pub fn apply_swap(
    g: &ColoredBipartiteGraph,
    m: &Matching,
    a: usize,
    a_other: usize,
) -> Result<Matching, MatchingError> {
    if a == a_other {
        return Err(MatchingError::InvalidMove("swap needs two distinct vertices".into()));
    }
    let (b, b_other) = match (m.partner_of_a(a), m.partner_of_a(a_other)) {
        (Some(b), Some(c)) => (b, c),
        _ => return Err(MatchingError::InvalidMove("swap endpoints must be matched".into())),
    };
    if !g.has_edge(a, b_other) || !g.has_edge(a_other, b) {
        return Err(MatchingError::InvalidMove("missing 4-cycle edge".into()));
    }
    let mut out = m.clone();
    out.rotate_partners(&[a, a_other]);
    Ok(out)
}

/// Number of `(x, M)`-switchable edges for every `x ∈ M`.
pub fn count_switchable_all(g: &ColoredBipartiteGraph, m: &Matching) -> BTreeMap<Edge, usize> {
    assert!(m.is_perfect(), "count_switchable_all needs a perfect matching");
    m.edges().map(|x| (x, switchable_unchecked(g, m, x).len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate::{complete_rainbow, perfect_matching_only};

    fn identity(n: usize) -> Matching {
        Matching::from_permutation(&(0..n).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn finds_perfect_matchings() {
        let m = find_perfect_matching(&complete_rainbow(3)).unwrap();
        assert!(m.is_perfect());

        // a0 and a1 both see only b0
        let g = ColoredBipartiteGraph::rainbow_colored(2, [(0, 0), (1, 0)]).unwrap();
        assert!(find_perfect_matching(&g).is_none());

        // path a0b0, a0b1, a1b1 has the unique perfect matching {a0b0, a1b1}
        let g = ColoredBipartiteGraph::rainbow_colored(2, [(0, 0), (0, 1), (1, 1)]).unwrap();
        let m = find_perfect_matching(&g).unwrap();
        assert_eq!(m.to_pairs(), vec![Edge::new(0, 0), Edge::new(1, 1)]);
    }

    #[test]
    fn conflict_free_predicate() {
        let g = ColoredBipartiteGraph::complete(3, |a, b| if a == b { 0 } else { (a * 3 + b) as u64 });
        let f = g.conflicts_from_coloring();
        assert!(is_conflict_free(&Matching::empty(3), &f));
        assert!(!is_conflict_free(&identity(3), &f));
        assert_eq!(violated_pairs(&identity(3), &f).len(), 3);
        let rainbow = Matching::from_permutation(&[1, 2, 0]).unwrap();
        assert!(is_conflict_free(&rainbow, &f));
        assert!(is_rainbow(&rainbow, &g));
    }

    #[test]
    fn switchable_on_k33() {
        let g = complete_rainbow(3);
        let m = identity(3);
        let ys = switchable_edges(&g, &m, Edge::new(0, 0)).unwrap();
        assert_eq!(ys, vec![Edge::new(1, 2), Edge::new(2, 1)]);
        assert_eq!(
            switchable_edges(&g, &m, Edge::new(0, 1)).unwrap_err(),
            MatchingError::NotInMatching(Edge::new(0, 1))
        );
    }

    #[test]
    fn switchable_closed_form_on_complete() {
        for n in 3..=5 {
            let g = complete_rainbow(n);
            let counts = count_switchable_all(&g, &identity(n));
            assert!(counts.values().all(|&c| c == (n - 1) * (n - 2)));
        }
        assert!(count_switchable_all(&perfect_matching_only(4), &identity(4))
            .values()
            .all(|&c| c == 0));
        assert!(switchable_edges(&perfect_matching_only(3), &identity(3), Edge::new(0, 0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn switch_on_k33() {
        let g = complete_rainbow(3);
        let m = identity(3);
        let mv = SwitchMove::new(&g, &m, Edge::new(0, 0), Edge::new(1, 2)).unwrap();
        let m2 = apply_switch(&g, &m, &mv).unwrap();
        assert_eq!(m2.to_pairs(), vec![Edge::new(0, 1), Edge::new(1, 2), Edge::new(2, 0)]);
        assert!(m2.is_perfect());

        // reversed cycle brings x back
        let back = SwitchMove::new(&g, &m2, mv.y, mv.x).unwrap();
        assert_eq!(back, mv.reversed());
        let m3 = apply_switch(&g, &m2, &back).unwrap();
        assert!(m3.contains(Edge::new(0, 0)));
        assert_eq!(m3, m);
    }

    #[test]
    fn invalid_moves_rejected() {
        let g = complete_rainbow(3);
        let m = identity(3);
        // y incident to x: vertices not distinct
        assert!(matches!(
            SwitchMove::new(&g, &m, Edge::new(0, 0), Edge::new(0, 1)),
            Err(MatchingError::InvalidMove(_))
        ));
        let bogus = SwitchMove { x: Edge::new(0, 0), y: Edge::new(1, 2), partner_of_b: 0, partner_of_a: 2 };
        assert!(matches!(apply_switch(&g, &m, &bogus), Err(MatchingError::InvalidMove(_))));
        // missing cycle edge
        let sparse = g.filter_edges(|e, _| e != Edge::new(0, 1));
        assert!(matches!(
            SwitchMove::new(&sparse, &m, Edge::new(0, 0), Edge::new(1, 2)),
            Err(MatchingError::InvalidMove(_))
        ));
    }

    #[test]
    fn swaps_change_sign() {
        let g = complete_rainbow(3);
        let m = identity(3);
        let s = apply_swap(&g, &m, 0, 1).unwrap();
        assert_eq!(s.permutation_sign(), Some(-1));
        let mv = SwitchMove::new(&g, &m, Edge::new(0, 0), Edge::new(1, 2)).unwrap();
        assert_eq!(apply_switch(&g, &m, &mv).unwrap().permutation_sign(), Some(1));
    }

    #[test]
    fn wire_format_sorted_by_a() {
        let m = Matching::from_pairs(3, [Edge::new(2, 0), Edge::new(0, 1), Edge::new(1, 2)]).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), "[[0,1],[1,2],[2,0]]");
        let f: MatchingFile = serde_json::from_str("[[1,0],[0,1]]").unwrap();
        let back = f.into_matching(2).unwrap();
        assert_eq!(back.partner_of_a(1), Some(0));
        assert_eq!(
            Matching::from_pairs(2, [Edge::new(0, 0), Edge::new(1, 0)]).unwrap_err(),
            MatchingError::NotInjective(0)
        );
    }
}
