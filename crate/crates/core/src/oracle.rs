//! Exhaustive ground truth for small instances.
//!
//! Everything here walks its own adjacency matrix and partner arrays so that it
//! stays an independent witness for the search and switching code.

use serde::Serialize;

use crate::graph::{ColoredBipartiteGraph, ConflictSystem, Edge};
use crate::matching::Matching;

pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

struct Dense {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Dense {
    fn new(g: &ColoredBipartiteGraph) -> Self {
        let n = g.n();
        let mut adj = vec![vec![false; n]; n];
        for (e, _) in g.edges() {
            adj[e.a][e.b] = true;
        }
        Dense { n, adj }
    }
}

/// Outcome of perfect-matching enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationResult {
    /// Matchings found, in discovery order.
    pub matchings: Vec<Matching>,
    /// Exact number of perfect matchings when not truncated.
    pub total_count: u64,
    pub truncated: bool,
    /// Node budget used for the search.
    pub cap: u64,
}

struct Enumerator<'a> {
    d: &'a Dense,
    a_to_b: Vec<usize>,
    b_used: Vec<bool>,
    nodes: u64,
    cap: u64,
    truncated: bool,
    store: bool,
    found: Vec<Vec<usize>>,
    count: u64,
}

const NONE: usize = usize::MAX;

impl Enumerator<'_> {
    /// Uncovered vertex with fewest available partners: `(is_a_side, index, options)`.
    fn pick(&self) -> Option<(bool, usize, Vec<usize>)> {
        let n = self.d.n;
        let mut best: Option<(bool, usize, Vec<usize>)> = None;
        for a in (0..n).filter(|&a| self.a_to_b[a] == NONE) {
            let opts: Vec<usize> = (0..n).filter(|&b| !self.b_used[b] && self.d.adj[a][b]).collect();
            if best.as_ref().is_none_or(|(_, _, o)| opts.len() < o.len()) {
                best = Some((true, a, opts));
            }
        }
        let a_free: Vec<usize> = (0..n).filter(|&a| self.a_to_b[a] == NONE).collect();
        for b in (0..n).filter(|&b| !self.b_used[b]) {
            let opts: Vec<usize> = a_free.iter().copied().filter(|&a| self.d.adj[a][b]).collect();
            if best.as_ref().is_none_or(|(_, _, o)| opts.len() < o.len()) {
                best = Some((false, b, opts));
            }
        }
        best
    }

    fn run(&mut self, depth: usize) {
        if self.truncated {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            self.truncated = true;
            return;
        }
        if depth == self.d.n {
            self.count += 1;
            if self.store {
                self.found.push(self.a_to_b.clone());
            }
            return;
        }
        let Some((is_a, v, opts)) = self.pick() else { return };
        for u in opts {
            let (a, b) = if is_a { (v, u) } else { (u, v) };
            self.a_to_b[a] = b;
            self.b_used[b] = true;
            self.run(depth + 1);
            self.a_to_b[a] = NONE;
            self.b_used[b] = false;
        }
    }
}

fn enumerate(g: &ColoredBipartiteGraph, cap: u64, store: bool) -> (Vec<Vec<usize>>, u64, bool) {
    let d = Dense::new(g);
    let mut e = Enumerator {
        d: &d,
        a_to_b: vec![NONE; g.n()],
        b_used: vec![false; g.n()],
        nodes: 0,
        cap,
        truncated: false,
        store,
        found: Vec::new(),
        count: 0,
    };
    e.run(0);
    (e.found, e.count, e.truncated)
}

/// All perfect matchings, branching at the uncovered vertex with fewest options.
pub fn enumerate_perfect_matchings(g: &ColoredBipartiteGraph, cap: u64) -> EnumerationResult {
    let (found, count, truncated) = enumerate(g, cap, true);
    let matchings = found
        .into_iter()
        .map(|perm| Matching::from_permutation(&perm).expect("enumerated permutation"))
        .collect();
    EnumerationResult { matchings, total_count: count, truncated, cap }
}

/// Number of perfect matchings, or `None` if the node cap was hit.
pub fn count_perfect_matchings(g: &ColoredBipartiteGraph, cap: u64) -> Option<u64> {
    let (_, count, truncated) = enumerate(g, cap, false);
    (!truncated).then_some(count)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum OracleVerdict {
    Yes { witness: Matching },
    No { nodes: u64 },
    Unknown { nodes: u64 },
}

impl OracleVerdict {
    pub fn decided(&self) -> Option<bool> {
        match self {
            OracleVerdict::Yes { .. } => Some(true),
            OracleVerdict::No { .. } => Some(false),
            OracleVerdict::Unknown { .. } => None,
        }
    }
}

struct ConflictSearch<'a> {
    d: &'a Dense,
    /// `partners[a*n + b]`: edges conflicting with `ab`, as flat indices.
    partners: Vec<Vec<usize>>,
    blocked: Vec<u32>,
    a_to_b: Vec<usize>,
    b_used: Vec<bool>,
    nodes: u64,
    cap: u64,
    truncated: bool,
}

impl ConflictSearch<'_> {
    fn admissible(&self, a: usize, b: usize) -> bool {
        !self.b_used[b] && self.d.adj[a][b] && self.blocked[a * self.d.n + b] == 0
    }

    fn run(&mut self, depth: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.cap {
            self.truncated = true;
            return false;
        }
        let n = self.d.n;
        if depth == n {
            return true;
        }
        // forward check: every uncovered vertex keeps an admissible partner
        let mut best: Option<(bool, usize, Vec<usize>)> = None;
        for a in (0..n).filter(|&a| self.a_to_b[a] == NONE) {
            let opts: Vec<usize> = (0..n).filter(|&b| self.admissible(a, b)).collect();
            if best.as_ref().is_none_or(|(_, _, o)| opts.len() < o.len()) {
                best = Some((true, a, opts));
            }
        }
        for b in (0..n).filter(|&b| !self.b_used[b]) {
            let opts: Vec<usize> =
                (0..n).filter(|&a| self.a_to_b[a] == NONE && self.admissible(a, b)).collect();
            if best.as_ref().is_none_or(|(_, _, o)| opts.len() < o.len()) {
                best = Some((false, b, opts));
            }
        }
        let Some((is_a, v, opts)) = best else { return false };
        for u in opts {
            let (a, b) = if is_a { (v, u) } else { (u, v) };
            let id = a * n + b;
            self.a_to_b[a] = b;
            self.b_used[b] = true;
            for &p in &self.partners[id] {
                self.blocked[p] += 1;
            }
            if self.run(depth + 1) {
                return true;
            }
            for &p in &self.partners[id] {
                self.blocked[p] -= 1;
            }
            self.a_to_b[a] = NONE;
            self.b_used[b] = false;
            if self.truncated {
                return false;
            }
        }
        false
    }
}

/// Decides whether `g` has a perfect matching avoiding every pair of `f`.
pub fn exists_conflict_free_pm(g: &ColoredBipartiteGraph, f: &ConflictSystem, cap: u64) -> OracleVerdict {
    let d = Dense::new(g);
    let n = g.n();
    let mut partners = vec![Vec::new(); n * n];
    for (e1, e2) in f.pairs() {
        if e1.a < n && e1.b < n && e2.a < n && e2.b < n {
            partners[e1.a * n + e1.b].push(e2.a * n + e2.b);
            partners[e2.a * n + e2.b].push(e1.a * n + e1.b);
        }
    }
    let mut s = ConflictSearch {
        d: &d,
        partners,
        blocked: vec![0; n * n],
        a_to_b: vec![NONE; n],
        b_used: vec![false; n],
        nodes: 0,
        cap,
        truncated: false,
    };
    if s.run(0) {
        let witness = Matching::from_permutation(&s.a_to_b).expect("complete assignment");
        debug_assert!(witness_is_valid(&d, f, &s.a_to_b));
        OracleVerdict::Yes { witness }
    } else if s.truncated {
        OracleVerdict::Unknown { nodes: s.nodes }
    } else {
        OracleVerdict::No { nodes: s.nodes }
    }
}

fn witness_is_valid(d: &Dense, f: &ConflictSystem, a_to_b: &[usize]) -> bool {
    let on = |e: Edge| e.a < d.n && a_to_b[e.a] == e.b;
    (0..d.n).all(|a| d.adj[a][a_to_b[a]]) && f.pairs().all(|(x, y)| !(on(x) && on(y)))
}

fn partner_array(m: &Matching) -> Vec<usize> {
    let mut p = vec![NONE; m.n()];
    for e in m.edges() {
        p[e.a] = e.b;
    }
    p
}

/// 6-cycles `a1 b1 a2 b a b2` through `x = a1b1 ∈ M` whose other matching edges
/// are `a2b` and `ab2`, counted by brute force over `(a2, b, a, b2)`.
pub fn count_6cycles_through(g: &ColoredBipartiteGraph, m: &Matching, x: Edge) -> usize {
    let d = Dense::new(g);
    let p = partner_array(m);
    let n = d.n;
    let (a1, b1) = (x.a, x.b);
    let mut count = 0;
    for a2 in 0..n {
        for b in 0..n {
            for a in 0..n {
                for b2 in 0..n {
                    let a_distinct = a1 != a2 && a1 != a && a2 != a;
                    let b_distinct = b1 != b && b1 != b2 && b != b2;
                    if !(a_distinct && b_distinct) {
                        continue;
                    }
                    let matched = p[a2] == b && p[a] == b2;
                    let cycle = d.adj[a1][b1]
                        && d.adj[a2][b1]
                        && d.adj[a2][b]
                        && d.adj[a][b]
                        && d.adj[a][b2]
                        && d.adj[a1][b2];
                    if matched && cycle {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// 6-cycles through a non-matching edge `y = ab` that alternate with three edges
/// of `M`. The third matching edge determines the cycle, so this is at most `n`.
pub fn count_alternating_6cycles(g: &ColoredBipartiteGraph, m: &Matching, y: Edge) -> usize {
    let d = Dense::new(g);
    let p = partner_array(m);
    let (a, b) = (y.a, y.b);
    let Some(a2) = (0..d.n).find(|&v| p[v] == b) else { return 0 };
    let b2 = p[a];
    if a2 == a || !d.adj[a][b] {
        return 0;
    }
    (0..d.n)
        .filter(|&a3| a3 != a && a3 != a2)
        .filter(|&a3| d.adj[a2][p[a3]] && d.adj[a3][b2])
        .count()
}
