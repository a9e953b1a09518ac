//! Seeded instance generators and named fixtures.
//!
//! All randomness comes from a ChaCha stream seeded by the caller, so identical
//! seeds give identical graphs on every platform.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Color, ColoredBipartiteGraph, GraphError};
use crate::params::ParamSet;
use crate::structure::PartitionPair;
use crate::util::rng_from;

/// Colours `edges` by shuffled round-robin into classes of at most `bound` edges.
pub fn color_in_classes<R: Rng>(
    edges: &[(usize, usize)],
    bound: usize,
    rng: &mut R,
) -> Vec<(usize, usize, Color)> {
    let bound = bound.max(1);
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.shuffle(rng);
    let mut colored = vec![(0, 0, 0); edges.len()];
    for (pos, &i) in order.iter().enumerate() {
        let (a, b) = edges[i];
        colored[i] = (a, b, (pos / bound) as Color);
    }
    colored
}

/// Random Dirac instance with every colour class of size at most `color_bound`.
///
/// Each attempt draws an edge density in `[0.5, 0.95)` and keeps every pair with
/// that probability; attempts failing the Dirac condition are rejected.
pub fn random_dirac_instance(
    n: usize,
    color_bound: usize,
    params: &ParamSet,
    seed: u64,
) -> Result<ColoredBipartiteGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidArgument("n must be positive".into()));
    }
    if color_bound == 0 {
        return Err(GraphError::InvalidArgument("color_bound must be at least 1".into()));
    }
    let threshold = n.div_ceil(2);
    random_min_degree(n, threshold, color_bound, 0.5, params.retry_cap, seed)
}

/// Random balanced bipartite graph with minimum degree at least `min_degree`.
///
/// Edge densities are drawn from `[p_low, 0.95)`; `p_low` is raised to make the
/// target degree likely.
pub fn random_min_degree(
    n: usize,
    min_degree: usize,
    color_bound: usize,
    p_low: f64,
    retry_cap: u64,
    seed: u64,
) -> Result<ColoredBipartiteGraph, GraphError> {
    if min_degree > n {
        return Err(GraphError::InvalidArgument(format!(
            "minimum degree {min_degree} exceeds side size {n}"
        )));
    }
    let mut rng = rng_from(seed);
    let p_low = p_low.clamp(0.0, 0.94);
    for _ in 0..retry_cap {
        let p = rng.gen_range(p_low..0.95);
        let mut deg_a = vec![0usize; n];
        let mut deg_b = vec![0usize; n];
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.gen_bool(p) {
                    edges.push((a, b));
                    deg_a[a] += 1;
                    deg_b[b] += 1;
                }
            }
        }
        let ok = deg_a.iter().chain(&deg_b).all(|&d| d >= min_degree);
        if ok {
            let colored = color_in_classes(&edges, color_bound, &mut rng);
            return ColoredBipartiteGraph::new(n, colored);
        }
    }
    Err(GraphError::GenerationFailed { attempts: retry_cap })
}

/// `K_{n,n}` with all colours distinct.
pub fn complete_rainbow(n: usize) -> ColoredBipartiteGraph {
    ColoredBipartiteGraph::complete(n, |a, b| (a * n + b) as Color)
}

/// The perfect matching `{a_i b_i}` and nothing else.
pub fn perfect_matching_only(n: usize) -> ColoredBipartiteGraph {
    ColoredBipartiteGraph::rainbow_colored(n, (0..n).map(|i| (i, i))).unwrap()
}

/// Two disjoint complete `K_{h,h}` halves on side size `2h`, all colours distinct.
///
/// `A1 = B1 = 0..h`, `A2 = B2 = h..2h`.
pub fn disjoint_halves(h: usize) -> (ColoredBipartiteGraph, PartitionPair) {
    let n = 2 * h;
    let edges = (0..n).flat_map(|a| (0..n).filter(move |&b| (a < h) == (b < h)).map(move |b| (a, b)));
    let g = ColoredBipartiteGraph::rainbow_colored(n, edges).unwrap();
    let low: Vec<usize> = (0..h).collect();
    let high: Vec<usize> = (h..n).collect();
    let p = PartitionPair::new(n, low.clone(), high.clone(), low, high).unwrap();
    (g, p)
}

/// Near-split fixture on side size `n = 2m + 1`.
///
/// `A1 = 0..=m` (m+1 vertices), `A2` the rest; `B1 = 0..m` (m vertices), `B2` the
/// rest. `G[A1,B1]` and `G[A2,B2]` are complete, `G[A2,B1]` is a perfect matching,
/// and a second perfect matching across `G[A1,B2]` lifts the `A1` degrees to
/// `⌈n/2⌉`. All colours are distinct.
pub fn near_split(m: usize) -> (ColoredBipartiteGraph, PartitionPair) {
    let n = 2 * m + 1;
    let a1: Vec<usize> = (0..=m).collect();
    let a2: Vec<usize> = (m + 1..n).collect();
    let b1: Vec<usize> = (0..m).collect();
    let b2: Vec<usize> = (m..n).collect();
    let mut edges = Vec::new();
    for &a in &a1 {
        edges.extend(b1.iter().map(|&b| (a, b)));
    }
    for &a in &a2 {
        edges.extend(b2.iter().map(|&b| (a, b)));
    }
    edges.extend(a2.iter().zip(&b1).map(|(&a, &b)| (a, b)));
    edges.extend(a1.iter().zip(&b2).map(|(&a, &b)| (a, b)));
    edges.sort_unstable();
    let g = ColoredBipartiteGraph::rainbow_colored(n, edges).unwrap();
    let p = PartitionPair::new(n, a1, a2, b1, b2).unwrap();
    (g, p)
}

/// Superextremal test instance on side size `n = 2k + ell`.
///
/// `|A1| = |B2| = k + ell` and `|A2| = |B1| = k`. The two inner parts are complete;
/// the cross part `G[A1,B2]` is a `d`-regular circulant over random orderings with
/// `d = ⌈ell/2⌉ + 1`. Colours are random classes of size at most `color_bound`.
pub fn superextremal_instance(
    k: usize,
    ell: usize,
    color_bound: usize,
    seed: u64,
) -> Result<(ColoredBipartiteGraph, PartitionPair), GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidArgument("k must be positive".into()));
    }
    let n = 2 * k + ell;
    let big = k + ell;
    let d = ell.div_ceil(2) + 1;
    if d > big {
        return Err(GraphError::InvalidArgument("cross degree exceeds part size".into()));
    }
    let mut rng = rng_from(seed);
    let a1: Vec<usize> = (0..big).collect();
    let a2: Vec<usize> = (big..n).collect();
    let b1: Vec<usize> = (0..k).collect();
    let b2: Vec<usize> = (k..n).collect();
    let mut edges = Vec::new();
    for &a in &a1 {
        edges.extend(b1.iter().map(|&b| (a, b)));
    }
    for &a in &a2 {
        edges.extend(b2.iter().map(|&b| (a, b)));
    }
    let mut pa = a1.clone();
    let mut pb = b2.clone();
    pa.shuffle(&mut rng);
    pb.shuffle(&mut rng);
    for i in 0..big {
        for s in 0..d {
            edges.push((pa[i], pb[(i + s) % big]));
        }
    }
    edges.sort_unstable();
    let colored = color_in_classes(&edges, color_bound, &mut rng);
    let g = ColoredBipartiteGraph::new(n, colored)?;
    let p = PartitionPair::new(n, a1, a2, b1, b2).expect("layout covers both sides");
    Ok((g, p))
}
