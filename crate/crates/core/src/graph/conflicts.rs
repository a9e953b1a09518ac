use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ColoredBipartiteGraph, Edge};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConflictError {
    #[error("edge {0} conflicts with itself")]
    SelfConflict(Edge),
    #[error("conflict {{{0}, {1}}} listed more than once")]
    DuplicatePair(Edge, Edge),
    #[error("conflict references edge {0} that is not in the graph")]
    UnknownEdge(Edge),
}

/// JSON wire form: `{ "pairs": [[[a, b], [a, b]], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictFile {
    pub pairs: Vec<(Edge, Edge)>,
}

/// A set of unordered edge pairs that may not appear together.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConflictSystem {
    pairs: BTreeSet<(Edge, Edge)>,
    incident: HashMap<Edge, Vec<Edge>>,
    bound: usize,
}

fn normalize(e: Edge, f: Edge) -> (Edge, Edge) {
    if e <= f {
        (e, f)
    } else {
        (f, e)
    }
}

impl ConflictSystem {
    pub fn new<I>(pairs: I) -> Result<Self, ConflictError>
    where
        I: IntoIterator<Item = (Edge, Edge)>,
    {
        let mut set = BTreeSet::new();
        for (e, f) in pairs {
            if e == f {
                return Err(ConflictError::SelfConflict(e));
            }
            let p = normalize(e, f);
            if !set.insert(p) {
                return Err(ConflictError::DuplicatePair(p.0, p.1));
            }
        }
        Ok(Self::from_set(set))
    }

    fn from_set(pairs: BTreeSet<(Edge, Edge)>) -> Self {
        let mut incident: HashMap<Edge, Vec<Edge>> = HashMap::new();
        for &(e, f) in &pairs {
            incident.entry(e).or_default().push(f);
            incident.entry(f).or_default().push(e);
        }
        let bound = incident.values().map(Vec::len).max().unwrap_or(0);
        ConflictSystem { pairs, incident, bound }
    }

    pub fn from_file(file: &ConflictFile) -> Result<Self, ConflictError> {
        Self::new(file.pairs.iter().copied())
    }

    pub fn to_file(&self) -> ConflictFile {
        ConflictFile { pairs: self.pairs.iter().copied().collect() }
    }

    /// Cached maximum number of pairs containing a single edge.
    pub fn bound(&self) -> usize {
        self.bound
    }

    /// Recounts the bound from the pair list.
    pub fn recompute_bound(&self) -> usize {
        let mut counts: HashMap<Edge, usize> = HashMap::new();
        for &(e, f) in &self.pairs {
            *counts.entry(e).or_insert(0) += 1;
            *counts.entry(f).or_insert(0) += 1;
        }
        counts.into_values().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Edge, Edge)> + '_ {
        self.pairs.iter().copied()
    }

    /// Edges that conflict with `e`.
    pub fn conflicts_of(&self, e: Edge) -> &[Edge] {
        self.incident.get(&e).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn conflict(&self, e: Edge, f: Edge) -> bool {
        self.pairs.contains(&normalize(e, f))
    }

    /// Every referenced edge exists in `g`.
    pub fn validate_against(&self, g: &ColoredBipartiteGraph) -> Result<(), ConflictError> {
        for &(e, f) in &self.pairs {
            for x in [e, f] {
                if !g.contains(x) {
                    return Err(ConflictError::UnknownEdge(x));
                }
            }
        }
        Ok(())
    }

    /// Pairs whose two edges both satisfy `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(Edge) -> bool) -> Self {
        let set = self.pairs.iter().copied().filter(|&(e, f)| keep(e) && keep(f)).collect();
        Self::from_set(set)
    }

    /// Renames edges through `map`; pairs with an unmapped edge are dropped.
    pub fn remap(&self, mut map: impl FnMut(Edge) -> Option<Edge>) -> Self {
        let set = self
            .pairs
            .iter()
            .filter_map(|&(e, f)| Some(normalize(map(e)?, map(f)?)))
            .filter(|(e, f)| e != f)
            .collect();
        Self::from_set(set)
    }
}
