use crate::error::{Error, Result};
use crate::graph::PackedGraph;

pub type Edge = (u8, u8);

/// A set of pairwise disjoint edges, stored `(min, max)` and sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factor {
    edges: Vec<Edge>,
}

impl Factor {
    pub fn new(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out: Vec<Edge> = Vec::new();
        for (a, b) in edges {
            if a == b || a > u8::MAX as usize || b > u8::MAX as usize {
                return Err(Error::input(format!("bad edge ({a},{b})")));
            }
            out.push((a.min(b) as u8, a.max(b) as u8));
        }
        out.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in &out {
            if !seen.insert(a) || !seen.insert(b) {
                return Err(Error::input(format!("edges of {out:?} are not disjoint")));
            }
        }
        Ok(Factor { edges: out })
    }

    pub(crate) fn from_sorted_unchecked(edges: Vec<Edge>) -> Self {
        Factor { edges }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// True when the edges lie in `g` and touch every vertex of `g`.
    pub fn is_perfect_matching_of(&self, g: &PackedGraph) -> bool {
        self.edges.len() * 2 == g.n()
            && self
                .edges
                .iter()
                .all(|&(a, b)| (b as usize) < g.n() && g.has_edge(a as usize, b as usize))
    }
}

/// An ordered sequence of edge-disjoint factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Factorization {
    factors: Vec<Factor>,
}

impl Factorization {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for f in &factors {
            for e in f.edges() {
                if !seen.insert(*e) {
                    return Err(Error::input(format!("edge {e:?} lies in two factors")));
                }
            }
        }
        Ok(Factorization { factors })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Same factors in lexicographic order.
    pub fn sorted(&self) -> Factorization {
        let mut factors = self.factors.clone();
        factors.sort();
        Factorization { factors }
    }

    /// True when every factor is a perfect matching of `g` and together
    /// they use every edge of `g` once.
    pub fn is_one_factorization_of(&self, g: &PackedGraph) -> bool {
        let total: usize = self.factors.iter().map(Factor::len).sum();
        total == g.edge_count() && self.factors.iter().all(|f| f.is_perfect_matching_of(g))
    }
}
