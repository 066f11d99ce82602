//! Search kernels: perfect matchings, exact cover, and the reductions of
//! 1-factorization and triangle decomposition to exact cover.

use std::ops::ControlFlow;

use crate::design::{sorted_block, Block};
use crate::error::{Error, Result};
use crate::factor::{Factor, Factorization};
use crate::graph::PackedGraph;

/// All perfect matchings of `g`, branching on the lowest unmatched vertex
/// and trying its neighbors in ascending order.
pub fn perfect_matchings(g: &PackedGraph) -> Vec<Factor> {
    let mut out = Vec::new();
    for_each_perfect_matching(g, |pairs| {
        out.push(Factor::from_sorted_unchecked(
            pairs.iter().map(|&(a, b)| (a as u8, b as u8)).collect(),
        ));
    });
    out
}

/// Streams perfect matchings as lists of `(a, b)` pairs with `a < b`,
/// already in lexicographic order.
pub fn for_each_perfect_matching(g: &PackedGraph, mut visit: impl FnMut(&[(usize, usize)])) {
    let n = g.n();
    if n % 2 == 1 {
        return;
    }
    let mut pairs = Vec::with_capacity(n / 2);
    matching_rec(g, crate::graph::mask_upto(n), &mut pairs, &mut visit);
}

fn matching_rec(
    g: &PackedGraph,
    free: u64,
    pairs: &mut Vec<(usize, usize)>,
    visit: &mut impl FnMut(&[(usize, usize)]),
) {
    if free == 0 {
        visit(pairs);
        return;
    }
    let a = free.trailing_zeros() as usize;
    let mut partners = g.row(a) & free;
    while partners != 0 {
        let b = partners.trailing_zeros() as usize;
        partners &= partners - 1;
        pairs.push((a, b));
        matching_rec(g, free & !(1 << a) & !(1 << b), pairs, visit);
        pairs.pop();
    }
}

/// Index of every edge of `g` in lexicographic edge order.
#[derive(Clone, Debug)]
pub struct EdgeIndex {
    n: usize,
    edges: Vec<(usize, usize)>,
    index: Vec<u16>,
}

impl EdgeIndex {
    pub fn new(g: &PackedGraph) -> Self {
        let n = g.n();
        let edges = g.edges();
        let mut index = vec![u16::MAX; n * n];
        for (i, &(a, b)) in edges.iter().enumerate() {
            index[a * n + b] = i as u16;
            index[b * n + a] = i as u16;
        }
        EdgeIndex { n, edges, index }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Option<usize> {
        let i = self.index[a * self.n + b];
        (i != u16::MAX).then_some(i as usize)
    }

    /// Bitmask of a factor over edge indices; requires at most 64 edges.
    pub fn mask_of(&self, f: &Factor) -> Option<u64> {
        let mut m = 0u64;
        for &(a, b) in f.edges() {
            m |= 1u64 << self.get(a as usize, b as usize)?;
        }
        Some(m)
    }

    pub fn factor_of_mask(&self, mut mask: u64) -> Factor {
        let mut edges = Vec::with_capacity(mask.count_ones() as usize);
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let (a, b) = self.edges[i];
            edges.push((a as u8, b as u8));
        }
        Factor::from_sorted_unchecked(edges)
    }
}

/// An exact cover problem: choose options that partition `0..item_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCoverInstance {
    item_count: usize,
    options: Vec<Vec<usize>>,
}

impl ExactCoverInstance {
    pub fn new(item_count: usize, options: Vec<Vec<usize>>) -> Result<Self> {
        for (i, opt) in options.iter().enumerate() {
            if opt.is_empty() {
                return Err(Error::input(format!("option {i} is empty")));
            }
            let mut sorted = opt.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != opt.len() || sorted.last().is_some_and(|&x| x >= item_count) {
                return Err(Error::input(format!(
                    "option {i} repeats an item or names one outside 0..{item_count}"
                )));
            }
        }
        Ok(ExactCoverInstance { item_count, options })
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn options(&self) -> &[Vec<usize>] {
        &self.options
    }

    /// Plain-text dump: `items <n>` then one option per line.
    pub fn dump(&self) -> String {
        let mut s = format!("items {}\noptions {}\n", self.item_count, self.options.len());
        for opt in &self.options {
            let line: Vec<String> = opt.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverOutcome {
    pub solutions: u64,
    pub aborted: bool,
}

/// Dancing-links state; node 0 is the root, nodes `1..=items` are item
/// headers, the rest are option cells.
struct Dlx {
    left: Vec<usize>,
    right: Vec<usize>,
    up: Vec<usize>,
    down: Vec<usize>,
    col: Vec<usize>,
    row: Vec<usize>,
    size: Vec<usize>,
}

impl Dlx {
    fn new(inst: &ExactCoverInstance) -> Self {
        let items = inst.item_count;
        let cells: usize = inst.options.iter().map(Vec::len).sum();
        let total = items + 1 + cells;
        let mut d = Dlx {
            left: Vec::with_capacity(total),
            right: Vec::with_capacity(total),
            up: Vec::with_capacity(total),
            down: Vec::with_capacity(total),
            col: Vec::with_capacity(total),
            row: Vec::with_capacity(total),
            size: vec![0; items + 1],
        };
        for i in 0..=items {
            d.left.push(if i == 0 { items } else { i - 1 });
            d.right.push(if i == items { 0 } else { i + 1 });
            d.up.push(i);
            d.down.push(i);
            d.col.push(i);
            d.row.push(usize::MAX);
        }
        for (r, opt) in inst.options.iter().enumerate() {
            let first = d.col.len();
            for (k, &item) in opt.iter().enumerate() {
                let c = item + 1;
                let node = d.col.len();
                d.col.push(c);
                d.row.push(r);
                d.left.push(if k == 0 { first + opt.len() - 1 } else { node - 1 });
                d.right.push(if k + 1 == opt.len() { first } else { node + 1 });
                let last = d.up[c];
                d.up.push(last);
                d.down.push(c);
                d.down[last] = node;
                d.up[c] = node;
                d.size[c] += 1;
            }
        }
        d
    }

    fn cover(&mut self, c: usize) {
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = r;
        self.left[r] = l;
        let mut i = self.down[c];
        while i != c {
            let mut j = self.right[i];
            while j != i {
                let (u, dn) = (self.up[j], self.down[j]);
                self.down[u] = dn;
                self.up[dn] = u;
                self.size[self.col[j]] -= 1;
                j = self.right[j];
            }
            i = self.down[i];
        }
    }

    fn uncover(&mut self, c: usize) {
        let mut i = self.up[c];
        while i != c {
            let mut j = self.left[i];
            while j != i {
                self.size[self.col[j]] += 1;
                let (u, dn) = (self.up[j], self.down[j]);
                self.down[u] = j;
                self.up[dn] = j;
                j = self.left[j];
            }
            i = self.up[i];
        }
        let (l, r) = (self.left[c], self.right[c]);
        self.right[l] = c;
        self.left[r] = c;
    }

    fn search(
        &mut self,
        chosen: &mut Vec<usize>,
        count: &mut u64,
        visit: &mut dyn FnMut(&[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if self.right[0] == 0 {
            *count += 1;
            let mut sol = chosen.clone();
            sol.sort_unstable();
            return visit(&sol);
        }
        let mut best = self.right[0];
        let mut c = self.right[best];
        while c != 0 {
            if self.size[c] < self.size[best] {
                best = c;
            }
            c = self.right[c];
        }
        if self.size[best] == 0 {
            return ControlFlow::Continue(());
        }
        self.cover(best);
        let mut r = self.down[best];
        let mut flow = ControlFlow::Continue(());
        while r != best {
            chosen.push(self.row[r]);
            let mut j = self.right[r];
            while j != r {
                self.cover(self.col[j]);
                j = self.right[j];
            }
            flow = self.search(chosen, count, visit);
            let mut j = self.left[r];
            while j != r {
                self.uncover(self.col[j]);
                j = self.left[j];
            }
            chosen.pop();
            if flow.is_break() {
                break;
            }
            r = self.down[r];
        }
        self.uncover(best);
        flow
    }
}

/// Enumerates every exact cover, handing the visitor the chosen option
/// indices in ascending order. Items are selected by fewest remaining
/// options, ties to the lowest item index.
pub fn exact_cover_enumerate(
    inst: &ExactCoverInstance,
    mut visit: impl FnMut(&[usize]) -> ControlFlow<()>,
) -> CoverOutcome {
    let mut dlx = Dlx::new(inst);
    let mut count = 0;
    let mut chosen = Vec::new();
    let flow = dlx.search(&mut chosen, &mut count, &mut visit);
    CoverOutcome {
        solutions: count,
        aborted: flow.is_break(),
    }
}

/// Every triangle of `g` as a sorted block, in lexicographic order.
pub fn triangles(g: &PackedGraph) -> Vec<Block> {
    let mut out = Vec::new();
    for (a, b) in g.edges() {
        let mut common = g.row(a) & g.row(b) & !crate::graph::mask_upto(b + 1);
        while common != 0 {
            let c = common.trailing_zeros() as usize;
            common &= common - 1;
            out.push(sorted_block(a as u8, b as u8, c as u8));
        }
    }
    out
}

/// Every partition of the edges of `g` into triangles, each sorted
/// lexicographically.
pub fn triangle_decompositions(g: &PackedGraph) -> Vec<Vec<Block>> {
    let idx = EdgeIndex::new(g);
    let tris = triangles(g);
    let options = tris
        .iter()
        .map(|&[a, b, c]| {
            let (a, b, c) = (a as usize, b as usize, c as usize);
            let edge = |x, y| idx.get(x, y).expect("triangle edges lie in g");
            vec![edge(a, b), edge(a, c), edge(b, c)]
        })
        .collect();
    let inst = ExactCoverInstance::new(idx.len(), options).expect("well-formed by construction");
    let mut out = Vec::new();
    exact_cover_enumerate(&inst, |sol| {
        out.push(sol.iter().map(|&i| tris[i]).collect());
        ControlFlow::Continue(())
    });
    out
}

/// Enumerates unordered 1-factorizations of a graph with at most 64 edges
/// whose perfect matchings are given as edge-index masks.
///
/// Every factor contains exactly one edge at vertex 0, so the search picks
/// one matching per such edge, always continuing with the edge that has the
/// fewest compatible matchings left; the last two choices are resolved by
/// lookup in the sorted matching list.
pub struct FactorizationSearch {
    full: u64,
    by_root_edge: Vec<Vec<u64>>,
    sorted: Vec<u64>,
}

impl FactorizationSearch {
    /// `None` when `g` has more than 64 edges.
    pub fn new(g: &PackedGraph, idx: &EdgeIndex, matchings: &[u64]) -> Option<Self> {
        if idx.len() > 64 {
            return None;
        }
        let full = crate::graph::mask_upto(idx.len());
        let mut by_root_edge = Vec::new();
        if g.n() > 0 && g.regular_degree().is_some() {
            let mut nb = g.row(0);
            while nb != 0 {
                let b = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                let bit = 1u64 << idx.get(0, b).expect("edge at vertex 0");
                by_root_edge.push(matchings.iter().copied().filter(|m| m & bit != 0).collect());
            }
        }
        let mut sorted = matchings.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        Some(FactorizationSearch {
            full,
            by_root_edge,
            sorted,
        })
    }

    /// Streams each factorization as a list of masks (one per edge at
    /// vertex 0, in no particular order).
    pub fn run(&self, mut visit: impl FnMut(&[u64]) -> ControlFlow<()>) -> CoverOutcome {
        let mut count = 0;
        let mut chosen = Vec::with_capacity(self.by_root_edge.len());
        let flow = if self.full == 0 {
            count = 1;
            visit(&chosen)
        } else if self.by_root_edge.is_empty() {
            ControlFlow::Continue(())
        } else {
            self.rec(self.by_root_edge.clone(), 0, &mut chosen, &mut count, &mut visit)
        };
        CoverOutcome {
            solutions: count,
            aborted: flow.is_break(),
        }
    }

    fn contains(&self, m: u64) -> bool {
        self.sorted.binary_search(&m).is_ok()
    }

    fn rec(
        &self,
        lists: Vec<Vec<u64>>,
        covered: u64,
        chosen: &mut Vec<u64>,
        count: &mut u64,
        visit: &mut impl FnMut(&[u64]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let rest = self.full & !covered;
        match lists.len() {
            0 => {
                if rest == 0 {
                    *count += 1;
                    return visit(chosen);
                }
                ControlFlow::Continue(())
            }
            1 => {
                if self.contains(rest) {
                    chosen.push(rest);
                    *count += 1;
                    let flow = visit(chosen);
                    chosen.pop();
                    return flow;
                }
                ControlFlow::Continue(())
            }
            2 => {
                let (small, _) = if lists[0].len() <= lists[1].len() { (0, 1) } else { (1, 0) };
                for &x in &lists[small] {
                    let last = rest & !x;
                    if self.contains(last) {
                        chosen.push(x);
                        chosen.push(last);
                        *count += 1;
                        let flow = visit(chosen);
                        chosen.pop();
                        chosen.pop();
                        flow?;
                    }
                }
                ControlFlow::Continue(())
            }
            _ => {
                let pick = (0..lists.len())
                    .min_by_key(|&i| lists[i].len())
                    .expect("non-empty");
                'outer: for &x in &lists[pick] {
                    let mut next = Vec::with_capacity(lists.len() - 1);
                    for (i, l) in lists.iter().enumerate() {
                        if i == pick {
                            continue;
                        }
                        let f: Vec<u64> = l.iter().copied().filter(|y| y & x == 0).collect();
                        if f.is_empty() {
                            continue 'outer;
                        }
                        next.push(f);
                    }
                    chosen.push(x);
                    let flow = self.rec(next, covered | x, chosen, count, visit);
                    chosen.pop();
                    flow?;
                }
                ControlFlow::Continue(())
            }
        }
    }
}

/// All unordered 1-factorizations of `g` using the given perfect
/// matchings; each result has its factors sorted.
pub fn one_factorizations(g: &PackedGraph, factors: &[Factor]) -> Vec<Factorization> {
    let idx = EdgeIndex::new(g);
    let mut out = Vec::new();
    let masks: Option<Vec<u64>> = factors.iter().map(|f| idx.mask_of(f)).collect();
    if let (Some(masks), true) = (masks.as_ref(), idx.len() <= 64) {
        let search = FactorizationSearch::new(g, &idx, masks).expect("at most 64 edges");
        search.run(|sol| {
            let mut fs: Vec<Factor> = sol.iter().map(|&m| idx.factor_of_mask(m)).collect();
            fs.sort();
            out.push(Factorization::new(fs).expect("disjoint by construction"));
            ControlFlow::Continue(())
        });
    } else {
        let options = factors
            .iter()
            .map(|f| {
                f.edges()
                    .iter()
                    .map(|&(a, b)| idx.get(a as usize, b as usize).expect("factor edges lie in g"))
                    .collect()
            })
            .collect();
        let inst = ExactCoverInstance::new(idx.len(), options).expect("well-formed");
        exact_cover_enumerate(&inst, |sol| {
            let mut fs: Vec<Factor> = sol.iter().map(|&i| factors[i].clone()).collect();
            fs.sort();
            out.push(Factorization::new(fs).expect("disjoint by construction"));
            ControlFlow::Continue(())
        });
    }
    out.sort();
    out
}
