//! Canonical labeling and automorphism groups of vertex-colored graphs by
//! individualization and equitable refinement, plus the graph encodings of
//! designs, configurations and factorizations.

use std::cmp::Ordering;
use std::collections::VecDeque;

use crate::design::{Configuration, TripleSystem};
use crate::error::{Error, Result};
use crate::factor::Factorization;
use crate::group::PermutationGroup;
use crate::perm::Permutation;

pub const DEFAULT_VERTEX_LIMIT: usize = 256;

/// Undirected simple graph with one small color per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
    color: Vec<u8>,
}

impl ColoredGraph {
    pub fn new(colors: Vec<u8>) -> Self {
        let n = colors.len();
        let words = n.div_ceil(64).max(1);
        ColoredGraph {
            n,
            words,
            rows: vec![0; n * words],
            color: colors,
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::input(format!("bad edge ({a},{b}) for {} vertices", self.n)));
        }
        self.rows[a * self.words + b / 64] |= 1 << (b % 64);
        self.rows[b * self.words + a / 64] |= 1 << (a % 64);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colors(&self) -> &[u8] {
        &self.color
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.rows[a * self.words..(a + 1) * self.words];
        row.iter().enumerate().flat_map(|(w, &bits)| BitIter(bits).map(move |b| w * 64 + b))
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Vertex `x` of the result is vertex `p⁻¹(x)` of `self`.
    pub fn permuted(&self, p: &Permutation) -> ColoredGraph {
        let mut color = vec![0u8; self.n];
        for v in 0..self.n {
            color[p.apply(v)] = self.color[v];
        }
        let mut out = ColoredGraph {
            n: self.n,
            words: self.words,
            rows: vec![0; self.rows.len()],
            color,
        };
        for a in 0..self.n {
            for b in self.neighbors(a) {
                let (x, y) = (p.apply(a), p.apply(b));
                out.rows[x * self.words + y / 64] |= 1 << (y % 64);
            }
        }
        out
    }

    pub fn is_automorphism(&self, p: &Permutation) -> bool {
        p.degree() == self.n
            && (0..self.n).all(|v| self.color[p.apply(v)] == self.color[v])
            && (0..self.n).all(|a| {
                self.neighbors(a)
                    .all(|b| self.has_edge(p.apply(a), p.apply(b)))
            })
    }

    /// Length-prefixed serialization: vertex count (u16, big-endian), one
    /// color byte per vertex, then the upper-triangle adjacency bits in
    /// row-major order packed most significant bit first.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 + self.n + self.n * self.n / 16 + 1);
        out.extend_from_slice(&(self.n as u16).to_be_bytes());
        out.extend_from_slice(&self.color);
        let mut acc = 0u8;
        let mut bits = 0;
        for a in 0..self.n {
            for b in a + 1..self.n {
                acc = acc << 1 | self.has_edge(a, b) as u8;
                bits += 1;
                if bits == 8 {
                    out.push(acc);
                    acc = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            out.push(acc << (8 - bits));
        }
        out
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;
    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalResult {
    /// Maps each input vertex to its canonical position.
    pub canonical_labeling: Permutation,
    pub canonical_bytes: Vec<u8>,
    pub automorphism_generators: Vec<Permutation>,
    pub automorphism_order: u128,
}

impl CanonicalResult {
    pub fn canonical_hex(&self) -> String {
        hex::encode(&self.canonical_bytes)
    }

    pub fn automorphism_group(&self) -> Result<PermutationGroup> {
        let n = self.canonical_labeling.degree();
        PermutationGroup::with_known_order(n, self.automorphism_generators.clone(), self.automorphism_order)
    }
}

pub fn canonical_form(g: &ColoredGraph) -> Result<CanonicalResult> {
    canonical_form_with(g, None, DEFAULT_VERTEX_LIMIT)
}

/// Canonical form with an optional per-vertex invariant, which must be
/// preserved by every isomorphism (it only guides the search and never
/// changes which graphs get equal bytes), and a vertex limit.
pub fn canonical_form_with(
    g: &ColoredGraph,
    invariant: Option<&[u64]>,
    vertex_limit: usize,
) -> Result<CanonicalResult> {
    let n = g.n;
    if n > vertex_limit {
        return Err(Error::Resource(format!(
            "graph has {n} vertices, canonizer limit is {vertex_limit}"
        )));
    }
    if n == 0 {
        return Ok(CanonicalResult {
            canonical_labeling: Permutation::identity(0),
            canonical_bytes: g.to_bytes(),
            automorphism_generators: Vec::new(),
            automorphism_order: 1,
        });
    }
    if let Some(inv) = invariant {
        if inv.len() != n {
            return Err(Error::input("invariant length differs from vertex count"));
        }
    }
    let adj: Vec<Vec<u16>> = (0..n).map(|v| g.neighbors(v).map(|x| x as u16).collect()).collect();
    let mut search = Search {
        g,
        adj: &adj,
        first: None,
        best: None,
        gens: Vec::new(),
        cnt: vec![0; n],
    };
    let (mut root, root_trace) = Partition::initial(g, invariant, &adj, &mut search.cnt);
    let mut path = Vec::new();
    let mut traces = vec![root_trace];
    search.explore(&mut root, &mut path, &mut traces, true);

    let best = search.best.take().expect("search visits at least one leaf");
    let first = search.first.take().expect("search visits at least one leaf");
    let mut order: u128 = 1;
    for level in 0..first.path.len() {
        let fixing: Vec<&Vec<u16>> = search
            .gens
            .iter()
            .filter(|gen| first.path[..level].iter().all(|&v| gen[v as usize] == v))
            .collect();
        let orbit = orbit_size(n, &fixing, first.path[level] as usize);
        order = order.checked_mul(orbit as u128).ok_or_else(|| {
            Error::Resource("automorphism group order overflows 128 bits".into())
        })?;
    }
    let mut labeling = vec![0u16; n];
    for (i, &v) in best.lab.iter().enumerate() {
        labeling[v as usize] = i as u16;
    }
    let canonical_labeling = Permutation::from_u16_unchecked(labeling);
    let canonical_bytes = g.permuted(&canonical_labeling).to_bytes();
    let automorphism_generators: Vec<Permutation> =
        search.gens.into_iter().map(Permutation::from_u16_unchecked).collect();
    for gen in &automorphism_generators {
        if !g.is_automorphism(gen) {
            return Err(Error::consistency(format!("canonizer produced non-automorphism {gen}")));
        }
    }
    Ok(CanonicalResult {
        canonical_labeling,
        canonical_bytes,
        automorphism_generators,
        automorphism_order: order,
    })
}

fn orbit_size(n: usize, gens: &[&Vec<u16>], x: usize) -> usize {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut stack = vec![x];
    let mut size = 1;
    while let Some(y) = stack.pop() {
        for g in gens {
            let z = g[y] as usize;
            if !seen[z] {
                seen[z] = true;
                size += 1;
                stack.push(z);
            }
        }
    }
    size
}

#[inline]
fn mix(h: u64, x: u64) -> u64 {
    let mut z = h ^ x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Ordered partition: `lab` lists vertices cell by cell; a cell is named by
/// its start position.
#[derive(Clone)]
struct Partition {
    lab: Vec<u16>,
    pos: Vec<u16>,
    cell_of: Vec<u16>,
    len: Vec<u16>,
    cells: usize,
}

impl Partition {
    fn initial(
        g: &ColoredGraph,
        invariant: Option<&[u64]>,
        adj: &[Vec<u16>],
        cnt: &mut [u32],
    ) -> (Partition, u64) {
        let n = g.n;
        let key = |v: usize| (g.color[v], invariant.map_or(0, |inv| inv[v]));
        let mut lab: Vec<u16> = (0..n as u16).collect();
        lab.sort_by_key(|&v| key(v as usize));
        let mut p = Partition {
            pos: vec![0; n],
            cell_of: vec![0; n],
            len: vec![0; n],
            lab,
            cells: 0,
        };
        let mut trace = mix(0, n as u64);
        let mut queue = VecDeque::new();
        let mut start = 0;
        while start < n {
            let k = key(p.lab[start] as usize);
            let mut end = start + 1;
            while end < n && key(p.lab[end] as usize) == k {
                end += 1;
            }
            for i in start..end {
                p.cell_of[p.lab[i] as usize] = start as u16;
            }
            p.len[start] = (end - start) as u16;
            p.cells += 1;
            queue.push_back(start);
            trace = mix(trace, (k.0 as u64) << 48 ^ k.1);
            trace = mix(trace, (end - start) as u64);
            start = end;
        }
        for (i, &v) in p.lab.iter().enumerate() {
            p.pos[v as usize] = i as u16;
        }
        let mut in_queue = vec![false; n];
        for &s in &queue {
            in_queue[s] = true;
        }
        trace = p.refine(adj, queue, &mut in_queue, cnt, trace);
        (p, trace)
    }

    fn is_discrete(&self) -> bool {
        self.cells == self.lab.len()
    }

    /// First smallest non-singleton cell.
    fn target_cell(&self) -> Option<usize> {
        let n = self.lab.len();
        let mut best: Option<usize> = None;
        let mut s = 0;
        while s < n {
            let l = self.len[s] as usize;
            if l > 1 && best.is_none_or(|b| l < self.len[b] as usize) {
                best = Some(s);
                if l == 2 {
                    break;
                }
            }
            s += l;
        }
        best
    }

    fn individualize(&mut self, v: usize, adj: &[Vec<u16>], cnt: &mut [u32]) -> u64 {
        let s = self.cell_of[v] as usize;
        let l = self.len[s] as usize;
        let i = self.pos[v] as usize;
        let other = self.lab[s];
        self.lab.swap(s, i);
        self.pos[other as usize] = i as u16;
        self.pos[v] = s as u16;
        for k in s + 1..s + l {
            self.cell_of[self.lab[k] as usize] = (s + 1) as u16;
        }
        self.len[s] = 1;
        self.len[s + 1] = (l - 1) as u16;
        self.cells += 1;
        let mut in_queue = vec![false; self.lab.len()];
        in_queue[s] = true;
        let trace = mix(0x5eed, s as u64);
        self.refine(adj, VecDeque::from([s]), &mut in_queue, cnt, trace)
    }

    /// Refines to the coarsest equitable partition below the current one,
    /// returning the trace hash extended by every split.
    fn refine(
        &mut self,
        adj: &[Vec<u16>],
        mut queue: VecDeque<usize>,
        in_queue: &mut [bool],
        cnt: &mut [u32],
        mut trace: u64,
    ) -> u64 {
        let n = self.lab.len();
        let mut touched: Vec<u16> = Vec::new();
        let mut touched_cells: Vec<usize> = Vec::new();
        let mut cell_mark = vec![false; n];
        while let Some(sp) = queue.pop_front() {
            if self.is_discrete() {
                break;
            }
            in_queue[sp] = false;
            let sl = self.len[sp] as usize;
            for k in sp..sp + sl {
                let u = self.lab[k] as usize;
                for &w in &adj[u] {
                    if cnt[w as usize] == 0 {
                        touched.push(w);
                    }
                    cnt[w as usize] += 1;
                }
            }
            for &w in &touched {
                let c = self.cell_of[w as usize] as usize;
                if self.len[c] > 1 && !cell_mark[c] {
                    cell_mark[c] = true;
                    touched_cells.push(c);
                }
            }
            touched_cells.sort_unstable();
            for &c in &touched_cells {
                cell_mark[c] = false;
                let l = self.len[c] as usize;
                let seg = &mut self.lab[c..c + l];
                let first = cnt[seg[0] as usize];
                if seg.iter().all(|&v| cnt[v as usize] == first) {
                    continue;
                }
                seg.sort_unstable_by_key(|&v| (cnt[v as usize], v));
                trace = mix(trace, c as u64);
                let mut sub: Vec<(usize, usize)> = Vec::new();
                let mut start = c;
                while start < c + l {
                    let k = cnt[self.lab[start] as usize];
                    let mut end = start + 1;
                    while end < c + l && cnt[self.lab[end] as usize] == k {
                        end += 1;
                    }
                    trace = mix(trace, (k as u64) << 32 | (end - start) as u64);
                    sub.push((start, end - start));
                    start = end;
                }
                for &(st, ln) in &sub {
                    self.len[st] = ln as u16;
                    for k in st..st + ln {
                        let v = self.lab[k] as usize;
                        self.cell_of[v] = st as u16;
                        self.pos[v] = k as u16;
                    }
                }
                self.cells += sub.len() - 1;
                if in_queue[c] {
                    for &(st, _) in &sub[1..] {
                        in_queue[st] = true;
                        queue.push_back(st);
                    }
                } else {
                    let largest = sub
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1 .1.cmp(&b.1 .1).then(b.0.cmp(&a.0)))
                        .map(|(i, _)| i)
                        .expect("at least two subcells");
                    for (i, &(st, _)) in sub.iter().enumerate() {
                        if i != largest {
                            in_queue[st] = true;
                            queue.push_back(st);
                        }
                    }
                }
            }
            touched_cells.clear();
            for &w in &touched {
                cnt[w as usize] = 0;
            }
            touched.clear();
        }
        mix(trace, self.cells as u64)
    }
}

/// Orbits of the generators fixing a node's path pointwise, updated as
/// new generators appear.
#[derive(Default)]
struct NodeOrbits {
    parent: Vec<u16>,
    gens_seen: usize,
}

impl NodeOrbits {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] as usize != r {
            r = self.parent[r] as usize;
        }
        let mut y = x;
        while self.parent[y] as usize != r {
            let next = self.parent[y] as usize;
            self.parent[y] = r as u16;
            y = next;
        }
        r
    }

    fn equivalent(&mut self, gens: &[Vec<u16>], path: &[u16], explored: &[u16], w: u16) -> bool {
        if self.gens_seen == gens.len() && self.parent.is_empty() {
            return false;
        }
        for g in &gens[self.gens_seen..] {
            if !path.iter().all(|&v| g[v as usize] == v) {
                continue;
            }
            if self.parent.is_empty() {
                self.parent = (0..g.len() as u16).collect();
            }
            for (x, &y) in g.iter().enumerate() {
                let (a, b) = (self.find(x), self.find(y as usize));
                if a != b {
                    self.parent[a.max(b)] = a.min(b) as u16;
                }
            }
        }
        self.gens_seen = gens.len();
        if self.parent.is_empty() {
            return false;
        }
        let root = self.find(w as usize);
        explored.iter().any(|&e| self.find(e as usize) == root)
    }
}

struct Leaf {
    path: Vec<u16>,
    traces: Vec<u64>,
    lab: Vec<u16>,
    rows: Vec<u64>,
}

struct Search<'a> {
    g: &'a ColoredGraph,
    adj: &'a [Vec<u16>],
    first: Option<Leaf>,
    best: Option<Leaf>,
    gens: Vec<Vec<u16>>,
    cnt: Vec<u32>,
}

/// Compares a partial trace with a complete one on the shared levels; a
/// trace running past the end of the other counts as greater.
fn prefix_cmp(partial: &[u64], full: &[u64]) -> Ordering {
    for (i, x) in partial.iter().enumerate() {
        match full.get(i) {
            None => return Ordering::Greater,
            Some(y) if x != y => return x.cmp(y),
            _ => {}
        }
    }
    Ordering::Equal
}

fn common_prefix(a: &[u16], b: &[u16]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

impl Search<'_> {
    fn relabeled_rows(&self, p: &Partition) -> Vec<u64> {
        let g = self.g;
        let mut rows = vec![0u64; g.rows.len()];
        for (i, &u) in p.lab.iter().enumerate() {
            for &w in &self.adj[u as usize] {
                let j = p.pos[w as usize] as usize;
                rows[i * g.words + j / 64] |= 1 << (j % 64);
            }
        }
        rows
    }

    fn add_generator(&mut self, from: &[u16], to: &[u16]) {
        let mut img = vec![0u16; from.len()];
        for (i, &v) in from.iter().enumerate() {
            img[v as usize] = to[i];
        }
        if img.iter().enumerate().all(|(i, &x)| i == x as usize) {
            return;
        }
        if !self.gens.contains(&img) {
            self.gens.push(img);
        }
    }

    /// Depth-first search; a returned `Some(level)` unwinds to the node at
    /// that depth, which resumes with its next child.
    fn explore(
        &mut self,
        p: &mut Partition,
        path: &mut Vec<u16>,
        traces: &mut Vec<u64>,
        eq_first: bool,
    ) -> Option<usize> {
        if p.is_discrete() {
            return self.leaf(p, path, traces, eq_first);
        }
        let level = path.len();
        let target = p.target_cell().expect("non-discrete partition has a target");
        let mut children: Vec<u16> = p.lab[target..target + p.len[target] as usize].to_vec();
        children.sort_unstable();
        let mut explored: Vec<u16> = Vec::new();
        let mut orbits = NodeOrbits::default();
        for &w in &children {
            if !explored.is_empty() && orbits.equivalent(&self.gens, path, &explored, w) {
                continue;
            }
            let mut child = p.clone();
            let t = child.individualize(w as usize, self.adj, &mut self.cnt);
            let child_eq_first = match &self.first {
                None => true,
                Some(f) => eq_first && f.traces.get(level + 1) == Some(&t),
            };
            traces.push(t);
            let vs_best = self
                .best
                .as_ref()
                .map_or(Ordering::Equal, |b| prefix_cmp(traces, &b.traces));
            if vs_best == Ordering::Less && !child_eq_first {
                traces.pop();
                explored.push(w);
                continue;
            }
            path.push(w);
            let r = self.explore(&mut child, path, traces, child_eq_first);
            path.pop();
            traces.pop();
            explored.push(w);
            if let Some(stop) = r {
                if stop < level {
                    return Some(stop);
                }
            }
        }
        None
    }

    fn leaf(
        &mut self,
        p: &Partition,
        path: &[u16],
        traces: &[u64],
        eq_first: bool,
    ) -> Option<usize> {
        let rows = self.relabeled_rows(p);
        let Some(first) = &self.first else {
            let leaf = Leaf {
                path: path.to_vec(),
                traces: traces.to_vec(),
                lab: p.lab.clone(),
                rows,
            };
            self.best = Some(Leaf {
                path: leaf.path.clone(),
                traces: leaf.traces.clone(),
                lab: leaf.lab.clone(),
                rows: leaf.rows.clone(),
            });
            self.first = Some(leaf);
            return None;
        };
        if eq_first && first.traces.len() == traces.len() && first.rows == rows {
            let stop = common_prefix(&first.path, path);
            let from = first.lab.clone();
            self.add_generator(&from, &p.lab);
            return Some(stop);
        }
        let best = self.best.as_ref().expect("set with first");
        let cmp = traces.cmp(&best.traces[..]).then_with(|| rows.cmp(&best.rows));
        match cmp {
            Ordering::Greater => {
                self.best = Some(Leaf {
                    path: path.to_vec(),
                    traces: traces.to_vec(),
                    lab: p.lab.clone(),
                    rows,
                });
                None
            }
            Ordering::Equal => {
                let stop = common_prefix(&best.path, path);
                let from = best.lab.clone();
                self.add_generator(&from, &p.lab);
                Some(stop)
            }
            Ordering::Less => None,
        }
    }
}

/// Canonical form of a triple system, with the refinement seeded by
/// [`sts_invariant`]. Use this (not the plain incidence canonizer) whenever
/// canonical forms of triple systems are compared.
pub fn canonical_sts(s: &TripleSystem) -> Result<CanonicalResult> {
    canonical_form_with(&encode_sts(s), Some(&sts_invariant(s)), DEFAULT_VERTEX_LIMIT)
}

/// Per-vertex invariant of [`encode_sts`]: for each point `a`, the multiset
/// over the other points `b` of the component shapes of the graph joining
/// `x` to the third points of the blocks through `{a, x}` and `{b, x}`.
/// Block vertices get 0 and are split by refinement.
pub fn sts_invariant(s: &TripleSystem) -> Vec<u64> {
    let v = s.v();
    let table = s.pair_table();
    let mut out = vec![0u64; v + s.blocks().len()];
    let mut shapes: Vec<u64> = Vec::with_capacity(v);
    let mut comps: Vec<u64> = Vec::with_capacity(v);
    let mut seen = vec![false; v];
    for a in 0..v {
        shapes.clear();
        for b in (0..v).filter(|&b| b != a) {
            let c = table.third(a, b);
            seen.iter_mut().for_each(|x| *x = false);
            seen[a] = true;
            seen[b] = true;
            if let Some(c) = c {
                seen[c] = true;
            }
            let step = |x: usize, side: usize| table.third(side, x).filter(|&y| y != a && y != b);
            comps.clear();
            // paths first, walked from an end, then the remaining cycles
            for pass in 0..2 {
                for start in 0..v {
                    if seen[start] {
                        continue;
                    }
                    let ends = [step(start, a).is_none(), step(start, b).is_none()];
                    if pass == 0 && !ends[0] && !ends[1] {
                        continue;
                    }
                    let mut side = if ends[0] { b } else { a };
                    let mut x = start;
                    let mut len = 1u64;
                    seen[x] = true;
                    while let Some(y) = step(x, side) {
                        if seen[y] {
                            break;
                        }
                        seen[y] = true;
                        len += 1;
                        x = y;
                        side = if side == a { b } else { a };
                    }
                    comps.push(len << 1 | pass as u64);
                }
            }
            comps.sort_unstable();
            let shape = comps.iter().fold(c.is_some() as u64, |h, &x| mix(h, x));
            shapes.push(shape);
        }
        shapes.sort_unstable();
        out[a] = shapes.iter().fold(0x5157, |h, &x| mix(h, x));
    }
    out
}

/// Point vertices `0..v` (color 0), then one vertex per block (color 1).
pub fn encode_sts(s: &TripleSystem) -> ColoredGraph {
    encode_incidence(s.v(), s.blocks(), &[])
}

pub fn encode_configuration(c: &Configuration) -> ColoredGraph {
    encode_incidence(c.m(), c.blocks(), &[])
}

fn encode_incidence(points: usize, blocks: &[[u8; 3]], extra: &[Vec<usize>]) -> ColoredGraph {
    let mut colors = vec![0u8; points];
    colors.extend(std::iter::repeat_n(1u8, blocks.len()));
    colors.extend(std::iter::repeat_n(2u8, extra.len()));
    let mut g = ColoredGraph::new(colors);
    for (i, b) in blocks.iter().enumerate() {
        for &x in b {
            g.add_edge(x as usize, points + i).expect("in range");
        }
    }
    for (i, set) in extra.iter().enumerate() {
        for &x in set {
            g.add_edge(x, points + blocks.len() + i).expect("in range");
        }
    }
    g
}

/// [`encode_sts`] plus one color-2 vertex per listed subsystem, adjacent
/// to the subsystem's points.
pub fn encode_sts_with_subsystems(s: &TripleSystem, subsystems: &[Vec<usize>]) -> Result<ColoredGraph> {
    let table = s.pair_table();
    for set in subsystems {
        if set.iter().any(|&x| x >= s.v()) {
            return Err(Error::input(format!("subsystem {set:?} has points outside the design")));
        }
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                match table.third(a, b) {
                    Some(c) if set.contains(&c) => {}
                    _ => {
                        return Err(Error::input(format!("{set:?} is not closed under the blocks")));
                    }
                }
            }
        }
    }
    Ok(encode_incidence(s.v(), s.blocks(), subsystems))
}

/// Encodes a factorization of a graph on `n` vertices: vertex nodes
/// (color 0), one node per factor (color 1), and one node per edge
/// (color 2) joined to its endpoints and its factor.
pub fn encode_factorization(n: usize, f: &Factorization) -> ColoredGraph {
    let edges: usize = f.factors().iter().map(|x| x.len()).sum();
    let mut colors = vec![0u8; n];
    colors.extend(std::iter::repeat_n(1u8, f.len()));
    colors.extend(std::iter::repeat_n(2u8, edges));
    let mut g = ColoredGraph::new(colors);
    let mut e = n + f.len();
    for (i, factor) in f.factors().iter().enumerate() {
        for &(a, b) in factor.edges() {
            g.add_edge(e, a as usize).expect("in range");
            g.add_edge(e, b as usize).expect("in range");
            g.add_edge(e, n + i).expect("in range");
            e += 1;
        }
    }
    g
}

/// Plain graph with every vertex colored 0.
pub fn from_packed(g: &crate::graph::PackedGraph) -> ColoredGraph {
    let mut out = ColoredGraph::new(vec![0; g.n()]);
    for (a, b) in g.edges() {
        out.add_edge(a, b).expect("in range");
    }
    out
}

/// Orbits of the listed subsystems under the automorphism group of the
/// design, ordered by the smallest canonical position of their marker
/// vertices; the first orbit holds the canonically minimum subsystems.
#[derive(Clone, Debug)]
pub struct SubsystemRanking {
    /// Indices into the input subsystem list.
    pub orbits: Vec<Vec<usize>>,
    /// Canonical result for the design with all subsystems marked.
    pub canon: CanonicalResult,
}

pub fn canonical_subsystem_ranking(s: &TripleSystem, subsystems: &[Vec<usize>]) -> Result<SubsystemRanking> {
    if subsystems.is_empty() {
        return Err(Error::input("no subsystems to rank"));
    }
    let g = encode_sts_with_subsystems(s, subsystems)?;
    let base = s.v() + s.blocks().len();
    let mut inv = sts_invariant(s);
    inv.resize(g.n(), 0);
    let canon = canonical_form_with(&g, Some(&inv), DEFAULT_VERTEX_LIMIT)?;
    let k = subsystems.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    for gen in &canon.automorphism_generators {
        for i in 0..k {
            let j = gen.apply(base + i) - base;
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(slot) => orbits[slot].push(i),
            None => {
                root_slot[r] = Some(orbits.len());
                orbits.push(vec![i]);
            }
        }
    }
    let label = |i: usize| canon.canonical_labeling.apply(base + i);
    orbits.sort_by_key(|orbit| orbit.iter().map(|&i| label(i)).min());
    Ok(SubsystemRanking { orbits, canon })
}
