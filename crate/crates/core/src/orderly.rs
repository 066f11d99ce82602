//! Orderly generation of linear triple configurations (`m` points, every
//! point in `r` blocks, two blocks sharing at most one point).
//!
//! A block list is kept sorted; the representative of an isomorphism class
//! is the relabeling whose sorted block list is lexicographically least.
//! Every prefix of a least list is itself least among the relabelings of
//! that prefix, so a search that extends least prefixes block by block and
//! discards the rest visits each class exactly once.

use rayon::prelude::*;

use crate::design::Block;
use crate::error::{Error, Result};

pub const MAX_POINTS: usize = 64;

#[derive(Clone)]
struct State {
    m: usize,
    r: u8,
    target: usize,
    blocks: Vec<Block>,
    deg: Vec<u8>,
    pairs: Vec<u64>,
    touched: usize,
}

impl State {
    fn new(m: usize, r: usize) -> Self {
        State {
            m,
            r: r as u8,
            target: m * r / 3,
            blocks: Vec::with_capacity(m * r / 3),
            deg: vec![0; m],
            pairs: vec![0; m],
            touched: 0,
        }
    }

    fn unsaturated(&self) -> u64 {
        let mut mask = 0u64;
        for (x, &d) in self.deg.iter().enumerate() {
            if d < self.r {
                mask |= 1 << x;
            }
        }
        mask
    }

    fn feasible(&self) -> bool {
        let open = self.unsaturated();
        let mut rest = open;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let need = (self.r - self.deg[x]) as u32;
            let avail = (open & !self.pairs[x] & !(1u64 << x)).count_ones();
            if avail < 2 * need {
                return false;
            }
        }
        true
    }

    fn push(&mut self, b: Block) {
        let [a, x, y] = b.map(|p| p as usize);
        self.deg[a] += 1;
        self.deg[x] += 1;
        self.deg[y] += 1;
        self.pairs[a] |= 1 << x | 1 << y;
        self.pairs[x] |= 1 << a | 1 << y;
        self.pairs[y] |= 1 << a | 1 << x;
        self.blocks.push(b);
        self.touched = self.touched.max(y + 1);
    }

    fn pop(&mut self, touched_before: usize) {
        let [a, x, y] = self.blocks.pop().expect("non-empty").map(|p| p as usize);
        self.deg[a] -= 1;
        self.deg[x] -= 1;
        self.deg[y] -= 1;
        self.pairs[a] &= !(1 << x | 1 << y);
        self.pairs[x] &= !(1 << a | 1 << y);
        self.pairs[y] &= !(1 << a | 1 << x);
        self.touched = touched_before;
    }

    /// Blocks that may be appended: they contain the smallest unsaturated
    /// point as minimum, exceed the last block, respect replication and
    /// linearity, and introduce new points in increasing order.
    fn children(&self) -> Vec<Block> {
        let mut out = Vec::new();
        if self.blocks.len() == self.target {
            return out;
        }
        let open = self.unsaturated();
        if open == 0 {
            return out;
        }
        let s = open.trailing_zeros() as usize;
        let t = self.touched;
        let limit = (t + 3).min(self.m);
        for y in s + 1..limit {
            if self.deg[y] >= self.r || self.pairs[s] >> y & 1 == 1 {
                continue;
            }
            for z in y + 1..limit {
                if self.deg[z] >= self.r || self.pairs[s] >> z & 1 == 1 || self.pairs[y] >> z & 1 == 1 {
                    continue;
                }
                let fresh: Vec<usize> = [s, y, z].into_iter().filter(|&p| p >= t).collect();
                if fresh.iter().enumerate().any(|(i, &p)| p != t + i) {
                    continue;
                }
                let b = [s as u8, y as u8, z as u8];
                if self.blocks.last().is_some_and(|last| *last >= b) {
                    continue;
                }
                out.push(b);
            }
        }
        out
    }
}


/// True when no relabeling of `blocks` (sorted) yields a sorted block list
/// that is lexicographically smaller.
pub fn is_lexmin(blocks: &[Block]) -> bool {
    let points = blocks.iter().map(|b| b[2] as usize + 1).max().unwrap_or(0);
    let mut through: Vec<Vec<u16>> = vec![Vec::new(); points];
    for (i, b) in blocks.iter().enumerate() {
        for &p in b {
            through[p as usize].push(i as u16);
        }
    }
    let mut check = LexminCheck {
        target: blocks,
        through,
        label: vec![UNSET; points],
        order: Vec::with_capacity(points),
        labs: vec![[0; 4]; blocks.len()],
        pending: Vec::with_capacity(blocks.len()),
        saved: vec![Vec::with_capacity(blocks.len()); points + 1],
        settled: 0,
        gens: Vec::new(),
    };
    check.rec().is_ok()
}

const UNSET: u8 = u8::MAX;

struct Smaller;

/// Backtracking over labelings: `order[j]` is the point given label `j`.
///
/// Image blocks whose points are all labeled are `pending` until every
/// block still missing a label is certain to map above them; they are then
/// compared, in order, with the target list (`settled` of which match so
/// far). Relabelings that reproduce the target are automorphisms and are
/// used to skip children equivalent to ones already tried.
struct LexminCheck<'a> {
    target: &'a [Block],
    through: Vec<Vec<u16>>,
    label: Vec<u8>,
    order: Vec<u8>,
    /// Labels of each block's labeled points, ascending, count in slot 3.
    labs: Vec<[u8; 4]>,
    pending: Vec<Block>,
    saved: Vec<Vec<Block>>,
    settled: usize,
    gens: Vec<Vec<u8>>,
}

enum Node {
    Prune,
    Equal,
    Open,
}

impl LexminCheck<'_> {
    /// Smallest image any block with an unlabeled point can still take.
    fn bound(&self) -> [u16; 3] {
        let next = self.order.len() as u16;
        let mut bound = [u16::MAX; 3];
        for l in &self.labs {
            let lb = match l[3] {
                3 => continue,
                2 => [l[0] as u16, l[1] as u16, next],
                1 => [l[0] as u16, next, next + 1],
                _ => [next, next + 1, next + 2],
            };
            if lb < bound {
                bound = lb;
            }
        }
        bound
    }

    fn evaluate(&mut self) -> std::result::Result<Node, Smaller> {
        let bound = self.bound();
        let widen = |b: &Block| [b[0] as u16, b[1] as u16, b[2] as u16];
        let mut drained = 0;
        while drained < self.pending.len() && widen(&self.pending[drained]) < bound {
            match self.pending[drained].cmp(&self.target[self.settled]) {
                std::cmp::Ordering::Less => return Err(Smaller),
                std::cmp::Ordering::Greater => return Ok(Node::Prune),
                std::cmp::Ordering::Equal => {}
            }
            self.settled += 1;
            drained += 1;
        }
        self.pending.drain(..drained);
        if self.settled == self.target.len() {
            return Ok(Node::Equal);
        }
        if widen(&self.target[self.settled]) < bound {
            return Ok(Node::Prune);
        }
        Ok(Node::Open)
    }

    fn assign(&mut self, p: u8) {
        let j = self.order.len() as u8;
        self.label[p as usize] = j;
        self.order.push(p);
        for &b in &self.through[p as usize] {
            let l = &mut self.labs[b as usize];
            l[l[3] as usize] = j;
            l[3] += 1;
            if l[3] == 3 {
                let t = [l[0], l[1], l[2]];
                let at = self.pending.partition_point(|x| *x < t);
                self.pending.insert(at, t);
            }
        }
    }

    fn unassign(&mut self, p: u8) {
        for &b in &self.through[p as usize] {
            self.labs[b as usize][3] -= 1;
        }
        self.order.pop();
        self.label[p as usize] = UNSET;
    }

    fn rec(&mut self) -> std::result::Result<(), Smaller> {
        match self.evaluate()? {
            Node::Prune => return Ok(()),
            Node::Equal => {
                if self.order.iter().enumerate().any(|(i, &p)| i != p as usize) {
                    self.gens.push(self.label.clone());
                }
                return Ok(());
            }
            Node::Open => {}
        }
        let allowed = self.candidates();
        let mut tried = 0u64;
        let depth = self.order.len();
        let mut saved = std::mem::take(&mut self.saved[depth]);
        saved.clone_from(&self.pending);
        let saved_settled = self.settled;
        let mut result = Ok(());
        for p in 0..self.label.len() as u8 {
            if self.label[p as usize] != UNSET || allowed >> p & 1 == 0 || self.equivalent(tried, p) {
                continue;
            }
            self.assign(p);
            let r = self.rec();
            self.unassign(p);
            self.pending.clone_from(&saved);
            self.settled = saved_settled;
            if r.is_err() {
                result = r;
                break;
            }
            tried |= 1 << p;
        }
        self.saved[depth] = saved;
        result
    }

    /// Points whose labeling could avoid an immediate prune. A block not
    /// through the newly labeled point has its lower bound raised, so unless
    /// some such raised bound or a pending image stays at or below the next
    /// target block, the new label must land in a block whose current bound
    /// is at or below it.
    fn candidates(&self) -> u64 {
        let t = self.target[self.settled];
        if self.pending.first().is_some_and(|e| *e <= t) {
            return u64::MAX;
        }
        let t = [t[0] as u16, t[1] as u16, t[2] as u16];
        let next = self.order.len() as u16;
        let mut mask = 0u64;
        // points lying in every block whose raised bound stays low enough
        let mut common = u64::MAX;
        for (i, l) in self.labs.iter().enumerate() {
            let (lb, raised) = match l[3] {
                3 => continue,
                2 => ([l[0] as u16, l[1] as u16, next], [l[0] as u16, l[1] as u16, next + 1]),
                1 => ([l[0] as u16, next, next + 1], [l[0] as u16, next + 1, next + 2]),
                _ => ([next, next + 1, next + 2], [next + 1, next + 2, next + 3]),
            };
            let points = self.target[i].iter().fold(0u64, |m, &x| m | 1 << x);
            if raised <= t {
                common &= points;
            }
            if lb <= t {
                mask |= points;
            }
        }
        mask | !common
    }

    /// Whether `p` lies in the orbit of a tried point under the found
    /// automorphisms that fix every labeled point.
    fn equivalent(&self, tried: u64, p: u8) -> bool {
        if tried == 0 || self.gens.is_empty() {
            return false;
        }
        let fixing: Vec<&Vec<u8>> = self
            .gens
            .iter()
            .filter(|g| self.order.iter().all(|&x| g[x as usize] == x))
            .collect();
        if fixing.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.label.len()];
        let mut stack = vec![p];
        seen[p as usize] = true;
        while let Some(y) = stack.pop() {
            if tried >> y & 1 == 1 {
                return true;
            }
            for g in &fixing {
                let z = g[y as usize];
                if !seen[z as usize] {
                    seen[z as usize] = true;
                    stack.push(z);
                }
            }
        }
        false
    }
}

fn check_params(m: usize, r: usize) -> Result<bool> {
    if m > MAX_POINTS {
        return Err(Error::input(format!("at most {MAX_POINTS} points supported, got {m}")));
    }
    Ok((m * r).is_multiple_of(3) && (r == 0 || 2 * r < m) && r < u8::MAX as usize)
}

fn search(state: &mut State, out: &mut Vec<Vec<Block>>) {
    if state.blocks.len() == state.target {
        out.push(state.blocks.clone());
        return;
    }
    if !state.feasible() {
        return;
    }
    for b in state.children() {
        let before = state.touched;
        state.push(b);
        if is_lexmin(&state.blocks) {
            search(state, out);
        }
        state.pop(before);
    }
}

/// Canonical block lists of every linear `(m, r)` configuration, sorted.
/// Work is split into independent subtrees once the frontier is wide
/// enough to keep the thread pool busy.
pub fn generate(m: usize, r: usize) -> Result<Vec<Vec<Block>>> {
    if !check_params(m, r)? {
        return Ok(Vec::new());
    }
    let root = State::new(m, r);
    let want = 32 * rayon::current_num_threads().max(1);
    let mut frontier = vec![root];
    let mut done: Vec<Vec<Block>> = Vec::new();
    while !frontier.is_empty() && frontier.len() < want {
        let mut next = Vec::new();
        for mut st in frontier {
            if st.blocks.len() == st.target {
                done.push(st.blocks.clone());
                continue;
            }
            if !st.feasible() {
                continue;
            }
            for b in st.children() {
                let before = st.touched;
                st.push(b);
                if is_lexmin(&st.blocks) {
                    next.push(st.clone());
                }
                st.pop(before);
            }
        }
        frontier = next;
    }
    let mut rest: Vec<Vec<Block>> = frontier
        .into_par_iter()
        .flat_map_iter(|mut st| {
            let mut out = Vec::new();
            search(&mut st, &mut out);
            out
        })
        .collect();
    done.append(&mut rest);
    done.sort();
    Ok(done)
}
