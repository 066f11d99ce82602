use crate::error::{Error, Result};
use crate::perm::Permutation;

pub const MAX_PACKED_VERTICES: usize = 64;

/// Dense undirected simple graph on at most 64 vertices; one `u64`
/// adjacency row per vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PackedGraph {
    n: usize,
    rows: Vec<u64>,
}

impl PackedGraph {
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_PACKED_VERTICES {
            return Err(Error::input(format!(
                "packed graphs hold at most {MAX_PACKED_VERTICES} vertices, got {n}"
            )));
        }
        Ok(PackedGraph { n, rows: vec![0; n] })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Ok(complement(&PackedGraph::empty(n)?))
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = PackedGraph::empty(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n || a == b {
            return Err(Error::input(format!("bad edge ({a},{b}) for {} vertices", self.n)));
        }
        self.rows[a] |= 1 << b;
        self.rows[b] |= 1 << a;
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }

    #[inline]
    pub fn row(&self, a: usize) -> u64 {
        self.rows[a]
    }

    pub fn degree(&self, a: usize) -> usize {
        self.rows[a].count_ones() as usize
    }

    /// `Some(k)` when every vertex has degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == k).then_some(k)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for a in 0..self.n {
            let mut higher = self.rows[a] & !mask_upto(a + 1);
            while higher != 0 {
                let b = higher.trailing_zeros() as usize;
                out.push((a, b));
                higher &= higher - 1;
            }
        }
        out
    }

    /// The graph relabeled by `p`: edge `{a,b}` becomes `{p(a),p(b)}`.
    pub fn permuted(&self, p: &Permutation) -> PackedGraph {
        let mut rows = vec![0u64; self.n];
        for a in 0..self.n {
            let mut r = self.rows[a];
            while r != 0 {
                let b = r.trailing_zeros() as usize;
                rows[p.apply(a)] |= 1 << p.apply(b);
                r &= r - 1;
            }
        }
        PackedGraph { n: self.n, rows }
    }

    /// Connected components as vertex bitmasks, ordered by lowest vertex.
    pub fn components(&self) -> Vec<u64> {
        let mut left = mask_upto(self.n);
        let mut out = Vec::new();
        while left != 0 {
            let start = left.trailing_zeros() as usize;
            let mut comp = 1u64 << start;
            let mut frontier = comp;
            while frontier != 0 {
                let v = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let new = self.rows[v] & !comp;
                comp |= new;
                frontier |= new;
            }
            left &= !comp;
            out.push(comp);
        }
        out
    }

    /// Encodes in graph6 (no trailing newline).
    pub fn to_graph6(&self) -> String {
        let mut out = Vec::new();
        let n = self.n;
        if n <= 62 {
            out.push(n as u8 + 63);
        } else {
            out.push(126);
            out.push(((n >> 12) & 63) as u8 + 63);
            out.push(((n >> 6) & 63) as u8 + 63);
            out.push((n & 63) as u8 + 63);
        }
        let mut acc = 0u8;
        let mut bits = 0;
        for b in 1..n {
            for a in 0..b {
                acc = acc << 1 | self.has_edge(a, b) as u8;
                bits += 1;
                if bits == 6 {
                    out.push(acc + 63);
                    acc = 0;
                    bits = 0;
                }
            }
        }
        if bits > 0 {
            out.push((acc << (6 - bits)) + 63);
        }
        String::from_utf8(out).expect("graph6 is printable ascii")
    }

    pub fn from_graph6(s: &str) -> Result<Self> {
        let bytes = s.trim_end().as_bytes();
        let bad = |msg: &str| Error::input(format!("graph6 {s:?}: {msg}"));
        if bytes.iter().any(|&c| !(63..=126).contains(&c)) {
            return Err(bad("character out of range"));
        }
        let (n, body) = match bytes.first() {
            None => return Err(bad("empty string")),
            Some(126) => {
                if bytes.len() < 4 || bytes[1] == 126 {
                    return Err(bad("unsupported size header"));
                }
                let n = ((bytes[1] - 63) as usize) << 12
                    | ((bytes[2] - 63) as usize) << 6
                    | (bytes[3] - 63) as usize;
                (n, &bytes[4..])
            }
            Some(&c) => ((c - 63) as usize, &bytes[1..]),
        };
        let needed = (n * n.saturating_sub(1) / 2).div_ceil(6);
        if body.len() != needed {
            return Err(bad("length does not match vertex count"));
        }
        let mut g = PackedGraph::empty(n)?;
        let mut k = 0;
        for b in 1..n {
            for a in 0..b {
                let byte = body[k / 6] - 63;
                if byte >> (5 - k % 6) & 1 == 1 {
                    g.add_edge(a, b)?;
                }
                k += 1;
            }
        }
        Ok(g)
    }
}

/// Same vertices, edge set complemented (no loops).
pub fn complement(g: &PackedGraph) -> PackedGraph {
    let all = mask_upto(g.n);
    let rows = (0..g.n).map(|v| !g.rows[v] & all & !(1u64 << v)).collect();
    PackedGraph { n: g.n, rows }
}

#[inline]
pub(crate) fn mask_upto(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}
