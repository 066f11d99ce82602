//! Triple systems and triangle configurations, their validators, and the
//! plain-text file formats both share.
//!
//! Points are `0..v`. Every block is kept sorted ascending and every block
//! list is kept sorted lexicographically, so two block sets are equal iff
//! their stored vectors are equal.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::PackedGraph;
use crate::group::PermutationGroup;
use crate::perm::Permutation;

pub type Block = [u8; 3];

#[inline]
pub fn sorted_block(a: u8, b: u8, c: u8) -> Block {
    let mut blk = [a, b, c];
    blk.sort_unstable();
    blk
}

/// Steiner systems of order `v` exist iff `v ≡ 1 or 3 (mod 6)`.
pub fn is_admissible_order(v: u64) -> bool {
    matches!(v % 6, 1 | 3)
}

/// First defect found by a validator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    PairUncovered(u8, u8),
    PairRepeated(u8, u8),
    Replication { point: u8, found: usize, expected: usize },
    BlocksShareTwoPoints(Block, Block),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PairUncovered(a, b) => write!(f, "pair {{{a},{b}}} lies in no block"),
            Violation::PairRepeated(a, b) => write!(f, "pair {{{a},{b}}} lies in two blocks"),
            Violation::Replication { point, found, expected } => {
                write!(f, "point {point} lies in {found} blocks, expected {expected}")
            }
            Violation::BlocksShareTwoPoints(x, y) => {
                write!(f, "blocks {x:?} and {y:?} share two points")
            }
        }
    }
}

fn normalize_blocks(points: usize, blocks: impl IntoIterator<Item = Block>) -> Result<Vec<Block>> {
    if points > u8::MAX as usize {
        return Err(Error::input(format!("at most 255 points supported, got {points}")));
    }
    let mut out = BTreeSet::new();
    for b in blocks {
        let blk = sorted_block(b[0], b[1], b[2]);
        if blk[0] == blk[1] || blk[1] == blk[2] {
            return Err(Error::input(format!("block {b:?} repeats a point")));
        }
        if blk[2] as usize >= points {
            return Err(Error::input(format!(
                "block {b:?} has a point outside 0..{points}"
            )));
        }
        out.insert(blk);
    }
    Ok(out.into_iter().collect())
}

fn permute_blocks(blocks: &[Block], p: &Permutation) -> Vec<Block> {
    let mut out: Vec<Block> = blocks
        .iter()
        .map(|b| sorted_block(p.apply(b[0] as usize) as u8, p.apply(b[1] as usize) as u8, p.apply(b[2] as usize) as u8))
        .collect();
    out.sort_unstable();
    out
}

/// Point–pair lookup: the third point of the block through each covered
/// pair, if any.
#[derive(Clone, Debug)]
pub struct PairTable {
    v: usize,
    third: Vec<u8>,
}

pub const NO_POINT: u8 = u8::MAX;

impl PairTable {
    pub fn new(v: usize, blocks: &[Block]) -> Self {
        let mut third = vec![NO_POINT; v * v];
        for &[a, b, c] in blocks {
            let (a, b, c) = (a as usize, b as usize, c as usize);
            third[a * v + b] = c as u8;
            third[b * v + a] = c as u8;
            third[a * v + c] = b as u8;
            third[c * v + a] = b as u8;
            third[b * v + c] = a as u8;
            third[c * v + b] = a as u8;
        }
        PairTable { v, third }
    }

    #[inline]
    pub fn third(&self, a: usize, b: usize) -> Option<usize> {
        let t = self.third[a * self.v + b];
        (t != NO_POINT).then_some(t as usize)
    }
}

/// A set of 3-element blocks on points `0..v`; a Steiner triple system
/// when [`validate_sts`] accepts it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TripleSystem {
    v: usize,
    blocks: Vec<Block>,
}

impl TripleSystem {
    pub fn new(v: usize, blocks: impl IntoIterator<Item = Block>) -> Result<Self> {
        Ok(TripleSystem {
            v,
            blocks: normalize_blocks(v, blocks)?,
        })
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn pair_table(&self) -> PairTable {
        PairTable::new(self.v, &self.blocks)
    }

    /// The system relabeled by `p`; blocks are re-sorted.
    pub fn permuted(&self, p: &Permutation) -> TripleSystem {
        assert_eq!(p.degree(), self.v, "permutation degree must match point count");
        TripleSystem {
            v: self.v,
            blocks: permute_blocks(&self.blocks, p),
        }
    }

    pub fn is_automorphism(&self, p: &Permutation) -> bool {
        self.permuted(p).blocks == self.blocks
    }

    /// Writes the text format: `sts v=<v> b=<count>` then one block per line.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "sts v={} b={}", self.v, self.blocks.len())?;
        write_blocks(&mut w, &self.blocks)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let (header, blocks) = read_blocks(r)?;
        let fields = parse_header(&header, "sts", &["v", "b"])?;
        let sts = TripleSystem::new(fields[0], blocks.iter().copied())?;
        if sts.blocks.len() != fields[1] || blocks.len() != fields[1] {
            return Err(Error::parse(1, format!("header announces {} blocks, found {}", fields[1], blocks.len())));
        }
        Ok(sts)
    }
}

/// Checks that every pair of points lies in exactly one block.
pub fn validate_sts(s: &TripleSystem) -> std::result::Result<(), Violation> {
    let v = s.v;
    let mut covered = vec![false; v * v];
    for &[a, b, c] in &s.blocks {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            let k = x as usize * v + y as usize;
            if covered[k] {
                return Err(Violation::PairRepeated(x, y));
            }
            covered[k] = true;
        }
    }
    for x in 0..v {
        for y in x + 1..v {
            if !covered[x * v + y] {
                return Err(Violation::PairUncovered(x as u8, y as u8));
            }
        }
    }
    Ok(())
}

/// Union of the orbits of `representatives` under the group generated by
/// `generators`; the result is not validated.
pub fn construct_from_group_orbits(
    n: usize,
    generators: &[Permutation],
    representatives: &[Block],
) -> Result<TripleSystem> {
    for g in generators {
        if g.degree() != n {
            return Err(Error::input(format!("generator {g} does not act on {n} points")));
        }
    }
    let reps = normalize_blocks(n, representatives.iter().copied())?;
    let mut seen: BTreeSet<Block> = BTreeSet::new();
    let mut stack: Vec<Block> = Vec::new();
    for r in reps {
        if seen.insert(r) {
            stack.push(r);
        }
    }
    while let Some(b) = stack.pop() {
        for g in generators {
            let img = sorted_block(
                g.apply(b[0] as usize) as u8,
                g.apply(b[1] as usize) as u8,
                g.apply(b[2] as usize) as u8,
            );
            if seen.insert(img) {
                stack.push(img);
            }
        }
    }
    TripleSystem::new(n, seen)
}

/// `m` points, blocks of size 3, every point in `r` blocks and two blocks
/// sharing at most one point (once validated).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    m: usize,
    r: usize,
    blocks: Vec<Block>,
}

impl Configuration {
    pub fn new(m: usize, r: usize, blocks: impl IntoIterator<Item = Block>) -> Result<Self> {
        Ok(Configuration {
            m,
            r,
            blocks: normalize_blocks(m, blocks)?,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn permuted(&self, p: &Permutation) -> Configuration {
        assert_eq!(p.degree(), self.m, "permutation degree must match point count");
        Configuration {
            m: self.m,
            r: self.r,
            blocks: permute_blocks(&self.blocks, p),
        }
    }

    pub fn is_automorphism(&self, p: &Permutation) -> bool {
        self.permuted(p).blocks == self.blocks
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "cfg m={} r={} b={}", self.m, self.r, self.blocks.len())?;
        write_blocks(&mut w, &self.blocks)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let (header, blocks) = read_blocks(r)?;
        let fields = parse_header(&header, "cfg", &["m", "r", "b"])?;
        let cfg = Configuration::new(fields[0], fields[1], blocks.iter().copied())?;
        if cfg.blocks.len() != fields[2] || blocks.len() != fields[2] {
            return Err(Error::parse(1, format!("header announces {} blocks, found {}", fields[2], blocks.len())));
        }
        Ok(cfg)
    }
}

/// Checks replication `r` at every point and pairwise block intersections
/// of at most one point.
pub fn validate_configuration(c: &Configuration) -> std::result::Result<(), Violation> {
    let mut deg = vec![0usize; c.m];
    let mut pair_block: Vec<Option<Block>> = vec![None; c.m * c.m];
    for &blk in &c.blocks {
        let [a, b, x] = blk;
        for (p, q) in [(a, b), (a, x), (b, x)] {
            let k = p as usize * c.m + q as usize;
            if let Some(other) = pair_block[k] {
                return Err(Violation::BlocksShareTwoPoints(other, blk));
            }
            pair_block[k] = Some(blk);
        }
        for p in blk {
            deg[p as usize] += 1;
        }
    }
    for (p, &d) in deg.iter().enumerate() {
        if d != c.r {
            return Err(Violation::Replication {
                point: p as u8,
                found: d,
                expected: c.r,
            });
        }
    }
    Ok(())
}

/// Union of the triangles spanned by the blocks.
pub fn underlying_graph(c: &Configuration) -> Result<PackedGraph> {
    let mut g = PackedGraph::empty(c.m)?;
    for &[a, b, x] in &c.blocks {
        g.add_edge(a as usize, b as usize)?;
        g.add_edge(a as usize, x as usize)?;
        g.add_edge(b as usize, x as usize)?;
    }
    Ok(g)
}

/// The block-preserving permutations of a configuration, checked element
/// by element against a candidate group.
pub fn preserves_blocks(c: &Configuration, group: &PermutationGroup) -> Result<bool> {
    Ok(group.elements()?.iter().all(|g| c.is_automorphism(g)))
}

fn write_blocks(w: &mut impl Write, blocks: &[Block]) -> Result<()> {
    for [a, b, c] in blocks {
        writeln!(w, "{a} {b} {c}")?;
    }
    Ok(())
}

fn read_blocks(r: impl BufRead) -> Result<(String, Vec<Block>)> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(line) => line?,
        None => return Err(Error::parse(1, "missing header")),
    };
    let mut blocks = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let pts: Vec<u8> = line
            .split(' ')
            .map(|t| t.parse::<u8>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(i + 2, format!("{line:?}: {e}")))?;
        if pts.len() != 3 || !(pts[0] < pts[1] && pts[1] < pts[2]) {
            return Err(Error::parse(i + 2, format!("{line:?} is not an ascending triple")));
        }
        let blk = [pts[0], pts[1], pts[2]];
        if blocks.last().is_some_and(|last: &Block| *last >= blk) {
            return Err(Error::parse(i + 2, "blocks are not in strictly increasing order"));
        }
        blocks.push(blk);
    }
    Ok((header, blocks))
}

fn parse_header(header: &str, tag: &str, keys: &[&str]) -> Result<Vec<usize>> {
    let mut parts = header.split(' ');
    if parts.next() != Some(tag) {
        return Err(Error::parse(1, format!("expected header starting with {tag:?}")));
    }
    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        let part = parts
            .next()
            .ok_or_else(|| Error::parse(1, format!("missing field {key}")))?;
        let value = part
            .strip_prefix(key)
            .and_then(|s| s.strip_prefix('='))
            .ok_or_else(|| Error::parse(1, format!("expected {key}=..., got {part:?}")))?;
        out.push(
            value
                .parse()
                .map_err(|e| Error::parse(1, format!("field {key}: {e}")))?,
        );
    }
    if parts.next().is_some() {
        return Err(Error::parse(1, "trailing header fields"));
    }
    Ok(out)
}

/// The cyclic Fano plane `{i, i+1, i+3} mod 7`.
pub fn cyclic_fano() -> TripleSystem {
    TripleSystem::new(7, (0..7u8).map(|i| sorted_block(i, (i + 1) % 7, (i + 3) % 7)))
        .expect("valid by construction")
}

/// Generators of the order-108 group acting on 21 points, and the seven
/// orbit representatives, that together build an STS(21) with nine Fano
/// subsystems.
pub fn order_108_orbit_data() -> (Vec<Permutation>, Vec<Block>) {
    let g1 = Permutation::from_cycles(
        21,
        &[&[0, 9, 19], &[2, 10, 16], &[3, 4, 20, 8, 7, 18], &[5, 6, 15, 14, 11, 13]],
    )
    .expect("valid cycles");
    let g2 = Permutation::from_cycles(
        21,
        &[&[0, 3, 4], &[2, 5, 6], &[7, 8, 9, 20, 18, 19], &[10, 15, 13, 16, 11, 14], &[12, 17]],
    )
    .expect("valid cycles");
    let reps = vec![
        [0, 1, 2],
        [0, 3, 6],
        [0, 9, 19],
        [0, 10, 17],
        [1, 12, 17],
        [2, 5, 6],
        [2, 10, 16],
    ];
    (vec![g1, g2], reps)
}

/// The STS(21) generated by [`order_108_orbit_data`].
pub fn order_108_design() -> TripleSystem {
    let (gens, reps) = order_108_orbit_data();
    construct_from_group_orbits(21, &gens, &reps).expect("valid orbit data")
}

/// Two disjoint cyclic Fano planes on points `0..7` and `7..14`.
pub fn double_fano_configuration() -> Configuration {
    let fano = cyclic_fano();
    let blocks = fano
        .blocks()
        .iter()
        .flat_map(|&[a, b, c]| [[a, b, c], [a + 7, b + 7, c + 7]]);
    Configuration::new(14, 3, blocks).expect("valid by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_orders() {
        assert!(is_admissible_order(21));
        assert!(is_admissible_order(3));
        assert!(!is_admissible_order(8));
        let small: Vec<u64> = (1..20).filter(|&v| is_admissible_order(v)).collect();
        assert_eq!(small, vec![1, 3, 7, 9, 13, 15, 19]);
    }

    #[test]
    fn fano_validates_and_broken_fano_does_not() {
        let fano = cyclic_fano();
        assert_eq!(
            fano.blocks(),
            &[[0, 1, 3], [0, 2, 6], [0, 4, 5], [1, 2, 4], [1, 5, 6], [2, 3, 5], [3, 4, 6]]
        );
        assert_eq!(validate_sts(&fano), Ok(()));
        let broken = TripleSystem::new(7, fano.blocks()[1..].iter().copied()).unwrap();
        assert_eq!(validate_sts(&broken), Err(Violation::PairUncovered(0, 1)));
        let doubled = TripleSystem::new(7, fano.blocks().iter().copied().chain([[0, 1, 2]])).unwrap();
        assert!(matches!(validate_sts(&doubled), Err(Violation::PairRepeated(..))));
    }

    #[test]
    fn out_of_range_points_are_input_errors() {
        assert!(matches!(TripleSystem::new(7, [[0, 1, 7]]), Err(Error::Input(_))));
        assert!(matches!(TripleSystem::new(7, [[0, 1, 1]]), Err(Error::Input(_))));
    }

    #[test]
    fn order_108_example_is_an_sts21() {
        let s = order_108_design();
        assert_eq!(s.v(), 21);
        assert_eq!(s.blocks().len(), 70);
        assert_eq!(validate_sts(&s), Ok(()));
        let (gens, _) = order_108_orbit_data();
        assert!(gens.iter().all(|g| s.is_automorphism(g)));
    }

    #[test]
    fn orbit_construction_small_cases() {
        let fano = cyclic_fano();
        let same = construct_from_group_orbits(7, &[Permutation::identity(7)], fano.blocks()).unwrap();
        assert_eq!(same, fano);
        let rot = Permutation::from_cycles(9, &[&[0, 1, 2]]).unwrap();
        let one = construct_from_group_orbits(9, &[rot], &[[0, 1, 2]]).unwrap();
        assert_eq!(one.blocks(), &[[0, 1, 2]]);
    }

    #[test]
    fn configuration_validation() {
        let c = Configuration::new(4, 2, [[0, 1, 2], [0, 1, 3]]).unwrap();
        assert!(matches!(validate_configuration(&c), Err(Violation::BlocksShareTwoPoints(..))));
        assert_eq!(validate_configuration(&double_fano_configuration()), Ok(()));
        assert_eq!(validate_configuration(&Configuration::new(8, 0, []).unwrap()), Ok(()));
        let short = Configuration::new(4, 1, [[0, 1, 2]]).unwrap();
        assert_eq!(
            validate_configuration(&short),
            Err(Violation::Replication { point: 3, found: 0, expected: 1 })
        );
    }

    #[test]
    fn underlying_graphs() {
        let empty = underlying_graph(&Configuration::new(8, 0, []).unwrap()).unwrap();
        assert_eq!(empty.edge_count(), 0);
        let tri = underlying_graph(&Configuration::new(3, 1, [[0, 1, 2]]).unwrap()).unwrap();
        assert_eq!(tri, PackedGraph::complete(3).unwrap());
        let df = underlying_graph(&double_fano_configuration()).unwrap();
        assert_eq!(df.regular_degree(), Some(6));
        assert_eq!(df.components(), vec![0x7f, 0x7f << 7]);
    }

    #[test]
    fn text_formats_are_exact() {
        let fano = cyclic_fano();
        let text = fano.to_text();
        assert_eq!(
            text,
            "sts v=7 b=7\n0 1 3\n0 2 6\n0 4 5\n1 2 4\n1 5 6\n2 3 5\n3 4 6\n"
        );
        assert_eq!(TripleSystem::read_from(text.as_bytes()).unwrap(), fano);
        let cfg = Configuration::new(3, 1, [[0, 1, 2]]).unwrap();
        assert_eq!(cfg.to_text(), "cfg m=3 r=1 b=1\n0 1 2\n");
        assert_eq!(Configuration::read_from(cfg.to_text().as_bytes()).unwrap(), cfg);
    }

    #[test]
    fn text_format_errors() {
        assert!(TripleSystem::read_from("sts v=7 b=2\n0 1 3\n".as_bytes()).is_err());
        assert!(TripleSystem::read_from("sts v=7 b=2\n0 2 6\n0 1 3\n".as_bytes()).is_err());
        assert!(TripleSystem::read_from("sts v=7\n".as_bytes()).is_err());
        assert!(TripleSystem::read_from("cfg v=7 b=0\n".as_bytes()).is_err());
        assert!(TripleSystem::read_from("sts v=7 b=1\n0 1 9\n".as_bytes()).is_err());
    }
}
