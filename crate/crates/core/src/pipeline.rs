//! Extension of a configuration on `v - 7` points to Steiner triple
//! systems of order `v` in which the last seven points carry a Fano plane.
//!
//! The complement of the configuration's underlying graph is 7-regular.
//! A 1-factorization of it, with factor `i` attached to point `v - 7 + i`,
//! gives the blocks meeting the Fano points once; a labelled Fano plane on
//! those points completes the design. Isomorphs are rejected by keeping
//! only group-orbit minima at both stages and, when the design has several
//! Fano subsystems, keeping it only for the canonically first orbit.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::ops::ControlFlow;

use crate::canon::{canonical_sts, canonical_subsystem_ranking};
use crate::configgen::ConfigRecord;
use crate::design::{cyclic_fano, sorted_block, validate_sts, Block, TripleSystem};
use crate::error::{Error, Result};
use crate::factor::{Factor, Factorization};
use crate::graph::PackedGraph;
use crate::group::PermutationGroup;
use crate::kernels::{perfect_matchings, EdgeIndex, FactorizationSearch};
use crate::perm::Permutation;
use crate::subsys::{find_subsystems, intersection_stats};

/// Order of the particularized subsystem.
pub const W: usize = 7;

/// Groups up to this order are scanned element by element when testing
/// orbit minimality; larger ones are explored orbit-wise from generators.
pub const ELEMENT_SCAN_LIMIT: u128 = 5040;

/// A design split by how its blocks meet `W = {v-7, ..., v-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionedSts {
    pub v: usize,
    /// Blocks avoiding `W`.
    pub d_blocks: Vec<Block>,
    /// Blocks meeting `W` once, grouped by their `W` point.
    pub f_blocks: Vec<Vec<Block>>,
    /// Blocks inside `W`.
    pub fano_blocks: Vec<Block>,
}

impl PartitionedSts {
    pub fn w_points(&self) -> Vec<usize> {
        (self.v - W..self.v).collect()
    }

    pub fn design(&self) -> Result<TripleSystem> {
        let all = self
            .d_blocks
            .iter()
            .chain(self.f_blocks.iter().flatten())
            .chain(&self.fano_blocks)
            .copied();
        TripleSystem::new(self.v, all)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptedDesign {
    pub design: TripleSystem,
    pub particularized_subsystem: Vec<usize>,
    pub aut_order: u128,
    pub u: usize,
    pub i1: usize,
    pub i3: usize,
    pub canonical_hex: String,
}

/// Factors of a factorization are compared by their ascending edge lists.
/// With edges indexed in lexicographic order, a factor whose lowest
/// differing edge index is set comes first, which is what this key orders.
fn factor_key(mask: u64) -> u64 {
    !mask.reverse_bits()
}

fn key_mask(key: u64) -> u64 {
    (!key).reverse_bits()
}

/// Edge-level view of one complement graph and a group acting on it.
struct FactorSpace<'a> {
    idx: EdgeIndex,
    group: &'a PermutationGroup,
    /// Edge images under every element, when the group is small enough.
    element_maps: Option<Vec<Vec<u8>>>,
    generator_maps: Vec<Vec<u8>>,
}

impl<'a> FactorSpace<'a> {
    fn new(g: &PackedGraph, group: &'a PermutationGroup) -> Result<Self> {
        if group.degree() != g.n() {
            return Err(Error::input(format!(
                "group acts on {} points, graph has {}",
                group.degree(),
                g.n()
            )));
        }
        if g.n() > 0 && g.regular_degree() != Some(W) {
            return Err(Error::input(format!("complement graph must be {W}-regular")));
        }
        let idx = EdgeIndex::new(g);
        if idx.len() > 64 {
            return Err(Error::input("complement graph has more than 64 edges"));
        }
        let edge_map = |p: &Permutation| -> Result<Vec<u8>> {
            idx.edges()
                .iter()
                .map(|&(a, b)| {
                    idx.get(p.apply(a), p.apply(b))
                        .map(|e| e as u8)
                        .ok_or_else(|| Error::consistency("group element does not preserve the graph"))
                })
                .collect()
        };
        let element_maps = if group.order() <= ELEMENT_SCAN_LIMIT {
            Some(group.elements()?.iter().map(edge_map).collect::<Result<Vec<_>>>()?)
        } else {
            None
        };
        let generator_maps = group.generators().iter().map(edge_map).collect::<Result<Vec<_>>>()?;
        Ok(FactorSpace {
            idx,
            group,
            element_maps,
            generator_maps,
        })
    }

    fn keys_of(&self, f: &Factorization) -> Result<Vec<u64>> {
        let mut keys = f
            .factors()
            .iter()
            .map(|x| {
                self.idx
                    .mask_of(x)
                    .map(factor_key)
                    .ok_or_else(|| Error::input("factor edge not in the graph"))
            })
            .collect::<Result<Vec<_>>>()?;
        keys.sort_unstable();
        Ok(keys)
    }

    fn factorization_of(&self, keys: &[u64]) -> Factorization {
        Factorization::new(keys.iter().map(|&k| self.idx.factor_of_mask(key_mask(k))).collect())
            .expect("disjoint factors")
    }

    fn image(map: &[u8], keys: &[u64], out: &mut Vec<u64>) {
        out.clear();
        for &k in keys {
            let mut mask = key_mask(k);
            let mut img = 0u64;
            while mask != 0 {
                let e = mask.trailing_zeros() as usize;
                mask &= mask - 1;
                img |= 1 << map[e];
            }
            out.push(factor_key(img));
        }
        out.sort_unstable();
    }

    /// The stabilizer of `keys` if it is the least element of its orbit.
    fn lexmin_stabilizer(&self, keys: &[u64]) -> Result<Option<PermutationGroup>> {
        let mut img = Vec::with_capacity(keys.len());
        if let Some(maps) = &self.element_maps {
            let elements = self.group.elements()?;
            let mut stab = Vec::new();
            for (g, map) in elements.iter().zip(maps) {
                Self::image(map, keys, &mut img);
                match img.as_slice().cmp(keys) {
                    std::cmp::Ordering::Less => return Ok(None),
                    std::cmp::Ordering::Equal => stab.push(g.clone()),
                    std::cmp::Ordering::Greater => {}
                }
            }
            return Ok(Some(PermutationGroup::from_closed_elements(self.group.degree(), stab)));
        }
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        seen.insert(keys.to_vec());
        let mut queue = vec![keys.to_vec()];
        while let Some(x) = queue.pop() {
            for map in &self.generator_maps {
                Self::image(map, &x, &mut img);
                if img.as_slice() < keys {
                    return Ok(None);
                }
                if !seen.contains(&img) {
                    seen.insert(img.clone());
                    queue.push(img.clone());
                }
            }
        }
        let stab = self.stabilizer(keys)?;
        if stab.order() * seen.len() as u128 != self.group.order() {
            return Err(Error::consistency("orbit and stabilizer sizes disagree with the group order"));
        }
        Ok(Some(stab))
    }

    fn stabilizer(&self, keys: &[u64]) -> Result<PermutationGroup> {
        let mut img = Vec::with_capacity(keys.len());
        let mut stab = Vec::new();
        for g in self.group.elements()? {
            let map: Vec<u8> = self
                .idx
                .edges()
                .iter()
                .map(|&(a, b)| self.idx.get(g.apply(a), g.apply(b)).expect("preserved") as u8)
                .collect();
            Self::image(&map, keys, &mut img);
            if img.as_slice() == keys {
                stab.push(g.clone());
            }
        }
        Ok(PermutationGroup::from_closed_elements(self.group.degree(), stab))
    }

    /// Streams every unordered factorization as sorted keys.
    fn for_each(&self, g: &PackedGraph, mut visit: impl FnMut(&[u64]) -> ControlFlow<()>) -> bool {
        let masks: Vec<u64> = perfect_matchings(g)
            .iter()
            .map(|f| self.idx.mask_of(f).expect("matching edges lie in g"))
            .collect();
        let search = FactorizationSearch::new(g, &self.idx, &masks).expect("at most 64 edges");
        let mut keys = Vec::with_capacity(W);
        let outcome = search.run(|sol| {
            keys.clear();
            keys.extend(sol.iter().map(|&m| factor_key(m)));
            keys.sort_unstable();
            visit(&keys)
        });
        !outcome.aborted
    }
}

/// Orbit-minimal 1-factorizations of `g` under `a`, each with its
/// stabilizer in `a`.
pub fn lexmin_factorizations(g: &PackedGraph, a: &PermutationGroup) -> Result<Vec<(Factorization, PermutationGroup)>> {
    let space = FactorSpace::new(g, a)?;
    let mut out = Vec::new();
    let mut err = None;
    space.for_each(g, |keys| match space.lexmin_stabilizer(keys) {
        Ok(Some(stab)) => {
            out.push((space.factorization_of(keys), stab));
            ControlFlow::Continue(())
        }
        Ok(None) => ControlFlow::Continue(()),
        Err(e) => {
            err = Some(e);
            ControlFlow::Break(())
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

/// `Some(stabilizer)` when `f` is the least element of its `a`-orbit.
pub fn factorization_lexmin_stabilizer(
    g: &PackedGraph,
    a: &PermutationGroup,
    f: &Factorization,
) -> Result<Option<PermutationGroup>> {
    let space = FactorSpace::new(g, a)?;
    space.lexmin_stabilizer(&space.keys_of(f)?)
}

/// Image of a factorization under a point permutation, factors sorted in
/// the pipeline's factor order.
pub fn permute_factorization(f: &Factorization, p: &Permutation) -> Factorization {
    let mut factors: Vec<Factor> = f
        .factors()
        .iter()
        .map(|x| Factor::new(x.edges().iter().map(|&(a, b)| (p.apply(a as usize), p.apply(b as usize)))).expect("bijective image"))
        .collect();
    factors.sort();
    Factorization::new(factors).expect("disjoint image")
}

/// Blocks meeting `W` once: factor `i` is attached to point `v - 7 + i`.
pub fn assemble_f_blocks(fact: &Factorization, v: usize) -> Result<Vec<Vec<Block>>> {
    if fact.len() != W {
        return Err(Error::input(format!("need {W} factors, got {}", fact.len())));
    }
    if v < W || v > u8::MAX as usize {
        return Err(Error::input(format!("bad order {v}")));
    }
    let base = v - W;
    fact.factors()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            f.edges()
                .iter()
                .map(|&(a, b)| {
                    if a as usize >= base || b as usize >= base {
                        return Err(Error::input(format!("edge ({a},{b}) reaches into W")));
                    }
                    Ok(sorted_block(a, b, (base + i) as u8))
                })
                .collect()
        })
        .collect()
}

/// Extends each element of `a1` to all `v` points, sending `v - 7 + i` to
/// `v - 7 + j` when the element maps factor `i` onto factor `j`.
pub fn extend_group(a1: &PermutationGroup, fact: &Factorization, v: usize) -> Result<PermutationGroup> {
    let m = a1.degree();
    if m + W != v || fact.len() != W {
        return Err(Error::input("group degree, factor count and order do not fit"));
    }
    let factors = fact.factors();
    let mut out = Vec::new();
    for g in a1.elements()? {
        let mut image: Vec<usize> = (0..m).map(|x| g.apply(x)).collect();
        for f in factors {
            let moved = Factor::new(f.edges().iter().map(|&(a, b)| (g.apply(a as usize), g.apply(b as usize))))?;
            let j = factors
                .iter()
                .position(|h| *h == moved)
                .ok_or_else(|| Error::consistency("group element does not permute the factors"))?;
            image.push(m + j);
        }
        out.push(Permutation::from_images(image)?);
    }
    Ok(PermutationGroup::from_closed_elements(v, out))
}

/// The 30 labelled Fano planes on points `0..7`, each as a sorted block
/// list, in increasing order.
pub fn fano_candidates() -> Vec<Vec<Block>> {
    let base = cyclic_fano();
    let mut seen: HashSet<Vec<Block>> = HashSet::new();
    let mut perm: Vec<usize> = (0..W).collect();
    loop {
        let p = Permutation::from_images(perm.clone()).expect("permutation");
        seen.insert(base.permuted(&p).blocks().to_vec());
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let mut out: Vec<Vec<Block>> = seen.into_iter().collect();
    out.sort();
    out
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).expect("exists");
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

fn permute_fano(blocks: &[Block], p: &[u8; W]) -> Vec<Block> {
    let mut out: Vec<Block> = blocks
        .iter()
        .map(|b| sorted_block(p[b[0] as usize], p[b[1] as usize], p[b[2] as usize]))
        .collect();
    out.sort_unstable();
    out
}

/// Orbit-minimal Fano candidates under the action of `a2` on the last
/// seven points, each with its stabilizer in `a2`.
pub fn lexmin_fanos(a2: &PermutationGroup) -> Result<Vec<(Vec<Block>, PermutationGroup)>> {
    let v = a2.degree();
    if v < W {
        return Err(Error::input("group acts on fewer than 7 points"));
    }
    let elements = a2.elements()?;
    let on_w = elements
        .iter()
        .map(|g| {
            let r = g
                .restrict(v - W, W)
                .ok_or_else(|| Error::consistency("group element does not fix the Fano point set"))?;
            let mut p = [0u8; W];
            for (x, slot) in p.iter_mut().enumerate() {
                *slot = r.apply(x) as u8;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    'cand: for c in fano_candidates() {
        let mut stab = Vec::new();
        for (g, p) in elements.iter().zip(&on_w) {
            let img = permute_fano(&c, p);
            match img.cmp(&c) {
                std::cmp::Ordering::Less => continue 'cand,
                std::cmp::Ordering::Equal => stab.push(g.clone()),
                std::cmp::Ordering::Greater => {}
            }
        }
        out.push((c, PermutationGroup::from_closed_elements(v, stab)));
    }
    Ok(out)
}

/// Accepts the design when `W` is its only Fano subsystem, or when `W`
/// lies in the canonically first orbit of its Fano subsystems.
pub fn final_accept(design: &PartitionedSts, a3: &PermutationGroup) -> Result<Option<AcceptedDesign>> {
    let s = design.design()?;
    if let Err(v) = validate_sts(&s) {
        return Err(Error::consistency(format!("assembled design is not a Steiner triple system: {v}")));
    }
    let w = design.w_points();
    let subs = find_subsystems(&s, W);
    let Some(w_at) = subs.iter().position(|x| *x == w) else {
        return Err(Error::consistency("the Fano point set is not a subsystem"));
    };
    for x in &subs {
        let common = x.iter().filter(|p| w.contains(p)).count();
        if x != &w && common != 1 && common != 3 {
            return Err(Error::consistency(format!("subsystem {x:?} meets W in {common} points")));
        }
    }
    let (u, i1, i3) = intersection_stats(&subs)?;
    let canon = canonical_sts(&s)?;
    if subs.len() == 1 {
        if canon.automorphism_order != a3.order() {
            return Err(Error::consistency(format!(
                "design has {} automorphisms but the stage group has order {}",
                canon.automorphism_order,
                a3.order()
            )));
        }
    } else {
        let ranking = canonical_subsystem_ranking(&s, &subs)?;
        if !ranking.orbits[0].contains(&w_at) {
            return Ok(None);
        }
    }
    Ok(Some(AcceptedDesign {
        design: s,
        particularized_subsystem: w,
        aut_order: canon.automorphism_order,
        u,
        i1,
        i3,
        canonical_hex: canon.canonical_hex(),
    }))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Stop after this many factorizations have been visited.
    pub factorization_cap: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineStats {
    /// Factorizations visited (all of them when `complete`).
    pub factorizations: u64,
    pub complete: bool,
    pub accepted_factorizations: u64,
    /// Sum of `|A| / |A'|` over accepted factorizations.
    pub factorization_orbit_sum: u128,
    pub accepted_fanos: u64,
    pub accepted_designs: u64,
}

/// Runs every stage for one configuration, handing accepted designs to
/// `sink` in a deterministic order.
pub fn run_pipeline(
    record: &ConfigRecord,
    v: usize,
    opts: PipelineOptions,
    mut sink: impl FnMut(AcceptedDesign) -> Result<()>,
) -> Result<PipelineStats> {
    let m = record.config.m();
    if m + W != v {
        return Err(Error::input(format!("configuration has {m} points, order {v} needs {}", v.saturating_sub(W))));
    }
    if record.wilson_flag {
        return Err(Error::input("the double-Fano configuration is excluded"));
    }
    let g = &record.complement;
    let space = FactorSpace::new(g, &record.aut)?;
    let mut stats = PipelineStats::default();
    let mut err = None;
    let finished = space.for_each(g, |keys| {
        if opts.factorization_cap.is_some_and(|cap| stats.factorizations >= cap) {
            return ControlFlow::Break(());
        }
        stats.factorizations += 1;
        let step = (|| -> Result<()> {
            let Some(a1) = space.lexmin_stabilizer(keys)? else {
                return Ok(());
            };
            stats.accepted_factorizations += 1;
            stats.factorization_orbit_sum += record.aut.order() / a1.order();
            let fact = space.factorization_of(keys);
            extend_factorization(record, v, &fact, &a1, &mut stats, &mut sink)
        })();
        match step {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                err = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    stats.complete = finished;
    Ok(stats)
}

/// Fano and final stages for one accepted factorization with stabilizer
/// `a1`.
pub fn extend_factorization(
    record: &ConfigRecord,
    v: usize,
    fact: &Factorization,
    a1: &PermutationGroup,
    stats: &mut PipelineStats,
    sink: &mut impl FnMut(AcceptedDesign) -> Result<()>,
) -> Result<()> {
    let f_blocks = assemble_f_blocks(fact, v)?;
    let a2 = extend_group(a1, fact, v)?;
    let base = (v - W) as u8;
    let mut fano_sum = 0u128;
    for (fano, a3) in lexmin_fanos(&a2)? {
        fano_sum += a2.order() / a3.order();
        stats.accepted_fanos += 1;
        let parts = PartitionedSts {
            v,
            d_blocks: record.config.blocks().to_vec(),
            f_blocks: f_blocks.clone(),
            fano_blocks: fano.iter().map(|b| b.map(|x| x + base)).collect(),
        };
        if let Some(d) = final_accept(&parts, &a3)? {
            stats.accepted_designs += 1;
            sink(d)?;
        }
    }
    if fano_sum != 30 {
        return Err(Error::consistency(format!("Fano orbits cover {fano_sum} of 30 candidates")));
    }
    Ok(())
}

/// One ledger line per accepted design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerRow {
    pub config_index: usize,
    pub design_seq: u64,
    pub aut_order: u128,
    pub u: usize,
    pub i1: usize,
    pub i3: usize,
    pub canonical_hex: String,
}

pub const LEDGER_HEADER: &str = "config_index,design_seq,aut_order,U,I1,I3,canonical_hex";

/// Per-configuration totals used by the mass check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatsRow {
    pub config_index: usize,
    pub aut_order: u128,
    /// Unordered 1-factorizations visited.
    pub factorizations: u64,
    pub complete: bool,
    pub designs: u64,
}

pub const STATS_HEADER: &str = "config_index,aut_order,factorizations,complete,designs";

impl LedgerRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.config_index, self.design_seq, self.aut_order, self.u, self.i1, self.i3, self.canonical_hex
        )
    }
}

impl StatsRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.config_index, self.aut_order, self.factorizations, self.complete as u8, self.designs
        )
    }
}

fn fields<const N: usize>(line: &str, line_no: usize) -> Result<[&str; N]> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| Error::parse(line_no, format!("expected {N} fields, found {}", p.len())))
}

fn num<T: std::str::FromStr>(s: &str, line_no: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| Error::parse(line_no, format!("{s:?}: {e}")))
}

fn data_lines(r: impl BufRead, header: &str) -> impl Iterator<Item = Result<(usize, String)>> {
    let header = header.to_string();
    r.lines().enumerate().filter_map(move |(i, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(l) if l.trim().is_empty() || l.trim() == header => None,
        Ok(l) => Some(Ok((i + 1, l))),
    })
}

pub fn write_ledger(mut w: impl Write, rows: &[LedgerRow]) -> Result<()> {
    writeln!(w, "{LEDGER_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

/// Reads ledger rows; header lines may appear anywhere (concatenated
/// segments).
pub fn read_ledger(r: impl BufRead) -> Result<Vec<LedgerRow>> {
    data_lines(r, LEDGER_HEADER)
        .map(|item| {
            let (n, line) = item?;
            let f: [&str; 7] = fields(&line, n)?;
            Ok(LedgerRow {
                config_index: num(f[0], n)?,
                design_seq: num(f[1], n)?,
                aut_order: num(f[2], n)?,
                u: num(f[3], n)?,
                i1: num(f[4], n)?,
                i3: num(f[5], n)?,
                canonical_hex: f[6].to_string(),
            })
        })
        .collect()
}

pub fn write_stats(mut w: impl Write, rows: &[StatsRow]) -> Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn read_stats(r: impl BufRead) -> Result<Vec<StatsRow>> {
    data_lines(r, STATS_HEADER)
        .map(|item| {
            let (n, line) = item?;
            let f: [&str; 5] = fields(&line, n)?;
            let complete = match f[3] {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(n, format!("bad completeness flag {other:?}"))),
            };
            Ok(StatsRow {
                config_index: num(f[0], n)?,
                aut_order: num(f[1], n)?,
                factorizations: num(f[2], n)?,
                complete,
                designs: num(f[4], n)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configgen::record_for;
    use crate::design::Configuration;

    fn empty8() -> ConfigRecord {
        record_for(Configuration::new(8, 0, []).unwrap()).unwrap()
    }

    #[test]
    fn thirty_fanos() {
        let c = fano_candidates();
        assert_eq!(c.len(), 30);
        for f in &c {
            let s = TripleSystem::new(7, f.iter().copied()).unwrap();
            assert!(validate_sts(&s).is_ok());
        }
        let trivial = PermutationGroup::trivial(15);
        assert_eq!(lexmin_fanos(&trivial).unwrap().len(), 30);
    }

    #[test]
    fn symmetric_group_on_w_leaves_one_fano() {
        let gens = vec![
            Permutation::from_cycles(15, &[&[8, 9]]).unwrap(),
            Permutation::from_cycles(15, &[&[8, 9, 10, 11, 12, 13, 14]]).unwrap(),
        ];
        let s7 = PermutationGroup::from_generators(15, gens).unwrap();
        let kept = lexmin_fanos(&s7).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].1.order(), 168);
    }

    #[test]
    fn k8_factorization_orbits() {
        let rec = empty8();
        let kept = lexmin_factorizations(&rec.complement, &rec.aut).unwrap();
        assert_eq!(kept.len(), 6);
        let total: u128 = kept.iter().map(|(_, s)| 40320 / s.order()).sum();
        assert_eq!(total, 6240);
    }

    #[test]
    fn f_blocks_cover_w_pairs() {
        let rec = empty8();
        let (f, a1) = lexmin_factorizations(&rec.complement, &rec.aut).unwrap().remove(0);
        let blocks = assemble_f_blocks(&f, 15).unwrap();
        assert_eq!(blocks.iter().map(Vec::len).sum::<usize>(), 28);
        let mut pairs = HashSet::new();
        for (i, group) in blocks.iter().enumerate() {
            for b in group {
                assert!(b.contains(&((8 + i) as u8)));
                for &x in b.iter().filter(|&&x| x < 8) {
                    assert!(pairs.insert((x, 8 + i)));
                }
            }
        }
        assert_eq!(pairs.len(), 56);
        let a2 = extend_group(&a1, &f, 15).unwrap();
        assert_eq!(a2.order(), a1.order());
        assert!(assemble_f_blocks(&Factorization::new(vec![]).unwrap(), 15).is_err());
    }

    #[test]
    fn extension_follows_factor_images() {
        let rec = empty8();
        let (f, _) = lexmin_factorizations(&rec.complement, &rec.aut).unwrap().remove(0);
        let stab = factorization_lexmin_stabilizer(&rec.complement, &rec.aut, &f).unwrap().unwrap();
        let a2 = extend_group(&stab, &f, 15).unwrap();
        for g in a2.elements().unwrap() {
            let restricted = g.restrict(0, 8).unwrap();
            for (i, factor) in f.factors().iter().enumerate() {
                let img = permute_factorization(&Factorization::new(vec![factor.clone()]).unwrap(), &restricted);
                let j = g.apply(8 + i) - 8;
                assert_eq!(&img.factors()[0], &f.factors()[j]);
            }
        }
        let swap = Permutation::from_cycles(8, &[&[0, 1]]).unwrap();
        assert_ne!(permute_factorization(&f, &swap), f);
        let bad = PermutationGroup::from_generators(8, vec![swap]).unwrap();
        assert!(extend_group(&bad, &f, 15).is_err());
    }

    #[test]
    fn v15_pipeline_runs() {
        let rec = empty8();
        let mut designs = Vec::new();
        let stats = run_pipeline(&rec, 15, PipelineOptions::default(), |d| {
            designs.push(d);
            Ok(())
        })
        .unwrap();
        assert!(stats.complete);
        assert_eq!(stats.factorizations, 6240);
        assert_eq!(stats.factorization_orbit_sum, 6240);
        let hexes: HashSet<&String> = designs.iter().map(|d| &d.canonical_hex).collect();
        assert_eq!(hexes.len(), designs.len());
        for d in &designs {
            assert!(validate_sts(&d.design).is_ok());
            assert!(d.u >= 1);
        }
    }

    #[test]
    fn ledger_round_trip() {
        let rows = vec![LedgerRow {
            config_index: 3,
            design_seq: 0,
            aut_order: 108,
            u: 9,
            i1: 9,
            i3: 27,
            canonical_hex: "ab".into(),
        }];
        let mut buf = Vec::new();
        write_ledger(&mut buf, &rows).unwrap();
        write_ledger(&mut buf, &rows).unwrap();
        assert_eq!(read_ledger(buf.as_slice()).unwrap(), [rows.clone(), rows].concat());
        let stats = vec![StatsRow {
            config_index: 0,
            aut_order: 40320,
            factorizations: 6240,
            complete: true,
            designs: 5,
        }];
        let mut buf = Vec::new();
        write_stats(&mut buf, &stats).unwrap();
        assert_eq!(read_stats(buf.as_slice()).unwrap(), stats);
        assert!(read_ledger("1,2,3\n".as_bytes()).is_err());
    }
}
