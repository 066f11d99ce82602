//! Independent checks and estimates around the pipeline: a direct
//! classifier for small Steiner triple systems, the orbit-stabilizer mass
//! comparison, ledger aggregation and the asymptotic estimates.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::canon::{canonical_form, canonical_sts, encode_sts};
use crate::design::{is_admissible_order, sorted_block, Block, TripleSystem};
use crate::error::{Error, Result};
use crate::graph::PackedGraph;
use crate::kernels::for_each_perfect_matching;
use crate::pipeline::{LedgerRow, StatsRow};

/// Largest order handled by [`classify_small_sts`].
pub const SMALL_STS_LIMIT: usize = 15;

/// Labelled Fano planes on seven fixed points.
pub const LABELLED_FANO_PLANES: u64 = 30;

/// Isomorphism classes of STS(21) with a sub-STS(7), in total and of
/// non-Wilson type.
pub const STS21_WITH_FANO: u64 = 116_635_963_205_551;
pub const STS21_WITH_FANO_NON_WILSON: u64 = 116_635_961_039_200;
/// Kirkman triple systems of order 21 with a sub-STS(7).
pub const KTS21_WITH_FANO: u64 = 12_520_021;
/// STS(19) with a sub-STS(7), and all STS(19).
pub const STS19_WITH_FANO: u64 = 86_701_547;
pub const STS19_TOTAL: u64 = 11_084_874_829;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallSts {
    pub design: TripleSystem,
    pub aut_order: u128,
    pub canonical_hex: String,
}

/// One representative per isomorphism class of STS(v), `v <= 15`, sorted
/// by canonical form.
///
/// Points are completed one at a time: a partial system is extended by all
/// ways of covering the missing pairs at one chosen point, and partial
/// systems are deduplicated by canonical form after each step. The chosen
/// point (highest degree, ties broken by canonical position) depends only
/// on the isomorphism class, so every STS(v) is reached.
pub fn classify_small_sts(v: usize) -> Result<Vec<SmallSts>> {
    if v > SMALL_STS_LIMIT {
        return Err(Error::input(format!("order {v} is above the limit {SMALL_STS_LIMIT}")));
    }
    if !is_admissible_order(v as u64) {
        return Ok(Vec::new());
    }
    let total = v * (v - 1) / 6;
    let full = (v - 1) / 2;
    // every point star is alike, so start from the star of point 0
    let star: Vec<Block> = (0..full).map(|i| [0, 2 * i as u8 + 1, 2 * i as u8 + 2]).collect();
    let mut done: BTreeMap<Vec<u8>, (Vec<Block>, u128)> = BTreeMap::new();
    let mut level: BTreeMap<Vec<u8>, Vec<Block>> = BTreeMap::new();
    if star.len() == total {
        let s = TripleSystem::new(v, star.iter().copied())?;
        let c = canonical_sts(&s)?;
        done.insert(c.canonical_bytes, (star, c.automorphism_order));
    } else {
        level.insert(Vec::new(), star);
    }
    while !level.is_empty() {
        let children: Vec<Vec<Child>> = level
            .into_values()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|blocks| complete_one_point(v, full, &blocks))
            .collect::<Result<_>>()?;
        let mut next = BTreeMap::new();
        for (bytes, blocks, aut) in children.into_iter().flatten() {
            if blocks.len() == total {
                done.entry(bytes).or_insert((blocks, aut));
            } else {
                next.entry(bytes).or_insert(blocks);
            }
        }
        level = next;
    }
    done.into_iter()
        .map(|(bytes, (blocks, aut_order))| {
            Ok(SmallSts {
                design: TripleSystem::new(v, blocks)?,
                aut_order,
                canonical_hex: hex::encode(bytes),
            })
        })
        .collect()
}

/// Canonical bytes, blocks, and the automorphism order once complete.
type Child = (Vec<u8>, Vec<Block>, u128);

fn complete_one_point(v: usize, full: usize, blocks: &[Block]) -> Result<Vec<Child>> {
    let s = TripleSystem::new(v, blocks.iter().copied())?;
    let canon = canonical_form(&encode_sts(&s))?;
    let mut deg = vec![0usize; v];
    let mut covered = vec![0u64; v];
    for b in blocks {
        let [a, x, y] = b.map(|p| p as usize);
        deg[a] += 1;
        deg[x] += 1;
        deg[y] += 1;
        covered[a] |= 1 << x | 1 << y;
        covered[x] |= 1 << a | 1 << y;
        covered[y] |= 1 << a | 1 << x;
    }
    let x = (0..v)
        .filter(|&x| deg[x] < full)
        .max_by_key(|&x| (deg[x], std::cmp::Reverse(canon.canonical_labeling.apply(x))))
        .expect("an incomplete point exists");
    let open: Vec<usize> = (0..v).filter(|&y| y != x && covered[x] >> y & 1 == 0).collect();
    let mut g = PackedGraph::empty(open.len())?;
    for (i, &a) in open.iter().enumerate() {
        for (j, &b) in open.iter().enumerate().skip(i + 1) {
            if covered[a] >> b & 1 == 0 {
                g.add_edge(i, j)?;
            }
        }
    }
    let mut out = Vec::new();
    let mut err = None;
    for_each_perfect_matching(&g, |pairs| {
        if err.is_some() {
            return;
        }
        let mut next = blocks.to_vec();
        next.extend(pairs.iter().map(|&(i, j)| sorted_block(x as u8, open[i] as u8, open[j] as u8)));
        next.sort_unstable();
        let complete = next.len() * 6 == v * (v - 1);
        let res = TripleSystem::new(v, next.iter().copied()).and_then(|s| {
            if complete {
                canonical_sts(&s)
            } else {
                canonical_form(&encode_sts(&s))
            }
        });
        match res {
            Ok(c) => out.push((c.canonical_bytes, next, c.automorphism_order)),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).map(BigUint::from).product()
}

/// `n! / order`, failing unless the order divides `n!`.
fn labelled_copies(n: usize, order: u128) -> Result<BigUint> {
    let nf = factorial(n);
    let d = BigUint::from(order);
    if order == 0 || &nf % &d != BigUint::ZERO {
        return Err(Error::consistency(format!("group order {order} does not divide {n}!")));
    }
    Ok(nf / d)
}

/// Number of labelled STS(v) on fixed points, from the classification.
pub fn labelled_sts_count(v: usize) -> Result<BigUint> {
    classify_small_sts(v)?
        .iter()
        .map(|s| labelled_copies(v, s.aut_order))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MassCheck {
    /// Labelled pairs (design, Fano subsystem) counted from the designs.
    pub lhs: BigUint,
    /// The same pairs counted from configurations and factorizations.
    pub rhs: BigUint,
    /// Every configuration was fully processed.
    pub complete: bool,
    /// `lhs == rhs` on a complete scope.
    pub equal: bool,
}

/// Sum over designs of `v! / |Aut| * U`.
pub fn mass_lhs(v: usize, ledger: &[LedgerRow]) -> Result<BigUint> {
    ledger
        .iter()
        .map(|r| Ok(labelled_copies(v, r.aut_order)? * BigUint::from(r.u)))
        .sum()
}

/// Sum over configurations of `v! / |A| * 30 * f`, with `f` the number of
/// unordered 1-factorizations of the complement graph. A labelled pair is
/// a choice of the seven Fano points, a labelled configuration on the
/// rest, a labelled Fano plane and a factorization with factors labelled
/// by the Fano points; the binomial, `(v-7)!` and `7!` multiply to `v!`.
pub fn mass_rhs(v: usize, stats: &[StatsRow]) -> Result<BigUint> {
    stats
        .iter()
        .map(|r| {
            Ok(labelled_copies(v, r.aut_order)?
                * BigUint::from(LABELLED_FANO_PLANES)
                * BigUint::from(r.factorizations))
        })
        .sum()
}

pub fn mass_check(ledger: &[LedgerRow], stats: &[StatsRow], v: usize) -> Result<MassCheck> {
    let lhs = mass_lhs(v, ledger)?;
    let rhs = mass_rhs(v, stats)?;
    let complete = !stats.is_empty() && stats.iter().all(|r| r.complete);
    let equal = complete && lhs == rhs;
    Ok(MassCheck {
        lhs,
        rhs,
        complete,
        equal,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AggregateRow {
    pub aut_order: u128,
    pub u: usize,
    pub i1: usize,
    pub i3: usize,
    pub count: u64,
}

/// Design counts grouped by `(aut_order, U, I1, I3)` and the marginal by
/// automorphism group order, both sorted.
pub fn aggregate_results(ledger: &[LedgerRow]) -> (Vec<AggregateRow>, Vec<(u128, u64)>) {
    let mut rows: BTreeMap<(u128, usize, usize, usize), u64> = BTreeMap::new();
    let mut marginal: BTreeMap<u128, u64> = BTreeMap::new();
    for r in ledger {
        *rows.entry((r.aut_order, r.u, r.i1, r.i3)).or_default() += 1;
        *marginal.entry(r.aut_order).or_default() += 1;
    }
    let rows = rows
        .into_iter()
        .map(|((aut_order, u, i1, i3), count)| AggregateRow {
            aut_order,
            u,
            i1,
            i3,
            count,
        })
        .collect();
    (rows, marginal.into_iter().collect())
}

/// Labelled STS(w) on fixed points for the supported subsystem orders,
/// derived from the classification.
pub fn labelled_subsystems(w: usize) -> Result<f64> {
    if w != 7 && w != 9 {
        return Err(Error::input(format!("subsystem order {w} is not supported")));
    }
    let n = labelled_sts_count(w)?;
    Ok(n.to_string().parse::<f64>().expect("decimal integer"))
}

/// Expected number of sub-STS(w) in a random STS(v):
/// `N(w) * C(v, w) / (v - 2)^(w(w-1)/6)`.
pub fn mu(v: u64, w: usize) -> Result<f64> {
    if v < w as u64 || v < 3 {
        return Err(Error::input(format!("order {v} is below {w}")));
    }
    let n = labelled_subsystems(w)?;
    Ok(mu_with(v, w, n))
}

fn mu_with(v: u64, w: usize, n: f64) -> f64 {
    let p = 1.0 / (v as f64 - 2.0);
    let mut x = n;
    for i in 0..w {
        x *= (v - i as u64) as f64 / (i + 1) as f64 * p;
    }
    let blocks = w * (w - 1) / 6;
    x * p.powi((blocks - w) as i32)
}

/// `1 - e^(-1/168)`.
pub fn alpha() -> f64 {
    -(-1.0f64 / 168.0).exp_m1()
}

/// Estimated total number of classes given those with a sub-STS(7).
pub fn estimate_total(count_with_sub7: f64) -> f64 {
    count_with_sub7 / alpha()
}

pub fn ratio(part: f64, whole: f64) -> f64 {
    part / whole
}

/// `12 C(n,3)^3 / n^9`.
pub fn latin_f(n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::input("n must be at least 3"));
    }
    let x = n as f64;
    let c = x * (x - 1.0) * (x - 2.0) / 6.0;
    Ok(12.0 * c * c * c / x.powi(9))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub n_labelled_fano: f64,
    pub n_labelled_sts9: f64,
    pub alpha: f64,
    pub mu: Vec<(u64, usize, f64)>,
    /// `(label, input count, estimate)`.
    pub estimates: Vec<(String, f64, f64)>,
    /// `(label, part, whole, ratio)`.
    pub ratios: Vec<(String, f64, f64, f64)>,
    pub latin: Vec<(u64, f64)>,
}

impl EstimateReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("N(7) = {}\n", sig(self.n_labelled_fano)));
        s.push_str(&format!("N(9) = {}\n", sig(self.n_labelled_sts9)));
        s.push_str(&format!("alpha = 1 - exp(-1/168) = {}\n", sig(self.alpha)));
        for (v, w, m) in &self.mu {
            s.push_str(&format!("mu({v},{w}) = {}\n", sig(*m)));
        }
        for (label, count, est) in &self.estimates {
            s.push_str(&format!("estimate[{label}] = {} / alpha = {}\n", sig(*count), sig(*est)));
        }
        for (label, a, b, r) in &self.ratios {
            s.push_str(&format!("ratio[{label}] = {} / {} = {}\n", sig(*a), sig(*b), sig(*r)));
        }
        for (n, f) in &self.latin {
            s.push_str(&format!("latin_f({n}) = {}\n", sig(*f)));
        }
        s
    }
}

/// Twelve significant digits.
pub fn sig(x: f64) -> String {
    format!("{x:.11e}")
}
