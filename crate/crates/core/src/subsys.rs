//! Subsystems of triple systems and their intersection statistics.

use std::collections::BTreeSet;

use crate::design::{PairTable, TripleSystem};
use crate::error::{Error, Result};

/// Largest number of candidate subsets the brute-force scan will visit.
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemReport {
    pub subsystems7: Vec<Vec<usize>>,
    pub subsystems9: Vec<Vec<usize>>,
    pub u: usize,
    pub i1: usize,
    pub i3: usize,
}

pub fn report(s: &TripleSystem) -> Result<SubsystemReport> {
    let table = s.pair_table();
    let subsystems7 = find_with_table(s.v(), &table, 7);
    let subsystems9 = find_with_table(s.v(), &table, 9);
    let (u, i1, i3) = intersection_stats(&subsystems7)?;
    Ok(SubsystemReport {
        subsystems7,
        subsystems9,
        u,
        i1,
        i3,
    })
}

/// Smallest superset of `seed` containing the third point of the block
/// through every pair inside it. Returned sorted.
pub fn closure(s: &TripleSystem, seed: &[usize]) -> Vec<usize> {
    closure_with_table(s.v(), &s.pair_table(), seed, usize::MAX).expect("no size cap")
}

/// Closure that gives up (returns `None`) once it exceeds `cap` points.
pub(crate) fn closure_with_table(v: usize, table: &PairTable, seed: &[usize], cap: usize) -> Option<Vec<usize>> {
    let mut inside = vec![false; v];
    let mut members: Vec<usize> = Vec::with_capacity(seed.len().max(8));
    for &x in seed {
        if !inside[x] {
            inside[x] = true;
            members.push(x);
        }
    }
    // each new point is paired with every earlier member once
    let mut next = 1;
    while next < members.len() {
        let x = members[next];
        for i in 0..next {
            if let Some(z) = table.third(x, members[i]) {
                if !inside[z] {
                    inside[z] = true;
                    members.push(z);
                    if members.len() > cap {
                        return None;
                    }
                }
            }
        }
        next += 1;
    }
    members.sort_unstable();
    Some(members)
}

/// All closed point sets of size `w` (sub-STS(w)), sorted.
pub fn find_subsystems(s: &TripleSystem, w: usize) -> Vec<Vec<usize>> {
    find_with_table(s.v(), &s.pair_table(), w)
}

pub(crate) fn find_with_table(v: usize, table: &PairTable, w: usize) -> Vec<Vec<usize>> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    if w < 3 || w > v {
        return Vec::new();
    }
    if w == 3 {
        // the closure of three non-collinear points is bigger than a block
        let mut blocks = Vec::new();
        for a in 0..v {
            for b in a + 1..v {
                match table.third(a, b) {
                    Some(t) if t > b => blocks.push(vec![a, b, t]),
                    _ => {}
                }
            }
        }
        return blocks;
    }
    let mut covered: Vec<Vec<bool>> = Vec::new();
    for a in 0..v {
        for b in a + 1..v {
            let Some(t) = table.third(a, b) else { continue };
            'seed: for c in b + 1..v {
                if c == t {
                    continue;
                }
                for mask in &covered {
                    if mask[a] && mask[b] && mask[c] {
                        continue 'seed;
                    }
                }
                if let Some(set) = closure_with_table(v, table, &[a, b, c], w) {
                    if set.len() == w && !found.contains(&set) {
                        let mut mask = vec![false; v];
                        for &x in &set {
                            mask[x] = true;
                        }
                        covered.push(mask);
                        found.insert(set);
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}

/// `(u, i1, i3)`: the number of 7-point subsystems and the numbers of
/// unordered pairs of them meeting in one and in three points.
pub fn intersection_stats(subsystems7: &[Vec<usize>]) -> Result<(usize, usize, usize)> {
    let (mut i1, mut i3) = (0, 0);
    for (i, a) in subsystems7.iter().enumerate() {
        for b in &subsystems7[i + 1..] {
            let common = a.iter().filter(|x| b.contains(x)).count();
            match common {
                0 => {}
                1 => i1 += 1,
                3 => i3 += 1,
                k => {
                    return Err(Error::Structural(format!(
                        "subsystems {a:?} and {b:?} meet in {k} points"
                    )))
                }
            }
        }
    }
    Ok((subsystems7.len(), i1, i3))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Scans every `w`-subset and keeps the closed ones. Test oracle.
pub fn brute_force_subsystems(s: &TripleSystem, w: usize) -> Result<Vec<Vec<usize>>> {
    let v = s.v();
    let total = binomial(v as u64, w as u64);
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::Resource(format!(
            "C({v},{w}) = {total} subsets exceeds the scan limit {BRUTE_FORCE_LIMIT}"
        )));
    }
    if w > v || w < 3 {
        return Ok(Vec::new());
    }
    let table = s.pair_table();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..w).collect();
    let mut inside = vec![false; v];
    loop {
        for &x in &idx {
            inside[x] = true;
        }
        let closed = idx.iter().enumerate().all(|(i, &a)| {
            idx[i + 1..]
                .iter()
                .all(|&b| table.third(a, b).is_some_and(|c| inside[c]))
        });
        if closed {
            out.push(idx.clone());
        }
        for &x in &idx {
            inside[x] = false;
        }
        // next combination in lexicographic order
        let mut i = w;
        while i > 0 && idx[i - 1] == v - w + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..w {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}
