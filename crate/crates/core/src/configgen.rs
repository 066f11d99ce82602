//! Isomorphism classes of linear triple configurations with their
//! automorphism groups, underlying graphs and complements.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::canon::{canonical_form, encode_configuration, from_packed};
use crate::design::{underlying_graph, validate_configuration, Configuration};
use crate::error::{Error, Result};
use crate::graph::{complement, PackedGraph};
use crate::group::PermutationGroup;
use crate::orderly;

/// Largest point count accepted by [`classify_configurations`].
pub const MAX_CONFIG_POINTS: usize = 32;

pub const MANIFEST_HEADER: &str = "index,canonical_hex,aut_order,wilson_flag,graph6_of_underlying";

#[derive(Clone, Debug)]
pub struct ConfigRecord {
    pub config: Configuration,
    /// Automorphism group acting on the points.
    pub aut: PermutationGroup,
    pub underlying: PackedGraph,
    pub complement: PackedGraph,
    pub canonical_bytes: Vec<u8>,
    /// Set for the 14-point configuration made of two disjoint Fano planes.
    pub wilson_flag: bool,
}

impl ConfigRecord {
    pub fn canonical_hex(&self) -> String {
        hex::encode(&self.canonical_bytes)
    }
}

/// Builds the record of a single configuration after validating it.
pub fn record_for(config: Configuration) -> Result<ConfigRecord> {
    if let Err(v) = validate_configuration(&config) {
        return Err(Error::input(format!("not a configuration: {v}")));
    }
    let m = config.m();
    let canon = canonical_form(&encode_configuration(&config))?;
    let gens = canon
        .automorphism_generators
        .iter()
        .map(|g| {
            g.restrict(0, m)
                .ok_or_else(|| Error::consistency("automorphism mixes points and blocks"))
        })
        .collect::<Result<Vec<_>>>()?;
    // blocks are determined by their points, so the order carries over
    let aut = PermutationGroup::with_known_order(m, gens, canon.automorphism_order)?;
    let underlying = underlying_graph(&config)?;
    let complement = complement(&underlying);
    let wilson_flag = is_double_fano(&config, &underlying);
    Ok(ConfigRecord {
        config,
        aut,
        underlying,
        complement,
        canonical_bytes: canon.canonical_bytes,
        wilson_flag,
    })
}

fn is_double_fano(c: &Configuration, underlying: &PackedGraph) -> bool {
    if c.m() != 14 || c.r() != 3 {
        return false;
    }
    // a 7-vertex component with 7 blocks covers K7 by triangles: a Fano plane
    let comps = underlying.components();
    comps.len() == 2 && comps.iter().all(|c| c.count_ones() == 7)
        && (0..14).all(|x| underlying.degree(x) == 6)
}

/// One record per isomorphism class of linear `(m, r)` configurations,
/// sorted by canonical bytes.
pub fn classify_configurations(m: usize, r: usize) -> Result<Vec<ConfigRecord>> {
    if m > MAX_CONFIG_POINTS {
        return Err(Error::input(format!("at most {MAX_CONFIG_POINTS} points supported, got {m}")));
    }
    let lists = orderly::generate(m, r)?;
    let mut records = lists
        .into_par_iter()
        .map(|blocks| record_for(Configuration::new(m, r, blocks)?))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| a.canonical_bytes.cmp(&b.canonical_bytes));
    if let Some(w) = records.windows(2).find(|w| w[0].canonical_bytes == w[1].canonical_bytes) {
        return Err(Error::consistency(format!(
            "two generated configurations are isomorphic: {}",
            w[0].canonical_hex()
        )));
    }
    Ok(records)
}

/// Number of isomorphism classes among the underlying graphs.
pub fn underlying_graph_classes(records: &[ConfigRecord]) -> Result<usize> {
    let forms = records
        .par_iter()
        .map(|r| canonical_form(&from_packed(&r.underlying)).map(|c| c.canonical_bytes))
        .collect::<Result<BTreeSet<_>>>()?;
    Ok(forms.len())
}

/// Group orders as `order^count` pairs in increasing order.
pub fn aut_order_distribution(records: &[ConfigRecord]) -> String {
    let mut counts: BTreeMap<u128, usize> = BTreeMap::new();
    for r in records {
        *counts.entry(r.aut.order()).or_default() += 1;
    }
    counts
        .iter()
        .map(|(o, c)| format!("{o}^{c}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn exclude_wilson(records: Vec<ConfigRecord>) -> Result<Vec<ConfigRecord>> {
    let before = records.len();
    let kept: Vec<ConfigRecord> = records.into_iter().filter(|r| !r.wilson_flag).collect();
    if kept.len() == before {
        return Err(Error::consistency("no double-Fano configuration among the records"));
    }
    Ok(kept)
}

/// One manifest row, as read back from disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestRow {
    pub index: usize,
    pub canonical_hex: String,
    pub aut_order: u128,
    pub wilson_flag: bool,
    pub graph6: String,
    /// Rows written as comments are kept for their index but skipped.
    pub excluded: bool,
}

impl ManifestRow {
    pub fn of(index: usize, r: &ConfigRecord, excluded: bool) -> Self {
        ManifestRow {
            index,
            canonical_hex: r.canonical_hex(),
            aut_order: r.aut.order(),
            wilson_flag: r.wilson_flag,
            graph6: r.underlying.to_graph6(),
            excluded,
        }
    }
}

pub fn write_manifest(mut w: impl Write, rows: &[ManifestRow]) -> Result<()> {
    writeln!(w, "{MANIFEST_HEADER}")?;
    for r in rows {
        let mark = if r.excluded { "# " } else { "" };
        writeln!(
            w,
            "{mark}{},{},{},{},{}",
            r.index, r.canonical_hex, r.aut_order, r.wilson_flag as u8, r.graph6
        )?;
    }
    Ok(())
}

pub fn read_manifest(r: impl BufRead) -> Result<Vec<ManifestRow>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if i == 0 {
            if line.trim() != MANIFEST_HEADER {
                return Err(Error::parse(line_no, "missing manifest header"));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (excluded, body) = match line.strip_prefix('#') {
            Some(rest) => (true, rest.trim_start()),
            None => (false, line.as_str()),
        };
        let fields: Vec<&str> = body.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::parse(line_no, format!("expected 5 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.trim().parse::<u128>().map_err(|e| Error::parse(line_no, format!("{s:?}: {e}")));
        let wilson_flag = match fields[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(Error::parse(line_no, format!("bad wilson flag {other:?}"))),
        };
        out.push(ManifestRow {
            index: num(fields[0])? as usize,
            canonical_hex: fields[1].trim().to_string(),
            aut_order: num(fields[2])?,
            wilson_flag,
            graph6: fields[4].trim().to_string(),
            excluded,
        });
    }
    Ok(out)
}
