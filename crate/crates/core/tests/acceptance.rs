//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Expected values are either published counts or computed here
//! by independent brute force.

use std::collections::{BTreeSet, HashSet};
use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use steiner_core::analysis::{
    alpha, classify_small_sts, estimate_total, latin_f, mass_check, mu, ratio, SmallSts, KTS21_WITH_FANO,
    STS19_TOTAL, STS19_WITH_FANO, STS21_WITH_FANO,
};
use steiner_core::canon::{canonical_form, canonical_sts, encode_configuration, encode_factorization};
use steiner_core::configgen::{aut_order_distribution, classify_configurations, underlying_graph_classes, ConfigRecord};
use steiner_core::design::{order_108_design, validate_sts, TripleSystem};
use steiner_core::factor::Factorization;
use steiner_core::graph::PackedGraph;
use steiner_core::kernels::{
    exact_cover_enumerate, one_factorizations, perfect_matchings, EdgeIndex, ExactCoverInstance, FactorizationSearch,
};
use steiner_core::perm::Permutation;
use steiner_core::pipeline::{
    extend_group, factorization_lexmin_stabilizer, lexmin_fanos, permute_factorization, run_pipeline, AcceptedDesign,
    LedgerRow, PipelineOptions, StatsRow, W,
};
use steiner_core::subsys::{brute_force_subsystems, find_subsystems, report};

const DISTRIBUTION_14_3: &str = "1^20328 2^916 3^19 4^91 6^12 7^1 8^15 12^7 14^3 16^3 24^2 128^1 56448^1";
const SAMPLE_SIZE: usize = 50;
const SAMPLE_CAP: u64 = 2;
const RELABELINGS: usize = 1000;
const TIME_BUDGET: Duration = Duration::from_secs(30 * 60);

struct Outcome {
    checks: Vec<(String, bool, String)>,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push((name.to_string(), ok, detail.into()));
    }

    fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }
}

fn run_criterion(id: u32, title: &str, f: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome { checks: Vec::new() };
    f(&mut out);
    let ok = out.all_ok() && !out.checks.is_empty();
    for (name, pass, detail) in &out.checks {
        println!("    [{}] {name}: {detail}", if *pass { "ok" } else { "FAILED" });
    }
    println!(
        "{} criterion {id}: {title} ({:.1}s)",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    ok
}

fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
    let mut img: Vec<usize> = (0..n).collect();
    img.shuffle(rng);
    Permutation::from_images(img).unwrap()
}

fn hex_set(designs: &[SmallSts]) -> BTreeSet<String> {
    designs.iter().map(|d| d.canonical_hex.clone()).collect()
}

fn has_fano(s: &TripleSystem) -> bool {
    !find_subsystems(s, 7).is_empty()
}

/// Perfect matchings by choosing edges in increasing index order.
fn brute_matchings(g: &PackedGraph) -> u64 {
    fn go(edges: &[(usize, usize)], from: usize, used: u64, left: usize) -> u64 {
        if left == 0 {
            return 1;
        }
        (from..edges.len())
            .filter(|&i| used & (1 << edges[i].0) == 0 && used & (1 << edges[i].1) == 0)
            .map(|i| go(edges, i + 1, used | 1 << edges[i].0 | 1 << edges[i].1, left - 1))
            .sum()
    }
    if g.n() % 2 == 1 {
        return 0;
    }
    go(&g.edges(), 0, 0, g.n() / 2)
}

/// Exact covers by testing every subset of options.
fn brute_covers(items: usize, options: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    let mut out = BTreeSet::new();
    for subset in 0u32..1 << options.len() {
        let mut hit = vec![0; items];
        for (i, opt) in options.iter().enumerate() {
            if subset & 1 << i != 0 {
                for &x in opt {
                    hit[x] += 1;
                }
            }
        }
        if hit.iter().all(|&h| h == 1) {
            out.insert((0..options.len()).filter(|&i| subset & 1 << i != 0).collect());
        }
    }
    out
}

/// 1-factorizations of `K_n` counted with the matchings built here.
fn brute_k_factorizations(n: usize) -> u64 {
    let mut edge_id = vec![vec![0usize; n]; n];
    let mut e = 0;
    for (a, row) in edge_id.iter_mut().enumerate() {
        for slot in &mut row[a + 1..] {
            *slot = e;
            e += 1;
        }
    }
    fn matchings(n: usize, free: u32, acc: u64, id: &[Vec<usize>], out: &mut Vec<u64>) {
        if free == 0 {
            out.push(acc);
            return;
        }
        let a = free.trailing_zeros() as usize;
        for b in a + 1..n {
            if free & 1 << b != 0 {
                matchings(n, free & !(1 << a) & !(1 << b), acc | 1 << id[a][b], id, out);
            }
        }
    }
    let mut ms = Vec::new();
    matchings(n, (1u32 << n) - 1, 0, &edge_id, &mut ms);
    fn cover(ms: &[u64], covered: u64, full: u64) -> u64 {
        if covered == full {
            return 1;
        }
        let low = (!covered & full).trailing_zeros();
        ms.iter()
            .filter(|&&m| m & 1 << low != 0 && m & covered == 0)
            .map(|&m| cover(ms, covered | m, full))
            .sum()
    }
    cover(&ms, 0, (1u64 << e) - 1)
}

fn close_enough(x: f64, want: f64) -> (bool, String) {
    let rel = ((x - want) / want).abs();
    (rel <= 1e-3, format!("{x:.6e} vs {want} (rel {rel:.2e})"))
}

/// The first `k` 1-factorizations of the complement in search order.
fn first_factorizations(g: &PackedGraph, k: usize) -> Vec<Factorization> {
    let idx = EdgeIndex::new(g);
    let masks: Vec<u64> = perfect_matchings(g).iter().map(|f| idx.mask_of(f).unwrap()).collect();
    let search = FactorizationSearch::new(g, &idx, &masks).unwrap();
    let mut out = Vec::new();
    search.run(|sol| {
        let mut fs: Vec<_> = sol.iter().map(|&m| idx.factor_of_mask(m)).collect();
        fs.sort();
        out.push(Factorization::new(fs).unwrap());
        if out.len() == k {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    out
}

fn check_sampled_design(d: &AcceptedDesign) -> Result<(), String> {
    validate_sts(&d.design).map_err(|v| format!("invalid design: {v}"))?;
    let w: Vec<usize> = (21 - W..21).collect();
    let subs = find_subsystems(&d.design, 7);
    if !subs.contains(&w) || d.particularized_subsystem != w {
        return Err("W is not a subsystem".into());
    }
    for (i, a) in subs.iter().enumerate() {
        for b in &subs[i + 1..] {
            let common = a.iter().filter(|x| b.contains(x)).count();
            if ![0, 1, 3].contains(&common) {
                return Err(format!("subsystems meet in {common} points"));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results = Vec::new();
    let mut sts15 = Vec::new();
    let mut configs14: Vec<ConfigRecord> = Vec::new();

    results.push(run_criterion(1, "small-order classification", |o| {
        for (v, want) in [(7, 1), (9, 1), (13, 2), (15, 80)] {
            let got = classify_small_sts(v).unwrap();
            o.check(&format!("STS({v})"), got.len() == want, format!("{} classes, expected {want}", got.len()));
            if v == 15 {
                sts15 = got;
            }
        }
    }));

    results.push(run_criterion(2, "(14,3) configuration census", |o| {
        configs14 = classify_configurations(14, 3).unwrap();
        o.check("classes", configs14.len() == 21_399, format!("{} classes", configs14.len()));
        let dist = aut_order_distribution(&configs14);
        o.check("aut order distribution", dist == DISTRIBUTION_14_3, dist);
        let big: Vec<&ConfigRecord> = configs14.iter().filter(|r| r.aut.order() == 56_448).collect();
        let double_fano = big.len() == 1 && big[0].wilson_flag && {
            let comps = big[0].underlying.components();
            comps.len() == 2
                && comps.iter().all(|&c| {
                    let pts: Vec<usize> = (0..14).filter(|&x| c >> x & 1 == 1).collect();
                    let blocks = big[0].config.blocks().iter().filter(|b| pts.contains(&(b[0] as usize)));
                    let relabel: Vec<[u8; 3]> = blocks
                        .map(|b| b.map(|x| pts.iter().position(|&p| p == x as usize).unwrap() as u8))
                        .collect();
                    TripleSystem::new(7, relabel).is_ok_and(|s| validate_sts(&s).is_ok())
                })
        };
        o.check("single order-56448 class is two disjoint Fano planes", double_fano, format!("{} such classes", big.len()));
        let flagged = configs14.iter().filter(|r| r.wilson_flag).count();
        o.check("double-Fano flag", flagged == 1, format!("{flagged} flagged"));
        let all = underlying_graph_classes(&configs14).unwrap();
        o.check("underlying graph classes", all == 20_787, format!("{all} classes"));
        let rest: Vec<ConfigRecord> = configs14.iter().filter(|r| !r.wilson_flag).cloned().collect();
        let non_wilson = underlying_graph_classes(&rest).unwrap();
        o.check("underlying graph classes without the double Fano", non_wilson == 20_786, format!("{non_wilson} classes"));
    }));

    let mut v15_designs: Vec<AcceptedDesign> = Vec::new();
    let mut v15_stats = None;
    results.push(run_criterion(3, "v=15 pipeline against the oracle, K8 factorizations", |o| {
        let recs = classify_configurations(8, 0).unwrap();
        let stats = run_pipeline(&recs[0], 15, PipelineOptions::default(), |d| {
            v15_designs.push(d);
            Ok(())
        })
        .unwrap();
        let oracle: Vec<SmallSts> = sts15.iter().filter(|s| has_fano(&s.design)).cloned().collect();
        o.check(
            "count",
            v15_designs.len() == oracle.len() && stats.complete,
            format!("pipeline {} designs, oracle {}", v15_designs.len(), oracle.len()),
        );
        let ours: BTreeSet<String> = v15_designs.iter().map(|d| d.canonical_hex.clone()).collect();
        o.check("same classes", ours == hex_set(&oracle) && ours.len() == v15_designs.len(), "canonical forms compared");
        v15_stats = Some(stats);

        let k8 = PackedGraph::complete(8).unwrap();
        let facts = one_factorizations(&k8, &perfect_matchings(&k8));
        let brute = brute_k_factorizations(8);
        o.check("K8 factorizations", facts.len() as u64 == brute && brute == 6240, format!("{} found, brute force {brute}", facts.len()));
        let mut classes = std::collections::BTreeMap::new();
        for f in &facts {
            let c = canonical_form(&encode_factorization(8, f)).unwrap();
            classes.entry(c.canonical_bytes).or_insert(c.automorphism_order);
        }
        // orbit-stabilizer over the classes must recover the labelled count
        let labelled: u128 = classes.values().map(|&a| 40320 / a).sum();
        o.check(
            "K8 classes",
            classes.len() == 6 && labelled == facts.len() as u128,
            format!("{} classes, orbit sum {labelled}", classes.len()),
        );
    }));

    results.push(run_criterion(4, "order-108 STS(21)", |o| {
        let s = order_108_design();
        o.check("valid", validate_sts(&s).is_ok(), "Steiner triple system of order 21");
        let aut = canonical_sts(&s).unwrap().automorphism_order;
        o.check("automorphisms", aut == 108, format!("|Aut| = {aut}"));
        let r = report(&s).unwrap();
        o.check("U, I1, I3", (r.u, r.i1, r.i3) == (9, 9, 27), format!("({}, {}, {})", r.u, r.i1, r.i3));
        for w in [7, 9] {
            let fast = find_subsystems(&s, w);
            let slow = brute_force_subsystems(&s, w).unwrap();
            o.check(&format!("sub-STS({w}) search"), fast == slow, format!("{} found, brute force {}", fast.len(), slow.len()));
        }
    }));

    results.push(run_criterion(5, "v=15 mass check", |o| {
        let Some(stats) = v15_stats.as_ref() else {
            o.check("pipeline ran", false, "criterion 3 did not produce stats");
            return;
        };
        let ledger: Vec<LedgerRow> = v15_designs
            .iter()
            .enumerate()
            .map(|(i, d)| LedgerRow {
                config_index: 0,
                design_seq: i as u64,
                aut_order: d.aut_order,
                u: d.u,
                i1: d.i1,
                i3: d.i3,
                canonical_hex: d.canonical_hex.clone(),
            })
            .collect();
        let rows = [StatsRow {
            config_index: 0,
            aut_order: 40320,
            factorizations: stats.factorizations,
            complete: stats.complete,
            designs: stats.accepted_designs,
        }];
        let m = mass_check(&ledger, &rows, 15).unwrap();
        o.check("lhs == rhs", m.equal, format!("lhs {} rhs {}", m.lhs, m.rhs));
    }));

    results.push(run_criterion(6, "estimation arithmetic", |o| {
        let a = alpha();
        let cases = [
            ("alpha", a, 0.00593),
            ("mu(21,7)", mu(21, 7).unwrap(), 0.00389),
            ("mu(19,7)", mu(19, 7).unwrap(), 0.00368),
            ("mu(10^9,7)", mu(1_000_000_000, 7).unwrap(), 0.00595),
            ("estimate", estimate_total(STS21_WITH_FANO as f64), 1.965e16),
            ("Kirkman estimate", estimate_total(KTS21_WITH_FANO as f64), 2.111e9),
            ("ratio", ratio(STS19_WITH_FANO as f64, STS19_TOTAL as f64), 0.00782),
            ("f(10)", latin_f(10).unwrap(), 0.0207),
            ("f(10^6)", latin_f(1_000_000).unwrap(), 1.0 / 18.0),
        ];
        for (name, x, want) in cases {
            let (ok, detail) = close_enough(x, want);
            o.check(name, ok, detail);
        }
    }));

    results.push(run_criterion(7, "sampled (14,3) properties", |o| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0014);
        let pool: Vec<&ConfigRecord> = configs14.iter().filter(|r| !r.wilson_flag).collect();
        let sample: Vec<&ConfigRecord> = pool.choose_multiple(&mut rng, SAMPLE_SIZE).copied().collect();
        o.check("sample size", sample.len() == SAMPLE_SIZE, format!("{} configurations", sample.len()));

        let mut designs: Vec<AcceptedDesign> = Vec::new();
        let mut bad_design = None;
        let mut orbit_failures = Vec::new();
        let mut closure_total = 0usize;
        for (k, rec) in sample.iter().enumerate() {
            let opts = PipelineOptions {
                factorization_cap: Some(SAMPLE_CAP),
            };
            if let Err(e) = run_pipeline(rec, 21, opts, |d| {
                designs.push(d);
                Ok(())
            }) {
                orbit_failures.push(format!("config {k}: {e}"));
            }

            // orbit sums over the group closure of the first factorizations
            let g = &rec.complement;
            let elements = rec.aut.elements().unwrap();
            let mut closure = HashSet::new();
            for f in first_factorizations(g, SAMPLE_CAP as usize) {
                for p in elements {
                    closure.insert(permute_factorization(&f, p));
                }
            }
            let mut sum = 0u128;
            for f in &closure {
                if let Some(stab) = factorization_lexmin_stabilizer(g, &rec.aut, f).unwrap() {
                    sum += rec.aut.order() / stab.order();
                    let a2 = extend_group(&stab, f, 21).unwrap();
                    let fano_sum: u128 = lexmin_fanos(&a2).unwrap().iter().map(|(_, a3)| a2.order() / a3.order()).sum();
                    if fano_sum != 30 {
                        orbit_failures.push(format!("config {k}: Fano orbit sum {fano_sum}"));
                    }
                }
            }
            if sum != closure.len() as u128 {
                orbit_failures.push(format!("config {k}: orbit sum {sum} over {} factorizations", closure.len()));
            }
            closure_total += closure.len();
        }
        for d in &designs {
            if let Err(e) = check_sampled_design(d) {
                bad_design = Some(e);
                break;
            }
        }
        let distinct: HashSet<&str> = designs.iter().map(|d| d.canonical_hex.as_str()).collect();
        o.check(
            "(a) designs valid, contain W, obey intersection law",
            bad_design.is_none() && !designs.is_empty(),
            bad_design.unwrap_or_else(|| format!("{} designs", designs.len())),
        );
        o.check(
            "(a) canonical forms pairwise distinct",
            distinct.len() == designs.len(),
            format!("{} distinct of {}", distinct.len(), designs.len()),
        );
        o.check(
            "(b) orbit sums",
            orbit_failures.is_empty(),
            orbit_failures.first().cloned().unwrap_or_else(|| format!("{closure_total} factorizations in closures")),
        );

        let mut changed = 0;
        for i in 0..RELABELINGS {
            let d = &designs[i % designs.len()];
            let p = random_perm(&mut rng, 21);
            if canonical_sts(&d.design.permuted(&p)).unwrap().canonical_hex() != d.canonical_hex {
                changed += 1;
            }
            let rec = sample[i % sample.len()];
            let q = random_perm(&mut rng, 14);
            if canonical_form(&encode_configuration(&rec.config.permuted(&q))).unwrap().canonical_bytes != rec.canonical_bytes {
                changed += 1;
            }
        }
        o.check("(c) relabeling invariance", changed == 0, format!("{RELABELINGS} designs and configurations, {changed} changed"));

        let mut mismatches = 0;
        let instances = 400;
        for _ in 0..instances {
            let n = rng.gen_range(0..=10);
            let p: f64 = rng.gen_range(0.2..0.95);
            let mut g = PackedGraph::empty(n).unwrap();
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(p) {
                        g.add_edge(a, b).unwrap();
                    }
                }
            }
            if perfect_matchings(&g).len() as u64 != brute_matchings(&g) {
                mismatches += 1;
            }
            let items = rng.gen_range(1..=10);
            let count = rng.gen_range(0..=14);
            let options: Vec<Vec<usize>> = (0..count)
                .map(|_| {
                    let mut o: Vec<usize> = (0..items).filter(|_| rng.gen_bool(0.3)).collect();
                    if o.is_empty() {
                        o.push(rng.gen_range(0..items));
                    }
                    o
                })
                .collect();
            let inst = ExactCoverInstance::new(items, options.clone()).unwrap();
            let mut found = BTreeSet::new();
            let outcome = exact_cover_enumerate(&inst, |sol| {
                found.insert(sol.to_vec());
                ControlFlow::Continue(())
            });
            if found != brute_covers(items, &options) || outcome.solutions as usize != found.len() {
                mismatches += 1;
            }
        }
        o.check("(d) matchings and exact covers", mismatches == 0, format!("{instances} instances each, {mismatches} mismatches"));
    }));

    results.push(run_criterion(8, "runtime", |o| {
        let t = start.elapsed();
        o.check("elapsed", t <= TIME_BUDGET, format!("{:.0}s of {}s", t.as_secs_f64(), TIME_BUDGET.as_secs()));
    }));

    let failed = results.iter().filter(|&&ok| !ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
