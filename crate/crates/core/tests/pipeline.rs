use std::collections::HashSet;

use proptest::prelude::*;

use steiner_core::canon::canonical_sts;
use steiner_core::configgen::{classify_configurations, record_for};
use steiner_core::design::{double_fano_configuration, validate_sts};
use steiner_core::graph::PackedGraph;
use steiner_core::kernels::{one_factorizations, perfect_matchings};
use steiner_core::perm::Permutation;
use steiner_core::pipeline::{
    factorization_lexmin_stabilizer, lexmin_factorizations, permute_factorization, run_pipeline, PipelineOptions, W,
};
use steiner_core::subsys::find_subsystems;

#[test]
fn capped_order_19_run() {
    let recs = classify_configurations(12, 2).unwrap();
    let mut seen = HashSet::new();
    for rec in &recs {
        let opts = PipelineOptions {
            factorization_cap: Some(4),
        };
        let stats = run_pipeline(rec, 19, opts, |d| {
            assert!(validate_sts(&d.design).is_ok());
            let w: Vec<usize> = (19 - W..19).collect();
            assert!(find_subsystems(&d.design, 7).contains(&w));
            assert_eq!(canonical_sts(&d.design).unwrap().canonical_hex(), d.canonical_hex);
            assert!(seen.insert(d.canonical_hex));
            Ok(())
        })
        .unwrap();
        assert!(stats.factorizations <= 4);
        assert!(stats.accepted_fanos >= stats.accepted_factorizations);
    }
    assert!(!seen.is_empty());
}

#[test]
fn wrong_order_and_double_fano_are_rejected() {
    let recs = classify_configurations(8, 0).unwrap();
    assert!(run_pipeline(&recs[0], 19, PipelineOptions::default(), |_| Ok(())).is_err());
    let wilson = record_for(double_fano_configuration()).unwrap();
    assert!(run_pipeline(&wilson, 21, PipelineOptions::default(), |_| Ok(())).is_err());
}

#[test]
fn k8_orbit_sums_under_s8() {
    let g = PackedGraph::complete(8).unwrap();
    let gens = vec![
        Permutation::from_cycles(8, &[&[0, 1]]).unwrap(),
        Permutation::from_cycles(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]]).unwrap(),
    ];
    let s8 = steiner_core::group::PermutationGroup::from_generators(8, gens).unwrap();
    let reps = lexmin_factorizations(&g, &s8).unwrap();
    assert_eq!(reps.len(), 6);
    let total: u128 = reps.iter().map(|(_, stab)| s8.order() / stab.order()).sum();
    assert_eq!(total, 6240);
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|img| Permutation::from_images(img).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_lexmin_representative_per_orbit(p in perm_strategy(8), k in 0usize..6240) {
        let g = PackedGraph::complete(8).unwrap();
        let facts = one_factorizations(&g, &perfect_matchings(&g));
        let f = facts[k].sorted();
        let image = permute_factorization(&f, &p);
        prop_assert!(image.is_one_factorization_of(&g));
        prop_assert_eq!(permute_factorization(&image, &p.inverse()), f.clone());
        // under the trivial group every factorization is its own orbit
        let trivial = steiner_core::group::PermutationGroup::trivial(8);
        prop_assert!(factorization_lexmin_stabilizer(&g, &trivial, &image).unwrap().is_some());
    }
}
