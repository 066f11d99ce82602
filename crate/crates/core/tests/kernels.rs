use std::collections::BTreeSet;
use std::ops::ControlFlow;

use proptest::prelude::*;

use steiner_core::graph::PackedGraph;
use steiner_core::kernels::{
    exact_cover_enumerate, one_factorizations, perfect_matchings, triangle_decompositions, ExactCoverInstance,
};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = PackedGraph> {
    (0..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * n.saturating_sub(1) / 2).prop_map(move |bits| {
            let mut g = PackedGraph::empty(n).unwrap();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if bits[k] {
                        g.add_edge(a, b).unwrap();
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

/// Every set of `n/2` pairwise disjoint edges, as sorted edge lists.
fn brute_matchings(g: &PackedGraph) -> BTreeSet<Vec<(usize, usize)>> {
    fn go(edges: &[(usize, usize)], from: usize, used: u64, cur: &mut Vec<(usize, usize)>, need: usize, out: &mut BTreeSet<Vec<(usize, usize)>>) {
        if cur.len() == need {
            out.insert(cur.clone());
            return;
        }
        for i in from..edges.len() {
            let (a, b) = edges[i];
            if used >> a & 1 == 0 && used >> b & 1 == 0 {
                cur.push((a, b));
                go(edges, i + 1, used | 1 << a | 1 << b, cur, need, out);
                cur.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    if g.n().is_multiple_of(2) {
        go(&g.edges(), 0, 0, &mut Vec::new(), g.n() / 2, &mut out);
    }
    out
}

fn brute_covers(items: usize, options: &[Vec<usize>]) -> BTreeSet<Vec<usize>> {
    (0u32..1 << options.len())
        .filter(|s| {
            let mut hit = vec![0; items];
            for (i, o) in options.iter().enumerate() {
                if s >> i & 1 == 1 {
                    o.iter().for_each(|&x| hit[x] += 1);
                }
            }
            hit.iter().all(|&h| h == 1)
        })
        .map(|s| (0..options.len()).filter(|&i| s >> i & 1 == 1).collect())
        .collect()
}

fn cover_strategy() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1usize..=10).prop_flat_map(|items| {
        let opt = prop::collection::btree_set(0..items, 1..=items.min(4)).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (Just(items), prop::collection::vec(opt, 0..=14))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matchings_match_brute_force(g in graph_strategy(10)) {
        let found: BTreeSet<Vec<(usize, usize)>> = perfect_matchings(&g)
            .iter()
            .map(|f| f.edges().iter().map(|&(a, b)| (a as usize, b as usize)).collect())
            .collect();
        prop_assert_eq!(found.len(), perfect_matchings(&g).len());
        prop_assert_eq!(found, brute_matchings(&g));
    }

    #[test]
    fn exact_covers_match_brute_force((items, options) in cover_strategy()) {
        let inst = ExactCoverInstance::new(items, options.clone()).unwrap();
        let mut found = BTreeSet::new();
        let outcome = exact_cover_enumerate(&inst, |sol| {
            found.insert(sol.to_vec());
            ControlFlow::Continue(())
        });
        prop_assert!(!outcome.aborted);
        prop_assert_eq!(outcome.solutions as usize, found.len());
        prop_assert_eq!(found, brute_covers(items, &options));
    }

    #[test]
    fn early_stop_is_reported((items, options) in cover_strategy()) {
        let inst = ExactCoverInstance::new(items, options.clone()).unwrap();
        let total = brute_covers(items, &options).len();
        let outcome = exact_cover_enumerate(&inst, |_| ControlFlow::Break(()));
        prop_assert_eq!(outcome.aborted, total > 0);
    }
}

#[test]
fn complete_graph_factorizations() {
    // (n-1)!! matchings; 1, 6 and 6240 factorizations of K4, K6, K8
    for (n, matchings, facts) in [(4, 3, 1), (6, 15, 6), (8, 105, 6240)] {
        let g = PackedGraph::complete(n).unwrap();
        let ms = perfect_matchings(&g);
        assert_eq!(ms.len(), matchings);
        let fs = one_factorizations(&g, &ms);
        assert_eq!(fs.len(), facts);
        assert!(fs.iter().all(|f| f.is_one_factorization_of(&g)));
    }
}

#[test]
fn k7_triangle_decompositions() {
    // 7! / 168 labelled Fano planes
    assert_eq!(triangle_decompositions(&PackedGraph::complete(7).unwrap()).len(), 30);
    assert_eq!(triangle_decompositions(&PackedGraph::complete(9).unwrap()).len(), 840);
}
