use proptest::prelude::*;

use steiner_core::canon::{canonical_form, canonical_sts, from_packed, ColoredGraph};
use steiner_core::design::cyclic_fano;
use steiner_core::graph::PackedGraph;
use steiner_core::perm::Permutation;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = ColoredGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (prop::collection::vec(0u8..3, n), prop::collection::vec(any::<bool>(), pairs)).prop_map(move |(colors, edges)| {
            let mut g = ColoredGraph::new(colors);
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if edges[k] {
                        g.add_edge(a, b).unwrap();
                    }
                    k += 1;
                }
            }
            g
        })
    })
}

fn perm_strategy(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|img| Permutation::from_images(img).unwrap())
}

fn all_perms(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_perms(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn relabeling_keeps_canonical_form(
        (g, p) in graph_strategy(14).prop_flat_map(|g| { let n = g.n(); (Just(g), perm_strategy(n)) })
    ) {
        let a = canonical_form(&g).unwrap();
        let b = canonical_form(&g.permuted(&p)).unwrap();
        prop_assert_eq!(&a.canonical_bytes, &b.canonical_bytes);
        prop_assert_eq!(a.automorphism_order, b.automorphism_order);
        // the labeling really maps the input onto the canonical graph
        prop_assert_eq!(g.permuted(&a.canonical_labeling).to_bytes(), a.canonical_bytes.clone());
        for gen in &a.automorphism_generators {
            prop_assert!(g.is_automorphism(gen));
        }
    }

    #[test]
    fn automorphism_order_matches_brute_force(g in graph_strategy(7)) {
        let n = g.n();
        let brute = all_perms(n)
            .into_iter()
            .filter(|img| g.is_automorphism(&Permutation::from_images(img.clone()).unwrap()))
            .count() as u128;
        prop_assert_eq!(canonical_form(&g).unwrap().automorphism_order, brute);
    }

    #[test]
    fn fano_relabelings(p in perm_strategy(7)) {
        let f = cyclic_fano();
        prop_assert_eq!(canonical_sts(&f).unwrap().canonical_bytes, canonical_sts(&f.permuted(&p)).unwrap().canonical_bytes);
    }
}

#[test]
fn petersen_graph() {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((i + 5, (i + 2) % 5 + 5));
    }
    let g = PackedGraph::from_edges(10, &edges).unwrap();
    assert_eq!(canonical_form(&from_packed(&g)).unwrap().automorphism_order, 120);
}

#[test]
fn fano_has_168_automorphisms() {
    assert_eq!(canonical_sts(&cyclic_fano()).unwrap().automorphism_order, 168);
}
