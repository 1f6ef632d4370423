use proptest::prelude::*;
use varkit::hom_search::{classify_power_hom, HomProblem, PowerHomClass};
use varkit::structures::{power, Digraph};

fn c() -> Digraph {
    Digraph::make_c()
}

#[test]
fn homs_from_powers_of_c_are_constants_or_shifted_projections() {
    for k in 1..=3 {
        let src = power(&c(), k).unwrap();
        let homs = HomProblem::new(&src, &c()).enumerate(None);
        assert_eq!(homs.len(), 3 + 3 * k);
        let mut sorted = homs.clone();
        sorted.sort();
        assert_eq!(sorted, homs);
        for f in &homs {
            assert!(f.is_homomorphism(&src, &c()).unwrap());
            let classified = classify_power_hom(f, k, &c()).unwrap();
            let PowerHomClass::Factored { coordinates, iota } = classified else {
                panic!("unexpected classification for {:?}", f.image());
            };
            assert!(coordinates.len() <= 1);
            if coordinates.is_empty() {
                assert!(f.is_constant());
            } else {
                let shift = iota.apply(0);
                assert_eq!(iota.image(), &[shift, (shift + 1) % 3, (shift + 2) % 3]);
            }
        }
    }
}

#[test]
fn image_of_power_hom_is_a_power_exhaustively() {
    for k in 1..=2 {
        let src = power(&c(), k).unwrap();
        for m in 1..=2 {
            let target = power(&c(), m).unwrap();
            let preds = target.structure_predicates();
            assert!(preds.antisymmetric && preds.unique_triangle);
            for f in HomProblem::new(&src, &target).enumerate(None) {
                match classify_power_hom(&f, k, &target).unwrap() {
                    PowerHomClass::Factored { coordinates, iota } => {
                        assert!(iota.is_injective());
                        let sub = power(&c(), coordinates.len()).unwrap();
                        assert!(iota.is_homomorphism(&sub, &target).unwrap());
                    }
                    other => panic!("{:?} classified as {other:?}", f.image()),
                }
            }
        }
    }
}

fn small_digraph() -> impl Strategy<Value = Digraph> {
    (1usize..=4).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let edges = (0..n * n).filter(|&i| bits[i]).map(|i| (i / n, i % n));
            Digraph::new(n, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn enumeration_is_sorted_and_sound(g in small_digraph(), h in small_digraph()) {
        let homs = HomProblem::new(&g, &h).enumerate(None);
        let mut sorted = homs.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(&sorted, &homs);
        for f in &homs {
            prop_assert!(f.is_homomorphism(&g, &h).unwrap());
        }
        let total = (h.vertex_count() as u64).pow(g.vertex_count() as u32);
        let brute = (0..total)
            .filter(|&i| {
                let img: Vec<usize> = (0..g.vertex_count())
                    .map(|u| (i / (h.vertex_count() as u64).pow((g.vertex_count() - 1 - u) as u32)) as usize % h.vertex_count())
                    .collect();
                g.edges().all(|(u, v)| h.has_edge(img[u], img[v]))
            })
            .count();
        prop_assert_eq!(brute, homs.len());
    }
}
