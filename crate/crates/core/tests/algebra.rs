use std::collections::BTreeSet;

use proptest::prelude::*;
use varkit::algebra::{
    congruence_lattice, free_algebra, gadget_search, is_compatible, lattice_properties, majority_composite_cases,
    majority_composite_check, rebuild_from_gadget, section4_pipeline, section4_pipeline_with_cap, triple_shift,
    Compatibility, FiniteAlgebra, Section4Result, DEFAULT_CAP,
};
use varkit::conditions::OperationTable;
use varkit::hom_search::HomProblem;
use varkit::structures::{decode, is_isomorphic, power, product, Digraph, Partition};
use varkit::Error;

type NamedOp = (&'static str, usize, fn(&[usize]) -> usize);

fn algebra(size: usize, ops: &[NamedOp]) -> FiniteAlgebra {
    let ops = ops
        .iter()
        .map(|&(name, arity, f)| (name.to_string(), OperationTable::from_fn(arity, size, f).unwrap()))
        .collect();
    FiniteAlgebra::new(size, ops).unwrap()
}

fn a1() -> FiniteAlgebra {
    algebra(2, &[("m", 3, |a| (a[0] + a[1] + a[2]) % 2)])
}

fn a2() -> FiniteAlgebra {
    algebra(3, &[("s", 2, |a| (2 * a[0] + 2 * a[1]) % 3)])
}

fn semilattice() -> FiniteAlgebra {
    algebra(2, &[("meet", 2, |a| a[0] & a[1])])
}

/// Every polymorphism of `g` of the given arities, named `p<arity>_<i>`.
fn polymorphism_algebra(g: &Digraph, arities: &[usize]) -> FiniteAlgebra {
    let mut ops = Vec::new();
    for &k in arities {
        let source = power(g, k).unwrap();
        for (i, h) in HomProblem::new(&source, g).enumerate(None).into_iter().enumerate() {
            ops.push((format!("p{k}_{i}"), OperationTable::new(k, g.vertex_count(), h.image().to_vec()).unwrap()));
        }
    }
    FiniteAlgebra::new(g.vertex_count(), ops).unwrap()
}

fn c_binary_polymorphisms() -> FiniteAlgebra {
    polymorphism_algebra(&Digraph::make_c(), &[2])
}

// ---- compatibility ----

#[test]
fn c1_is_compatible_with_its_polymorphisms() {
    let c1 = Digraph::make_c1();
    let pol = polymorphism_algebra(&c1, &[1, 2]);
    // Unary: 4 images of the loop times 7 maps of the triangle.
    assert_eq!(pol.ops().len(), 28 + 1960);
    assert_eq!(is_compatible(&c1, &pol).unwrap(), Compatibility::Compatible);
    let shifted = algebra(4, &[("s", 1, |a| (a[0] + 1) % 4)]);
    assert!(matches!(is_compatible(&c1, &shifted).unwrap(), Compatibility::Violation { .. }));
}

// ---- congruences ----

/// All partitions of `0..n` as restricted growth strings.
fn all_partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; n];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if i == labels.len() {
            out.push(Partition::from_labels(labels));
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    if n == 0 {
        return out;
    }
    rec(1, 0, &mut labels, &mut out);
    out
}

fn is_congruence(a: &FiniteAlgebra, p: &Partition) -> bool {
    let n = a.universe_size();
    a.ops().iter().all(|op| {
        let k = op.table.arity();
        let tuples = n.pow(k as u32);
        (0..tuples).all(|s| {
            (0..tuples).all(|t| {
                let (u, v) = (decode(s, &vec![n; k]), decode(t, &vec![n; k]));
                !u.iter().zip(&v).all(|(&x, &y)| p.related(x, y)) || p.related(op.table.get(&u), op.table.get(&v))
            })
        })
    })
}

fn check_lattice_against_brute_force(a: &FiniteAlgebra) {
    let lattice = congruence_lattice(a).unwrap();
    let computed: BTreeSet<Partition> = lattice.congruences().iter().cloned().collect();
    let expected: BTreeSet<Partition> =
        all_partitions(a.universe_size()).into_iter().filter(|p| is_congruence(a, p)).collect();
    assert_eq!(computed, expected);
    let n = lattice.len();
    assert!(lattice.congruences()[lattice.bottom()].is_discrete());
    assert!(lattice.congruences()[lattice.top()].is_total());
    for i in 0..n {
        for j in 0..n {
            let (p, q) = (&lattice.congruences()[i], &lattice.congruences()[j]);
            assert_eq!(lattice.leq(i, j), p.refines(q));
            let (m, k) = (lattice.meet(i, j), lattice.join(i, j));
            // Greatest lower bound and least upper bound in the containment order.
            assert!((0..n).all(|l| (lattice.leq(l, i) && lattice.leq(l, j)) == lattice.leq(l, m)));
            assert!((0..n).all(|l| (lattice.leq(i, l) && lattice.leq(j, l)) == lattice.leq(k, l)));
        }
    }
}

#[test]
fn small_congruence_lattices_match_brute_force() {
    check_lattice_against_brute_force(&a1());
    check_lattice_against_brute_force(&a2());
    check_lattice_against_brute_force(&semilattice());
    check_lattice_against_brute_force(&FiniteAlgebra::set(4));
    check_lattice_against_brute_force(&algebra(4, &[("s", 1, |a| (a[0] + 1) % 4), ("j", 2, |a| a[0].max(a[1]))]));
}

#[test]
fn squares_of_the_affine_algebras() {
    assert_eq!(congruence_lattice(&a1()).unwrap().len(), 2);

    let l1 = congruence_lattice(&a1().power(2).unwrap()).unwrap();
    assert_eq!(l1.len(), 5);
    let p1 = lattice_properties(&l1);
    assert_eq!(p1.m_n, Some(3));
    assert!(!p1.meet_sd && !p1.join_sd && !p1.distributive);

    let l2 = congruence_lattice(&a2().power(2).unwrap()).unwrap();
    assert_eq!(l2.len(), 6);
    let p2 = lattice_properties(&l2);
    assert_eq!(p2.m_n, Some(4));
    assert!(!p2.meet_sd);
    // Atoms of M_n are also coatoms: the Hasse diagram has 2n edges.
    assert_eq!(l2.hasse_edges().len(), 8);
}

#[test]
fn composite_majority_truth_tables() {
    let maj = |x: usize, y: usize, z: usize| usize::from(x + y + z >= 2);
    for bits in 0..8 {
        let (x, y, z) = (bits >> 2 & 1, bits >> 1 & 1, bits & 1);
        assert_eq!((x & y) ^ (x & z) ^ (y & z), maj(x, y, z));
        assert_eq!((x | y) ^ (x | z) ^ (y | z), maj(x, y, z));
    }
    assert_eq!(majority_composite_cases().len(), 2);
    assert!(majority_composite_check());
}

fn arb_algebra() -> impl Strategy<Value = FiniteAlgebra> {
    (2usize..=4, 1usize..=2).prop_flat_map(|(n, ops)| {
        prop::collection::vec(
            (1usize..=2).prop_flat_map(move |k| prop::collection::vec(0..n, n.pow(k as u32)).prop_map(move |t| (k, t))),
            ops,
        )
        .prop_map(move |tables| {
            let ops = tables
                .into_iter()
                .enumerate()
                .map(|(i, (k, t))| (format!("f{i}"), OperationTable::new(k, n, t).unwrap()))
                .collect();
            FiniteAlgebra::new(n, ops).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_congruence_lattices_match_brute_force(a in arb_algebra()) {
        check_lattice_against_brute_force(&a);
    }

    #[test]
    fn random_pipeline_runs_keep_the_invariants(a in arb_algebra()) {
        match section4_pipeline_with_cap(&a, 400) {
            Err(Error::CapExceeded { .. }) => {}
            Err(e) => panic!("{e}"),
            Ok(r) => {
                prop_assert!(r.claims.all_invariants_hold(), "{:?}", r.claims);
                check_claim4(&r);
            }
        }
    }
}

// ---- free algebras ----

#[test]
fn free_semilattice_is_the_meets_of_nonempty_variable_sets() {
    let f = free_algebra(&semilattice(), 3, DEFAULT_CAP).unwrap();
    let expected: BTreeSet<Vec<usize>> = (1..8usize)
        .map(|set| (0..8usize).map(|p| usize::from((0..3).all(|v| set >> v & 1 == 0 || p >> (2 - v) & 1 == 1))).collect())
        .collect();
    let computed: BTreeSet<Vec<usize>> = f.functions.iter().cloned().collect();
    assert_eq!(computed, expected);
    assert_eq!(f.generators, vec![0, 1, 2]);
}

#[test]
fn free_algebra_of_a_set_and_of_a_group_reduct() {
    let f = free_algebra(&FiniteAlgebra::set(3), 3, DEFAULT_CAP).unwrap();
    assert_eq!(f.len(), 3);
    assert_eq!((0..3).map(|e| f.term(e)).collect::<Vec<_>>(), vec!["x", "y", "z"]);
    // Terms in x + y mod 3 give every linear form, zero being x + x + x.
    let sum = algebra(3, &[("plus", 2, |a| (a[0] + a[1]) % 3)]);
    assert_eq!(free_algebra(&sum, 3, DEFAULT_CAP).unwrap().len(), 27);
    // Idempotent linear forms for 2x + 2y mod 3: coefficients summing to 1.
    assert_eq!(free_algebra(&a2(), 3, DEFAULT_CAP).unwrap().len(), 9);
    // Ternary polymorphisms of ℂ: constants and rotated projections.
    assert_eq!(free_algebra(&c_binary_polymorphisms(), 3, DEFAULT_CAP).unwrap().len(), 12);
}

#[test]
fn free_algebra_cap() {
    let sum = algebra(3, &[("plus", 2, |a| (a[0] + a[1]) % 3)]);
    assert!(matches!(free_algebra(&sum, 3, 20), Err(Error::CapExceeded { cap: 20, reached: 20 })));
}

// ---- pipeline ----

fn corpus() -> Vec<(&'static str, FiniteAlgebra)> {
    vec![
        ("set1", FiniteAlgebra::set(1)),
        ("set2", FiniteAlgebra::set(2)),
        ("set3", FiniteAlgebra::set(3)),
        ("semilattice", semilattice()),
        ("c_binary_polymorphisms", c_binary_polymorphisms()),
        ("minority", a1()),
        ("affine3", a2()),
        ("sum3", algebra(3, &[("plus", 2, |a| (a[0] + a[1]) % 3)])),
    ]
}

/// Non-constant maps from a small digraph to ℂ that preserve edges, found
/// by trying all `3^n` maps.
fn brute_force_homs_to_c(g: &Digraph) -> usize {
    let c = Digraph::make_c();
    let n = g.vertex_count();
    (0..3usize.pow(n as u32))
        .filter(|&code| {
            let map = decode(code, &vec![3; n]);
            map.iter().any(|&v| v != map[0]) && g.edges().all(|(u, v)| c.has_edge(map[u], map[v]))
        })
        .count()
}

/// `[u](φ)` for a vertex of `K`, read off the component homomorphisms.
fn coordinate(r: &Section4Result, k_vertex: usize, hom: usize) -> usize {
    let u = (0..r.free.len()).find(|&u| r.psi.apply(u) == k_vertex).unwrap();
    let comp = r.components.iter().find(|c| c.vertices.contains(&u)).unwrap();
    comp.homs[hom].apply(comp.vertices.binary_search(&u).unwrap())
}

/// Every homomorphism from a product of components of `K` (one or two
/// factors) into `K` has coordinate maps that are constant or a single
/// coordinate of a single argument.
fn check_claim4(r: &Section4Result) {
    let comp_of_k: Vec<usize> = (0..r.k.vertex_count())
        .map(|v| {
            let u = (0..r.free.len()).find(|&u| r.psi.apply(u) == v).unwrap();
            r.components.iter().position(|c| c.vertices.contains(&u)).unwrap()
        })
        .collect();
    let k_components: Vec<Vec<usize>> =
        (0..r.components.len()).map(|t| (0..comp_of_k.len()).filter(|&v| comp_of_k[v] == t).collect()).collect();
    let mut tuples: Vec<Vec<usize>> = (0..k_components.len()).map(|t| vec![t]).collect();
    for s in 0..k_components.len() {
        for t in 0..k_components.len() {
            tuples.push(vec![s, t]);
        }
    }
    for ts in tuples {
        let parts: Vec<Digraph> =
            ts.iter().map(|&t| r.k.spanned_subdigraph(&k_components[t]).unwrap().0).collect();
        let domain = product(&parts).unwrap();
        if domain.vertex_count() > 100 {
            continue;
        }
        let radices: Vec<usize> = parts.iter().map(Digraph::vertex_count).collect();
        let points: Vec<Vec<usize>> = (0..domain.vertex_count())
            .map(|p| decode(p, &radices).iter().zip(&ts).map(|(&i, &t)| k_components[t][i]).collect())
            .collect();
        for h in HomProblem::new(&domain, &r.k).enumerate(Some(5000)) {
            let target = comp_of_k[h.apply(0)];
            for s in 0..r.components[target].homs.len() {
                let fs: Vec<usize> = (0..points.len()).map(|p| coordinate(r, h.apply(p), s)).collect();
                if fs.iter().all(|&v| v == fs[0]) {
                    continue;
                }
                let matches = ts
                    .iter()
                    .enumerate()
                    .flat_map(|(l, &t)| (0..r.components[t].homs.len()).map(move |phi| (l, phi)))
                    .filter(|&(l, phi)| (0..points.len()).all(|p| fs[p] == coordinate(r, points[p][l], phi)))
                    .count();
                assert_eq!(matches, 1, "coordinate {s} of a hom on components {ts:?}");
            }
        }
    }
}

#[test]
fn pipeline_corpus() {
    for (name, a) in corpus() {
        let r = section4_pipeline(&a).unwrap();
        assert!(r.claims.all_invariants_hold(), "{name}: {:?}", r.claims);
        for comp in &r.components {
            if comp.vertices.len() <= 9 {
                let (sub, _) = r.f_digraph.spanned_subdigraph(&comp.vertices).unwrap();
                assert_eq!(comp.homs.len(), brute_force_homs_to_c(&sub), "{name}: {}", comp.label_term);
            }
        }
        assert_eq!(r.g.components().len(), r.components.len(), "{name}");
        check_claim4(&r);
    }
}

#[test]
fn pipeline_on_a_three_element_set() {
    let r = section4_pipeline(&FiniteAlgebra::set(3)).unwrap();
    let c = Digraph::make_c();
    assert!(is_isomorphic(&r.f_digraph, &c).is_some());
    assert_eq!(r.components.len(), 1);
    assert_eq!(r.components[0].label_term, "x");
    assert_eq!(r.components[0].homs.len(), 3);
    assert!(is_isomorphic(&r.k, &c).is_some());
    assert!(is_isomorphic(&r.g, &power(&c, 3).unwrap()).is_some());
    assert!(r.claims.generators_separated);
    assert!(r.claims.k_spanned_in_g);
}

#[test]
fn pipeline_on_a_semilattice() {
    let r = section4_pipeline(&semilattice()).unwrap();
    assert_eq!(r.free.len(), 7);
    assert!(r.components.iter().all(|c| c.homs.is_empty()));
    assert!(r.g_exponents.iter().all(|&e| e == 0));
    assert_eq!(r.g, Digraph::new(r.components.len(), (0..r.components.len()).map(|v| (v, v))).unwrap());
    assert!(!r.claims.generators_separated);
}

#[test]
fn pipeline_on_the_binary_polymorphisms_of_c() {
    let r = section4_pipeline(&c_binary_polymorphisms()).unwrap();
    assert!(r.claims.generators_separated);
    assert!(r.claims.all_invariants_hold());
    // Constants give loop components; x, x+1, x+2 give triangles.
    let mut exponents = r.g_exponents.clone();
    exponents.sort_unstable();
    assert_eq!(exponents, vec![0, 0, 0, 3, 3, 3]);
}

// ---- triple shift and gadgets ----

fn inventory(exponents: &[usize]) -> Vec<usize> {
    let t = triple_shift(exponents).unwrap();
    let mut counts = vec![0; exponents.iter().max().map_or(1, |m| m + 1)];
    for comp in &t.components {
        let (sub, _) = t.digraph.spanned_subdigraph(&comp.vertices).unwrap();
        assert!(is_isomorphic(&sub, &power(&Digraph::make_c(), comp.exponent).unwrap()).is_some());
        counts[comp.exponent] += 1;
    }
    counts
}

#[test]
fn triple_shift_inventories() {
    let t = triple_shift(&[2]).unwrap();
    assert_eq!(t.vertices.len(), 36);
    assert_eq!(inventory(&[2]), vec![9, 6, 1]);
    assert_eq!(inventory(&[1]), vec![3, 1]);
    assert_eq!(inventory(&[0]), vec![1]);
    assert_eq!(inventory(&[3]), vec![27, 27, 9, 1]);
    assert_eq!(inventory(&[1, 2]), vec![12, 7, 1]);
}

#[test]
fn triple_shift_vertices_are_the_triangles_of_the_base() {
    for exponents in [vec![2], vec![0, 1], vec![1, 1]] {
        let t = triple_shift(&exponents).unwrap();
        let n = t.base.vertex_count();
        let mut expected = Vec::new();
        for d0 in 0..n {
            for d1 in 0..n {
                for d2 in 0..n {
                    if t.base.has_edge(d0, d1) && t.base.has_edge(d1, d2) && t.base.has_edge(d2, d0) {
                        expected.push([d0, d1, d2]);
                    }
                }
            }
        }
        assert_eq!(t.vertices, expected);
    }
}

#[test]
fn gadgets_realise_the_shift_rule() {
    let gadgets = gadget_search();
    assert!(!gadgets.is_empty());
    let c = Digraph::make_c();
    for g in &gadgets {
        assert!(g.is_connected());
        for exponents in [vec![1], vec![2], vec![0, 1, 2]] {
            let t = triple_shift(&exponents).unwrap();
            let (rebuilt, vertices) = rebuild_from_gadget(g, &t.base).unwrap();
            assert_eq!(vertices, t.vertices);
            assert_eq!(rebuilt, t.digraph, "{exponents:?}");
        }
        // Direct check over all pairs of triples, homomorphisms or not.
        let shift = triple_shift(&[1]).unwrap();
        for d in 0..27 {
            for e in 0..27 {
                let (d, e) = (decode(d, &[3, 3, 3]), decode(e, &[3, 3, 3]));
                let assignment = [d[0], d[1], d[2], e[0], e[1], e[2]];
                let hom = g.edges().all(|(u, v)| c.has_edge(assignment[u], assignment[v]));
                let position = |x: &[usize]| shift.vertices.iter().position(|v| v == x);
                let expected = match (position(&d), position(&e)) {
                    (Some(i), Some(j)) => shift.digraph.has_edge(i, j),
                    _ => false,
                };
                assert_eq!(hom, expected);
            }
        }
    }
}
