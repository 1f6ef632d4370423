use std::time::Instant;

use proptest::prelude::*;
use varkit::conditions::{builtin, find_polymorphisms, OperationTable};
use varkit::decomposition::{
    direct_factorization, existential_nu_pairs, fast_nu_pairs, is_directly_indecomposable, is_nth_power,
    nu_equivalences, nu_equivalences_with, power_decompose, product_decompose,
};
use varkit::structures::{
    decode, disjoint_union, encode, is_isomorphic, nonisomorphic_digraphs, power, product, Digraph, Partition,
    VertexMap,
};
use varkit::Error;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Relabels `g` by `x -> (x * step + offset) mod n` with `step` coprime to `n`.
fn shuffled(g: &Digraph, offset: usize) -> Digraph {
    let n = g.vertex_count();
    if n == 0 {
        return g.clone();
    }
    let step = (5..).find(|&s| gcd(s, n) == 1).unwrap();
    let map = VertexMap::new(n, (0..n).map(|x| (x * step + offset) % n).collect()).unwrap();
    g.image_under(&map).unwrap()
}

/// Takes coordinate `i` of the `i`-th argument, for tuples over `radices`.
fn canonical_f(radices: &[usize]) -> OperationTable {
    let size = radices.iter().product();
    OperationTable::from_fn(radices.len(), size, |args| {
        let digits: Vec<usize> = args.iter().enumerate().map(|(i, &x)| decode(x, radices)[i]).collect();
        encode(&digits, radices)
    })
    .unwrap()
}

fn rotation(m: usize, n: usize) -> OperationTable {
    let radices = vec![m; n];
    OperationTable::from_fn(1, m.pow(n as u32), |args| {
        let mut digits = decode(args[0], &radices);
        digits.rotate_left(1);
        encode(&digits, &radices)
    })
    .unwrap()
}

fn kernel(radices: &[usize], coordinate: usize) -> Partition {
    let size: usize = radices.iter().product();
    Partition::from_labels(&(0..size).map(|x| decode(x, radices)[coordinate]).collect::<Vec<_>>())
}

#[test]
fn square_of_c_with_canonical_operation() {
    let c = Digraph::make_c();
    let square = power(&c, 2).unwrap();
    let f = canonical_f(&[3, 3]);
    let nus = nu_equivalences(&square, &f).unwrap();
    assert_eq!(nus, vec![kernel(&[3, 3], 0), kernel(&[3, 3], 1)]);

    let w = product_decompose(&square, &f).unwrap();
    assert_eq!(w.factors, vec![c.clone(), c.clone()]);
    assert_eq!(w.iso, VertexMap::identity(9));
    assert!(w.g.is_none());

    let w = power_decompose(&square, &f, &rotation(3, 2)).unwrap();
    assert_eq!(w.base(), Some(&c));
    assert_eq!(w.iso, VertexMap::identity(9));
}

#[test]
fn first_projection_gives_the_square_and_a_point() {
    let square = power(&Digraph::make_c(), 2).unwrap();
    let first = OperationTable::projection(2, 9, 0).unwrap();
    let w = product_decompose(&square, &first).unwrap();
    assert!(w.nus[0].is_discrete() && w.nus[1].is_total());
    assert_eq!(w.factors, vec![square, Digraph::point()]);
    assert_eq!(w.iso, VertexMap::identity(9));
}

#[test]
fn point_and_mixed_products() {
    for n in 1..=4 {
        let f = OperationTable::new(n, 1, vec![0]).unwrap();
        let nus = nu_equivalences(&Digraph::point(), &f).unwrap();
        assert!(nus.iter().all(Partition::is_total));
        let g = OperationTable::new(1, 1, vec![0]).unwrap();
        assert_eq!(power_decompose(&Digraph::point(), &f, &g).unwrap().base(), Some(&Digraph::point()));
    }

    let mixed = product(&[Digraph::make_c(), Digraph::make_edge()]).unwrap();
    let w = product_decompose(&mixed, &canonical_f(&[3, 2])).unwrap();
    assert!(is_isomorphic(&w.factors[0], &Digraph::make_c()).is_some());
    assert!(is_isomorphic(&w.factors[1], &Digraph::make_edge()).is_some());
}

#[test]
fn square_of_c1_with_swap() {
    let c1 = Digraph::make_c1();
    let square = power(&c1, 2).unwrap();
    let w = power_decompose(&square, &canonical_f(&[4, 4]), &rotation(4, 2)).unwrap();
    assert!(is_isomorphic(w.base().unwrap(), &c1).is_some());
}

#[test]
fn wrong_shift_is_named() {
    let square = power(&Digraph::make_c(), 2).unwrap();
    let identity = OperationTable::projection(1, 9, 0).unwrap();
    match power_decompose(&square, &canonical_f(&[3, 3]), &identity) {
        Err(Error::NotPowerDecomposition(message)) => assert!(message.contains("rotation"), "{message}"),
        other => panic!("expected a rotation failure, got {other:?}"),
    }
    let shift3 = rotation(3, 2);
    let c_cubed = power(&Digraph::make_c(), 3).unwrap();
    assert!(power_decompose(&c_cubed, &canonical_f(&[3, 3, 3]), &OperationTable::projection(1, 27, 0).unwrap())
        .is_err());
    assert!(power_decompose(&c_cubed, &canonical_f(&[3, 3, 3]), &shift3).is_err());
}

#[test]
fn abstract_square_of_c() {
    let hidden = shuffled(&power(&Digraph::make_c(), 2).unwrap(), 4);
    let w = is_nth_power(&hidden, 2).unwrap().unwrap();
    assert!(is_isomorphic(w.base().unwrap(), &Digraph::make_c()).is_some());
    assert!(w.iso.is_isomorphism(&hidden, &power(w.base().unwrap(), 2).unwrap()).unwrap());
}

#[test]
fn unions_of_c_are_not_squares() {
    let c = Digraph::make_c();
    for g in [
        disjoint_union(&[c.clone(), c.clone()]),
        disjoint_union(&[c.clone(), Digraph::point()]),
        disjoint_union(&[c.clone(), c.clone(), c.clone()]),
    ] {
        assert!(is_nth_power(&g, 2).unwrap().is_none());
    }
    assert!(is_nth_power(&Digraph::point(), 0).is_err());
}

#[test]
fn round_trip_over_small_reflexive_digraphs() {
    let start = Instant::now();
    let mut checked = 0;
    for size in 1..=4 {
        for (index, b) in nonisomorphic_digraphs(size, true).iter().enumerate() {
            let keep_base = b.is_connected() && is_directly_indecomposable(b).unwrap();
            for n in [2, 3] {
                let target = power(b, n).unwrap();
                let hidden = shuffled(&target, index + n);
                let w = is_nth_power(&hidden, n).unwrap().unwrap_or_else(|| panic!("{b:?}^{n} not recognised"));
                let base = w.base().unwrap();
                assert!(w.iso.is_isomorphism(&hidden, &power(base, n).unwrap()).unwrap());
                assert!(is_isomorphic(&power(base, n).unwrap(), &target).is_some());
                if keep_base {
                    assert!(is_isomorphic(base, b).is_some(), "{b:?}");
                }
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 2 * (1 + 3 + 16 + 218));
    eprintln!("round trip: {checked} powers in {:?}", start.elapsed());
}

/// Exhaustive composition identity check.
fn is_product_decomposition(f: &OperationTable) -> bool {
    let n = f.arity();
    let size = f.universe_size();
    if !f.is_idempotent() {
        return false;
    }
    let cells = n * n;
    (0..size.pow(cells as u32)).all(|index| {
        let grid = decode(index, &vec![size; cells]);
        let rows: Vec<&[usize]> = grid.chunks(n).collect();
        let outer: Vec<usize> = rows.iter().map(|r| f.get(r)).collect();
        let diagonal: Vec<usize> = (0..n).map(|i| rows[i][i]).collect();
        f.get(&outer) == f.get(&diagonal)
    })
}

fn assert_rules_agree(f: &OperationTable) {
    for i in 0..f.arity() {
        assert_eq!(fast_nu_pairs(f, i).unwrap(), existential_nu_pairs(f, i).unwrap(), "{f:?} position {i}");
    }
}

#[test]
fn certificate_matches_the_identities_on_all_binary_tables() {
    let mut accepted = 0;
    for size in 1..=3 {
        for g in nonisomorphic_digraphs(size, false) {
            let free = size * size - size;
            for index in 0..size.pow(free as u32) {
                let mut rest = decode(index, &vec![size; free]).into_iter();
                let values = (0..size * size).map(|c| if c / size == c % size { c / size } else { rest.next().unwrap() });
                let f = OperationTable::new(2, size, values.collect()).unwrap();
                let expected = is_product_decomposition(&f) && f.is_polymorphism(&g).unwrap();
                assert_eq!(nu_equivalences(&g, &f).is_ok(), expected, "{g:?} {f:?}");
                if expected {
                    assert_rules_agree(&f);
                    accepted += 1;
                }
            }
        }
    }
    assert!(accepted > 0);
}

#[test]
fn fast_rule_equals_existential_definition() {
    let start = Instant::now();
    let mut structures = 0;
    for size in 1..=3 {
        for b in nonisomorphic_digraphs(size, true) {
            for n in [2, 3] {
                if size.pow(n as u32) > 9 {
                    continue;
                }
                let a = shuffled(&power(&b, n).unwrap(), size);
                let w = is_nth_power(&a, n).unwrap().unwrap();
                let mut operations = vec![w.f.clone()];
                operations.extend((0..n).map(|i| OperationTable::projection(n, a.vertex_count(), i).unwrap()));
                for f in &operations {
                    nu_equivalences_with(&a, f, true).unwrap();
                    assert_rules_agree(f);
                }
                structures += 1;
            }
        }
    }
    assert!(start.elapsed().as_secs() < 60);
    assert!(structures > 0);
}

#[test]
fn direct_factorization_matches_products_of_two_vertex_digraphs() {
    let two = nonisomorphic_digraphs(2, false);
    let mut products = Vec::new();
    for x in &two {
        for y in &two {
            products.push(product(&[x.clone(), y.clone()]).unwrap());
        }
    }
    for g in nonisomorphic_digraphs(4, false) {
        let expected = products.iter().any(|p| is_isomorphic(p, &g).is_some());
        let found = direct_factorization(&g).unwrap();
        assert_eq!(found.is_some(), expected, "{g:?}");
        if let Some(w) = found {
            assert!(w.iso.is_isomorphism(&g, &product(&w.factors).unwrap()).unwrap());
        }
    }
    for size in [2, 3, 5] {
        assert!(nonisomorphic_digraphs(size.min(4), false).iter().all(|g| g.vertex_count() != size
            || is_directly_indecomposable(g).unwrap()));
    }
}

#[test]
fn factor_search_agrees_with_generic_identity_search() {
    let sys = builtin("power_decomposition(2)").unwrap();
    let mut squares = 0;
    let mut corpus: Vec<Digraph> = nonisomorphic_digraphs(1, false);
    corpus.extend(nonisomorphic_digraphs(4, false));
    let c = Digraph::make_c();
    corpus.push(power(&c, 2).unwrap());
    corpus.push(disjoint_union(&[c.clone(), c.clone(), c]));
    for g in &corpus {
        let generic = find_polymorphisms(g, &sys).unwrap().tables;
        let dedicated = is_nth_power(g, 2).unwrap();
        assert_eq!(generic.is_some(), dedicated.is_some(), "{g:?}");
        if let Some(tables) = generic {
            let w = power_decompose(g, &tables["f"], &tables["g"]).unwrap();
            assert!(is_isomorphic(w.base().unwrap(), dedicated.unwrap().base().unwrap()).is_some());
            squares += 1;
        }
    }
    assert!(squares > 0);
}

fn small_digraph() -> impl Strategy<Value = Digraph> {
    (1usize..=3).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            Digraph::new(n, (0..n * n).filter(|&i| bits[i]).map(|i| (i / n, i % n))).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn squares_are_recognised_after_relabelling(b in small_digraph(), offset in 0usize..16) {
        let square = power(&b, 2).unwrap();
        let hidden = shuffled(&square, offset);
        let w = is_nth_power(&hidden, 2).unwrap().unwrap();
        let base = w.base().unwrap();
        prop_assert!(w.iso.is_isomorphism(&hidden, &power(base, 2).unwrap()).unwrap());
        prop_assert!(w.nus.iter().all(|p| p.num_blocks() == b.vertex_count()));
    }

    #[test]
    fn products_split_into_their_factors(x in small_digraph(), y in small_digraph(), offset in 0usize..16) {
        let radices = [x.vertex_count(), y.vertex_count()];
        let pair = product(&[x.clone(), y.clone()]).unwrap();
        let w = product_decompose(&pair, &canonical_f(&radices)).unwrap();
        // Quotients only see edges that survive in the product.
        if x.edge_count() > 0 && y.edge_count() > 0 {
            prop_assert_eq!(&w.factors, &vec![x, y]);
        } else {
            prop_assert_eq!(w.factors.iter().map(Digraph::edge_count).sum::<usize>(), 0);
        }
        let hidden = shuffled(&pair, offset);
        let n = pair.vertex_count();
        let step = (5..).find(|&s| gcd(s, n) == 1).unwrap();
        let forward: Vec<usize> = (0..n).map(|v| (v * step + offset) % n).collect();
        let mut back = vec![0; n];
        for (v, &h) in forward.iter().enumerate() {
            back[h] = v;
        }
        let f = canonical_f(&radices);
        let moved = OperationTable::from_fn(2, n, |a| forward[f.get(&[back[a[0]], back[a[1]]])]).unwrap();
        let w = product_decompose(&hidden, &moved).unwrap();
        prop_assert!(w.iso.is_isomorphism(&hidden, &product(&w.factors).unwrap()).unwrap());
    }
}
