//! Factoring a digraph along a product or power decomposition polymorphism.

mod factor;
mod nu;

pub use nu::{existential_nu_pairs, fast_nu_pairs, nu_equivalences, nu_equivalences_with};

use crate::conditions::OperationTable;
use crate::error::{Error, Result};
use crate::structures::{
    decode, encode, is_isomorphic, nonisomorphic_digraphs, power, product, Digraph, Partition, VertexMap,
};

/// Largest base size whose candidates are enumerated up to isomorphism.
const ENUMERATED_BASE: usize = 4;

/// A factorization of a digraph together with the operations it came from.
///
/// `iso` maps the digraph onto the product of `factors` (lexicographic
/// encoding). For power witnesses `g` is present and every factor is the
/// same base digraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionWitness {
    pub n: usize,
    pub f: OperationTable,
    pub g: Option<OperationTable>,
    pub nus: Vec<Partition>,
    pub factors: Vec<Digraph>,
    pub iso: VertexMap,
}

impl DecompositionWitness {
    /// The common factor of a power witness.
    pub fn base(&self) -> Option<&Digraph> {
        self.g.as_ref().and(self.factors.first())
    }
}

fn verify_iso(a: &Digraph, iso: &VertexMap, target: &Digraph) -> Result<()> {
    if !iso.is_bijection() {
        return Err(Error::Invariant("the block map is not injective".into()));
    }
    if !iso.is_isomorphism(a, target)? {
        return Err(Error::Invariant("the block map does not preserve edges in both directions".into()));
    }
    Ok(())
}

/// Splits `a` into the quotients by the equivalences of `f` and checks
/// that `x -> (block of x in each)` is an isomorphism onto their product.
pub fn product_decompose(a: &Digraph, f: &OperationTable) -> Result<DecompositionWitness> {
    let nus = nu_equivalences(a, f)?;
    let factors = nus.iter().map(|p| a.quotient(p)).collect::<Result<Vec<_>>>()?;
    let radices: Vec<usize> = nus.iter().map(Partition::num_blocks).collect();
    let image = (0..a.vertex_count())
        .map(|x| encode(&nus.iter().map(|p| p.block_of(x)).collect::<Vec<_>>(), &radices))
        .collect();
    let iso = VertexMap::new(radices.iter().product(), image)?;
    verify_iso(a, &iso, &product(&factors)?)?;
    Ok(DecompositionWitness { n: f.arity(), f: f.clone(), g: None, nus, factors, iso })
}

fn not_power(message: String) -> Error {
    Error::NotPowerDecomposition(message)
}

/// Checks the power decomposition identities for `(f, g)` and returns `a`
/// as the `n`-th power of its quotient by the first equivalence.
pub fn power_decompose(a: &Digraph, f: &OperationTable, g: &OperationTable) -> Result<DecompositionWitness> {
    let n = f.arity();
    let size = a.vertex_count();
    if g.arity() != 1 || g.universe_size() != size {
        return Err(not_power(format!("g must be a unary operation on {size} elements")));
    }
    let nus = nu_equivalences(a, f).map_err(|e| match e {
        Error::NotProductDecomposition(message) => not_power(message),
        other => other,
    })?;
    let shift = |x: usize| g.values()[x];
    let iterate = |x: usize, times: usize| (0..times).fold(x, |y, _| shift(y));
    if let Some(x) = (0..size).find(|&x| iterate(x, n) != x) {
        return Err(not_power(format!("g^{n}(x) = x fails at x = {x}")));
    }
    let mut args = vec![0usize; n];
    let mut rotated = vec![0usize; n];
    for &value in f.values() {
        for (i, r) in rotated.iter_mut().enumerate() {
            *r = shift(args[(i + 1) % n]);
        }
        if shift(value) != f.get(&rotated) {
            return Err(not_power(format!(
                "rotation identity g(f(x1,...,xn)) = f(g(x2),...,g(xn),g(x1)) fails at {args:?}"
            )));
        }
        crate::conditions::advance_tuple(&mut args, size);
    }
    let automorphism = VertexMap::new(size, g.values().to_vec())?;
    if !automorphism.is_isomorphism(a, a)? {
        return Err(not_power("g is not an automorphism".into()));
    }
    for i in 0..n {
        if nus[i].permuted(g.values()) != nus[(i + n - 1) % n] {
            return Err(Error::Invariant(format!("g does not carry relation {} onto the previous one", i + 1)));
        }
    }

    let base = a.quotient(&nus[0])?;
    let m = base.vertex_count();
    let radices = vec![m; n];
    let image = (0..size)
        .map(|x| {
            let digits: Vec<usize> = (0..n).map(|i| nus[0].block_of(iterate(x, i))).collect();
            encode(&digits, &radices)
        })
        .collect();
    let iso = VertexMap::new(radices.iter().product(), image)?;
    verify_iso(a, &iso, &power(&base, n)?)?;
    Ok(DecompositionWitness { n, f: f.clone(), g: Some(g.clone()), nus, factors: vec![base; n], iso })
}

fn integer_root(value: usize, n: usize) -> Option<usize> {
    let exponent = u32::try_from(n).ok()?;
    let mut m = 0usize;
    loop {
        match m.checked_pow(exponent) {
            Some(p) if p == value => return Some(m),
            Some(p) if p < value => m += 1,
            _ => return None,
        }
    }
}

/// The decomposition operation induced by coordinates `coordinates[x]` of
/// each vertex: `f(x1, ..., xn)` takes coordinate `i` from `xi`.
fn canonical_operation(coordinates: &[usize], radices: &[usize]) -> Result<OperationTable> {
    let size = coordinates.len();
    let mut vertex_at = vec![0; size];
    for (x, &t) in coordinates.iter().enumerate() {
        vertex_at[t] = x;
    }
    let digits: Vec<Vec<usize>> = coordinates.iter().map(|&t| decode(t, radices)).collect();
    OperationTable::from_fn(radices.len(), size, |args| {
        let picked: Vec<usize> = args.iter().enumerate().map(|(i, &x)| digits[x][i]).collect();
        vertex_at[encode(&picked, radices)]
    })
}

/// Out-degree and in-degree multisets, sorted.
fn degree_profile(g: &Digraph) -> (Vec<usize>, Vec<usize>) {
    let mut outs: Vec<usize> = (0..g.vertex_count()).map(|v| g.out_neighbors(v).len()).collect();
    let mut ins: Vec<usize> = (0..g.vertex_count()).map(|v| g.in_neighbors(v).len()).collect();
    outs.sort_unstable();
    ins.sort_unstable();
    (outs, ins)
}

/// Degree multisets of `b^n`: each tuple has the product of its
/// coordinates' degrees.
fn power_degree_profile(b: &Digraph, n: usize) -> (Vec<usize>, Vec<usize>) {
    let m = b.vertex_count();
    let spread = |degrees: Vec<usize>| {
        let mut all = vec![1usize];
        for _ in 0..n {
            all = all.iter().flat_map(|&p| degrees.iter().map(move |&d| p * d)).collect();
        }
        all.sort_unstable();
        all
    };
    let outs = (0..m).map(|v| b.out_neighbors(v).len()).collect();
    let ins = (0..m).map(|v| b.in_neighbors(v).len()).collect();
    (spread(outs), spread(ins))
}

/// Coordinates of each vertex of `a` in `b^n` for some base `b`.
///
/// Small bases are enumerated up to isomorphism, filtered by edge count,
/// loop count and degree multisets, and tested by isomorphism with `a`.
/// Larger ones go through the factor search.
fn power_coordinates(a: &Digraph, m: usize, n: usize) -> Result<Option<Vec<usize>>> {
    if m > ENUMERATED_BASE {
        return Ok(factor::search(a, &vec![m; n], true));
    }
    let exponent = u32::try_from(n).map_err(|_| Error::SizeOverflow(format!("exponent {n}")))?;
    let loops = (0..a.vertex_count()).filter(|&v| a.has_edge(v, v)).count();
    let profile = degree_profile(a);
    for b in nonisomorphic_digraphs(m, false) {
        let b_loops = (0..m).filter(|&v| b.has_edge(v, v)).count();
        if b.edge_count().checked_pow(exponent) != Some(a.edge_count())
            || b_loops.checked_pow(exponent) != Some(loops)
            || power_degree_profile(&b, n) != profile
        {
            continue;
        }
        if let Some(map) = is_isomorphic(a, &power(&b, n)?) {
            return Ok(Some(map.image().to_vec()));
        }
    }
    Ok(None)
}

/// Decides whether `a` is the `n`-th power of some digraph.
///
/// Coordinates `a -> [m]^n` over some base digraph on `m` vertices are
/// searched for; when found, the induced decomposition operation and
/// coordinate shift are passed through [`power_decompose`].
pub fn is_nth_power(a: &Digraph, n: usize) -> Result<Option<DecompositionWitness>> {
    if n == 0 {
        return Err(Error::Invalid("power exponent must be positive".into()));
    }
    let Some(m) = integer_root(a.vertex_count(), n) else {
        return Ok(None);
    };
    let radices = vec![m; n];
    let Some(coordinates) = power_coordinates(a, m, n)? else {
        return Ok(None);
    };
    let f = canonical_operation(&coordinates, &radices)?;
    let mut vertex_at = vec![0; a.vertex_count()];
    for (x, &t) in coordinates.iter().enumerate() {
        vertex_at[t] = x;
    }
    let shift = coordinates
        .iter()
        .map(|&t| {
            let mut digits = decode(t, &radices);
            digits.rotate_left(1);
            vertex_at[encode(&digits, &radices)]
        })
        .collect();
    let g = OperationTable::new(1, a.vertex_count(), shift)?;
    power_decompose(a, &f, &g).map(Some)
}

/// A decomposition of `a` into two factors with at least two vertices
/// each, if one exists. Every factor size pair is searched exhaustively, so
/// this is meant for small digraphs.
pub fn direct_factorization(a: &Digraph) -> Result<Option<DecompositionWitness>> {
    let size = a.vertex_count();
    for first in (2..size).take_while(|d| d * d <= size).filter(|d| size.is_multiple_of(*d)) {
        let radices = [first, size / first];
        if let Some(coordinates) = factor::search(a, &radices, false) {
            let f = canonical_operation(&coordinates, &radices)?;
            return product_decompose(a, &f).map(Some);
        }
    }
    Ok(None)
}

/// No decomposition into two factors of two or more vertices each. Digraphs
/// with fewer than two vertices count as indecomposable.
pub fn is_directly_indecomposable(a: &Digraph) -> Result<bool> {
    Ok(direct_factorization(a)?.is_none())
}
