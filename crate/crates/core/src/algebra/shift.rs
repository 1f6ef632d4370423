//! The digraph of homomorphisms `ℂ -> G1` for `G1` a disjoint union of
//! powers of ℂ, with the coordinatewise equal-or-shift edge rule, and the
//! six-vertex gadgets whose homomorphisms realise that rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom_search::HomProblem;
use crate::structures::{decode, disjoint_union, power, Digraph};

/// A component of the triple-shift digraph, isomorphic to ℂ^exponent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftComponent {
    pub vertices: Vec<usize>,
    pub exponent: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleShift {
    /// `G1`, the disjoint union of the requested powers of ℂ.
    pub base: Digraph,
    /// Vertex `v` is the homomorphism `i -> vertices[v][i]` from ℂ to `G1`.
    pub vertices: Vec<[usize; 3]>,
    pub digraph: Digraph,
    pub components: Vec<ShiftComponent>,
}

/// Labels of the vertices of a disjoint union of powers of ℂ.
struct Coordinates {
    component: Vec<usize>,
    digits: Vec<Vec<usize>>,
}

impl Coordinates {
    fn new(exponents: &[usize]) -> Self {
        let mut component = Vec::new();
        let mut digits = Vec::new();
        for (j, &e) in exponents.iter().enumerate() {
            let radices = vec![3; e];
            for v in 0..3usize.pow(e as u32) {
                component.push(j);
                digits.push(decode(v, &radices));
            }
        }
        Coordinates { component, digits }
    }

    /// Whether `e` may follow `d`: same component, and in every coordinate
    /// either `d` is constant and `e = d`, or `d` rotates and `e` is `d` or
    /// `d` shifted by one.
    fn shift_edge(&self, d: &[usize; 3], e: &[usize; 3]) -> bool {
        if self.component[d[0]] != self.component[e[0]] {
            return false;
        }
        let width = self.digits[d[0]].len();
        (0..width).all(|s| {
            let ds = d.map(|v| self.digits[v][s]);
            let es = e.map(|v| self.digits[v][s]);
            let constant = ds[0] == ds[1] && ds[1] == ds[2];
            es == ds || (!constant && es == ds.map(|x| (x + 1) % 3))
        })
    }

    fn rotating_coordinates(&self, d: &[usize; 3]) -> usize {
        let width = self.digits[d[0]].len();
        (0..width).filter(|&s| self.digits[d[0]][s] != self.digits[d[1]][s]).count()
    }
}

fn homs_from_c(g1: &Digraph) -> Vec<[usize; 3]> {
    let c = Digraph::make_c();
    HomProblem::new(&c, g1)
        .enumerate(None)
        .into_iter()
        .map(|h| [h.apply(0), h.apply(1), h.apply(2)])
        .collect()
}

fn base_digraph(exponents: &[usize]) -> Result<Digraph> {
    let parts = exponents.iter().map(|&e| power(&Digraph::make_c(), e)).collect::<Result<Vec<_>>>()?;
    Ok(disjoint_union(&parts))
}

/// Builds the triple-shift digraph over `G1 = ∪ ℂ^e` for `e` in `exponents`.
pub fn triple_shift(exponents: &[usize]) -> Result<TripleShift> {
    let base = base_digraph(exponents)?;
    let coordinates = Coordinates::new(exponents);
    let vertices = homs_from_c(&base);
    let n = vertices.len();
    let mut edges = Vec::new();
    for (i, d) in vertices.iter().enumerate() {
        for (j, e) in vertices.iter().enumerate() {
            if coordinates.shift_edge(d, e) {
                edges.push((i, j));
            }
        }
    }
    let digraph = Digraph::new(n, edges)?;
    let components = digraph
        .components()
        .into_iter()
        .map(|members| {
            let exponent = coordinates.rotating_coordinates(&vertices[members[0]]);
            if 3usize.checked_pow(exponent as u32) != Some(members.len()) {
                return Err(Error::Invariant(format!(
                    "component with {} vertices reported as a power of exponent {exponent}",
                    members.len()
                )));
            }
            Ok(ShiftComponent { vertices: members, exponent })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TripleShift { base, vertices, digraph, components })
}

/// Vertex layout of a gadget: `a0, a1, a2, b0, b1, b2`.
const GADGET_SIZE: usize = 6;

/// Rebuilds the triple-shift digraph over `g1` from a gadget: `f -> g` iff
/// `a_i -> f(i), b_i -> g(i)` is a homomorphism from the gadget to `g1`.
/// Vertices are the homomorphisms `ℂ -> g1` in the order used by
/// [`triple_shift`].
pub fn rebuild_from_gadget(gadget: &Digraph, g1: &Digraph) -> Result<(Digraph, Vec<[usize; 3]>)> {
    if gadget.vertex_count() != GADGET_SIZE {
        return Err(Error::DimensionMismatch(format!(
            "a gadget has {GADGET_SIZE} vertices, got {}",
            gadget.vertex_count()
        )));
    }
    let vertices = homs_from_c(g1);
    let mut edges = Vec::new();
    for (i, f) in vertices.iter().enumerate() {
        for (j, g) in vertices.iter().enumerate() {
            let assignment = [f[0], f[1], f[2], g[0], g[1], g[2]];
            if gadget.edges().all(|(u, v)| g1.has_edge(assignment[u], assignment[v])) {
                edges.push((i, j));
            }
        }
    }
    Ok((Digraph::new(vertices.len(), edges)?, vertices))
}

fn cross_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(18);
    for i in 0..3 {
        for j in 0..3 {
            pairs.push((i, 3 + j));
            pairs.push((3 + j, i));
        }
    }
    pairs
}

fn triangles() -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (0..GADGET_SIZE).map(|v| (v, v)).collect();
    for i in 0..3 {
        edges.push((i, (i + 1) % 3));
        edges.push((3 + i, 3 + (i + 1) % 3));
    }
    edges
}

/// All gadgets on `a0..a2, b0..b2` that contain ℂ on the `a`s and on the
/// `b`s and whose homomorphisms to ℂ realise the triple-shift edge rule
/// over `G1 = ℂ`. Sorted by edge list.
pub fn gadget_search() -> Vec<Digraph> {
    let c = Digraph::make_c();
    let coordinates = Coordinates::new(&[1]);
    // A gadget containing both triangles maps a_i, b_i onto homomorphisms
    // ℂ -> ℂ, so only the 6 x 6 pairs of those need checking.
    let homs = homs_from_c(&c);
    let pair_count = homs.len() * homs.len();
    let assignment = |p: usize| {
        let (d, e) = (homs[p / homs.len()], homs[p % homs.len()]);
        [d[0], d[1], d[2], e[0], e[1], e[2]]
    };
    let target: u64 = (0..pair_count)
        .filter(|&p| coordinates.shift_edge(&homs[p / homs.len()], &homs[p % homs.len()]))
        .fold(0, |m, p| m | 1 << p);
    let pairs = cross_pairs();
    let allowed: Vec<u64> = pairs
        .iter()
        .map(|&(u, v)| {
            (0..pair_count).filter(|&p| c.has_edge(assignment(p)[u], assignment(p)[v])).fold(0, |m, p| m | 1 << p)
        })
        .collect();
    let full: u64 = (1 << pair_count) - 1;
    let mut found: Vec<Vec<(usize, usize)>> = Vec::new();
    for subset in 0u32..1 << pairs.len() {
        let mask = (0..pairs.len()).filter(|&i| subset >> i & 1 == 1).fold(full, |m, i| m & allowed[i]);
        if mask == target {
            let mut edges = triangles();
            edges.extend((0..pairs.len()).filter(|&i| subset >> i & 1 == 1).map(|i| pairs[i]));
            edges.sort_unstable();
            found.push(edges);
        }
    }
    found.sort();
    found.into_iter().map(|edges| Digraph::new(GADGET_SIZE, edges).expect("gadget edges are valid")).collect()
}
