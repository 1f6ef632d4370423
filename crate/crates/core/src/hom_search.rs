//! Backtracking homomorphism search with arc consistency.
//!
//! Source vertices are decided in ascending order and candidate images are
//! tried in ascending order, so enumeration yields homomorphisms in
//! lexicographic order of their image arrays. After every decision the
//! edge constraints are propagated to a fixpoint in both directions:
//! for an edge `u -> v` the domain of `v` shrinks to the out-neighbourhood
//! of the domain of `u`, and the domain of `u` to the in-neighbourhood of
//! the domain of `v`.

use std::collections::{BTreeMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::structures::{decode_into, encode, power, Digraph, VertexMap};

/// A homomorphism search instance: `source -> target` with some images
/// fixed in advance.
#[derive(Clone, Debug)]
pub struct HomProblem<'a> {
    source: &'a Digraph,
    target: &'a Digraph,
    pins: BTreeMap<usize, usize>,
    allowed: Option<FixedBitSet>,
}

impl<'a> HomProblem<'a> {
    pub fn new(source: &'a Digraph, target: &'a Digraph) -> Self {
        HomProblem { source, target, pins: BTreeMap::new(), allowed: None }
    }

    /// Fixes the image of `vertex`. Conflicting or out-of-range pins are rejected.
    pub fn pin(mut self, vertex: usize, image: usize) -> Result<Self> {
        if vertex >= self.source.vertex_count() {
            return Err(Error::VertexOutOfRange { vertex, count: self.source.vertex_count() });
        }
        if image >= self.target.vertex_count() {
            return Err(Error::VertexOutOfRange { vertex: image, count: self.target.vertex_count() });
        }
        match self.pins.insert(vertex, image) {
            Some(old) if old != image => {
                Err(Error::Invalid(format!("vertex {vertex} pinned to both {old} and {image}")))
            }
            _ => Ok(self),
        }
    }

    /// Restricts every image to `vertices`.
    pub fn image_within(mut self, vertices: &[usize]) -> Result<Self> {
        let mut set = FixedBitSet::with_capacity(self.target.vertex_count());
        for &v in vertices {
            if v >= self.target.vertex_count() {
                return Err(Error::VertexOutOfRange { vertex: v, count: self.target.vertex_count() });
            }
            set.insert(v);
        }
        self.allowed = Some(set);
        Ok(self)
    }

    pub fn pins(&self) -> &BTreeMap<usize, usize> {
        &self.pins
    }

    /// All homomorphisms extending the pins, in lexicographic order,
    /// truncated at `limit`.
    pub fn enumerate(&self, limit: Option<usize>) -> Vec<VertexMap> {
        self.run(limit).0
    }

    /// Like [`HomProblem::enumerate`] but also returns the number of search nodes.
    pub fn run(&self, limit: Option<usize>) -> (Vec<VertexMap>, u64) {
        let mut engine = Engine::new(self.source, self.target);
        let mut found = Vec::new();
        if limit == Some(0) {
            return (found, 0);
        }
        let Some(domains) = engine.initial_domains(&self.pins, self.allowed.as_ref()) else {
            return (found, 0);
        };
        engine.search(domains, limit, &mut found);
        (found, engine.nodes)
    }

    pub fn first(&self) -> Option<VertexMap> {
        self.enumerate(Some(1)).pop()
    }
}

struct Engine<'a> {
    source: &'a Digraph,
    target: &'a Digraph,
    out_sets: Vec<FixedBitSet>,
    in_sets: Vec<FixedBitSet>,
    loops: FixedBitSet,
    nodes: u64,
}

impl<'a> Engine<'a> {
    fn new(source: &'a Digraph, target: &'a Digraph) -> Self {
        let m = target.vertex_count();
        let set_of = |list: &[usize]| {
            let mut s = FixedBitSet::with_capacity(m);
            s.extend(list.iter().copied());
            s
        };
        let out_sets = (0..m).map(|a| set_of(target.out_neighbors(a))).collect();
        let in_sets = (0..m).map(|a| set_of(target.in_neighbors(a))).collect();
        let mut loops = FixedBitSet::with_capacity(m);
        loops.extend((0..m).filter(|&a| target.has_edge(a, a)));
        Engine { source, target, out_sets, in_sets, loops, nodes: 0 }
    }

    fn initial_domains(
        &self,
        pins: &BTreeMap<usize, usize>,
        allowed: Option<&FixedBitSet>,
    ) -> Option<Vec<FixedBitSet>> {
        let m = self.target.vertex_count();
        let mut full = FixedBitSet::with_capacity(m);
        full.insert_range(..);
        if let Some(a) = allowed {
            full.intersect_with(a);
        }
        let mut domains: Vec<FixedBitSet> = (0..self.source.vertex_count())
            .map(|u| {
                let mut d = full.clone();
                if self.source.has_edge(u, u) {
                    d.intersect_with(&self.loops);
                }
                d
            })
            .collect();
        for (&u, &a) in pins {
            if !domains[u].contains(a) {
                return None;
            }
            domains[u].clear();
            domains[u].insert(a);
        }
        let all: Vec<usize> = (0..domains.len()).collect();
        self.propagate(&mut domains, all).then_some(domains)
    }

    fn neighborhood(&self, domain: &FixedBitSet, sets: &[FixedBitSet]) -> FixedBitSet {
        let mut result = FixedBitSet::with_capacity(self.target.vertex_count());
        for a in domain.ones() {
            result.union_with(&sets[a]);
        }
        result
    }

    /// Arc consistency to fixpoint starting from the changed vertices.
    /// Returns false on a domain wipe-out.
    fn propagate(&self, domains: &mut [FixedBitSet], changed: Vec<usize>) -> bool {
        let mut queued = vec![false; domains.len()];
        let mut queue = VecDeque::new();
        for u in changed {
            if !std::mem::replace(&mut queued[u], true) {
                queue.push_back(u);
            }
        }
        while let Some(u) = queue.pop_front() {
            queued[u] = false;
            if domains[u].is_clear() {
                return false;
            }
            let forward = self.neighborhood(&domains[u], &self.out_sets);
            let backward = self.neighborhood(&domains[u], &self.in_sets);
            let arcs = self
                .source
                .out_neighbors(u)
                .iter()
                .map(|&v| (v, &forward))
                .chain(self.source.in_neighbors(u).iter().map(|&w| (w, &backward)));
            for (v, support) in arcs {
                if v == u {
                    continue;
                }
                let before = domains[v].count_ones(..);
                domains[v].intersect_with(support);
                let after = domains[v].count_ones(..);
                if after == 0 {
                    return false;
                }
                if after != before && !std::mem::replace(&mut queued[v], true) {
                    queue.push_back(v);
                }
            }
        }
        true
    }

    fn search(&mut self, domains: Vec<FixedBitSet>, limit: Option<usize>, found: &mut Vec<VertexMap>) {
        let Some(u) = (0..domains.len()).find(|&u| domains[u].count_ones(..) > 1) else {
            let image = domains.iter().map(|d| d.ones().next().expect("non-empty domain")).collect();
            found.push(VertexMap::new(self.target.vertex_count(), image).expect("domain values are in range"));
            return;
        };
        for a in domains[u].ones().collect::<Vec<_>>() {
            self.nodes += 1;
            let mut next = domains.clone();
            next[u].clear();
            next[u].insert(a);
            if self.propagate(&mut next, vec![u]) {
                self.search(next, limit, found);
                if limit.is_some_and(|l| found.len() >= l) {
                    return;
                }
            }
        }
    }
}

/// Edge-preservation check.
pub fn is_homomorphism(f: &VertexMap, g: &Digraph, h: &Digraph) -> Result<bool> {
    f.is_homomorphism(g, h)
}

/// All homomorphisms extending the pins of `problem`, in lexicographic order.
pub fn enumerate_homomorphisms(problem: &HomProblem<'_>, limit: Option<usize>) -> Vec<VertexMap> {
    problem.enumerate(limit)
}

/// A homomorphism `g -> g` fixing `sub` pointwise with image exactly `sub`.
pub fn find_retraction(g: &Digraph, sub: &[usize]) -> Result<Option<VertexMap>> {
    let mut problem = HomProblem::new(g, g).image_within(sub)?;
    for &v in sub {
        problem = problem.pin(v, v)?;
    }
    Ok(problem.first())
}

/// Outcome of classifying a homomorphism out of a power of the triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PowerHomClass {
    /// `f = iota ∘ π_J` with `iota` an isomorphism onto the image of `f`.
    Factored { coordinates: Vec<usize>, iota: VertexMap },
    /// The target fails the antisymmetry or unique-triangle hypothesis.
    NotApplicable,
    /// Verification failed; the data locates the failure.
    Violation(String),
}

/// Classifies a homomorphism `f: C^k -> h` as `iota ∘ π_J`.
///
/// `J` is the set of coordinates `f` depends on, found by scanning all pairs
/// of tuples that differ in one coordinate. `iota` is read off on tuples that
/// are zero outside `J` and then checked: `f` must factor through it, and it
/// must be injective with an edge-reflecting inverse on its image.
pub fn classify_power_hom(f: &VertexMap, k: usize, h: &Digraph) -> Result<PowerHomClass> {
    let c = Digraph::make_c();
    let source = power(&c, k)?;
    if !f.is_homomorphism(&source, h)? {
        return Err(Error::Invalid("map is not a homomorphism from the power of C".into()));
    }
    let preds = h.structure_predicates();
    if !preds.antisymmetric || !preds.unique_triangle {
        return Ok(PowerHomClass::NotApplicable);
    }
    let radices = vec![3usize; k];
    let mut digits = vec![0usize; k];
    let depends: Vec<usize> = (0..k)
        .filter(|&j| {
            let step = 3usize.pow((k - 1 - j) as u32);
            (0..source.vertex_count()).any(|a| {
                decode_into(a, &radices, &mut digits);
                digits[j] == 0 && (f.apply(a) != f.apply(a + step) || f.apply(a) != f.apply(a + 2 * step))
            })
        })
        .collect();
    let sub = power(&c, depends.len())?;
    let sub_radices = vec![3usize; depends.len()];
    let mut sub_digits = vec![0usize; depends.len()];
    let iota_image: Vec<usize> = (0..sub.vertex_count())
        .map(|b| {
            decode_into(b, &sub_radices, &mut sub_digits);
            let mut full = vec![0usize; k];
            for (&j, &d) in depends.iter().zip(&sub_digits) {
                full[j] = d;
            }
            f.apply(encode(&full, &radices))
        })
        .collect();
    let iota = VertexMap::new(h.vertex_count(), iota_image)?;
    for a in 0..source.vertex_count() {
        decode_into(a, &radices, &mut digits);
        let projected: Vec<usize> = depends.iter().map(|&j| digits[j]).collect();
        let b = encode(&projected, &sub_radices);
        if iota.apply(b) != f.apply(a) {
            return Ok(PowerHomClass::Violation(format!("f({digits:?}) differs from iota(pi_J) at J={depends:?}")));
        }
    }
    if !iota.is_injective() {
        return Ok(PowerHomClass::Violation(format!("iota is not injective for J={depends:?}")));
    }
    for b in 0..sub.vertex_count() {
        for b2 in 0..sub.vertex_count() {
            if h.has_edge(iota.apply(b), iota.apply(b2)) && !sub.has_edge(b, b2) {
                return Ok(PowerHomClass::Violation(format!("inverse of iota does not preserve ({b}, {b2})")));
            }
        }
    }
    Ok(PowerHomClass::Factored { coordinates: depends, iota })
}
