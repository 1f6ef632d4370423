//! From a free algebra on three generators to a compatible digraph that is
//! a disjoint union of powers of ℂ.
//!
//! The free algebra `F` carries the digraph whose edge relation is the
//! subalgebra of `F²` generated by `(x,x), (y,y), (z,z), (x,y), (y,z),
//! (z,x)`. Its components are indexed by unary terms `t` (the value of
//! `u(x,x,x)` on the component). Each element `u` is sent to `[u]`, the
//! tuple of its images under all non-constant homomorphisms from its
//! component to ℂ, or to a fresh loop `0_t` when there are none.

use serde::Serialize;

use super::congruence::congruence_generated;
use super::free::{close, free_algebra, FreeAlgebra, DEFAULT_CAP};
use super::{is_compatible, FiniteAlgebra};
use crate::conditions::OperationTable;
use crate::error::{Error, Result};
use crate::hom_search::HomProblem;
use crate::structures::{disjoint_union, encode, power, Digraph, Partition, VertexMap};

/// One component `F_t` of the free-algebra digraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    /// The element `t(x)` shared by every `u` in the component as `u(x,x,x)`.
    pub label: usize,
    pub label_term: String,
    pub vertices: Vec<usize>,
    /// Non-constant homomorphisms to ℂ, on the spanned component with its
    /// vertices renumbered in increasing order.
    pub homs: Vec<VertexMap>,
}

/// Outcomes of the checks made along the way.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Claims {
    /// The kernel of `u -> [u]` is a congruence of `F`.
    pub kernel_is_congruence: bool,
    /// `[x]`, `[y]`, `[z]` are pairwise different.
    pub generators_separated: bool,
    /// Per component: homs exist iff `[t(x)], [t(y)], [t(z)]` are distinct.
    pub unary_separation: Vec<bool>,
    pub psi_is_surjective_hom: bool,
    pub k_is_quotient: bool,
    pub k_compatible: bool,
    /// The embedding of `K` into `G` is injective and edge preserving.
    pub k_embeds_in_g: bool,
    /// The embedding also reflects edges.
    pub k_spanned_in_g: bool,
}

impl Claims {
    /// Everything that must hold for every input algebra.
    pub fn all_invariants_hold(&self) -> bool {
        self.kernel_is_congruence
            && self.unary_separation.iter().all(|&b| b)
            && self.psi_is_surjective_hom
            && self.k_is_quotient
            && self.k_compatible
            && self.k_embeds_in_g
            && self.k_spanned_in_g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section4Result {
    pub free: FreeAlgebra,
    pub f_digraph: Digraph,
    pub components: Vec<Component>,
    pub psi: VertexMap,
    pub k: Digraph,
    /// Operations induced on `K`; absent when the kernel is not a congruence.
    pub k_algebra: Option<FiniteAlgebra>,
    pub g: Digraph,
    /// Exponent of ℂ for each component of `G`, in component order.
    pub g_exponents: Vec<usize>,
    pub embedding: VertexMap,
    pub claims: Claims,
}

pub fn section4_pipeline(a: &FiniteAlgebra) -> Result<Section4Result> {
    section4_pipeline_with_cap(a, DEFAULT_CAP)
}

/// As [`section4_pipeline`], with `cap` bounding the free algebra, the edge
/// relation, each hom enumeration and each power of ℂ.
pub fn section4_pipeline_with_cap(a: &FiniteAlgebra, cap: usize) -> Result<Section4Result> {
    let free = free_algebra(a, 3, cap)?;
    let f_digraph = edge_relation(&free, cap)?;
    let components = components(&free, &f_digraph, cap)?;

    let size = free.len();
    let mut component_of = vec![0; size];
    for (t, comp) in components.iter().enumerate() {
        for &u in &comp.vertices {
            component_of[u] = t;
        }
    }
    let local = |u: usize| components[component_of[u]].vertices.binary_search(&u).expect("u is in its component");
    let key = |u: usize| -> (usize, Vec<usize>) {
        let comp = &components[component_of[u]];
        (component_of[u], comp.homs.iter().map(|h| h.apply(local(u))).collect())
    };
    let keys: Vec<(usize, Vec<usize>)> = (0..size).map(key).collect();
    let kernel = Partition::from_labels(&keys);
    let psi = VertexMap::new(kernel.num_blocks(), kernel.labels().to_vec())?;
    let k = f_digraph.image_under(&psi)?;
    let mut representative = vec![usize::MAX; kernel.num_blocks()];
    for u in (0..size).rev() {
        representative[psi.apply(u)] = u;
    }

    let pairs: Vec<(usize, usize)> = (0..size).map(|u| (u, representative[psi.apply(u)])).collect();
    let kernel_is_congruence = congruence_generated(&free.algebra, &pairs)? == kernel;
    let [gx, gy, gz] = [free.generators[0], free.generators[1], free.generators[2]].map(|g| psi.apply(g));
    let generators_separated = gx != gy && gy != gz && gx != gz;
    let unary_separation = components
        .iter()
        .map(|comp| {
            let images = (0..3)
                .map(|g| {
                    free.collapse_to(comp.label, g)
                        .map(|e| psi.apply(e))
                        .ok_or_else(|| Error::Invariant("a unary term is missing from the free algebra".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let distinct = images[0] != images[1] && images[1] != images[2] && images[0] != images[2];
            Ok(distinct == !comp.homs.is_empty())
        })
        .collect::<Result<Vec<_>>>()?;
    let psi_is_surjective_hom = psi.is_homomorphism(&f_digraph, &k)? && representative.iter().all(|&r| r < size);
    let k_is_quotient = f_digraph.quotient(&kernel)? == k;

    let k_algebra = if kernel_is_congruence { Some(induced_algebra(&free, &psi, &representative)?) } else { None };
    let k_compatible = match &k_algebra {
        Some(alg) => is_compatible(&k, alg)?.holds(),
        None => false,
    };

    let g_exponents: Vec<usize> = components.iter().map(|c| c.homs.len()).collect();
    let mut parts = Vec::with_capacity(components.len());
    let mut offsets = Vec::with_capacity(components.len());
    let mut total = 0usize;
    for &h in &g_exponents {
        let part = if h == 0 {
            Digraph::point()
        } else {
            let count = u32::try_from(h).ok().and_then(|e| 3usize.checked_pow(e));
            match count {
                Some(c) if c <= cap => power(&Digraph::make_c(), h)?,
                _ => return Err(Error::CapExceeded { cap, reached: total }),
            }
        };
        offsets.push(total);
        total += part.vertex_count();
        parts.push(part);
    }
    let g = disjoint_union(&parts);
    let embedding_image = representative
        .iter()
        .map(|&u| {
            let (t, coordinates) = &keys[u];
            offsets[*t] + if coordinates.is_empty() { 0 } else { encode(coordinates, &vec![3; coordinates.len()]) }
        })
        .collect();
    let embedding = VertexMap::new(g.vertex_count(), embedding_image)?;
    let k_embeds_in_g = embedding.is_injective() && embedding.is_homomorphism(&k, &g)?;
    let kn = k.vertex_count();
    let k_spanned_in_g = k_embeds_in_g
        && (0..kn).all(|i| (0..kn).all(|j| g.has_edge(embedding.apply(i), embedding.apply(j)) == k.has_edge(i, j)));

    let claims = Claims {
        kernel_is_congruence,
        generators_separated,
        unary_separation,
        psi_is_surjective_hom,
        k_is_quotient,
        k_compatible,
        k_embeds_in_g,
        k_spanned_in_g,
    };
    Ok(Section4Result { free, f_digraph, components, psi, k, k_algebra, g, g_exponents, embedding, claims })
}

/// The subalgebra of `F²` generated by the six generator pairs, as a
/// digraph on `F`.
fn edge_relation(free: &FreeAlgebra, cap: usize) -> Result<Digraph> {
    let [x, y, z] = [free.generators[0], free.generators[1], free.generators[2]];
    let seeds = [(x, x), (y, y), (z, z), (x, y), (y, z), (z, x)];
    let arities: Vec<usize> = free.algebra.ops().iter().map(|o| o.table.arity()).collect();
    let mut firsts = Vec::new();
    let mut seconds = Vec::new();
    let apply = |op: usize, indices: &[usize], pairs: &[(usize, usize)]| {
        let table = &free.algebra.ops()[op].table;
        firsts.clear();
        seconds.clear();
        for &i in indices {
            firsts.push(pairs[i].0);
            seconds.push(pairs[i].1);
        }
        (table.get(&firsts), table.get(&seconds))
    };
    let (closure, _) = close(&seeds, &arities, apply, cap)?;
    Digraph::from_edge_set(free.len(), closure.elements)
}

fn components(free: &FreeAlgebra, f_digraph: &Digraph, cap: usize) -> Result<Vec<Component>> {
    let c = Digraph::make_c();
    let mut result = Vec::new();
    for vertices in f_digraph.components() {
        let labels = vertices
            .iter()
            .map(|&u| free.collapse_to(u, 0).ok_or_else(|| Error::Invariant("u(x,x,x) is not generated".into())))
            .collect::<Result<Vec<_>>>()?;
        if labels.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Invariant(format!(
                "component of {} mixes the unary terms {} and {}",
                free.term(vertices[0]),
                free.term(labels[0]),
                free.term(*labels.iter().find(|&&l| l != labels[0]).expect("labels differ"))
            )));
        }
        let (sub, _) = f_digraph.spanned_subdigraph(&vertices)?;
        let all = HomProblem::new(&sub, &c).enumerate(Some(cap.saturating_add(1)));
        if all.len() > cap {
            return Err(Error::CapExceeded { cap, reached: all.len() });
        }
        let homs = all.into_iter().filter(|h| !h.is_constant()).collect();
        result.push(Component { label: labels[0], label_term: free.term(labels[0]), vertices, homs });
    }
    result.sort_by_key(|comp| comp.label);
    if result.windows(2).any(|w| w[0].label == w[1].label) {
        return Err(Error::Invariant("two components share a unary term".into()));
    }
    Ok(result)
}

fn induced_algebra(free: &FreeAlgebra, psi: &VertexMap, representative: &[usize]) -> Result<FiniteAlgebra> {
    let size = representative.len();
    let ops = free
        .algebra
        .ops()
        .iter()
        .map(|op| {
            let table = OperationTable::from_fn(op.table.arity(), size, |args| {
                let lifted: Vec<usize> = args.iter().map(|&v| representative[v]).collect();
                psi.apply(op.table.get(&lifted))
            })?;
            Ok((op.name.clone(), table))
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteAlgebra::new(size, ops)
}
