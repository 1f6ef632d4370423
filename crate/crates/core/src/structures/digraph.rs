use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Partition, VertexMap};
use crate::error::{Error, Result};

/// A finite digraph on the vertices `0..vertex_count`.
///
/// Adjacency is kept as sorted out- and in-lists, so two digraphs compare
/// equal exactly when their vertex counts and edge sets agree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Digraph {
    /// Builds a digraph, rejecting out-of-range endpoints and duplicate edges.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = vec![Vec::new(); vertex_count];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: w, count: vertex_count });
                }
            }
            out[u].push(v);
        }
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateEdge(u, w[0]));
            }
        }
        Ok(Self::from_sorted_out(out))
    }

    /// Like [`Digraph::new`] but silently drops duplicate edges.
    pub fn from_edge_set(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut out = vec![Vec::new(); vertex_count];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(Error::VertexOutOfRange { vertex: w, count: vertex_count });
                }
            }
            out[u].push(v);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_out(out))
    }

    /// `out` must hold sorted, duplicate-free, in-range lists.
    pub(crate) fn from_sorted_out(out: Vec<Vec<usize>>) -> Self {
        let n = out.len();
        let mut inc = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, list) in out.iter().enumerate() {
            edge_count += list.len();
            for &v in list {
                inc[v].push(u);
            }
        }
        Digraph { out, inc, edge_count }
    }

    pub fn empty() -> Self {
        Digraph { out: Vec::new(), inc: Vec::new(), edge_count: 0 }
    }

    /// The one-vertex reflexive digraph.
    pub fn point() -> Self {
        Self::from_sorted_out(vec![vec![0]])
    }

    /// The reflexive directed triangle: edges `(0,1),(1,2),(2,0)` plus all loops.
    pub fn make_c() -> Self {
        Self::from_sorted_out(vec![vec![0, 1], vec![1, 2], vec![0, 2]])
    }

    /// The reflexive single edge `0 -> 1`.
    pub fn make_edge() -> Self {
        Self::from_sorted_out(vec![vec![0, 1], vec![1]])
    }

    /// An isolated loop vertex followed by a copy of [`Digraph::make_c`];
    /// the loop is vertex 0 and the triangle occupies 1, 2, 3.
    pub fn make_c1() -> Self {
        disjoint_union(&[Self::point(), Self::make_c()])
    }

    /// The digraph with only loops on `n` vertices.
    pub fn discrete(n: usize) -> Self {
        Self::from_sorted_out((0..n).map(|v| vec![v]).collect())
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out.get(u).is_some_and(|l| l.binary_search(&v).is_ok())
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.vertex_count()).all(|v| self.has_edge(v, v))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.edges().all(|(u, v)| u == v || !self.has_edge(v, u))
    }

    /// The digraph with every edge reversed.
    pub fn reversed(&self) -> Digraph {
        Digraph::from_sorted_out(self.inc.clone())
    }

    pub fn structure_predicates(&self) -> StructurePredicates {
        StructurePredicates {
            reflexive: self.is_reflexive(),
            antisymmetric: self.is_antisymmetric(),
            unique_triangle: self.has_unique_triangles(),
        }
    }

    /// Every non-loop edge `(u,v)` closes at most one triangle `v -> w -> u`
    /// with `u, v, w` pairwise distinct.
    fn has_unique_triangles(&self) -> bool {
        self.edges().filter(|&(u, v)| u != v).all(|(u, v)| {
            self.out[v]
                .iter()
                .filter(|&&w| w != u && w != v && self.has_edge(w, u))
                .nth(1)
                .is_none()
        })
    }

    /// Vertex sets of the connected components, each sorted, ordered by least element.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut result = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = result.len();
            comp[start] = id;
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in self.out[u].iter().chain(&self.inc[u]) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            result.push(members);
        }
        result
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// The subdigraph induced on `vertices`, relabelled in ascending order,
    /// with the map from new labels back to the original vertices.
    pub fn spanned_subdigraph(&self, vertices: &[usize]) -> Result<(Digraph, VertexMap)> {
        let n = self.vertex_count();
        let mut keep: Vec<usize> = vertices.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&v) = keep.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, count: n });
        }
        let mut index = vec![usize::MAX; n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let out = keep
            .iter()
            .map(|&v| self.out[v].iter().filter_map(|&w| (index[w] != usize::MAX).then_some(index[w])).collect())
            .collect();
        let map = VertexMap::new(n, keep)?;
        Ok((Digraph::from_sorted_out(out), map))
    }

    /// The quotient by `p`: blocks become vertices (ordered by least element)
    /// and a block pair is an edge when some member pair is.
    pub fn quotient(&self, p: &Partition) -> Result<Digraph> {
        if p.universe_size() != self.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "partition on {} elements, digraph on {} vertices",
                p.universe_size(),
                self.vertex_count()
            )));
        }
        let edges = self.edges().map(|(u, v)| (p.block_of(u), p.block_of(v)));
        Digraph::from_edge_set(p.num_blocks(), edges)
    }

    /// The image of this digraph under `map` (edge set `{(f u, f v)}`).
    pub fn image_under(&self, map: &VertexMap) -> Result<Digraph> {
        if map.source_count() != self.vertex_count() {
            return Err(Error::DimensionMismatch("map source does not match digraph".into()));
        }
        Digraph::from_edge_set(map.target_count(), self.edges().map(|(u, v)| (map.apply(u), map.apply(v))))
    }

    pub fn to_json(&self) -> String {
        let file = DigraphFile { vertices: self.vertex_count(), edges: self.edges().map(|(u, v)| [u, v]).collect() };
        serde_json::to_string(&file).expect("digraph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Digraph> {
        let file: DigraphFile = serde_json::from_str(text)?;
        Digraph::new(file.vertices, file.edges.into_iter().map(|[u, v]| (u, v)))
    }
}

impl fmt::Debug for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Digraph")
            .field("vertices", &self.vertex_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct DigraphFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

/// Hypotheses of the power-image classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructurePredicates {
    pub reflexive: bool,
    pub antisymmetric: bool,
    pub unique_triangle: bool,
}

/// Mixed-radix index of `digits` with the first coordinate most significant.
pub fn encode(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Inverse of [`encode`], writing into `digits`.
pub fn decode_into(mut index: usize, radices: &[usize], digits: &mut [usize]) {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = index % r;
        index /= r;
    }
}

pub fn decode(index: usize, radices: &[usize]) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    decode_into(index, radices, &mut digits);
    digits
}

pub(crate) fn checked_product(sizes: &[usize]) -> Result<usize> {
    sizes.iter().try_fold(1usize, |acc, &s| {
        acc.checked_mul(s).ok_or_else(|| Error::SizeOverflow(format!("product of sizes {sizes:?}")))
    })
}

/// The categorical product with lexicographic vertex encoding.
pub fn product(gs: &[Digraph]) -> Result<Digraph> {
    if gs.is_empty() {
        return Err(Error::Invalid("product of an empty list".into()));
    }
    let radices: Vec<usize> = gs.iter().map(Digraph::vertex_count).collect();
    let total = checked_product(&radices)?;
    checked_product(&gs.iter().map(Digraph::edge_count).collect::<Vec<_>>())?;
    let k = gs.len();
    let mut digits = vec![0; k];
    let mut out = Vec::with_capacity(total);
    for u in 0..total {
        decode_into(u, &radices, &mut digits);
        let lists: Vec<&[usize]> = (0..k).map(|i| gs[i].out_neighbors(digits[i])).collect();
        let mut neighbors = Vec::with_capacity(lists.iter().map(|l| l.len()).product());
        if lists.iter().all(|l| !l.is_empty()) {
            let mut pos = vec![0usize; k];
            'outer: loop {
                neighbors.push(pos.iter().zip(&lists).zip(&radices).fold(0, |acc, ((&p, l), &r)| acc * r + l[p]));
                for i in (0..k).rev() {
                    pos[i] += 1;
                    if pos[i] < lists[i].len() {
                        continue 'outer;
                    }
                    pos[i] = 0;
                }
                break;
            }
        }
        out.push(neighbors);
    }
    Ok(Digraph::from_sorted_out(out))
}

/// `g^k`; the zeroth power is the one-vertex loop.
pub fn power(g: &Digraph, k: usize) -> Result<Digraph> {
    if k == 0 {
        return Ok(Digraph::point());
    }
    product(&vec![g.clone(); k])
}

/// Disjoint union, each operand shifted past the previous ones.
pub fn disjoint_union(gs: &[Digraph]) -> Digraph {
    let mut out = Vec::new();
    for g in gs {
        let offset = out.len();
        out.extend((0..g.vertex_count()).map(|u| g.out_neighbors(u).iter().map(|v| v + offset).collect()));
    }
    Digraph::from_sorted_out(out)
}
