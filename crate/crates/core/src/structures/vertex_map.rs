use serde::Serialize;

use super::Digraph;
use crate::error::{Error, Result};

/// A total function `0..source_count -> 0..target_count`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VertexMap {
    target_count: usize,
    image: Vec<usize>,
}

impl VertexMap {
    pub fn new(target_count: usize, image: Vec<usize>) -> Result<Self> {
        if let Some(&v) = image.iter().find(|&&v| v >= target_count) {
            return Err(Error::VertexOutOfRange { vertex: v, count: target_count });
        }
        Ok(VertexMap { target_count, image })
    }

    pub fn identity(n: usize) -> Self {
        VertexMap { target_count: n, image: (0..n).collect() }
    }

    pub fn constant(source_count: usize, target_count: usize, value: usize) -> Result<Self> {
        Self::new(target_count, vec![value; source_count])
    }

    pub fn source_count(&self) -> usize {
        self.image.len()
    }

    pub fn target_count(&self) -> usize {
        self.target_count
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, v: usize) -> usize {
        self.image[v]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target_count];
        self.image.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_bijection(&self) -> bool {
        self.image.len() == self.target_count && self.is_injective()
    }

    pub fn is_constant(&self) -> bool {
        self.image.windows(2).all(|w| w[0] == w[1])
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &VertexMap) -> Result<VertexMap> {
        if self.target_count != other.source_count() {
            return Err(Error::DimensionMismatch("composed maps do not match".into()));
        }
        Ok(VertexMap { target_count: other.target_count, image: self.image.iter().map(|&v| other.apply(v)).collect() })
    }

    pub fn inverse(&self) -> Option<VertexMap> {
        if !self.is_bijection() {
            return None;
        }
        let mut inv = vec![0; self.image.len()];
        for (u, &v) in self.image.iter().enumerate() {
            inv[v] = u;
        }
        Some(VertexMap { target_count: self.image.len(), image: inv })
    }

    /// Edge-preserving from `g` to `h`.
    pub fn is_homomorphism(&self, g: &Digraph, h: &Digraph) -> Result<bool> {
        if self.source_count() != g.vertex_count() || self.target_count != h.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "map {} -> {} against digraphs on {} and {} vertices",
                self.source_count(),
                self.target_count,
                g.vertex_count(),
                h.vertex_count()
            )));
        }
        Ok(g.edges().all(|(u, v)| h.has_edge(self.image[u], self.image[v])))
    }

    /// A bijection preserving edges in both directions.
    pub fn is_isomorphism(&self, g: &Digraph, h: &Digraph) -> Result<bool> {
        Ok(self.is_homomorphism(g, h)? && self.is_bijection() && g.edge_count() == h.edge_count())
    }
}
