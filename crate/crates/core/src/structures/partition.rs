use serde::Serialize;

use crate::error::{Error, Result};

/// An equivalence relation on `0..universe_size`.
///
/// Block ids are contiguous from 0 and numbered by least element, so equal
/// relations have equal representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition {
    block_of: Vec<usize>,
    #[serde(skip)]
    blocks: usize,
}

impl Partition {
    /// Normalizes arbitrary labels: elements with equal labels share a block.
    pub fn from_labels<L: Eq + std::hash::Hash + Clone>(labels: &[L]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let block_of: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l.clone()).or_insert(next)
            })
            .collect();
        Partition { blocks: ids.len(), block_of }
    }

    pub fn from_blocks(universe_size: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut label = vec![usize::MAX; universe_size];
        for (b, block) in blocks.iter().enumerate() {
            for &x in block {
                if x >= universe_size {
                    return Err(Error::VertexOutOfRange { vertex: x, count: universe_size });
                }
                if label[x] != usize::MAX {
                    return Err(Error::Invalid(format!("element {x} appears in two blocks")));
                }
                label[x] = b;
            }
        }
        if label.contains(&usize::MAX) {
            return Err(Error::Invalid("blocks do not cover the universe".into()));
        }
        Ok(Self::from_labels(&label))
    }

    pub fn discrete(n: usize) -> Self {
        Partition { block_of: (0..n).collect(), blocks: n }
    }

    pub fn total(n: usize) -> Self {
        Partition { block_of: vec![0; n], blocks: usize::from(n > 0) }
    }

    pub fn universe_size(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.block_of[x] == self.block_of[y]
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.blocks];
        for (x, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(x);
        }
        blocks
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks == self.block_of.len()
    }

    pub fn is_total(&self) -> bool {
        self.blocks <= 1
    }

    /// `self` refines `other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        let mut image = vec![usize::MAX; self.blocks];
        self.block_of.iter().zip(&other.block_of).all(|(&a, &b)| {
            if image[a] == usize::MAX {
                image[a] = b;
            }
            image[a] == b
        })
    }

    /// Block intersection.
    pub fn meet(&self, other: &Partition) -> Partition {
        let pairs: Vec<(usize, usize)> = self.block_of.iter().copied().zip(other.block_of.iter().copied()).collect();
        Partition::from_labels(&pairs)
    }

    /// Transitive closure of the union.
    pub fn join(&self, other: &Partition) -> Partition {
        let mut uf = UnionFind::new(self.universe_size());
        for rel in [self, other] {
            let mut first = vec![usize::MAX; rel.blocks];
            for (x, &b) in rel.block_of.iter().enumerate() {
                if first[b] == usize::MAX {
                    first[b] = x;
                } else {
                    uf.union(first[b], x);
                }
            }
        }
        uf.into_partition()
    }

    /// The image partition under a bijection `perm` (x ~ y iff perm⁻¹x ~ perm⁻¹y).
    pub fn permuted(&self, perm: &[usize]) -> Partition {
        let mut labels = vec![0; self.universe_size()];
        for (x, &px) in perm.iter().enumerate() {
            labels[px] = self.block_of[x];
        }
        Partition::from_labels(&labels)
    }
}

/// Disjoint-set forest with path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true when two classes were merged. The smaller root survives.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn into_partition(mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_labels(&roots)
    }
}
