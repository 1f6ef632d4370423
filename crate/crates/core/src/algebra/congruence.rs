use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::structures::{Partition, UnionFind};

/// Default bound on the number of congruences collected; the containment
/// matrix is quadratic in it.
pub const DEFAULT_LATTICE_CAP: usize = 4096;

/// The congruences of an algebra ordered by containment.
///
/// Congruences are listed by decreasing number of blocks (ties by block
/// labels), so the discrete partition comes first and the total one last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceLattice {
    congruences: Vec<Partition>,
    leq: Vec<Vec<bool>>,
    index: HashMap<Partition, usize>,
}

impl CongruenceLattice {
    fn from_partitions(mut congruences: Vec<Partition>) -> Self {
        congruences.sort_by(|p, q| q.num_blocks().cmp(&p.num_blocks()).then_with(|| p.labels().cmp(q.labels())));
        let leq = congruences.iter().map(|p| congruences.iter().map(|q| p.refines(q)).collect()).collect();
        let index = congruences.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        CongruenceLattice { congruences, leq, index }
    }

    pub fn len(&self) -> usize {
        self.congruences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.congruences.is_empty()
    }

    pub fn congruences(&self) -> &[Partition] {
        &self.congruences
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i][j]
    }

    pub fn position(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.len() - 1
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.index[&self.congruences[i].meet(&self.congruences[j])]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.index[&self.congruences[i].join(&self.congruences[j])]
    }

    /// Covering pairs `(i, j)`: `i < j` with nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let below = |i: usize, j: usize| i != j && self.leq[i][j];
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if below(i, j) && !(0..n).any(|k| below(i, k) && below(k, j)) {
                    edges.push((i, j));
                }
            }
        }
        edges
    }
}

/// The least congruence containing `pairs`.
///
/// Each merged pair is pushed through every basic translation
/// `z -> f(c_1, ..., z, ..., c_r)`; unary polynomials are compositions of
/// those, so the fixpoint is closed under all of them.
pub fn congruence_generated(a: &FiniteAlgebra, pairs: &[(usize, usize)]) -> Result<Partition> {
    let n = a.universe_size();
    if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| x >= n || y >= n) {
        return Err(Error::VertexOutOfRange { vertex: x.max(y), count: n });
    }
    let mut uf = UnionFind::new(n);
    let mut queue: Vec<(usize, usize)> = pairs.iter().copied().filter(|&(x, y)| uf.union(x, y)).collect();
    let mut args = Vec::new();
    while let Some((u, v)) = queue.pop() {
        for op in a.ops() {
            let arity = op.table.arity();
            for position in 0..arity {
                args.clear();
                args.resize(arity, 0);
                loop {
                    args[position] = u;
                    let fu = op.table.get(&args);
                    args[position] = v;
                    let fv = op.table.get(&args);
                    if uf.union(fu, fv) {
                        queue.push((fu, fv));
                    }
                    if !advance_except(&mut args, n, position) {
                        break;
                    }
                }
            }
        }
    }
    Ok(uf.into_partition())
}

/// Lexicographic successor skipping the digit at `fixed`.
fn advance_except(digits: &mut [usize], radix: usize, fixed: usize) -> bool {
    for (i, d) in digits.iter_mut().enumerate().rev() {
        if i == fixed {
            continue;
        }
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// All congruences of `a`: the principal ones, closed under joins.
pub fn congruence_lattice(a: &FiniteAlgebra) -> Result<CongruenceLattice> {
    congruence_lattice_with_cap(a, DEFAULT_LATTICE_CAP)
}

pub fn congruence_lattice_with_cap(a: &FiniteAlgebra, cap: usize) -> Result<CongruenceLattice> {
    let n = a.universe_size();
    if n == 0 {
        return Err(Error::Invalid("the universe must be non-empty".into()));
    }
    let mut principals = BTreeSet::new();
    for x in 0..n {
        for y in x + 1..n {
            principals.insert(congruence_generated(a, &[(x, y)])?);
        }
    }
    let principals: Vec<Partition> = principals.into_iter().collect();
    let mut found: BTreeSet<Partition> = BTreeSet::from([Partition::discrete(n)]);
    let mut frontier = vec![Partition::discrete(n)];
    while let Some(current) = frontier.pop() {
        for p in &principals {
            let joined = current.join(p);
            if !found.contains(&joined) {
                if found.len() >= cap {
                    return Err(Error::CapExceeded { cap, reached: found.len() });
                }
                found.insert(joined.clone());
                frontier.push(joined);
            }
        }
    }
    Ok(CongruenceLattice::from_partitions(found.into_iter().collect()))
}

/// Lattice-theoretic flags of a congruence lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeProperties {
    pub meet_sd: bool,
    pub join_sd: bool,
    pub distributive: bool,
    /// `Some(k)` when the lattice is `M_k`: a bottom, a top and `k >= 1`
    /// pairwise incomparable elements in between.
    pub m_n: Option<usize>,
}

/// Checks semidistributivity and distributivity over all triples.
pub fn lattice_properties(l: &CongruenceLattice) -> LatticeProperties {
    let n = l.len();
    let meet: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| l.meet(i, j)).collect()).collect();
    let join: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| l.join(i, j)).collect()).collect();
    let (mut meet_sd, mut join_sd, mut distributive) = (true, true, true);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if meet[x][y] == meet[x][z] && meet[x][y] != meet[x][join[y][z]] {
                    meet_sd = false;
                }
                if join[x][y] == join[x][z] && join[x][y] != join[x][meet[y][z]] {
                    join_sd = false;
                }
                if meet[x][join[y][z]] != join[meet[x][y]][meet[x][z]] {
                    distributive = false;
                }
            }
        }
    }
    let middle: Vec<usize> = (0..n).filter(|&i| i != l.bottom() && i != l.top()).collect();
    let antichain = middle.iter().all(|&i| middle.iter().all(|&j| i == j || !l.leq(i, j)));
    let m_n = (n >= 3 && antichain).then_some(middle.len());
    LatticeProperties { meet_sd, join_sd, distributive, m_n }
}
