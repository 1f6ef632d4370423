//! Finite algebras: compatibility with digraphs, congruence lattices, free
//! algebras, and the construction of a compatible disjoint union of powers
//! of ℂ from a free algebra on three generators.

mod congruence;
mod free;
mod majority;
mod pipeline;
mod shift;

pub use congruence::{
    congruence_generated, congruence_lattice, congruence_lattice_with_cap, lattice_properties, CongruenceLattice,
    LatticeProperties, DEFAULT_LATTICE_CAP,
};
pub use free::{free_algebra, FreeAlgebra, TermWitness, DEFAULT_CAP};
pub use majority::{majority_composite_cases, majority_composite_check, CompositeCase};
pub use pipeline::{section4_pipeline, section4_pipeline_with_cap, Claims, Component, Section4Result};
pub use shift::{gadget_search, rebuild_from_gadget, triple_shift, ShiftComponent, TripleShift};

use serde::{Deserialize, Serialize};

use crate::conditions::OperationTable;
use crate::error::{Error, Result};
use crate::structures::{decode, encode, Digraph};

/// A named basic operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub table: OperationTable,
}

/// A finite algebra on `0..universe_size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAlgebra {
    universe_size: usize,
    ops: Vec<Operation>,
}

#[derive(Serialize, Deserialize)]
struct AlgebraFile {
    size: usize,
    ops: Vec<OperationFile>,
}

#[derive(Serialize, Deserialize)]
struct OperationFile {
    name: String,
    arity: usize,
    table: Vec<usize>,
}

impl FiniteAlgebra {
    pub fn new(universe_size: usize, ops: Vec<(String, OperationTable)>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        let mut checked = Vec::with_capacity(ops.len());
        for (name, table) in ops {
            if name.is_empty() {
                return Err(Error::Invalid("operation names must be non-empty".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!("duplicate operation `{name}`")));
            }
            if table.universe_size() != universe_size {
                return Err(Error::DimensionMismatch(format!(
                    "operation `{name}` is over {} elements, the algebra has {universe_size}",
                    table.universe_size()
                )));
            }
            checked.push(Operation { name, table });
        }
        Ok(FiniteAlgebra { universe_size, ops: checked })
    }

    /// The algebra with no operations.
    pub fn set(universe_size: usize) -> Self {
        FiniteAlgebra { universe_size, ops: Vec::new() }
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, name: &str) -> Option<&OperationTable> {
        self.ops.iter().find(|o| o.name == name).map(|o| &o.table)
    }

    /// The `k`-th direct power, tuples encoded lexicographically.
    pub fn power(&self, k: usize) -> Result<FiniteAlgebra> {
        let exponent = u32::try_from(k).map_err(|_| Error::SizeOverflow(format!("power {k}")))?;
        let size = self
            .universe_size
            .checked_pow(exponent)
            .ok_or_else(|| Error::SizeOverflow(format!("{}^{k}", self.universe_size)))?;
        let radices = vec![self.universe_size; k];
        let ops = self
            .ops
            .iter()
            .map(|op| {
                let table = OperationTable::from_fn(op.table.arity(), size, |args| {
                    let digits: Vec<Vec<usize>> = args.iter().map(|&a| decode(a, &radices)).collect();
                    let out: Vec<usize> = (0..k)
                        .map(|i| op.table.get(&digits.iter().map(|d| d[i]).collect::<Vec<_>>()))
                        .collect();
                    encode(&out, &radices)
                })?;
                Ok((op.name.clone(), table))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteAlgebra::new(size, ops)
    }

    pub fn to_json(&self) -> String {
        let file = AlgebraFile {
            size: self.universe_size,
            ops: self
                .ops
                .iter()
                .map(|o| OperationFile { name: o.name.clone(), arity: o.table.arity(), table: o.table.values().to_vec() })
                .collect(),
        };
        serde_json::to_string(&file).expect("algebra serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<FiniteAlgebra> {
        let file: AlgebraFile = serde_json::from_str(text)?;
        let ops = file
            .ops
            .into_iter()
            .map(|o| {
                let table = OperationTable::new(o.arity, file.size, o.table)
                    .map_err(|e| Error::Invalid(format!("operation `{}`: {e}", o.name)))?;
                Ok((o.name, table))
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteAlgebra::new(file.size, ops)
    }
}

/// Outcome of a compatibility check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Compatibility {
    Compatible,
    /// `edges[i]` is the edge fed to argument `i`; the image pair is not an edge.
    Violation { operation: String, edges: Vec<(usize, usize)> },
}

impl Compatibility {
    pub fn holds(&self) -> bool {
        matches!(self, Compatibility::Compatible)
    }
}

/// Whether every operation of `a` is a polymorphism of `g`.
pub fn is_compatible(g: &Digraph, a: &FiniteAlgebra) -> Result<Compatibility> {
    if g.vertex_count() != a.universe_size() {
        return Err(Error::DimensionMismatch(format!(
            "digraph on {} vertices against an algebra on {} elements",
            g.vertex_count(),
            a.universe_size()
        )));
    }
    for op in a.ops() {
        if let Some(edges) = op.table.edge_violation(g)? {
            return Ok(Compatibility::Violation { operation: op.name.clone(), edges });
        }
    }
    Ok(Compatibility::Compatible)
}
