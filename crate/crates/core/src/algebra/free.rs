use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use super::FiniteAlgebra;
use crate::conditions::OperationTable;
use crate::error::{Error, Result};

/// Default bound on generated elements (and on generated edge pairs).
pub const DEFAULT_CAP: usize = 1_000_000;

/// How an element was first produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TermWitness {
    Generator(usize),
    Apply { op: usize, args: Vec<usize> },
}

/// Elements of a generated subuniverse in generation order, each with the
/// step that produced it.
pub(crate) struct Closure<T> {
    pub elements: Vec<T>,
    pub witnesses: Vec<TermWitness>,
}

/// Breadth-first closure of `generators` under operations of the given
/// arities. Round `r` applies every operation to every argument tuple that
/// uses an element found in round `r - 1`, tuples in lexicographic order of
/// element indices, operations in order. Duplicate generators are kept once.
pub(crate) fn close<T: Clone + Eq + Hash>(
    generators: &[T],
    arities: &[usize],
    mut apply: impl FnMut(usize, &[usize], &[T]) -> T,
    cap: usize,
) -> Result<(Closure<T>, Vec<usize>)> {
    let mut index: HashMap<T, usize> = HashMap::new();
    let mut closure = Closure { elements: Vec::new(), witnesses: Vec::new() };
    let mut generator_ids = Vec::with_capacity(generators.len());
    let mut add = |closure: &mut Closure<T>, item: T, witness: TermWitness| -> Result<usize> {
        if let Some(&i) = index.get(&item) {
            return Ok(i);
        }
        if closure.elements.len() >= cap {
            return Err(Error::CapExceeded { cap, reached: closure.elements.len() });
        }
        let i = closure.elements.len();
        index.insert(item.clone(), i);
        closure.elements.push(item);
        closure.witnesses.push(witness);
        Ok(i)
    };
    for (g, item) in generators.iter().enumerate() {
        generator_ids.push(add(&mut closure, item.clone(), TermWitness::Generator(g))?);
    }
    let mut start = 0;
    let mut first_round = true;
    loop {
        let end = closure.elements.len();
        if !first_round && start == end {
            break;
        }
        for (op, &arity) in arities.iter().enumerate() {
            if arity == 0 {
                if first_round {
                    let item = apply(op, &[], &closure.elements);
                    add(&mut closure, item, TermWitness::Apply { op, args: Vec::new() })?;
                }
                continue;
            }
            if end == 0 {
                continue;
            }
            let mut args = vec![0usize; arity];
            loop {
                if args.iter().any(|&a| a >= start) {
                    let item = apply(op, &args, &closure.elements);
                    add(&mut closure, item, TermWitness::Apply { op, args: args.clone() })?;
                }
                if !crate::conditions::advance_tuple(&mut args, end) {
                    break;
                }
            }
        }
        first_round = false;
        start = end;
    }
    Ok((closure, generator_ids))
}

/// The free algebra on `rank` generators in the variety generated by a
/// finite algebra, realised as the subalgebra of `A^(A^rank)` generated by
/// the projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeAlgebra {
    pub algebra: FiniteAlgebra,
    /// Element index of each free generator.
    pub generators: Vec<usize>,
    pub witnesses: Vec<TermWitness>,
    /// Each element as a function `A^rank -> A`, values in lexicographic
    /// argument order.
    pub functions: Vec<Vec<usize>>,
    base: FiniteAlgebra,
    index: HashMap<Vec<usize>, usize>,
}

impl FreeAlgebra {
    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// The element whose term function is `function`, if generated.
    pub fn element_of(&self, function: &[usize]) -> Option<usize> {
        self.index.get(function).copied()
    }

    pub fn variable_name(&self, g: usize) -> String {
        if self.rank() <= 3 {
            ["x", "y", "z"][g].to_string()
        } else {
            format!("x{}", g + 1)
        }
    }

    /// A shortest term for `element`.
    pub fn term(&self, element: usize) -> String {
        match &self.witnesses[element] {
            TermWitness::Generator(g) => self.variable_name(*g),
            TermWitness::Apply { op, args } => {
                let inner: Vec<String> = args.iter().map(|&a| self.term(a)).collect();
                format!("{}({})", self.base.ops()[*op].name, inner.join(","))
            }
        }
    }

    /// `u(x, ..., x)` viewed again as an element: the term with every
    /// variable replaced by generator `g`.
    pub fn collapse_to(&self, element: usize, g: usize) -> Option<usize> {
        let n = self.base.universe_size();
        let k = self.rank();
        let f = &self.functions[element];
        let diagonal_stride: usize = (0..k).map(|i| n.pow((k - 1 - i) as u32)).sum();
        let function: Vec<usize> = (0..f.len())
            .map(|point| {
                let value = point / n.pow((k - 1 - g) as u32) % n;
                f[value * diagonal_stride]
            })
            .collect();
        self.element_of(&function)
    }
}

/// Builds the free algebra of rank `rank` over `a`, failing once more than
/// `cap` elements have been generated.
pub fn free_algebra(a: &FiniteAlgebra, rank: usize, cap: usize) -> Result<FreeAlgebra> {
    if rank == 0 {
        return Err(Error::Invalid("the free algebra needs at least one generator".into()));
    }
    let n = a.universe_size();
    let points = crate::conditions::table_len(rank, n)?;
    let projections: Vec<Vec<usize>> = (0..rank)
        .map(|g| {
            let stride = n.pow((rank - 1 - g) as u32);
            (0..points).map(|p| p / stride % n).collect()
        })
        .collect();
    let arities: Vec<usize> = a.ops().iter().map(|o| o.table.arity()).collect();
    let mut args = Vec::new();
    let apply = |op: usize, indices: &[usize], elements: &[Vec<usize>]| -> Vec<usize> {
        let table = &a.ops()[op].table;
        (0..points)
            .map(|p| {
                args.clear();
                args.extend(indices.iter().map(|&i| elements[i][p]));
                table.get(&args)
            })
            .collect()
    };
    let (closure, generators) = close(&projections, &arities, apply, cap)?;
    let index: HashMap<Vec<usize>, usize> =
        closure.elements.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
    let size = closure.elements.len();
    let mut ops = Vec::with_capacity(a.ops().len());
    for op in a.ops() {
        let arity = op.table.arity();
        let mut values = Vec::with_capacity(crate::conditions::table_len(arity, size)?);
        let mut tuple = vec![0usize; arity];
        let mut point_args = vec![0usize; arity];
        loop {
            let function: Vec<usize> = (0..points)
                .map(|p| {
                    for (slot, &e) in point_args.iter_mut().zip(&tuple) {
                        *slot = closure.elements[e][p];
                    }
                    op.table.get(&point_args)
                })
                .collect();
            let value = *index
                .get(&function)
                .ok_or_else(|| Error::Invariant("the generated subuniverse is not closed".into()))?;
            values.push(value);
            if size == 0 || !crate::conditions::advance_tuple(&mut tuple, size) {
                break;
            }
        }
        ops.push((op.name.clone(), OperationTable::new(arity, size, values)?));
    }
    Ok(FreeAlgebra {
        algebra: FiniteAlgebra::new(size, ops)?,
        generators,
        witnesses: closure.witnesses,
        functions: closure.elements,
        base: a.clone(),
        index,
    })
}
