use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::term::{IdentitySystem, Term};
use crate::error::{Error, Result};
use crate::structures::Digraph;

/// An operation on `0..universe_size`, stored as a flat table in
/// lexicographic argument order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperationTable {
    arity: usize,
    universe_size: usize,
    values: Vec<usize>,
}

/// Interpretations of function symbols, keyed by symbol name.
pub type Tables = BTreeMap<String, OperationTable>;

pub(crate) fn table_len(arity: usize, universe_size: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|k| universe_size.checked_pow(k))
        .ok_or_else(|| Error::SizeOverflow(format!("table of arity {arity} over {universe_size} elements")))
}

impl OperationTable {
    pub fn new(arity: usize, universe_size: usize, values: Vec<usize>) -> Result<Self> {
        let len = table_len(arity, universe_size)?;
        if values.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "table of arity {arity} over {universe_size} elements needs {len} entries, got {}",
                values.len()
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= universe_size) {
            return Err(Error::VertexOutOfRange { vertex: v, count: universe_size });
        }
        Ok(OperationTable { arity, universe_size, values })
    }

    pub fn from_fn(arity: usize, universe_size: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let len = table_len(arity, universe_size)?;
        let mut args = vec![0usize; arity];
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f(&args));
            advance(&mut args, universe_size);
        }
        Self::new(arity, universe_size, values)
    }

    /// The `index`-th projection (0-based).
    pub fn projection(arity: usize, universe_size: usize, index: usize) -> Result<Self> {
        if index >= arity {
            return Err(Error::Invalid(format!("projection {index} of arity {arity}")));
        }
        Self::from_fn(arity, universe_size, |a| a[index])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn index_of(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.universe_size + a)
    }

    pub fn get(&self, args: &[usize]) -> usize {
        self.values[self.index_of(args)]
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.universe_size).all(|a| self.get(&vec![a; self.arity]) == a)
    }

    /// The first tuple of edges of `g` (in lexicographic order of source
    /// tuple, then target tuple) whose image is not an edge, if any.
    pub fn edge_violation(&self, g: &Digraph) -> Result<Option<Vec<(usize, usize)>>> {
        if g.vertex_count() != self.universe_size {
            return Err(Error::DimensionMismatch(format!(
                "table over {} elements against a digraph on {} vertices",
                self.universe_size,
                g.vertex_count()
            )));
        }
        if self.universe_size <= 64 && self.preserves_edges_by_masks(g) {
            return Ok(None);
        }
        let n = self.universe_size;
        let mut source = vec![0usize; self.arity];
        let mut choice = vec![0usize; self.arity];
        for index in 0..self.values.len() {
            let value = self.values[index];
            if source.iter().all(|&s| !g.out_neighbors(s).is_empty()) {
                choice.iter_mut().for_each(|c| *c = 0);
                loop {
                    let target = source
                        .iter()
                        .zip(&choice)
                        .fold(0, |acc, (&s, &c)| acc * n + g.out_neighbors(s)[c]);
                    if !g.has_edge(value, self.values[target]) {
                        let edges = source.iter().zip(&choice).map(|(&s, &c)| (s, g.out_neighbors(s)[c])).collect();
                        return Ok(Some(edges));
                    }
                    if !advance_mixed(&mut choice, |i| g.out_neighbors(source[i]).len()) {
                        break;
                    }
                }
            }
            advance(&mut source, n);
        }
        Ok(None)
    }

    /// For every tuple `b`, intersects the out-neighbourhoods of the images
    /// of all in-neighbours of `b` in `g^k`, one coordinate at a time, and
    /// checks that the image of `b` lies in the result.
    fn preserves_edges_by_masks(&self, g: &Digraph) -> bool {
        let n = self.universe_size;
        let mask_of = |list: &[usize]| list.iter().fold(0u64, |m, &v| m | 1 << v);
        let mut current: Vec<u64> = self.values.iter().map(|&v| mask_of(g.out_neighbors(v))).collect();
        let mut next = vec![0u64; current.len()];
        let mut stride = 1;
        for _ in 0..self.arity {
            for base in 0..current.len() {
                if base / stride % n != 0 {
                    continue;
                }
                for b in 0..n {
                    next[base + b * stride] =
                        g.in_neighbors(b).iter().fold(u64::MAX, |acc, &a| acc & current[base + a * stride]);
                }
            }
            std::mem::swap(&mut current, &mut next);
            stride *= n;
        }
        self.values.iter().zip(&current).all(|(&v, &allowed)| allowed >> v & 1 == 1)
    }

    pub fn is_polymorphism(&self, g: &Digraph) -> Result<bool> {
        Ok(self.edge_violation(g)?.is_none())
    }
}

/// Lexicographic successor of `digits` over `0..radix`; wraps to zero.
pub(crate) fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

pub(crate) fn advance_mixed(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// A term with symbols and variables resolved to indices.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Var(usize),
    App(usize, Vec<Compiled>),
}

impl Compiled {
    pub(crate) fn new(term: &Term, symbols: &[String], vars: &[String]) -> Result<Compiled> {
        Ok(match term {
            Term::Var(v) => {
                Compiled::Var(vars.iter().position(|x| x == v).ok_or_else(|| Error::MissingVariable(v.clone()))?)
            }
            Term::App(f, args) => Compiled::App(
                symbols.iter().position(|s| s == f).ok_or_else(|| Error::MissingSymbol(f.clone()))?,
                args.iter().map(|a| Compiled::new(a, symbols, vars)).collect::<Result<_>>()?,
            ),
        })
    }

    pub(crate) fn collect_symbols(&self, out: &mut Vec<usize>) {
        if let Compiled::App(s, args) = self {
            if !out.contains(s) {
                out.push(*s);
            }
            args.iter().for_each(|a| a.collect_symbols(out));
        }
    }

    pub(crate) fn eval(&self, values: &[usize], tables: &[&OperationTable]) -> usize {
        match self {
            Compiled::Var(i) => values[*i],
            Compiled::App(s, args) => {
                let t = tables[*s];
                let index = args.iter().fold(0, |acc, a| acc * t.universe_size + a.eval(values, tables));
                t.values[index]
            }
        }
    }
}

/// Evaluates `term` bottom-up.
pub fn eval_term(term: &Term, assignment: &BTreeMap<String, usize>, tables: &Tables) -> Result<usize> {
    match term {
        Term::Var(v) => assignment.get(v).copied().ok_or_else(|| Error::MissingVariable(v.clone())),
        Term::App(f, args) => {
            let table = tables.get(f).ok_or_else(|| Error::MissingSymbol(f.clone()))?;
            if table.arity != args.len() {
                return Err(Error::ArityMismatch { symbol: f.clone(), expected: table.arity, found: args.len() });
            }
            let mut index = 0;
            for a in args {
                let value = eval_term(a, assignment, tables)?;
                if value >= table.universe_size {
                    return Err(Error::VertexOutOfRange { vertex: value, count: table.universe_size });
                }
                index = index * table.universe_size + value;
            }
            Ok(table.values[index])
        }
    }
}

/// A failing instance of an identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Position of the identity in the system.
    pub identity: usize,
    pub assignment: Vec<(String, usize)>,
    pub lhs: usize,
    pub rhs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum IdentityCheck {
    Holds,
    Fails(Counterexample),
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        matches!(self, IdentityCheck::Holds)
    }
}

/// Resolves the tables of `sys` in signature order, checking arities and sizes.
pub(crate) fn resolve_tables<'t>(
    tables: &'t Tables,
    sys: &IdentitySystem,
    universe_size: usize,
) -> Result<Vec<&'t OperationTable>> {
    sys.signature()
        .iter()
        .map(|s| {
            let t = tables.get(&s.name).ok_or_else(|| Error::MissingSymbol(s.name.clone()))?;
            if t.arity != s.arity {
                return Err(Error::ArityMismatch { symbol: s.name.clone(), expected: s.arity, found: t.arity });
            }
            if t.universe_size != universe_size {
                return Err(Error::DimensionMismatch(format!(
                    "table `{}` is over {} elements, expected {universe_size}",
                    s.name, t.universe_size
                )));
            }
            Ok(t)
        })
        .collect()
}

/// Checks every identity of `sys` under every assignment into `0..n`.
/// Assignments are visited in lexicographic order of the identity's
/// variables (first occurrence order), so the counterexample is the first one.
pub fn check_identities(tables: &Tables, sys: &IdentitySystem, n: usize) -> Result<IdentityCheck> {
    let resolved = resolve_tables(tables, sys, n)?;
    let symbols: Vec<String> = sys.signature().iter().map(|s| s.name.clone()).collect();
    for (index, identity) in sys.identities().iter().enumerate() {
        let vars = identity.variables();
        let lhs = Compiled::new(&identity.lhs, &symbols, &vars)?;
        let rhs = Compiled::new(&identity.rhs, &symbols, &vars)?;
        let total = table_len(vars.len(), n)?;
        let mut values = vec![0usize; vars.len()];
        for _ in 0..total {
            let (l, r) = (lhs.eval(&values, &resolved), rhs.eval(&values, &resolved));
            if l != r {
                return Ok(IdentityCheck::Fails(Counterexample {
                    identity: index,
                    assignment: vars.iter().cloned().zip(values.iter().copied()).collect(),
                    lhs: l,
                    rhs: r,
                }));
            }
            advance(&mut values, n);
        }
    }
    Ok(IdentityCheck::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::builtin;

    fn xor3() -> OperationTable {
        OperationTable::from_fn(3, 2, |a| a[0] ^ a[1] ^ a[2]).unwrap()
    }

    fn and() -> OperationTable {
        OperationTable::from_fn(2, 2, |a| a[0] & a[1]).unwrap()
    }

    #[test]
    fn table_validation() {
        assert!(OperationTable::new(2, 2, vec![0, 1, 1]).is_err());
        assert!(OperationTable::new(1, 2, vec![0, 2]).is_err());
        assert_eq!(and().values(), &[0, 0, 0, 1]);
        assert_eq!(and().get(&[1, 1]), 1);
        assert!(OperationTable::projection(2, 3, 2).is_err());
    }

    #[test]
    fn eval_examples() {
        let mut tables = Tables::new();
        let assignment: BTreeMap<String, usize> = [("x".to_string(), 2)].into();
        assert_eq!(eval_term(&Term::var("x"), &assignment, &tables).unwrap(), 2);

        tables.insert("f".into(), OperationTable::projection(2, 2, 0).unwrap());
        let assignment: BTreeMap<String, usize> = [("x".to_string(), 1)].into();
        assert_eq!(eval_term(&Term::apply_vars("f", &["x", "x"]), &assignment, &tables).unwrap(), 1);

        let mut tables = Tables::new();
        tables.insert("m".into(), xor3());
        tables.insert("s".into(), and());
        let assignment: BTreeMap<String, usize> = [("a".to_string(), 0), ("b".to_string(), 1)].into();
        let term = Term::app(
            "m",
            vec![Term::apply_vars("s", &["a", "b"]), Term::apply_vars("s", &["a", "a"]), Term::apply_vars("s", &["b", "a"])],
        );
        assert_eq!(eval_term(&term, &assignment, &tables).unwrap(), 0);
        assert!(matches!(eval_term(&Term::var("z"), &assignment, &tables), Err(Error::MissingVariable(_))));
        assert!(matches!(eval_term(&Term::apply_vars("h", &["a"]), &assignment, &tables), Err(Error::MissingSymbol(_))));
    }

    #[test]
    fn check_examples() {
        let mut tables = Tables::new();
        tables.insert("m".into(), xor3());
        assert!(check_identities(&tables, &builtin::minority(), 2).unwrap().holds());

        let sys = IdentitySystem::parse("symbols: s/2\ns(x,x) = x\ns(x,y) = s(y,x)\n").unwrap();
        let mut tables = Tables::new();
        tables.insert("s".into(), and());
        assert!(check_identities(&tables, &sys, 2).unwrap().holds());

        let mut tables = Tables::new();
        tables.insert("t".into(), OperationTable::projection(6, 2, 0).unwrap());
        match check_identities(&tables, &builtin::olsak(), 2).unwrap() {
            IdentityCheck::Fails(c) => {
                assert_eq!(c.assignment, vec![("x".to_string(), 0), ("y".to_string(), 1)]);
            }
            IdentityCheck::Holds => panic!("projection satisfied the Olsak identities"),
        }
    }

    #[test]
    fn check_rejects_mismatched_tables() {
        let mut tables = Tables::new();
        tables.insert("m".into(), and());
        assert!(matches!(check_identities(&tables, &builtin::minority(), 2), Err(Error::ArityMismatch { .. })));
        tables.insert("m".into(), xor3());
        assert!(matches!(check_identities(&tables, &builtin::minority(), 3), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn edge_violation_witness() {
        let c = Digraph::make_c();
        let sum = OperationTable::from_fn(2, 3, |a| (a[0] + a[1]) % 3).unwrap();
        let bad = sum.edge_violation(&c).unwrap().unwrap();
        let image_from = sum.get(&[bad[0].0, bad[1].0]);
        let image_to = sum.get(&[bad[0].1, bad[1].1]);
        assert!(!c.has_edge(image_from, image_to));
        assert!(OperationTable::projection(3, 3, 1).unwrap().is_polymorphism(&c).unwrap());
    }
}
