use serde::Serialize;

use crate::conditions::{builtin, check_identities, Identity, IdentitySystem, OperationTable, Tables, Term};

/// One pair `(m, s)` on `{0, 1}` and whether the composite
/// `m(s(x,y), s(x,z), s(y,z))` is a majority operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompositeCase {
    pub minority: OperationTable,
    pub binary: OperationTable,
    pub majority: bool,
}

fn app(symbol: &str, args: Vec<Term>) -> Term {
    Term::App(symbol.into(), args)
}

fn composite(a: &str, b: &str, c: &str) -> Term {
    let s = |u: &str, v: &str| app("s", vec![Term::var(u), Term::var(v)]);
    app("m", vec![s(a, b), s(a, c), s(b, c)])
}

fn composite_majority() -> IdentitySystem {
    let x = Term::var("x");
    let identities = ["yxx", "xyx", "xxy"]
        .iter()
        .map(|p| {
            let v: Vec<String> = p.chars().map(String::from).collect();
            Identity::new(composite(&v[0], &v[1], &v[2]), x.clone())
        })
        .collect();
    IdentitySystem::new(vec![("m".into(), 3), ("s".into(), 2)], identities).expect("well-formed system")
}

fn idempotent_commutative() -> IdentitySystem {
    let s = |u: &str, v: &str| app("s", vec![Term::var(u), Term::var(v)]);
    let identities = vec![Identity::new(s("x", "x"), Term::var("x")), Identity::new(s("x", "y"), s("y", "x"))];
    IdentitySystem::new(vec![("s".into(), 2)], identities).expect("well-formed system")
}

fn all_tables(arity: usize) -> impl Iterator<Item = OperationTable> {
    let cells = 1usize << arity;
    (0..1usize << cells)
        .map(move |bits| OperationTable::new(arity, 2, (0..cells).map(|i| bits >> (cells - 1 - i) & 1).collect()))
        .map(|t| t.expect("boolean tables are valid"))
}

fn satisfies(tables: &Tables, system: &IdentitySystem) -> bool {
    check_identities(tables, system, 2).map(|c| c.holds()).unwrap_or(false)
}

/// Every minority `m` and idempotent commutative binary `s` on `{0, 1}`,
/// found by enumerating all tables, with the composite checked.
pub fn majority_composite_cases() -> Vec<CompositeCase> {
    let minority = builtin::minority();
    let binary = idempotent_commutative();
    let target = composite_majority();
    let ms: Vec<OperationTable> = all_tables(3)
        .filter(|m| satisfies(&Tables::from([("m".into(), m.clone())]), &minority))
        .collect();
    let ss: Vec<OperationTable> =
        all_tables(2).filter(|s| satisfies(&Tables::from([("s".into(), s.clone())]), &binary)).collect();
    let mut cases = Vec::new();
    for m in &ms {
        for s in &ss {
            let tables = Tables::from([("m".into(), m.clone()), ("s".into(), s.clone())]);
            cases.push(CompositeCase { minority: m.clone(), binary: s.clone(), majority: satisfies(&tables, &target) });
        }
    }
    cases
}

/// True when every case of [`majority_composite_cases`] yields a majority
/// operation (and there is at least one case).
pub fn majority_composite_check() -> bool {
    let cases = majority_composite_cases();
    !cases.is_empty() && cases.iter().all(|c| c.majority)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cases_are_xor_with_and_or() {
        let cases = majority_composite_cases();
        assert_eq!(cases.len(), 2);
        let xor3 = OperationTable::from_fn(3, 2, |a| a[0] ^ a[1] ^ a[2]).unwrap();
        assert!(cases.iter().all(|c| c.minority == xor3 && c.majority));
        let binaries: Vec<Vec<usize>> = cases.iter().map(|c| c.binary.values().to_vec()).collect();
        assert_eq!(binaries, vec![vec![0, 0, 0, 1], vec![0, 1, 1, 1]]);
        assert!(majority_composite_check());
    }
}
