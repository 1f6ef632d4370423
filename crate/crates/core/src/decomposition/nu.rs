use crate::conditions::OperationTable;
use crate::error::{Error, Result};
use crate::structures::{Digraph, Partition};

/// Grids with at most this many cells of `A^(n*n)` are searched for an
/// explicit composition counterexample when the structural check fails.
const GRID_SEARCH_LIMIT: usize = 1 << 22;

/// A square relation on `0..size` stored row by row.
struct Relation {
    size: usize,
    bits: Vec<bool>,
}

impl Relation {
    fn get(&self, x: usize, y: usize) -> bool {
        self.bits[x * self.size + y]
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.size)
            .flat_map(|x| (0..self.size).map(move |y| (x, y)))
            .filter(|&(x, y)| self.get(x, y))
            .collect()
    }

    /// A failure of symmetry or transitivity, described in words.
    fn equivalence_failure(&self) -> Option<String> {
        let n = self.size;
        for x in 0..n {
            if !self.get(x, x) {
                return Some(format!("{x} is not related to itself"));
            }
            for y in 0..n {
                if self.get(x, y) && !self.get(y, x) {
                    return Some(format!("{x} ~ {y} but not {y} ~ {x}"));
                }
            }
        }
        for x in 0..n {
            for y in (0..n).filter(|&y| self.get(x, y)) {
                if let Some(z) = (0..n).find(|&z| self.get(y, z) && !self.get(x, z)) {
                    return Some(format!("{x} ~ {y} ~ {z} but not {x} ~ {z}"));
                }
            }
        }
        None
    }

    /// Labels each element by its least related element.
    fn to_partition(&self) -> Partition {
        let labels: Vec<usize> =
            (0..self.size).map(|x| (0..self.size).find(|&y| self.get(x, y)).unwrap_or(x)).collect();
        Partition::from_labels(&labels)
    }
}

fn with_at(x: usize, y: usize, position: usize, arity: usize) -> Vec<usize> {
    let mut args = vec![x; arity];
    args[position] = y;
    args
}

fn fast_relation(f: &OperationTable, position: usize) -> Relation {
    let size = f.universe_size();
    let mut bits = vec![false; size * size];
    for x in 0..size {
        for y in 0..size {
            bits[x * size + y] = f.get(&with_at(x, y, position, f.arity())) == x;
        }
    }
    Relation { size, bits }
}

fn check_position(f: &OperationTable, position: usize) -> Result<()> {
    if position >= f.arity() {
        return Err(Error::Invalid(format!("position {position} out of range for arity {}", f.arity())));
    }
    Ok(())
}

/// Pairs `(x, y)` with `f(x, ..., x, y, x, ..., x) = x`, `y` at `position`.
pub fn fast_nu_pairs(f: &OperationTable, position: usize) -> Result<Vec<(usize, usize)>> {
    check_position(f, position)?;
    Ok(fast_relation(f, position).pairs())
}

/// Pairs `(x, y)` such that some choice of the other arguments gives
/// `f(.., x, ..) = f(.., y, ..)` with `x`, `y` at `position`. Costs
/// `|A|^(n+1)` evaluations.
pub fn existential_nu_pairs(f: &OperationTable, position: usize) -> Result<Vec<(usize, usize)>> {
    check_position(f, position)?;
    let size = f.universe_size();
    let arity = f.arity();
    let mut bits = vec![false; size * size];
    let mut context = vec![0usize; arity.saturating_sub(1)];
    let mut args = vec![0usize; arity];
    let mut values = vec![0usize; size];
    loop {
        for (x, value) in values.iter_mut().enumerate() {
            args[..position].copy_from_slice(&context[..position]);
            args[position] = x;
            args[position + 1..].copy_from_slice(&context[position..]);
            *value = f.get(&args);
        }
        for x in 0..size {
            for y in 0..size {
                if values[x] == values[y] {
                    bits[x * size + y] = true;
                }
            }
        }
        if size == 0 || !crate::conditions::advance_tuple(&mut context, size) {
            break;
        }
    }
    Ok(Relation { size, bits }.pairs())
}

fn not_pd(message: String) -> Error {
    Error::NotProductDecomposition(message)
}

fn describe(args: &[usize]) -> String {
    let parts: Vec<String> = args.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

/// Both sides of the composition identity on the grid `rows`.
fn composition_sides(f: &OperationTable, rows: &[Vec<usize>]) -> (usize, usize) {
    let outer: Vec<usize> = rows.iter().map(|row| f.get(row)).collect();
    let diagonal: Vec<usize> = rows.iter().enumerate().map(|(i, row)| row[i]).collect();
    (f.get(&outer), f.get(&diagonal))
}

fn composition_failure(rows: &[Vec<usize>], lhs: usize, rhs: usize) -> Error {
    let rows: Vec<String> = rows.iter().map(|r| describe(r)).collect();
    not_pd(format!(
        "composition identity f(f(row_1),...,f(row_n)) = f(diagonal) fails on rows {}: {lhs} != {rhs}",
        rows.join(" ")
    ))
}

/// Exhaustive search for a grid violating the composition identity.
fn find_composition_violation(f: &OperationTable) -> Option<Error> {
    let size = f.universe_size();
    let arity = f.arity();
    let cells = u32::try_from(arity * arity).ok().and_then(|c| size.checked_pow(c))?;
    if cells > GRID_SEARCH_LIMIT || size == 0 {
        return None;
    }
    let mut grid = vec![0usize; arity * arity];
    loop {
        let rows: Vec<Vec<usize>> = grid.chunks(arity).map(<[usize]>::to_vec).collect();
        let (lhs, rhs) = composition_sides(f, &rows);
        if lhs != rhs {
            return Some(composition_failure(&rows, lhs, rhs));
        }
        if !crate::conditions::advance_tuple(&mut grid, size) {
            return None;
        }
    }
}

/// Checks that `f` is an idempotent, composition-respecting polymorphism
/// of `a` and returns its fast relations.
///
/// The identities are not checked over all `|A|^(n*n)` grids. Instead the
/// fast relations are required to be equivalences whose block map is
/// injective, with `f(a)` related to `a_i` in relation `i` for every tuple
/// `a`. Those conditions force `f` to act coordinatewise on the block
/// tuples, which gives the composition identity; conversely each follows
/// from the identities.
fn certified_relations(a: &Digraph, f: &OperationTable) -> Result<Vec<Relation>> {
    let size = f.universe_size();
    let arity = f.arity();
    if arity == 0 {
        return Err(Error::Invalid("decomposition arity must be positive".into()));
    }
    if size != a.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "table over {size} elements against a digraph on {} vertices",
            a.vertex_count()
        )));
    }
    if let Some(x) = (0..size).find(|&x| f.get(&vec![x; arity]) != x) {
        return Err(not_pd(format!("idempotence f(x,...,x) = x fails at x = {x}")));
    }
    let relations: Vec<Relation> = (0..arity).map(|i| fast_relation(f, i)).collect();

    let mut args = vec![0usize; arity];
    for index in 0..f.values().len() {
        let value = f.values()[index];
        for (i, rel) in relations.iter().enumerate() {
            if !rel.get(value, args[i]) {
                // Rows: constant a_i at row i, the tuple itself elsewhere.
                let rows: Vec<Vec<usize>> =
                    (0..arity).map(|r| if r == i { vec![args[i]; arity] } else { args.clone() }).collect();
                let (lhs, rhs) = composition_sides(f, &rows);
                return Err(composition_failure(&rows, lhs, rhs));
            }
        }
        crate::conditions::advance_tuple(&mut args, size);
    }

    for (i, rel) in relations.iter().enumerate() {
        if let Some(failure) = rel.equivalence_failure() {
            return Err(find_composition_violation(f).unwrap_or_else(|| {
                not_pd(format!("composition identity fails: relation {} is not an equivalence ({failure})", i + 1))
            }));
        }
    }
    let partitions: Vec<Partition> = relations.iter().map(Relation::to_partition).collect();
    let mut seen = std::collections::HashMap::new();
    for x in 0..size {
        let key: Vec<usize> = partitions.iter().map(|p| p.block_of(x)).collect();
        if let Some(y) = seen.insert(key, x) {
            return Err(find_composition_violation(f).unwrap_or_else(|| {
                not_pd(format!("composition identity fails: {y} and {x} lie in the same block of every relation"))
            }));
        }
    }

    if let Some(edges) = f.edge_violation(a)? {
        let sources: Vec<usize> = edges.iter().map(|e| e.0).collect();
        let targets: Vec<usize> = edges.iter().map(|e| e.1).collect();
        return Err(not_pd(format!(
            "edge preservation fails: edges {edges:?} map to ({}, {}), which is not an edge",
            f.get(&sources),
            f.get(&targets)
        )));
    }
    Ok(relations)
}

/// The equivalences `ν_1, ..., ν_n` of a product decomposition polymorphism
/// `f` of `a`: `x ν_i y` iff `f(x, ..., x, y, x, ..., x) = x` with `y` at
/// position `i`.
pub fn nu_equivalences(a: &Digraph, f: &OperationTable) -> Result<Vec<Partition>> {
    nu_equivalences_with(a, f, false)
}

/// As [`nu_equivalences`]; with `verify` set, also compares every relation
/// with its existential definition over all witness tuples.
pub fn nu_equivalences_with(a: &Digraph, f: &OperationTable, verify: bool) -> Result<Vec<Partition>> {
    let relations = certified_relations(a, f)?;
    if verify {
        for (i, rel) in relations.iter().enumerate() {
            if rel.pairs() != existential_nu_pairs(f, i)? {
                return Err(Error::Invariant(format!(
                    "relation {} differs from its existential definition",
                    i + 1
                )));
            }
        }
    }
    Ok(relations.iter().map(Relation::to_partition).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::power;

    #[test]
    fn projections_of_a_square() {
        let c2 = power(&Digraph::make_c(), 2).unwrap();
        let first = OperationTable::projection(2, 9, 0).unwrap();
        let nus = nu_equivalences_with(&c2, &first, true).unwrap();
        assert!(nus[0].is_discrete());
        assert!(nus[1].is_total());
    }

    #[test]
    fn names_the_broken_condition() {
        let edge = Digraph::make_edge();
        let constant = OperationTable::new(2, 2, vec![0, 0, 0, 0]).unwrap();
        let err = nu_equivalences(&edge, &constant).unwrap_err().to_string();
        assert!(err.contains("idempotence"), "{err}");

        // Binary meet on {0,1} is idempotent but not a decomposition.
        let meet = OperationTable::new(2, 2, vec![0, 0, 0, 1]).unwrap();
        let err = nu_equivalences(&edge, &meet).unwrap_err().to_string();
        assert!(err.contains("composition identity"), "{err}");

        let square = power(&edge, 2).unwrap();
        let damaged = Digraph::new(4, square.edges().filter(|&e| e != (0, 3))).unwrap();
        let canonical = OperationTable::from_fn(2, 4, |a| a[0] / 2 * 2 + a[1] % 2).unwrap();
        assert!(nu_equivalences(&square, &canonical).is_ok());
        let err = nu_equivalences(&damaged, &canonical).unwrap_err().to_string();
        assert!(err.contains("edge preservation"), "{err}");
    }
}
