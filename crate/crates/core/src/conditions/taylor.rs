use std::collections::BTreeSet;

use serde::Serialize;

use super::builtin::taylor;
use super::search::find_polymorphisms;
use super::table::Tables;
use crate::error::Result;
use crate::structures::Digraph;

/// A Taylor polymorphism together with the linear identities it satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaylorWitness {
    pub arity: usize,
    /// Row `i` has `x` at position `i` on the left and `y` on the right.
    pub rows: Vec<(String, String)>,
    pub tables: Tables,
}

type Pattern = (String, String);

fn swap_xy(p: &str) -> String {
    p.chars().map(|c| if c == 'x' { 'y' } else { 'x' }).collect()
}

/// Representative of an identity up to exchanging sides and renaming x <-> y.
fn canonical((l, r): &Pattern) -> Pattern {
    let (sl, sr) = (swap_xy(l), swap_xy(r));
    [(l.clone(), r.clone()), (r.clone(), l.clone()), (sl.clone(), sr.clone()), (sr, sl)]
        .into_iter()
        .min()
        .expect("four variants")
}

/// Orients an identity serving coordinate `i` so the left side has `x` there.
fn orient((l, r): &Pattern, i: usize) -> Pattern {
    match (l.as_bytes()[i], r.as_bytes()[i]) {
        (b'x', b'y') => (l.clone(), r.clone()),
        (b'y', b'x') => (r.clone(), l.clone()),
        _ => unreachable!("identity does not serve coordinate {i}"),
    }
}

fn candidates(arity: usize, i: usize) -> Vec<Pattern> {
    let others = 2 * (arity - 1);
    let mut set = BTreeSet::new();
    for bits in 0u32..(1 << others) {
        let mut l = String::with_capacity(arity);
        let mut r = String::with_capacity(arity);
        let mut next = 0;
        for j in 0..arity {
            if j == i {
                l.push('x');
                r.push('y');
            } else {
                l.push(if bits >> next & 1 == 1 { 'y' } else { 'x' });
                r.push(if bits >> (next + 1) & 1 == 1 { 'y' } else { 'x' });
                next += 2;
            }
        }
        set.insert(canonical(&(l, r)));
    }
    set.into_iter().collect()
}

/// Searches arities `2..=max_arity` for an idempotent polymorphism with one
/// linear identity per coordinate. Systems are enumerated coordinate by
/// coordinate over canonical identities; a set of identities already tried
/// is skipped. Returns the first satisfiable system.
pub fn search_taylor(g: &Digraph, max_arity: usize) -> Result<Option<TaylorWitness>> {
    for arity in 2..=max_arity {
        let lists: Vec<Vec<Pattern>> = (0..arity).map(|i| candidates(arity, i)).collect();
        let mut tried: BTreeSet<BTreeSet<Pattern>> = BTreeSet::new();
        let mut choice = vec![0usize; arity];
        loop {
            let chosen: Vec<&Pattern> = (0..arity).map(|i| &lists[i][choice[i]]).collect();
            let set: BTreeSet<Pattern> = chosen.iter().map(|&p| p.clone()).collect();
            if tried.insert(set) {
                let rows: Vec<Pattern> = chosen.iter().enumerate().map(|(i, p)| orient(p, i)).collect();
                let sys = taylor(&rows)?;
                if let Some(tables) = find_polymorphisms(g, &sys)?.tables {
                    return Ok(Some(TaylorWitness { arity, rows, tables }));
                }
            }
            if !super::table::advance_mixed(&mut choice, |i| lists[i].len()) {
                break;
            }
        }
    }
    Ok(None)
}
