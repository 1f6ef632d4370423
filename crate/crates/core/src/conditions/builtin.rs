//! Built-in strong Maltsev conditions.

use super::term::{Identity, IdentitySystem, Term};
use crate::error::{Error, Result};

fn system(signature: &[(&str, usize)], identities: Vec<Identity>) -> IdentitySystem {
    let signature = signature.iter().map(|&(s, k)| (s.to_string(), k)).collect();
    IdentitySystem::new(signature, identities).expect("built-in systems are well formed")
}

fn pattern(symbol: &str, pattern: &str) -> Term {
    Term::App(symbol.to_string(), pattern.chars().map(|c| Term::Var(c.to_string())).collect())
}

fn idempotence(symbol: &str, arity: usize) -> Identity {
    Identity::new(pattern(symbol, &"x".repeat(arity)), Term::var("x"))
}

/// 6-ary idempotent `t` with `t(x,y,y,y,x,x) = t(y,x,y,x,y,x) = t(y,y,x,x,x,y)`.
pub fn olsak() -> IdentitySystem {
    system(
        &[("t", 6)],
        vec![
            idempotence("t", 6),
            Identity::new(pattern("t", "xyyyxx"), pattern("t", "yxyxyx")),
            Identity::new(pattern("t", "yxyxyx"), pattern("t", "yyxxxy")),
        ],
    )
}

pub fn majority() -> IdentitySystem {
    let x = Term::var("x");
    system(
        &[("t", 3)],
        vec![
            Identity::new(pattern("t", "yxx"), x.clone()),
            Identity::new(pattern("t", "xyx"), x.clone()),
            Identity::new(pattern("t", "xxy"), x),
        ],
    )
}

pub fn maltsev() -> IdentitySystem {
    let x = Term::var("x");
    system(&[("p", 3)], vec![Identity::new(pattern("p", "xyy"), x.clone()), Identity::new(pattern("p", "yyx"), x)])
}

pub fn minority() -> IdentitySystem {
    let x = Term::var("x");
    system(
        &[("m", 3)],
        vec![
            Identity::new(pattern("m", "xyy"), x.clone()),
            Identity::new(pattern("m", "yxy"), x.clone()),
            Identity::new(pattern("m", "yyx"), x),
        ],
    )
}

fn grid_var(i: usize, j: usize) -> Term {
    Term::Var(format!("x{}_{}", i + 1, j + 1))
}

fn composition(n: usize) -> Identity {
    let rows = (0..n).map(|i| Term::App("f".into(), (0..n).map(|j| grid_var(i, j)).collect())).collect();
    let diagonal = (0..n).map(|i| grid_var(i, i)).collect();
    Identity::new(Term::App("f".into(), rows), Term::App("f".into(), diagonal))
}

/// Idempotent `f/n` with `f(f(row_1), ..., f(row_n)) = f(diagonal)`.
pub fn product_decomposition(n: usize) -> Result<IdentitySystem> {
    if n == 0 {
        return Err(Error::Invalid("decomposition arity must be positive".into()));
    }
    Ok(system(&[("f", n)], vec![idempotence("f", n), composition(n)]))
}

/// The product decomposition identities plus a unary `g` with `g^n(x) = x`
/// and `g(f(x1, ..., xn)) = f(g(x2), ..., g(xn), g(x1))`.
pub fn power_decomposition(n: usize) -> Result<IdentitySystem> {
    if n == 0 {
        return Err(Error::Invalid("decomposition arity must be positive".into()));
    }
    let vars: Vec<Term> = (1..=n).map(|i| Term::Var(format!("x{i}"))).collect();
    let g = |t: Term| Term::App("g".into(), vec![t]);
    let iterated = (0..n).fold(Term::var("x"), |t, _| g(t));
    let rotated = (1..=n).map(|i| g(vars[i % n].clone())).collect();
    Ok(system(
        &[("f", n), ("g", 1)],
        vec![
            idempotence("f", n),
            composition(n),
            Identity::new(iterated, Term::var("x")),
            Identity::new(g(Term::App("f".into(), vars)), Term::App("f".into(), rotated)),
        ],
    ))
}

/// Idempotent `t/n` with one linear identity per coordinate. Row `i` is a
/// pair of `{x,y}` patterns with `x` at position `i` on the left and `y`
/// at position `i` on the right.
pub fn taylor(rows: &[(String, String)]) -> Result<IdentitySystem> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Invalid("taylor needs at least one row".into()));
    }
    let mut identities = vec![idempotence("t", n)];
    for (i, (left, right)) in rows.iter().enumerate() {
        let well_formed = |p: &str| p.len() == n && p.chars().all(|c| c == 'x' || c == 'y');
        if !well_formed(left) || !well_formed(right) {
            return Err(Error::Invalid(format!("taylor row {i}: patterns must be {n} letters over x,y")));
        }
        if left.as_bytes()[i] != b'x' || right.as_bytes()[i] != b'y' {
            return Err(Error::Invalid(format!("taylor row {i}: needs x at position {i} on the left and y on the right")));
        }
        identities.push(Identity::new(pattern("t", left), pattern("t", right)));
    }
    Ok(system(&[("t", n)], identities))
}

fn parse_arity(arg: &str) -> Result<usize> {
    arg.trim().parse().map_err(|_| Error::Invalid(format!("expected a positive integer, got `{arg}`")))
}

/// Looks up a built-in by name: `olsak`, `majority`, `maltsev`, `minority`,
/// `product_decomposition(n)`, `power_decomposition(n)` or
/// `taylor(xy=yx, ...)` with one `left=right` row per coordinate.
pub fn builtin(name: &str) -> Result<IdentitySystem> {
    let name = name.trim();
    let (head, arg) = match name.split_once('(') {
        Some((head, rest)) => {
            let arg = rest.strip_suffix(')').ok_or_else(|| Error::UnknownCondition(name.to_string()))?;
            (head.trim(), Some(arg))
        }
        None => (name, None),
    };
    match (head, arg) {
        ("olsak", None) => Ok(olsak()),
        ("majority", None) => Ok(majority()),
        ("maltsev", None) => Ok(maltsev()),
        ("minority", None) => Ok(minority()),
        ("product_decomposition", Some(arg)) => product_decomposition(parse_arity(arg)?),
        ("power_decomposition", Some(arg)) => power_decomposition(parse_arity(arg)?),
        ("taylor", Some(arg)) => {
            let rows = arg
                .split(',')
                .map(|row| {
                    row.split_once('=')
                        .map(|(l, r)| (l.trim().to_string(), r.trim().to_string()))
                        .ok_or_else(|| Error::Invalid(format!("taylor row `{row}` needs the form left=right")))
                })
                .collect::<Result<Vec<_>>>()?;
            taylor(&rows)
        }
        _ => Err(Error::UnknownCondition(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        let m = builtin("majority").unwrap();
        assert_eq!(m.signature().len(), 1);
        assert_eq!(m.arity_of("t"), Some(3));
        assert_eq!(m.identities().len(), 3);

        let o = builtin("olsak").unwrap();
        assert_eq!(o.arity_of("t"), Some(6));
        assert_eq!(o.identities().len(), 3);
        assert_eq!(o.identities()[0].to_string(), "t(x,x,x,x,x,x) = x");

        let p = builtin("power_decomposition(2)").unwrap();
        assert_eq!(p.arity_of("f"), Some(2));
        assert_eq!(p.arity_of("g"), Some(1));
        assert_eq!(p.identities().len(), 4);
        let text: Vec<String> = p.identities().iter().map(|i| i.to_string()).collect();
        assert_eq!(
            text,
            vec![
                "f(x,x) = x",
                "f(f(x1_1,x1_2),f(x2_1,x2_2)) = f(x1_1,x2_2)",
                "g(g(x)) = x",
                "g(f(x1,x2)) = f(g(x2),g(x1))",
            ]
        );
        assert_eq!(builtin("product_decomposition(3)").unwrap().identities().len(), 2);
    }

    #[test]
    fn taylor_rows() {
        let t = builtin("taylor(xy=yx, yx=xy)").unwrap();
        assert_eq!(t.identities().len(), 3);
        assert!(builtin("taylor(yx=xy, yx=xy)").is_err());
        assert!(builtin("taylor(xyz=yxx)").is_err());
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(builtin("nu"), Err(Error::UnknownCondition(_))));
        assert!(matches!(builtin("olsak(3)"), Err(Error::UnknownCondition(_))));
        assert!(builtin("power_decomposition(0)").is_err());
        assert!(builtin("power_decomposition(two)").is_err());
    }
}
