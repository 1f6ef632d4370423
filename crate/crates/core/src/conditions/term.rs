use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// A term over a functional signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(untagged)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(symbol: &str, args: Vec<Term>) -> Term {
        Term::App(symbol.to_string(), args)
    }

    /// `symbol(v1, ..., vk)` with every argument a variable.
    pub fn apply_vars(symbol: &str, vars: &[&str]) -> Term {
        Term::App(symbol.to_string(), vars.iter().map(|v| Term::var(v)).collect())
    }

    /// Nesting depth: variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Variables in order of first occurrence, appended to `out` if new.
    pub fn collect_variables(&self, out: &mut Vec<String>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_variables(out)),
        }
    }

    fn validate(&self, signature: &[Symbol]) -> Result<()> {
        match self {
            Term::Var(v) => {
                if signature.iter().any(|s| &s.name == v) {
                    return Err(Error::Invalid(format!("symbol `{v}` used as a variable")));
                }
                Ok(())
            }
            Term::App(f, args) => {
                let symbol = signature
                    .iter()
                    .find(|s| &s.name == f)
                    .ok_or_else(|| Error::MissingSymbol(f.clone()))?;
                if symbol.arity != args.len() {
                    return Err(Error::ArityMismatch {
                        symbol: f.clone(),
                        expected: symbol.arity,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(signature))
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Identity { lhs, rhs }
    }

    /// Variables of this identity in order of first occurrence.
    pub fn variables(&self) -> Vec<String> {
        let mut vars = Vec::new();
        self.lhs.collect_variables(&mut vars);
        self.rhs.collect_variables(&mut vars);
        vars
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A finite set of identities over a declared signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentitySystem {
    signature: Vec<Symbol>,
    identities: Vec<Identity>,
    variables: Vec<String>,
}

impl IdentitySystem {
    pub fn new(signature: Vec<(String, usize)>, identities: Vec<Identity>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut symbols = Vec::with_capacity(signature.len());
        for (name, arity) in signature {
            if !is_identifier(&name) {
                return Err(Error::Invalid(format!("`{name}` is not a valid symbol name")));
            }
            if arity == 0 {
                return Err(Error::Invalid(format!("symbol `{name}` must have positive arity")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Invalid(format!("symbol `{name}` declared twice")));
            }
            symbols.push(Symbol { name, arity });
        }
        let mut variables = Vec::new();
        for identity in &identities {
            identity.lhs.validate(&symbols)?;
            identity.rhs.validate(&symbols)?;
            identity.lhs.collect_variables(&mut variables);
            identity.rhs.collect_variables(&mut variables);
        }
        Ok(IdentitySystem { signature: symbols, identities, variables })
    }

    pub fn signature(&self) -> &[Symbol] {
        &self.signature
    }

    pub fn identities(&self) -> &[Identity] {
        &self.identities
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn arity_of(&self, symbol: &str) -> Option<usize> {
        self.signature.iter().find(|s| s.name == symbol).map(|s| s.arity)
    }

    /// Parses the identity DSL:
    ///
    /// ```text
    /// symbols: f/3, g/1
    /// f(x,y,y) = f(y,y,x) = x   # chains allowed
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut signature: Option<(usize, Vec<(String, usize)>)> = None;
        let mut identities: Vec<(usize, Identity)> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: line_no, message };
            match &signature {
                None => {
                    let rest = line
                        .strip_prefix("symbols:")
                        .ok_or_else(|| err("expected header `symbols: f/k, ...`".into()))?;
                    let mut symbols = Vec::new();
                    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        let (name, arity) =
                            item.split_once('/').ok_or_else(|| err(format!("expected name/arity, got `{item}`")))?;
                        let arity: usize =
                            arity.trim().parse().map_err(|_| err(format!("bad arity in `{item}`")))?;
                        symbols.push((name.trim().to_string(), arity));
                    }
                    if symbols.is_empty() {
                        return Err(err("no symbols declared".into()));
                    }
                    IdentitySystem::new(symbols.clone(), Vec::new()).map_err(|e| err(e.to_string()))?;
                    signature = Some((line_no, symbols));
                }
                Some((_, symbols)) => {
                    let sides: Vec<&str> = line.split('=').collect();
                    if sides.len() < 2 {
                        return Err(err("expected an identity `lhs = rhs`".into()));
                    }
                    let terms = sides
                        .iter()
                        .map(|s| parse_term(s).map_err(&err))
                        .collect::<Result<Vec<_>>>()?;
                    for pair in terms.windows(2) {
                        let identity = Identity::new(pair[0].clone(), pair[1].clone());
                        let check = IdentitySystem::new(symbols.clone(), vec![identity.clone()]);
                        check.map_err(|e| err(e.to_string()))?;
                        identities.push((line_no, identity));
                    }
                }
            }
        }
        let (_, symbols) = signature.ok_or(Error::Parse { line: 1, message: "missing `symbols:` header".into() })?;
        IdentitySystem::new(symbols, identities.into_iter().map(|(_, i)| i).collect())
    }
}

impl fmt::Display for IdentitySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header: Vec<String> = self.signature.iter().map(|s| format!("{}/{}", s.name, s.arity)).collect();
        writeln!(f, "symbols: {}", header.join(", "))?;
        for identity in &self.identities {
            writeln!(f, "{identity}")?;
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_term(text: &str) -> std::result::Result<Term, String> {
    let tokens: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pos = 0;
    let term = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("unexpected `{}` after term", tokens[pos..].iter().collect::<String>()));
    }
    Ok(term)
}

fn parse_at(tokens: &[char], pos: &mut usize) -> std::result::Result<Term, String> {
    let start = *pos;
    while *pos < tokens.len() && (tokens[*pos].is_ascii_alphanumeric() || tokens[*pos] == '_') {
        *pos += 1;
    }
    let name: String = tokens[start..*pos].iter().collect();
    if !is_identifier(&name) {
        return Err(if name.is_empty() { "expected a term".into() } else { format!("bad identifier `{name}`") });
    }
    if tokens.get(*pos) != Some(&'(') {
        if !name.starts_with(|c: char| c.is_ascii_lowercase()) {
            return Err(format!("variable `{name}` must start with a lowercase letter"));
        }
        return Ok(Term::Var(name));
    }
    *pos += 1;
    let mut args = Vec::new();
    loop {
        args.push(parse_at(tokens, pos)?);
        match tokens.get(*pos) {
            Some(',') => *pos += 1,
            Some(')') => {
                *pos += 1;
                return Ok(Term::App(name, args));
            }
            _ => return Err(format!("expected `,` or `)` in arguments of `{name}`")),
        }
    }
}
