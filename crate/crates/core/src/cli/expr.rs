//! Digraph build expressions:
//!
//! ```text
//! expr := C | C1 | loop | edge | pow(expr, k) | prod(expr, ...) | union(expr, ...) | file(path)
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::structures::{disjoint_union, power, product, Digraph};

/// A parsed expression together with the files it read, for digests.
pub struct Built {
    pub digraph: Digraph,
    pub files: Vec<(String, Digraph)>,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    cap: usize,
    base: &'a Path,
    files: Vec<(String, Digraph)>,
}

fn fail<T>(position: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Expression { position, message: message.into() })
}

/// Parses and evaluates `text`; `file(...)` paths are resolved against
/// `base`. Intermediate digraphs above `cap` vertices are refused.
pub fn build(text: &str, base: &Path, cap: usize) -> Result<Built> {
    let mut parser = Parser { chars: text.chars().collect(), pos: 0, cap, base, files: Vec::new() };
    let digraph = parser.expr()?;
    parser.skip_space();
    if parser.pos < parser.chars.len() {
        return fail(parser.pos, format!("unexpected `{}`", parser.chars[parser.pos]));
    }
    Ok(Built { digraph, files: parser.files })
}

impl Parser<'_> {
    fn skip_space(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_space();
        match self.chars.get(self.pos) {
            Some(&found) if found == c => {
                self.pos += 1;
                Ok(())
            }
            Some(&found) => fail(self.pos, format!("expected `{c}`, found `{found}`")),
            None => fail(self.pos, format!("expected `{c}`, found end of input")),
        }
    }

    fn word(&mut self) -> (usize, String) {
        self.skip_space();
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        (start, self.chars[start..self.pos].iter().collect())
    }

    fn checked(&self, g: Digraph) -> Result<Digraph> {
        if g.vertex_count() > self.cap {
            return Err(Error::CapExceeded { cap: self.cap, reached: g.vertex_count() });
        }
        Ok(g)
    }

    fn expr(&mut self) -> Result<Digraph> {
        let (start, name) = self.word();
        match name.as_str() {
            "" => match self.chars.get(start) {
                Some(c) => fail(start, format!("expected a digraph, found `{c}`")),
                None => fail(start, "expected a digraph, found end of input"),
            },
            "C" => Ok(Digraph::make_c()),
            "C1" => Ok(Digraph::make_c1()),
            "loop" => Ok(Digraph::point()),
            "edge" => Ok(Digraph::make_edge()),
            "pow" => {
                self.expect('(')?;
                let base = self.expr()?;
                self.expect(',')?;
                let (at, digits) = self.word();
                let k: usize = digits.parse().or_else(|_| fail(at, "expected a non-negative exponent"))?;
                self.expect(')')?;
                let size = u32::try_from(k).ok().and_then(|e| base.vertex_count().checked_pow(e));
                match size {
                    Some(s) if s <= self.cap => self.checked(power(&base, k)?),
                    _ => Err(Error::CapExceeded { cap: self.cap, reached: size.unwrap_or(usize::MAX) }),
                }
            }
            "prod" | "union" => {
                let parts = self.list()?;
                if name == "union" {
                    return self.checked(disjoint_union(&parts));
                }
                let size = parts.iter().try_fold(1usize, |acc, g| acc.checked_mul(g.vertex_count()));
                match size {
                    Some(s) if s <= self.cap => self.checked(product(&parts)?),
                    _ => Err(Error::CapExceeded { cap: self.cap, reached: size.unwrap_or(usize::MAX) }),
                }
            }
            "file" => {
                self.expect('(')?;
                let from = self.pos;
                let Some(len) = self.chars[from..].iter().position(|&c| c == ')') else {
                    return fail(self.chars.len(), "unterminated file(...)");
                };
                let path: String = self.chars[from..from + len].iter().collect::<String>().trim().to_string();
                self.pos = from + len + 1;
                if path.is_empty() {
                    return fail(from, "empty path");
                }
                let text = std::fs::read_to_string(self.base.join(&path))
                    .or_else(|e| fail(from, format!("cannot read `{path}`: {e}")))?;
                let g = Digraph::from_json(&text).or_else(|e| fail(from, format!("`{path}`: {e}")))?;
                self.files.push((path, g.clone()));
                self.checked(g)
            }
            other => fail(start, format!("unknown digraph `{other}`")),
        }
    }

    fn list(&mut self) -> Result<Vec<Digraph>> {
        self.expect('(')?;
        let mut parts = vec![self.expr()?];
        loop {
            self.skip_space();
            match self.chars.get(self.pos) {
                Some(',') => {
                    self.pos += 1;
                    parts.push(self.expr()?);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(parts);
                }
                Some(c) => return fail(self.pos, format!("expected `,` or `)`, found `{c}`")),
                None => return fail(self.pos, "expected `,` or `)`, found end of input"),
            }
        }
    }
}
