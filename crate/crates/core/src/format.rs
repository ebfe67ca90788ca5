//! The `.cocycle` text format.
//!
//! ```text
//! # comment
//! dim 2
//! alphabet 2
//! transition full        # or `transition` followed by k rows of 0/1
//! matrix 1
//! 2 0
//! 0 1
//! matrix 2
//! 1 1
//! 1 2
//! ```
//!
//! Rows are one per line. Syntax errors are [`Error::Parse`] with a 1-based
//! line number; a well-formed file describing an invalid cocycle surfaces
//! the validation error of [`OneStepCocycle::new`].

use std::fmt::Write as _;

use crate::cocycle::OneStepCocycle;
use crate::error::{Error, Result};
use crate::matalg::SquareMatrix;
use crate::sft::TransitionMatrix;

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, Vec<&'a str>)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, Vec<&'a str>)>> = Box::new(text.lines().enumerate().filter_map(|(i, l)| {
            let body = l.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            (!toks.is_empty()).then_some((i + 1, toks))
        }));
        Lines { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((n, t)) => {
                self.last = n;
                Ok((n, t))
            }
            None => Err(parse_err(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn keyword_value(lines: &mut Lines<'_>, key: &str) -> Result<usize> {
    let (n, t) = lines.next(&format!("`{key} <n>`"))?;
    if t[0] != key || t.len() != 2 {
        return Err(parse_err(n, format!("expected `{key} <n>`, found `{}`", t.join(" "))));
    }
    t[1].parse::<usize>().map_err(|_| parse_err(n, format!("`{}` is not a non-negative integer", t[1])))
}

/// Parses and validates a cocycle description.
pub fn parse_cocycle(text: &str) -> Result<OneStepCocycle> {
    let mut lines = Lines::new(text);
    let d = keyword_value(&mut lines, "dim")?;
    if d == 0 {
        return Err(parse_err(lines.last, "dimension must be at least 1"));
    }
    let k = keyword_value(&mut lines, "alphabet")?;
    if k == 0 {
        return Err(parse_err(lines.last, "alphabet must be non-empty"));
    }

    let (n, t) = lines.next("`transition`")?;
    if t[0] != "transition" {
        return Err(parse_err(n, format!("expected `transition`, found `{}`", t[0])));
    }
    let transition = match t.get(1..).unwrap_or(&[]) {
        ["full"] => TransitionMatrix::full(k),
        [] => {
            let mut rows = Vec::with_capacity(k);
            for r in 0..k {
                let (n, t) = lines.next(&format!("transition row {}", r + 1))?;
                if t.len() != k {
                    return Err(parse_err(n, format!("transition row {} has {} entries, expected {k}", r + 1, t.len())));
                }
                let row = t
                    .iter()
                    .map(|x| match *x {
                        "0" => Ok(0),
                        "1" => Ok(1),
                        other => Err(parse_err(n, format!("transition entry `{other}` is not 0 or 1"))),
                    })
                    .collect::<Result<Vec<i64>>>()?;
                rows.push(row);
            }
            TransitionMatrix::new(&rows)?
        }
        other => return Err(parse_err(n, format!("unexpected `{}` after `transition`", other.join(" ")))),
    };

    let mut generators = Vec::with_capacity(k);
    for s in 1..=k {
        let (n, t) = lines.next(&format!("`matrix {s}`"))?;
        if t.len() != 2 || t[0] != "matrix" || t[1] != s.to_string() {
            return Err(parse_err(n, format!("expected `matrix {s}`, found `{}`", t.join(" "))));
        }
        let mut data = Vec::with_capacity(d * d);
        for r in 0..d {
            let (n, t) = lines.next(&format!("row {} of matrix {s}", r + 1))?;
            if t.len() != d {
                return Err(parse_err(n, format!("row {} of matrix {s} has {} entries, expected {d}", r + 1, t.len())));
            }
            for x in t {
                let v: f64 = x.parse().map_err(|_| parse_err(n, format!("`{x}` is not a number")))?;
                if !v.is_finite() {
                    return Err(parse_err(n, format!("`{x}` is not finite")));
                }
                data.push(v);
            }
        }
        generators.push(SquareMatrix::new(d, data)?);
    }
    if let Some((n, t)) = lines.inner.next() {
        return Err(parse_err(n, format!("trailing content `{}`", t.join(" "))));
    }
    OneStepCocycle::new(generators, transition)
}

/// Serializes with shortest round-trip decimals, so parsing the output
/// reproduces every entry bit for bit.
pub fn write_cocycle(c: &OneStepCocycle) -> String {
    write_cocycle_with_header(c, &[])
}

/// As [`write_cocycle`], with leading `#` comment lines.
pub fn write_cocycle_with_header(c: &OneStepCocycle, comments: &[String]) -> String {
    write_parts(c.transition(), c.generators(), comments)
}

/// Serializes raw parts without validating them, e.g. block tuples whose
/// entries are too large for the invertibility check to be meaningful.
pub fn write_parts(q: &TransitionMatrix, generators: &[SquareMatrix], comments: &[String]) -> String {
    let mut out = String::new();
    for line in comments {
        let _ = writeln!(out, "# {line}");
    }
    let d = generators.first().map_or(0, SquareMatrix::dim);
    let _ = writeln!(out, "dim {d}\nalphabet {}", generators.len());
    if q.is_full() {
        out.push_str("transition full\n");
    } else {
        out.push_str("transition\n");
        for row in q.rows() {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    for (s, g) in generators.iter().enumerate() {
        let _ = writeln!(out, "matrix {}", s + 1);
        for i in 0..d {
            let cells: Vec<String> = (0..d).map(|j| format!("{:?}", g.get(i, j))).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    out
}
