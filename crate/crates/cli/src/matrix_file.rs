//! Plain-text matrix files.
//!
//! ```text
//! # comment
//! K N
//! re+imj re+imj ...   (K rows of N entries)
//! ```
//!
//! Entries may also be purely real (`1.5`) or purely imaginary (`-2j`).

use std::fmt::Write as _;

use eigensense::{Complex64, ComplexMatrix};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

pub fn parse_entry(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix('j') else {
        return token.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    // The imaginary part starts at the last sign that is not a leading sign
    // and does not belong to an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => {
            let re = body[..i].parse().ok()?;
            let im = body[i..].parse().ok()?;
            Some(Complex64::new(re, im))
        }
        None => body.parse().ok().map(|im| Complex64::new(0.0, im)),
    }
}

pub fn parse(text: &str) -> Result<ComplexMatrix, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty file; expected `K N` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| {
            err(
                header_line,
                format!("expected `K N` header, found `{header}`"),
            )
        })?;
    let [k, n] = dims[..] else {
        return Err(err(
            header_line,
            format!("expected `K N` header, found `{header}`"),
        ));
    };
    if k == 0 || n == 0 {
        return Err(err(header_line, "matrix dimensions must be positive"));
    }

    let mut data = Vec::with_capacity(k * n);
    let mut rows = 0;
    for (line, content) in lines {
        if rows == k {
            return Err(err(line, format!("unexpected data after {k} rows")));
        }
        let before = data.len();
        for token in content.split_whitespace() {
            let z =
                parse_entry(token).ok_or_else(|| err(line, format!("invalid entry `{token}`")))?;
            data.push(z);
        }
        let got = data.len() - before;
        if got != n {
            return Err(err(line, format!("expected {n} entries, found {got}")));
        }
        rows += 1;
    }
    if rows != k {
        let last = text.lines().count().max(1);
        return Err(err(last, format!("expected {k} rows, found {rows}")));
    }
    ComplexMatrix::new(k, n, data).map_err(|e| err(header_line, e.to_string()))
}

fn number(out: &mut String, x: f64) {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        write!(out, "{x}").unwrap();
    } else {
        write!(out, "{x:e}").unwrap();
    }
}

/// Renders `y` with shortest round-trip decimals; `parse(render(y)) == y`.
pub fn render(y: &ComplexMatrix, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "{} {}", y.rows(), y.cols()).unwrap();
    for i in 0..y.rows() {
        for (j, z) in y.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            number(&mut out, z.re);
            if !z.im.is_sign_negative() {
                out.push('+');
            }
            number(&mut out, z.im);
            out.push('j');
        }
        out.push('\n');
    }
    out
}
