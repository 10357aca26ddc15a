//! Plain-text serialization of sparse Fourier series.
//!
//! The format (one header block, then one line per term) is designed to
//! round-trip exactly and to diff cleanly:
//!
//! ```text
//! FSER 1
//! kind ortho
//! scales 2 2 2
//! parity integral
//! prec 8
//! minorder 0
//! 0 0 0 1
//! 2 -2 0 240
//! ...
//! ```
//!
//! Coefficients are exact rationals written as `num` or `num/den`.  Term
//! lines are sorted: by (N + M, N, R) for the three-variable kind, by
//! (N, R) for Jacobi series, and by exponent for plain q-series.  The
//! parser insists on the sort order and on a consistent `minorder`, so a
//! damaged file is rejected rather than reinterpreted.

use std::fmt::Write as _;
use std::str::FromStr;

use num_traits::{One, Zero};
use thiserror::Error;

use super::jacobi::JacobiSeries;
use super::ortho::{IndexKey, OrthoSeries, Parity};
use super::qseries::QSeries;
use crate::exact::{Int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FserError {
    #[error("line {0}: expected `{1}`")]
    ExpectedLine(usize, &'static str),
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("term lines are not sorted at line {0}")]
    Unsorted(usize),
    #[error("file says minorder {header} but the terms start at {actual}")]
    MinOrderMismatch { header: i64, actual: i64 },
    #[error("kind is {0}, not {1}")]
    WrongKind(String, &'static str),
    #[error("invalid series data: {0}")]
    Invalid(String),
}

fn push_rat(out: &mut String, c: &Rat) {
    if c.denom().is_one() {
        let _ = write!(out, "{}", c.numer());
    } else {
        let _ = write!(out, "{}/{}", c.numer(), c.denom());
    }
}

fn parse_rat(token: &str, line: usize) -> Result<Rat, FserError> {
    let bad = || FserError::Malformed(line, format!("bad rational `{token}`"));
    match token.split_once('/') {
        Some((n, d)) => {
            let num = Int::from_str(n).map_err(|_| bad())?;
            let den = Int::from_str(d).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(num, den))
        }
        None => Ok(Rat::from_integer(Int::from_str(token).map_err(|_| bad())?)),
    }
}

fn parse_i64(token: &str, line: usize) -> Result<i64, FserError> {
    token
        .parse()
        .map_err(|_| FserError::Malformed(line, format!("bad integer `{token}`")))
}

/// Line-by-line reader that tracks positions for error reporting.
struct Lines<'a> {
    inner: std::str::Lines<'a>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines(),
            pos: 0,
        }
    }

    fn next(&mut self) -> Option<&'a str> {
        self.pos += 1;
        self.inner.next()
    }

    fn expect(&mut self, what: &'static str) -> Result<&'a str, FserError> {
        self.next()
            .filter(|l| !l.trim().is_empty())
            .ok_or(FserError::ExpectedLine(self.pos, what))
    }

    fn expect_exact(&mut self, what: &'static str) -> Result<(), FserError> {
        let line = self.expect(what)?;
        if line.trim() == what {
            Ok(())
        } else {
            Err(FserError::ExpectedLine(self.pos, what))
        }
    }

    fn expect_field(&mut self, key: &'static str) -> Result<&'a str, FserError> {
        let line = self.expect(key)?;
        line.trim()
            .strip_prefix(key)
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .ok_or(FserError::ExpectedLine(self.pos, key))
    }
}

// ---------------------------------------------------------------------------
// three-variable series
// ---------------------------------------------------------------------------

pub fn write_ortho(s: &OrthoSeries) -> String {
    let mut out = String::new();
    out.push_str("FSER 1\nkind ortho\nscales 2 2 2\n");
    let parity = match s.parity() {
        Parity::Integral => "integral",
        Parity::HalfIntegral => "half-integral",
    };
    let _ = writeln!(out, "parity {parity}");
    let _ = writeln!(out, "prec {}", s.prec());
    let _ = writeln!(out, "minorder {}", s.min_order().unwrap_or(0));
    let mut terms: Vec<(&IndexKey, &Rat)> = s.terms().collect();
    terms.sort_by_key(|(k, _)| (k.total(), k.n, k.r));
    for (k, c) in terms {
        let _ = write!(out, "{} {} {} ", k.n, k.r, k.m);
        push_rat(&mut out, c);
        out.push('\n');
    }
    out
}

pub fn read_ortho(text: &str) -> Result<OrthoSeries, FserError> {
    let mut lines = Lines::new(text);
    lines.expect_exact("FSER 1")?;
    let kind = lines.expect_field("kind")?;
    if kind != "ortho" {
        return Err(FserError::WrongKind(kind.into(), "ortho"));
    }
    let scales = lines.expect_field("scales")?;
    if scales.split_whitespace().collect::<Vec<_>>() != ["2", "2", "2"] {
        return Err(FserError::Malformed(
            lines.pos,
            format!("unsupported scales `{scales}`"),
        ));
    }
    let parity = match lines.expect_field("parity")? {
        "integral" => Parity::Integral,
        "half-integral" => Parity::HalfIntegral,
        other => {
            return Err(FserError::Malformed(
                lines.pos,
                format!("unknown parity `{other}`"),
            ))
        }
    };
    let prec = parse_i64(lines.expect_field("prec")?, lines.pos)?;
    let minorder = parse_i64(lines.expect_field("minorder")?, lines.pos)?;
    let mut terms = Vec::new();
    let mut last_key: Option<(i64, i64, i64)> = None;
    while let Some(raw) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(FserError::Malformed(
                lines.pos,
                "expected `N R M coeff`".into(),
            ));
        }
        let n = parse_i64(fields[0], lines.pos)?;
        let r = parse_i64(fields[1], lines.pos)?;
        let m = parse_i64(fields[2], lines.pos)?;
        let c = parse_rat(fields[3], lines.pos)?;
        if c.is_zero() {
            return Err(FserError::Malformed(lines.pos, "explicit zero term".into()));
        }
        let sort_key = (n + m, n, r);
        if last_key.is_some_and(|prev| prev >= sort_key) {
            return Err(FserError::Unsorted(lines.pos));
        }
        last_key = Some(sort_key);
        terms.push((IndexKey::new(n, r, m), c));
    }
    if let Some(actual) = terms.iter().map(|(k, _)| k.total()).min() {
        if actual != minorder {
            return Err(FserError::MinOrderMismatch {
                header: minorder,
                actual,
            });
        }
    }
    OrthoSeries::from_terms(parity, prec, terms).map_err(|e| FserError::Invalid(e.to_string()))
}

// ---------------------------------------------------------------------------
// Jacobi series
// ---------------------------------------------------------------------------

pub fn write_jacobi(s: &JacobiSeries) -> String {
    let mut out = String::new();
    out.push_str("FSER 1\nkind jacobi\n");
    let _ = writeln!(out, "scales {} {}", s.qscale(), s.zscale());
    let _ = writeln!(out, "prec {}", s.prec());
    let _ = writeln!(out, "minorder {}", s.min_qorder().unwrap_or(0));
    for ((n, r), c) in s.terms() {
        let _ = write!(out, "{n} {r} ");
        push_rat(&mut out, c);
        out.push('\n');
    }
    out
}

pub fn read_jacobi(text: &str) -> Result<JacobiSeries, FserError> {
    let mut lines = Lines::new(text);
    lines.expect_exact("FSER 1")?;
    let kind = lines.expect_field("kind")?;
    if kind != "jacobi" {
        return Err(FserError::WrongKind(kind.into(), "jacobi"));
    }
    let scales = lines.expect_field("scales")?;
    let parts: Vec<&str> = scales.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(FserError::Malformed(lines.pos, "expected two scales".into()));
    }
    let qscale = parse_i64(parts[0], lines.pos)?;
    let zscale = parse_i64(parts[1], lines.pos)?;
    let prec = parse_i64(lines.expect_field("prec")?, lines.pos)?;
    let minorder = parse_i64(lines.expect_field("minorder")?, lines.pos)?;
    let mut terms = Vec::new();
    let mut last_key: Option<(i64, i64)> = None;
    while let Some(raw) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(FserError::Malformed(lines.pos, "expected `N R coeff`".into()));
        }
        let n = parse_i64(fields[0], lines.pos)?;
        let r = parse_i64(fields[1], lines.pos)?;
        let c = parse_rat(fields[2], lines.pos)?;
        if c.is_zero() {
            return Err(FserError::Malformed(lines.pos, "explicit zero term".into()));
        }
        if last_key.is_some_and(|prev| prev >= (n, r)) {
            return Err(FserError::Unsorted(lines.pos));
        }
        last_key = Some((n, r));
        terms.push(((n, r), c));
    }
    if let Some(&((n, _), _)) = terms.first() {
        let actual = terms.iter().map(|&((n, _), _)| n).min().unwrap_or(n);
        if actual != minorder {
            return Err(FserError::MinOrderMismatch {
                header: minorder,
                actual,
            });
        }
    }
    Ok(JacobiSeries::from_terms(qscale, zscale, prec, terms))
}

// ---------------------------------------------------------------------------
// plain q-series
// ---------------------------------------------------------------------------

pub fn write_q(s: &QSeries) -> String {
    let mut out = String::new();
    out.push_str("FSER 1\nkind q\n");
    let _ = writeln!(out, "scales {}", s.scale());
    let _ = writeln!(out, "prec {}", s.prec());
    let _ = writeln!(out, "minorder {}", s.min_order().unwrap_or(0));
    for (e, c) in s.terms() {
        let _ = write!(out, "{e} ");
        push_rat(&mut out, c);
        out.push('\n');
    }
    out
}

pub fn read_q(text: &str) -> Result<QSeries, FserError> {
    let mut lines = Lines::new(text);
    lines.expect_exact("FSER 1")?;
    let kind = lines.expect_field("kind")?;
    if kind != "q" {
        return Err(FserError::WrongKind(kind.into(), "q"));
    }
    let scale = parse_i64(lines.expect_field("scales")?, lines.pos)?;
    let prec = parse_i64(lines.expect_field("prec")?, lines.pos)?;
    let minorder = parse_i64(lines.expect_field("minorder")?, lines.pos)?;
    let mut terms = Vec::new();
    let mut last: Option<i64> = None;
    while let Some(raw) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(FserError::Malformed(lines.pos, "expected `E coeff`".into()));
        }
        let e = parse_i64(fields[0], lines.pos)?;
        let c = parse_rat(fields[1], lines.pos)?;
        if c.is_zero() {
            return Err(FserError::Malformed(lines.pos, "explicit zero term".into()));
        }
        if last.is_some_and(|prev| prev >= e) {
            return Err(FserError::Unsorted(lines.pos));
        }
        last = Some(e);
        terms.push((e, c));
    }
    if let Some(&(first, _)) = terms.first() {
        if first != minorder {
            return Err(FserError::MinOrderMismatch {
                header: minorder,
                actual: first,
            });
        }
    }
    Ok(QSeries::from_terms(scale, prec, terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};

    #[test]
    fn ortho_round_trip() {
        let s = OrthoSeries::from_terms(
            Parity::HalfIntegral,
            4,
            [
                (IndexKey::new(1, 1, 1), rat_int(1)),
                (IndexKey::new(1, -1, 1), rat_int(-1)),
                (IndexKey::new(3, 1, 3), rat(5, 2)),
            ],
        )
        .unwrap();
        let text = write_ortho(&s);
        assert!(text.starts_with("FSER 1\nkind ortho\nscales 2 2 2\nparity half-integral\n"));
        assert!(text.contains("\n1 -1 1 -1\n"));
        assert!(text.contains("\n3 1 3 5/2\n"));
        let back = read_ortho(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn ortho_rejects_unsorted_and_mismatched_headers() {
        let s = OrthoSeries::from_terms(
            Parity::Integral,
            3,
            [
                (IndexKey::new(0, 0, 0), rat_int(1)),
                (IndexKey::new(2, 0, 2), rat_int(2)),
            ],
        )
        .unwrap();
        let text = write_ortho(&s);
        let swapped: String = {
            let mut lines: Vec<&str> = text.lines().collect();
            let n = lines.len();
            lines.swap(n - 1, n - 2);
            lines.join("\n")
        };
        assert!(matches!(read_ortho(&swapped), Err(FserError::Unsorted(_))));
        let lied = text.replace("minorder 0", "minorder 2");
        assert!(matches!(
            read_ortho(&lied),
            Err(FserError::MinOrderMismatch { .. })
        ));
        let zeroed = text.replace("0 0 0 1", "0 0 0 0");
        assert!(matches!(read_ortho(&zeroed), Err(FserError::Malformed(..))));
    }

    #[test]
    fn jacobi_round_trip() {
        let s = JacobiSeries::from_terms(
            8,
            2,
            32,
            [((1, 1), rat_int(1)), ((1, -1), rat_int(-1)), ((9, 3), rat(1, 3))],
        );
        let text = write_jacobi(&s);
        let back = read_jacobi(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn q_round_trip() {
        let s = QSeries::from_terms(24, 72, [(1, rat_int(1)), (25, rat_int(-24))]);
        let text = write_q(&s);
        let back = read_q(&text).unwrap();
        assert_eq!(back, s);
        assert!(matches!(
            read_q(&write_jacobi(&JacobiSeries::zero(1, 1, 3))),
            Err(FserError::WrongKind(..))
        ));
    }
}
