//! Parsers for group specs, group words, and the small literal forms the
//! command line accepts (integer lists, matrices, semidirect pairs).
//!
//! Spec grammar (one line, whitespace separated):
//!
//! ```text
//! spec  := "group"? kind field*
//! kind  := "finite-perm" | "finite-table" | "abelian" | "bs" | "poly"
//! field := ident "=" value
//! value := integer | list | matrix
//! ```
//!
//! Word grammar:
//!
//! ```text
//! word := term+            (whitespace separated)
//! term := label ("^" "-"? digits)?
//! label := letter+
//! ```
//!
//! All errors carry the 1-based line and column where parsing stopped.

use num_bigint::BigInt;
use num_traits::Zero;
use std::fmt;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("{0}")]
    Syntax(ParseError),

    #[error("unknown generator '{label}' at line {line}, column {col}")]
    UnknownGenerator {
        label: String,
        line: usize,
        col: usize,
    },

    #[error("malformed exponent at line {line}, column {col}")]
    MalformedExponent { line: usize, col: usize },
}

pub(crate) struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    pub fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    /// Does the upcoming input start a nested list (`[[` or `[]`)?
    pub fn peeks_nested_list(&mut self) -> bool {
        self.skip_ws();
        if self.peek() != Some('[') {
            return false;
        }
        let mut i = self.pos + 1;
        while matches!(self.chars.get(i), Some(c) if c.is_whitespace()) {
            i += 1;
        }
        matches!(self.chars.get(i), Some('[') | Some(']'))
    }

    pub fn location(&self) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..self.pos] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    pub fn error(&self, expected: impl Into<String>) -> ParseError {
        let (line, col) = self.location();
        let found = match self.peek() {
            Some(c) => format!("'{c}'"),
            None => "end of input".to_string(),
        };
        ParseError {
            line,
            col,
            expected: expected.into(),
            found,
        }
    }

    pub fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    pub fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    pub fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("'{c}'")))
        }
    }

    /// `[a-zA-Z][a-zA-Z0-9-]*`.
    pub fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let mut out = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {
                out.push(c);
                self.pos += 1;
            }
            _ => return Err(self.error("identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' {
                // a '-' only continues the identifier if a letter follows
                // (so "eps=-1" does not glue the sign onto a previous token)
                if c == '-'
                    && !matches!(self.chars.get(self.pos + 1), Some(n) if n.is_ascii_alphabetic())
                {
                    break;
                }
                out.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(out)
    }

    /// Letters only, for word labels.
    pub fn label(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            out.push(self.bump().unwrap());
        }
        if out.is_empty() {
            Err(self.error("generator label"))
        } else {
            Ok(out)
        }
    }

    pub fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let negative = self.eat('-');
        let mut digits = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(self.bump().unwrap());
        }
        if digits.is_empty() {
            return Err(self.error("integer"));
        }
        let value: BigInt = digits.parse().expect("digits parse");
        Ok(if negative { -value } else { value })
    }

    /// `[x, y, z]`; empty lists allowed.
    pub fn int_list(&mut self) -> Result<Vec<BigInt>, ParseError> {
        self.skip_ws();
        self.expect('[')?;
        let mut out = Vec::new();
        self.skip_ws();
        if self.eat(']') {
            return Ok(out);
        }
        loop {
            out.push(self.integer()?);
            self.skip_ws();
            if self.eat(']') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    /// `[[..],[..]]`; rows must have equal length.
    pub fn int_matrix(&mut self) -> Result<Vec<Vec<BigInt>>, ParseError> {
        self.skip_ws();
        self.expect('[')?;
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        self.skip_ws();
        if self.eat(']') {
            return Ok(rows);
        }
        loop {
            let row = self.int_list()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(self.error("row of equal length"));
                }
            }
            rows.push(row);
            self.skip_ws();
            if self.eat(']') {
                return Ok(rows);
            }
            self.expect(',')?;
        }
    }
}

/// A parsed word over declared generator labels, normalized: adjacent equal
/// labels merged, zero exponents dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordExpr {
    pub terms: Vec<(String, BigInt)>,
}

impl WordExpr {
    pub fn new(terms: Vec<(String, BigInt)>) -> Self {
        let mut normalized: Vec<(String, BigInt)> = Vec::with_capacity(terms.len());
        for (label, exp) in terms {
            if exp.is_zero() {
                continue;
            }
            match normalized.last_mut() {
                Some((last, acc)) if *last == label => {
                    *acc += exp;
                    if acc.is_zero() {
                        normalized.pop();
                    }
                }
                _ => normalized.push((label, exp)),
            }
        }
        WordExpr { terms: normalized }
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "1");
        }
        for (i, (label, exp)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if exp == &BigInt::from(1) {
                write!(f, "{label}")?;
            } else {
                write!(f, "{label}^{exp}")?;
            }
        }
        Ok(())
    }
}

/// Parse a word against the declared generator labels.
pub fn parse_word(text: &str, generators: &[&str]) -> Result<WordExpr, WordError> {
    let mut cursor = Cursor::new(text);
    let mut terms = Vec::new();
    cursor.skip_ws();
    if cursor.at_end() {
        return Err(WordError::Syntax(cursor.error("at least one term")));
    }
    while !cursor.at_end() {
        let (line, col) = cursor.location();
        let label = cursor.label().map_err(WordError::Syntax)?;
        if !generators.contains(&label.as_str()) {
            return Err(WordError::UnknownGenerator { label, line, col });
        }
        let exp = if cursor.eat('^') {
            let (eline, ecol) = cursor.location();
            let negative = cursor.eat('-');
            let mut digits = String::new();
            while matches!(cursor.peek(), Some(c) if c.is_ascii_digit()) {
                digits.push(cursor.bump().unwrap());
            }
            if digits.is_empty() {
                return Err(WordError::MalformedExponent {
                    line: eline,
                    col: ecol,
                });
            }
            let value: BigInt = digits.parse().expect("digits parse");
            if negative {
                -value
            } else {
                value
            }
        } else {
            BigInt::from(1)
        };
        // terms are whitespace separated: the next char must be ws or end
        match cursor.peek() {
            None => {}
            Some(c) if c.is_whitespace() => {}
            Some(_) => {
                return Err(WordError::Syntax(
                    cursor.error("whitespace between terms or end of word"),
                ))
            }
        }
        terms.push((label, exp));
    }
    Ok(WordExpr::new(terms))
}

/// A semidirect pair literal `(x, t)` where `x` is an integer or a fraction
/// `p/q`. Returns `((p, q), t)` with `q = 1` for integers.
pub fn parse_pair(text: &str) -> Result<((BigInt, BigInt), BigInt), ParseError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.expect('(')?;
    let p = cursor.integer()?;
    cursor.skip_ws();
    let q = if cursor.eat('/') {
        cursor.integer()?
    } else {
        BigInt::from(1)
    };
    cursor.skip_ws();
    cursor.expect(',')?;
    let t = cursor.integer()?;
    cursor.skip_ws();
    cursor.expect(')')?;
    if !cursor.at_end() {
        return Err(cursor.error("end of input"));
    }
    Ok(((p, q), t))
}

/// A polycyclic element literal `([v1,...,vd], t)`.
pub fn parse_vector_pair(text: &str) -> Result<(Vec<BigInt>, BigInt), ParseError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.expect('(')?;
    let v = cursor.int_list()?;
    cursor.skip_ws();
    cursor.expect(',')?;
    let t = cursor.integer()?;
    cursor.skip_ws();
    cursor.expect(')')?;
    if !cursor.at_end() {
        return Err(cursor.error("end of input"));
    }
    Ok((v, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_parse_and_roundtrip() {
        let w = parse_word("a^2 b a^-2", &["a", "b"]).unwrap();
        assert_eq!(
            w.terms,
            vec![
                ("a".to_string(), BigInt::from(2)),
                ("b".to_string(), BigInt::from(1)),
                ("a".to_string(), BigInt::from(-2)),
            ]
        );
        assert_eq!(w.to_string(), "a^2 b a^-2");
        assert_eq!(parse_word(&w.to_string(), &["a", "b"]).unwrap(), w);
    }

    #[test]
    fn word_normalization() {
        let w = parse_word("a^2 a^-2 b", &["a", "b"]).unwrap();
        assert_eq!(w.terms.len(), 1);
        let v = parse_word("a a", &["a", "b"]).unwrap();
        assert_eq!(v.terms, vec![("a".to_string(), BigInt::from(2))]);
    }

    #[test]
    fn unknown_generator_is_located() {
        match parse_word("a c", &["a", "b"]).unwrap_err() {
            WordError::UnknownGenerator { label, line, col } => {
                assert_eq!(label, "c");
                assert_eq!((line, col), (1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_exponents() {
        assert!(matches!(
            parse_word("a^", &["a"]).unwrap_err(),
            WordError::MalformedExponent { .. }
        ));
        assert!(matches!(
            parse_word("a^x", &["a"]).unwrap_err(),
            WordError::MalformedExponent { .. }
        ));
        assert!(matches!(
            parse_word("a^2b", &["a", "b"]).unwrap_err(),
            WordError::Syntax(_)
        ));
    }

    #[test]
    fn pairs() {
        let ((p, q), t) = parse_pair("(3/2, 1)").unwrap();
        assert_eq!((p, q, t), (BigInt::from(3), BigInt::from(2), BigInt::from(1)));
        let ((p, q), t) = parse_pair("(-3, -1)").unwrap();
        assert_eq!((p, q, t), (BigInt::from(-3), BigInt::from(1), BigInt::from(-1)));
        assert!(parse_pair("(1,2").is_err());
        let (v, t) = parse_vector_pair("([1,0],2)").unwrap();
        assert_eq!(v, vec![BigInt::from(1), BigInt::from(0)]);
        assert_eq!(t, BigInt::from(2));
    }

    #[test]
    fn matrices_and_lists() {
        let mut c = Cursor::new("[[2,1],[1,1]]");
        let m = c.int_matrix().unwrap();
        assert_eq!(m.len(), 2);
        let mut c = Cursor::new("[]");
        assert!(c.int_list().unwrap().is_empty());
        let mut c = Cursor::new("[[1,2],[3]]");
        assert!(c.int_matrix().is_err());
    }

    #[test]
    fn errors_carry_position() {
        let mut c = Cursor::new("[1, x]");
        let err = c.int_list().unwrap_err();
        assert_eq!((err.line, err.col), (1, 5));
        assert!(err.to_string().contains("expected integer"));
    }
}
