//! Parser for phase expressions such as `x1^2 + 3/4*x1*x2 - (x2 - 1)^3`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' integer)?
//! atom    := integer | 'x' index | '(' sum ')'
//! ```
//!
//! Division is only allowed by nonzero constants. Positions in errors are
//! 1-based line and column of the offending token.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::RatPoly;

const MAX_EXPONENT: u32 = 64;
const MAX_DEGREE: u32 = 256;
const MAX_NESTING: usize = 200;
const MAX_TERMS: usize = 20_000;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    col: usize,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Syntax { line: pos.line, col: pos.col, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == 'x' {
            let is_var = c == 'x';
            if is_var {
                chars.next();
                col += 1;
            }
            let mut digits = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                digits.push(d);
                chars.next();
                col += 1;
            }
            if is_var {
                let idx: usize = digits
                    .parse()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| syntax(pos, "expected a variable x1, x2, …"))?;
                out.push((Tok::Var(idx - 1), pos));
            } else {
                out.push((Tok::Int(digits.parse().expect("ascii digits")), pos));
            }
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => return Err(syntax(pos, format!("unexpected character {c:?}"))),
        };
        chars.next();
        col += 1;
        out.push((tok, pos));
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    nvars: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    /// Product with limits on degree and size, so hostile input fails
    /// quickly instead of exhausting memory.
    fn mul(&self, a: &RatPoly, b: &RatPoly, pos: Pos) -> Result<RatPoly> {
        if a.degree().unwrap_or(0) + b.degree().unwrap_or(0) > MAX_DEGREE {
            return Err(syntax(pos, format!("degree exceeds {MAX_DEGREE}")));
        }
        if a.len().saturating_mul(b.len()) > 50 * MAX_TERMS {
            return Err(syntax(pos, "expansion too large"));
        }
        let p = a.mul(b);
        if p.len() > MAX_TERMS {
            return Err(syntax(pos, "expansion too large"));
        }
        Ok(p)
    }

    fn sum(&mut self) -> Result<RatPoly> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.product()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<RatPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let (_, pos) = self.bump();
                    let rhs = self.unary()?;
                    acc = self.mul(&acc, &rhs, pos)?;
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    let rhs = self.unary()?;
                    let c = rhs.as_constant().ok_or(Error::NonPolynomial {
                        line: pos.line,
                        col: pos.col,
                        msg: "division by an expression in the variables".into(),
                    })?;
                    if c.is_zero() {
                        return Err(syntax(pos, "division by zero"));
                    }
                    acc = acc.scale(&c.recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatPoly> {
        match self.peek() {
            Tok::Minus | Tok::Plus => {
                let (t, pos) = self.bump();
                self.enter(pos)?;
                let inner = self.unary()?;
                self.depth -= 1;
                Ok(if t == Tok::Minus { inner.neg() } else { inner })
            }
            _ => self.power(),
        }
    }

    fn enter(&mut self, pos: Pos) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(syntax(pos, "expression nested too deeply"));
        }
        Ok(())
    }

    fn power(&mut self) -> Result<RatPoly> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, caret) = self.bump();
        let (t, pos) = self.bump();
        let k = match t {
            Tok::Int(k) => k,
            _ => return Err(syntax(pos, "expected a nonnegative integer exponent")),
        };
        let k = u32::try_from(&k)
            .ok()
            .filter(|&k| k <= MAX_EXPONENT)
            .ok_or_else(|| syntax(pos, format!("exponent exceeds {MAX_EXPONENT}")))?;
        let mut out = RatPoly::constant(self.nvars, BigRational::from_integer(1.into()));
        for _ in 0..k {
            out = self.mul(&out, &base, caret)?;
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<RatPoly> {
        let (t, pos) = self.bump();
        match t {
            Tok::Int(n) => Ok(RatPoly::constant(self.nvars, BigRational::from_integer(n))),
            Tok::Var(i) if i < self.nvars => Ok(RatPoly::var(self.nvars, i)),
            Tok::Var(i) => Err(syntax(pos, format!("x{} is out of range for {} variables", i + 1, self.nvars))),
            Tok::LParen => {
                self.enter(pos)?;
                let inner = self.sum()?;
                self.depth -= 1;
                match self.bump() {
                    (Tok::RParen, _) => Ok(inner),
                    (_, p) => Err(syntax(p, "expected ')'")),
                }
            }
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected token {}", describe(&other)))),
        }
    }
}

fn describe(t: &Tok) -> &'static str {
    match t {
        Tok::Int(_) => "number",
        Tok::Var(_) => "variable",
        Tok::Plus => "'+'",
        Tok::Minus => "'-'",
        Tok::Star => "'*'",
        Tok::Slash => "'/'",
        Tok::Caret => "'^'",
        Tok::LParen => "'('",
        Tok::RParen => "')'",
        Tok::End => "end of input",
    }
}

/// Parses `src` as a polynomial in `nvars` variables; with `None` the
/// number of variables is the largest index that occurs (at least 1).
pub fn parse_phase(src: &str, nvars: Option<usize>) -> Result<RatPoly> {
    let toks = lex(src)?;
    let n = nvars.unwrap_or_else(|| {
        toks.iter()
            .filter_map(|(t, _)| if let Tok::Var(i) = t { Some(i + 1) } else { None })
            .max()
            .unwrap_or(1)
    });
    let mut parser = Parser { toks, at: 0, nvars: n, depth: 0 };
    let out = parser.sum()?;
    match parser.bump() {
        (Tok::End, _) => Ok(out),
        (t, pos) => Err(syntax(pos, format!("unexpected token {}", describe(&t)))),
    }
}

/// Parses a rational constant such as `-3/4`.
pub fn parse_rational(src: &str) -> Result<BigRational> {
    parse_phase(src, Some(0))?
        .as_constant()
        .ok_or_else(|| Error::Invalid(format!("{src:?} is not a constant")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_standard_phases() {
        assert_eq!(parse_phase("x1^2 + x1^3", None).unwrap().to_string(), "x1^2 + x1^3");
        let q = parse_phase("x2^2 + x1*x2 + x1^2", None).unwrap();
        assert_eq!(q.to_string(), "x1^2 + x1*x2 + x2^2");
        assert_eq!(parse_phase("(x1 - 1)^2 - x1^2", None).unwrap().to_string(), "1 - 2*x1");
        assert_eq!(parse_phase("3/4*x1 - -x1/2", None).unwrap().to_string(), "5/4*x1");
        assert_eq!(parse_rational("-6/8").unwrap().to_string(), "-3/4");
    }

    #[test]
    fn reports_positions() {
        assert!(matches!(parse_phase("1/x1", None), Err(Error::NonPolynomial { line: 1, col: 3, .. })));
        assert!(matches!(parse_phase("x1 +\n  * 2", None), Err(Error::Syntax { line: 2, col: 3, .. })));
        assert!(matches!(parse_phase("x1 + (2", None), Err(Error::Syntax { line: 1, col: 8, .. })));
        assert!(matches!(parse_phase("x0", None), Err(Error::Syntax { col: 1, .. })));
        assert!(matches!(parse_phase("x3", Some(2)), Err(Error::Syntax { .. })));
        assert!(matches!(parse_phase("x1/0", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_phase("x1^99", None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_phase(&"(".repeat(5000), None), Err(Error::Syntax { .. })));
        assert!(matches!(parse_phase("(x1+x2+x3+x4+x5+x6+x7+x8+1)^40", None), Err(Error::Syntax { .. })));
    }

    #[test]
    fn printing_round_trips() {
        for src in ["x1^3 - 3*x1", "1/2*x1*x2 - 7/3 + x2^5", "-(x1 + x2)^3"] {
            let p = parse_phase(src, None).unwrap();
            assert_eq!(parse_phase(&p.to_string(), Some(p.nvars())).unwrap(), p);
        }
    }
}
