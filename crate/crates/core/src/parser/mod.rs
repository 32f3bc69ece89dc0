//! Infix expression grammar and the model manifest format.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := integer | ident | ident '(' sum ')' | '(' sum ')'
//! ```

mod manifest;

use std::fmt;

use num_bigint::BigInt;

use crate::expr::{Expr, Func};

pub use manifest::{parse_manifest, ManifestError, ModelSpec};

/// Deepest nesting of parentheses, calls, signs and powers accepted.
pub const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    /// 1-based line number when parsing a manifest.
    pub line: Option<usize>,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}, ")?;
        }
        write!(f, "byte {}: expected ", self.offset)?;
        match self.expected.len() {
            0 => f.write_str("nothing")?,
            1 => f.write_str(&self.expected[0])?,
            _ => write!(f, "one of {}", self.expected.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Op(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n: BigInt = text[start..i].parse().expect("digits");
            out.push((start, Tok::Int(n)));
        } else if b.is_ascii_alphabetic() || b == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&b) {
            out.push((i, Tok::Op(b as char)));
            i += 1;
        } else {
            let c = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                line: None,
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
                found: format!("character {c:?}"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            line: None,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.offset(),
                line: None,
                expected: vec![format!("nesting depth at most {MAX_DEPTH}")],
                found: "deeper nesting".into(),
            });
        }
        Ok(())
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Op(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.product()?];
        loop {
            if self.eat('+') {
                terms.push(self.product()?);
            } else if self.eat('-') {
                terms.push(-self.product()?);
            } else {
                return Ok(Expr::add_all(terms));
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                factors.push(self.unary()?.recip());
            } else {
                return Ok(Expr::mul_all(factors));
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            self.enter()?;
            let e = -self.unary()?;
            self.depth -= 1;
            return Ok(e);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.enter()?;
        let exp = self.unary()?;
        self.depth -= 1;
        Ok(power(base, exp))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(Expr::num(n.into()))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if *self.peek() != Tok::Op('(') {
                    return Ok(Expr::sym(&name));
                }
                let f = match name.as_str() {
                    "sqrt" => None,
                    other => match Func::from_name(other) {
                        Some(f) => Some(f),
                        None => {
                            self.pos -= 1;
                            return Err(self.error(&["exp", "log", "sin", "cos", "sqrt"]));
                        }
                    },
                };
                let arg = self.group()?;
                Ok(match f {
                    Some(f) => Expr::func(f, arg),
                    None => arg.sqrt(),
                })
            }
            Tok::Op('(') => self.group(),
            _ => Err(self.error(OPERAND)),
        }
    }

    fn group(&mut self) -> Result<Expr, ParseError> {
        self.pos += 1;
        self.enter()?;
        let e = self.sum()?;
        if !self.eat(')') {
            return Err(self.error(&["`)`", "operator"]));
        }
        self.depth -= 1;
        Ok(e)
    }
}

/// `base^exp`, falling back to `exp(exp*log(base))` for non-rational
/// exponents.
fn power(base: Expr, exp: Expr) -> Expr {
    match exp.as_rational() {
        Some(q) => Expr::pow(base, q.clone()),
        None => (exp * base.log()).exp(),
    }
}

/// Parse an infix expression into canonical form.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, depth: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Bindings, Node, Value};

    #[test]
    fn negated_schwarzschild_component() {
        let e = parse_expr("-(1 - 2*M/r)").unwrap();
        let expected = Expr::add_all([
            Expr::int(-1),
            Expr::mul_all([Expr::int(2), Expr::sym("M"), Expr::sym("r").recip()]),
        ]);
        assert_eq!(e, expected);
    }

    #[test]
    fn power_binds_tighter_than_product() {
        let e = parse_expr("r^2*sin(theta)^2").unwrap();
        let expected = Expr::sym("r").powi(2) * Expr::sym("theta").sin().powi(2);
        assert_eq!(e, expected);
        assert!(matches!(e.node(), Node::Mul(cs) if cs.len() == 2));
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse_expr("2^3^2").unwrap();
        assert_eq!(e.eval(&Bindings::new()).unwrap(), Value::from(512));
    }

    #[test]
    fn unary_minus_is_looser_than_power() {
        assert_eq!(parse_expr("-x^2").unwrap(), -(Expr::sym("x").powi(2)));
        assert_eq!(parse_expr("2^-1").unwrap(), Expr::ratio(1, 2));
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_expr("3/6").unwrap(), Expr::ratio(1, 2));
    }

    #[test]
    fn symbolic_exponent_goes_through_exp_log() {
        let e = parse_expr("x^y").unwrap();
        let x = Expr::sym("x");
        assert_eq!(e, (Expr::sym("y") * x.log()).exp());
    }

    #[test]
    fn errors_carry_offsets() {
        let e = parse_expr("1 + * 2").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.iter().any(|s| s == "number"));
        let e = parse_expr("(x").unwrap_err();
        assert_eq!(e.offset, 2);
        let e = parse_expr("foo(x)").unwrap_err();
        assert_eq!(e.offset, 0);
        let e = parse_expr("x $").unwrap_err();
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn deep_nesting_is_rejected_not_fatal() {
        let text = format!("{}x{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_expr(&text).is_err());
        let text = "-".repeat(5000) + "x";
        assert!(parse_expr(&text).is_err());
        let text = vec!["x"; 3000].join("^");
        assert!(parse_expr(&text).is_err());
    }

    #[test]
    fn printer_round_trip() {
        for s in [
            "-(1 - 2*M/r)",
            "r^2*sin(theta)^2",
            "1/sqrt(x)",
            "exp(-x^2/2)*cos(3*y)",
            "(x + 1)^(2/3) - 5/7*y",
            "log(1 - 2*M/r)/(r^2*x)",
            "2^(1/2)",
        ] {
            let e = parse_expr(s).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(again, e, "{s} printed as {e}");
        }
    }
}
