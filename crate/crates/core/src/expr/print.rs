//! Canonical infix printer. The output re-parses to the same expression.

use std::fmt;

use num_traits::{One, Signed};

use super::{Expr, Node, Rational};

const ADD: u8 = 1;
const MUL: u8 = 2;
const POW: u8 = 3;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self, 0))
    }
}

fn wrap(s: String, own: u8, ctx: u8) -> String {
    if own < ctx {
        format!("({s})")
    } else {
        s
    }
}

fn render(e: &Expr, ctx: u8) -> String {
    match e.node() {
        Node::Num(q) => {
            let s = q.to_string();
            let own = if q.is_integer() && !q.is_negative() {
                POW + 1
            } else if q.is_integer() {
                ADD
            } else {
                MUL
            };
            wrap(s, own, ctx)
        }
        Node::Sym(s) => s.to_string(),
        Node::Func(func, a) => format!("{}({})", func.name(), render(a, 0)),
        Node::Add(cs) => {
            let mut out = String::new();
            for (i, t) in cs.iter().enumerate() {
                if i == 0 {
                    out.push_str(&render(t, ADD));
                } else if t.has_negative_coefficient() {
                    out.push_str(" - ");
                    out.push_str(&render(&-t, MUL));
                } else {
                    out.push_str(" + ");
                    out.push_str(&render(t, MUL));
                }
            }
            wrap(out, ADD, ctx)
        }
        Node::Pow(_, q) if q.is_negative() => render_product(e, ctx),
        Node::Pow(b, q) => {
            let exp = if q.is_integer() {
                q.to_string()
            } else {
                format!("({q})")
            };
            let base = match b.node() {
                Node::Num(v) if !(v.is_integer() && v.is_positive()) => format!("({v})"),
                _ => render(b, POW + 1),
            };
            wrap(format!("{base}^{exp}"), POW, ctx)
        }
        Node::Mul(_) => render_product(e, ctx),
    }
}

fn render_product(e: &Expr, ctx: u8) -> String {
    let (c, rest) = e.split_coefficient();
    let factors: Vec<Expr> = match rest.node() {
        Node::Mul(fs) => fs.clone(),
        _ => vec![rest.clone()],
    };
    let mut num = Vec::new();
    let mut den = Vec::new();
    let cn = Rational::from_integer(c.numer().abs());
    if !cn.is_one() {
        num.push(cn.to_string());
    }
    if !c.denom().is_one() {
        den.push(c.denom().to_string());
    }
    for f in &factors {
        match f.node() {
            Node::Pow(b, q) if q.is_negative() => {
                den.push(render(&Expr::pow(b.clone(), -q), MUL + 1));
            }
            _ => num.push(render(f, MUL)),
        }
    }
    let mut s = if num.is_empty() {
        "1".to_string()
    } else {
        num.join("*")
    };
    match den.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den.join("*"));
            s.push(')');
        }
    }
    if c.is_negative() {
        wrap(format!("-{s}"), ADD, ctx)
    } else {
        wrap(s, MUL, ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prints_fractions_with_division() {
        let m = Expr::sym("M");
        let r = Expr::sym("r");
        let e = Expr::one() - Expr::int(2) * m / r;
        assert_eq!(e.to_string(), "1 - 2*M/r");
    }

    #[test]
    fn prints_powers_and_functions() {
        let r = Expr::sym("r");
        let th = Expr::sym("theta");
        let e = r.powi(2) * th.sin().powi(2);
        assert_eq!(e.to_string(), "r^2*sin(theta)^2");
        assert_eq!(Expr::sym("x").sqrt().recip().to_string(), "1/x^(1/2)");
        assert_eq!(Expr::ratio(-1, 2).to_string(), "-1/2");
    }
}
