//! Canonicalizing constructors for sums, products, powers and functions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Func, Node, Rational};

/// Exact numeric powers whose result would exceed this many bits stay symbolic.
const MAX_POW_BITS: u64 = 1 << 14;

impl Expr {
    /// Canonical n-ary sum.
    pub fn add_all<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut coeffs: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        while let Some(t) = stack.pop() {
            match t.node() {
                Node::Num(q) => constant += q,
                Node::Add(cs) => stack.extend(cs.iter().cloned()),
                _ => {
                    let (c, rest) = t.split_coefficient();
                    *coeffs.entry(rest).or_insert_with(Rational::zero) += c;
                }
            }
        }
        let mut out = Vec::with_capacity(coeffs.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::num(constant));
        }
        for (rest, c) in coeffs {
            if !c.is_zero() {
                out.push(Expr::scaled(c, rest));
            }
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => {
                out.sort();
                Expr::raw(Node::Add(out))
            }
        }
    }

    /// Canonical n-ary product.
    pub fn mul_all<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut coeff = Rational::one();
        let mut exps: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Num(q) => {
                    if q.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= q;
                }
                Node::Mul(cs) => stack.extend(cs.iter().cloned()),
                Node::Pow(b, q) => *exps.entry(b.clone()).or_insert_with(Rational::zero) += q,
                _ => *exps.entry(f).or_insert_with(Rational::zero) += Rational::one(),
            }
        }
        let mut out = Vec::with_capacity(exps.len() + 1);
        let mut again = false;
        for (base, q) in exps {
            if q.is_zero() {
                continue;
            }
            let p = Expr::pow(base, q);
            match p.node() {
                Node::Num(c) => {
                    if c.is_zero() {
                        return Expr::zero();
                    }
                    coeff *= c;
                }
                Node::Mul(_) => {
                    again = true;
                    out.push(p);
                }
                _ => out.push(p),
            }
        }
        if again {
            out.push(Expr::num(coeff));
            return Expr::mul_all(out);
        }
        if out.is_empty() {
            return Expr::num(coeff);
        }
        if out.len() == 1 {
            if coeff.is_one() {
                return out.pop().unwrap();
            }
            if let Node::Add(cs) = out[0].node() {
                let c = Expr::num(coeff);
                return Expr::add_all(cs.iter().map(|t| Expr::mul_all([c.clone(), t.clone()])));
            }
        }
        out.sort();
        if !coeff.is_one() {
            out.insert(0, Expr::num(coeff));
        }
        Expr::raw(Node::Mul(out))
    }

    /// Canonical power with a rational exponent.
    pub fn pow(base: Expr, q: Rational) -> Expr {
        if q.is_zero() {
            return Expr::one();
        }
        if q.is_one() {
            return base;
        }
        match base.node() {
            Node::Num(v) => numeric_pow(v, &q).unwrap_or_else(|| Expr::raw(Node::Pow(base, q))),
            Node::Pow(inner, r) => {
                if q.is_integer() || !r.is_integer() {
                    Expr::pow(inner.clone(), r * &q)
                } else {
                    Expr::raw(Node::Pow(base, q))
                }
            }
            Node::Mul(cs) => {
                if q.is_integer() {
                    Expr::mul_all(cs.iter().map(|c| Expr::pow(c.clone(), q.clone())))
                } else if let Some(c) = cs[0].as_rational().filter(|c| c.is_positive()) {
                    let rest = Expr::mul_all(cs[1..].iter().cloned());
                    let head = Expr::pow(Expr::num(c.clone()), q.clone());
                    let tail = Expr::raw(Node::Pow(rest, q));
                    Expr::mul_all([head, tail])
                } else {
                    Expr::raw(Node::Pow(base, q))
                }
            }
            Node::Func(Func::Exp, a) => Expr::func(Func::Exp, Expr::mul_all([Expr::num(q), a.clone()])),
            _ => Expr::raw(Node::Pow(base, q)),
        }
    }

    /// Canonical elementary-function application.
    pub fn func(f: Func, arg: Expr) -> Expr {
        match f {
            Func::Exp if arg.is_zero() => Expr::one(),
            Func::Log if arg.is_one() => Expr::zero(),
            Func::Log => match arg.node() {
                Node::Func(Func::Exp, inner) => inner.clone(),
                _ => Expr::raw(Node::Func(f, arg)),
            },
            Func::Sin if arg.is_zero() => Expr::zero(),
            Func::Cos if arg.is_zero() => Expr::one(),
            Func::Sin | Func::Cos if arg.has_negative_coefficient() => {
                let flipped = Expr::func(f, -arg);
                if f == Func::Sin {
                    -flipped
                } else {
                    flipped
                }
            }
            _ => Expr::raw(Node::Func(f, arg)),
        }
    }

    /// Split `c * rest` with `c` the leading numeric factor.
    pub(crate) fn split_coefficient(&self) -> (Rational, Expr) {
        if let Node::Mul(cs) = self.node() {
            if let Some(c) = cs[0].as_rational() {
                let rest = if cs.len() == 2 {
                    cs[1].clone()
                } else {
                    Expr::raw(Node::Mul(cs[1..].to_vec()))
                };
                return (c.clone(), rest);
            }
        }
        (Rational::one(), self.clone())
    }

    fn scaled(c: Rational, rest: Expr) -> Expr {
        if c.is_one() {
            return rest;
        }
        let mut cs = vec![Expr::num(c)];
        match rest.node() {
            Node::Mul(fs) => cs.extend(fs.iter().cloned()),
            _ => cs.push(rest),
        }
        Expr::raw(Node::Mul(cs))
    }

    pub(crate) fn has_negative_coefficient(&self) -> bool {
        match self.node() {
            Node::Num(q) => q.is_negative(),
            Node::Mul(cs) => cs[0].as_rational().is_some_and(|c| c.is_negative()),
            _ => false,
        }
    }
}

fn bits(n: &BigInt) -> u64 {
    n.bits().max(1)
}

fn int_pow(v: &Rational, e: &BigInt) -> Option<Rational> {
    let e = e.to_i64()?;
    let size = bits(v.numer()).max(bits(v.denom()));
    if (e.unsigned_abs()).saturating_mul(size) > MAX_POW_BITS {
        return None;
    }
    let e32 = i32::try_from(e).ok()?;
    Some(num_traits::Pow::pow(v, e32))
}

fn exact_root(n: &BigInt, d: u32) -> Option<BigInt> {
    let r = n.nth_root(d);
    (num_traits::Pow::pow(&r, d) == *n).then_some(r)
}

fn numeric_pow(v: &Rational, q: &Rational) -> Option<Expr> {
    if v.is_zero() {
        return if q.is_positive() { Some(Expr::zero()) } else { None };
    }
    if v.is_one() {
        return Some(Expr::one());
    }
    if q.is_integer() {
        return int_pow(v, q.numer()).map(Expr::num);
    }
    if v.is_negative() {
        return None;
    }
    let d = q.denom().to_u32()?;
    let rn = exact_root(v.numer(), d)?;
    let rd = exact_root(v.denom(), d)?;
    int_pow(&Rational::new(rn, rd), q.numer()).map(Expr::num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn huge_integer_power_stays_symbolic() {
        let e = Expr::pow(Expr::int(2), Rational::from_integer(BigInt::from(99_999_999)));
        assert!(matches!(e.node(), Node::Pow(..)));
        let small = Expr::pow(Expr::int(2), Rational::from_integer(BigInt::from(9)));
        assert_eq!(small, Expr::int(512));
    }

    #[test]
    fn zero_to_negative_power_is_kept_as_pole() {
        let e = Expr::zero().recip();
        assert!(matches!(e.node(), Node::Pow(..)));
    }

    #[test]
    fn sine_is_odd_cosine_is_even() {
        let x = Expr::sym("x");
        assert_eq!((-x.clone()).sin(), -(x.clone().sin()));
        assert_eq!((-x.clone()).cos(), x.cos());
    }

    #[test]
    fn exp_power_folds_into_argument() {
        let x = Expr::sym("x");
        assert_eq!(x.clone().exp().powi(2), (x * 2).exp());
    }

    #[test]
    fn positive_coefficient_splits_out_of_root() {
        let x = Expr::sym("x");
        let e = (x.clone() * 4).sqrt();
        assert_eq!(e, x.sqrt() * 2);
    }
}
