use std::collections::HashMap;

use num_traits::One;

use super::{symbol_bit, Expr, Func, Node};

impl Expr {
    /// Exact partial derivative with respect to `var`; every other symbol is
    /// held constant.
    pub fn diff(&self, var: &str) -> Expr {
        let mut memo = HashMap::new();
        diff_rec(self, var, symbol_bit(var), &mut memo)
    }
}

fn diff_rec(e: &Expr, var: &str, bit: u64, memo: &mut HashMap<usize, Expr>) -> Expr {
    if e.mask() & bit == 0 {
        return Expr::zero();
    }
    if let Some(d) = memo.get(&e.ptr()) {
        return d.clone();
    }
    let d = match e.node() {
        Node::Num(_) => Expr::zero(),
        Node::Sym(s) => {
            if &**s == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Add(cs) => Expr::add_all(cs.iter().map(|c| diff_rec(c, var, bit, memo))),
        Node::Mul(cs) => {
            let mut terms = Vec::new();
            for (i, c) in cs.iter().enumerate() {
                let dc = diff_rec(c, var, bit, memo);
                if dc.is_zero() {
                    continue;
                }
                let mut fs: Vec<Expr> = cs.clone();
                fs[i] = dc;
                terms.push(Expr::mul_all(fs));
            }
            Expr::add_all(terms)
        }
        Node::Pow(b, q) => {
            let db = diff_rec(b, var, bit, memo);
            Expr::mul_all([
                Expr::num(q.clone()),
                Expr::pow(b.clone(), q - super::Rational::one()),
                db,
            ])
        }
        Node::Func(f, a) => {
            let da = diff_rec(a, var, bit, memo);
            match f {
                Func::Exp => e * &da,
                Func::Log => da * a.clone().recip(),
                Func::Sin => a.clone().cos() * da,
                Func::Cos => -(a.clone().sin() * da),
            }
        }
    };
    memo.insert(e.ptr(), d.clone());
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rule() {
        assert!(Expr::sym("c").diff("x").is_zero());
    }

    #[test]
    fn power_rule() {
        let x = Expr::sym("x");
        assert_eq!(x.clone().powi(2).diff("x"), x * 2);
    }

    #[test]
    fn trig_chain_rule() {
        let x = Expr::sym("x");
        let e = (x.clone() * 3).sin();
        assert_eq!(e.diff("x"), (x * 3).cos() * 3);
    }

    #[test]
    fn log_derivative() {
        let x = Expr::sym("x");
        assert_eq!(x.clone().log().diff("x"), x.recip());
    }
}
