//! Exact and floating evaluation.
//!
//! The floating path carries a magnitude estimate alongside every value: the
//! value the subtree would have if no cancellation happened. Comparisons use
//! it to turn an absolute residual into a relative one.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Expr, ExprError, Func, Node, Rational, PI};

const MAX_EXACT_BITS: u64 = 1 << 15;

/// A bound or computed scalar value.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Float(_) => None,
        }
    }
}

impl From<Rational> for Value {
    fn from(q: Rational) -> Value {
        Value::Exact(q)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Value {
        Value::Exact(Rational::from_integer(BigInt::from(i)))
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Value {
        Value::Float(x)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(q) => write!(f, "{q}"),
            Value::Float(x) => write!(f, "{x:e}"),
        }
    }
}

/// Symbol → value assignment.
pub type Bindings = BTreeMap<String, Value>;

impl Expr {
    /// Evaluate exactly when every input is rational and no irrational
    /// operation is hit; otherwise in double precision.
    pub fn eval(&self, bindings: &Bindings) -> Result<Value, ExprError> {
        let mut ev = Evaluator::new(bindings);
        ev.value(self)
    }

    pub fn eval_f64(&self, bindings: &Bindings) -> Result<f64, ExprError> {
        Evaluator::new(bindings).float(self).map(|(v, _)| v)
    }
}

fn describe(e: &Expr) -> String {
    let s = e.to_string();
    if s.len() > 96 {
        format!("{}…", &s[..s.char_indices().nth(95).map_or(s.len(), |(i, _)| i)])
    } else {
        s
    }
}

fn too_big(q: &Rational) -> bool {
    q.numer().bits() > MAX_EXACT_BITS || q.denom().bits() > MAX_EXACT_BITS
}

/// Evaluates many expressions against one set of bindings, sharing work
/// across common subtrees.
pub struct Evaluator<'a> {
    bindings: &'a Bindings,
    /// Values closer than this to a pole or a branch point are domain errors.
    pub pole_margin: f64,
    exact_cache: HashMap<usize, Option<Rational>>,
    float_cache: HashMap<usize, (f64, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(bindings: &'a Bindings) -> Evaluator<'a> {
        Evaluator {
            bindings,
            pole_margin: 0.0,
            exact_cache: HashMap::new(),
            float_cache: HashMap::new(),
        }
    }

    pub fn with_margin(bindings: &'a Bindings, margin: f64) -> Evaluator<'a> {
        Evaluator { pole_margin: margin, ..Evaluator::new(bindings) }
    }

    pub fn value(&mut self, e: &Expr) -> Result<Value, ExprError> {
        if let Some(q) = self.exact(e)? {
            return Ok(Value::Exact(q));
        }
        self.float(e).map(|(v, _)| Value::Float(v))
    }

    /// Exact rational value, or `None` when the result is not (cheaply)
    /// representable as a rational.
    pub fn exact(&mut self, e: &Expr) -> Result<Option<Rational>, ExprError> {
        if e.may_be_irrational() {
            return Ok(None);
        }
        if let Some(v) = self.exact_cache.get(&e.ptr()) {
            return Ok(v.clone());
        }
        let v = match e.node() {
            Node::Num(q) => Some(q.clone()),
            Node::Sym(s) => match self.bindings.get(&**s) {
                Some(Value::Exact(q)) => Some(q.clone()),
                Some(Value::Float(_)) => None,
                None => return Err(ExprError::UnboundSymbol(s.to_string())),
            },
            Node::Add(cs) => {
                let mut acc = Rational::zero();
                let mut ok = true;
                for c in cs {
                    match self.exact(c)? {
                        Some(q) => acc += q,
                        None => ok = false,
                    }
                }
                (ok && !too_big(&acc)).then_some(acc)
            }
            Node::Mul(cs) => {
                let mut acc = Rational::from_integer(1.into());
                let mut ok = true;
                for c in cs {
                    match self.exact(c)? {
                        Some(q) => acc *= q,
                        None => ok = false,
                    }
                }
                (ok && !too_big(&acc)).then_some(acc)
            }
            Node::Pow(b, q) => match self.exact(b)? {
                None => None,
                Some(v) => {
                    if v.is_zero() && q.is_negative() {
                        return Err(ExprError::DomainError(describe(e)));
                    }
                    if !q.is_integer() && v.is_negative() {
                        return Err(ExprError::DomainError(describe(e)));
                    }
                    exact_pow(&v, q)
                }
            },
            Node::Func(..) => None,
        };
        self.exact_cache.insert(e.ptr(), v.clone());
        Ok(v)
    }

    /// Double-precision value with its magnitude estimate.
    pub fn float(&mut self, e: &Expr) -> Result<(f64, f64), ExprError> {
        if let Some(v) = self.float_cache.get(&e.ptr()) {
            return Ok(*v);
        }
        let r = match e.node() {
            Node::Num(q) => {
                let v = q.to_f64().unwrap_or(f64::NAN);
                (v, v.abs())
            }
            Node::Sym(s) => {
                let v = match self.bindings.get(&**s) {
                    Some(v) => v.to_f64(),
                    None if &**s == PI => std::f64::consts::PI,
                    None => return Err(ExprError::UnboundSymbol(s.to_string())),
                };
                (v, v.abs())
            }
            Node::Add(cs) => {
                let (mut v, mut m) = (0.0, 0.0);
                for c in cs {
                    let (cv, cm) = self.float(c)?;
                    v += cv;
                    m += cm;
                }
                (v, m)
            }
            Node::Mul(cs) => {
                let (mut v, mut m) = (1.0, 1.0);
                for c in cs {
                    let (cv, cm) = self.float(c)?;
                    v *= cv;
                    m *= cm;
                }
                (v, m)
            }
            Node::Pow(b, q) => {
                let (bv, bm) = self.float(b)?;
                let qf = q.to_f64().unwrap_or(f64::NAN);
                let neg = q.is_negative();
                if neg && bv.abs() <= self.pole_margin || bv == 0.0 && neg {
                    return Err(ExprError::DomainError(describe(e)));
                }
                let v = if q.is_integer() {
                    match q.to_i32() {
                        Some(n) => bv.powi(n),
                        None => bv.powf(qf),
                    }
                } else {
                    if bv < 0.0 {
                        return Err(ExprError::DomainError(describe(e)));
                    }
                    if bv < self.pole_margin {
                        return Err(ExprError::DomainError(describe(e)));
                    }
                    bv.powf(qf)
                };
                let m = if bv == 0.0 {
                    bm.powf(qf)
                } else {
                    let cond = (bm / bv.abs()).max(1.0);
                    v.abs() * cond.powf(qf.abs().max(1.0))
                };
                (v, m)
            }
            Node::Func(f, a) => {
                let (av, am) = self.float(a)?;
                match f {
                    Func::Exp => {
                        let v = av.exp();
                        (v, v.abs() * am.max(1.0))
                    }
                    Func::Log => {
                        if av <= self.pole_margin || av <= 0.0 {
                            return Err(ExprError::DomainError(describe(e)));
                        }
                        let v = av.ln();
                        (v, v.abs() + am / av)
                    }
                    Func::Sin => {
                        let v = av.sin();
                        (v, v.abs() + am)
                    }
                    Func::Cos => {
                        let v = av.cos();
                        (v, v.abs() + am)
                    }
                }
            }
        };
        if !r.0.is_finite() {
            return Err(ExprError::DomainError(describe(e)));
        }
        self.float_cache.insert(e.ptr(), r);
        Ok(r)
    }
}

fn exact_pow(v: &Rational, q: &Rational) -> Option<Rational> {
    let size = v.numer().bits().max(v.denom().bits()).max(1);
    let n = q.numer().to_i32()?;
    if u64::from(n.unsigned_abs()).saturating_mul(size) > MAX_EXACT_BITS {
        return None;
    }
    if q.is_integer() {
        return Some(num_traits::Pow::pow(v, n));
    }
    let d = q.denom().to_u32()?;
    let rn = v.numer().nth_root(d);
    let rd = v.denom().nth_root(d);
    if num_traits::Pow::pow(&rn, d) != *v.numer() || num_traits::Pow::pow(&rd, d) != *v.denom() {
        return None;
    }
    Some(num_traits::Pow::pow(&Rational::new(rn, rd), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, i64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect()
    }

    #[test]
    fn rational_division_is_exact() {
        let e = Expr::sym("x") / Expr::sym("y");
        let v = e.eval(&bind(&[("x", 1), ("y", 3)])).unwrap();
        assert_eq!(v, Value::Exact(Rational::new(1.into(), 3.into())));
    }

    #[test]
    fn pole_is_a_domain_error() {
        let e = Expr::sym("x").recip();
        assert!(matches!(e.eval(&bind(&[("x", 0)])), Err(ExprError::DomainError(_))));
    }

    #[test]
    fn direct_substitution() {
        let e = Expr::one() - Expr::int(2) * Expr::sym("M") / Expr::sym("r");
        let v = e.eval(&bind(&[("M", 1), ("r", 4)])).unwrap();
        assert_eq!(v, Value::Exact(Rational::new(1.into(), 2.into())));
    }

    #[test]
    fn unbound_symbol_is_named() {
        let e = Expr::sym("x") + Expr::sym("q");
        match e.eval(&bind(&[("x", 1)])) {
            Err(ExprError::UnboundSymbol(s)) => assert_eq!(s, "q"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn log_of_negative_is_a_domain_error() {
        let e = Expr::sym("x").log();
        assert!(matches!(e.eval(&bind(&[("x", -2)])), Err(ExprError::DomainError(_))));
    }

    #[test]
    fn irrational_functions_fall_back_to_float() {
        let e = Expr::sym("x").sin();
        match e.eval(&bind(&[("x", 1)])).unwrap() {
            Value::Float(v) => assert!((v - 1f64.sin()).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pi_is_builtin() {
        let v = Expr::pi().cos().eval_f64(&Bindings::new()).unwrap();
        assert!((v + 1.0).abs() < 1e-15);
    }
}
