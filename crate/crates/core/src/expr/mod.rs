//! Exact symbolic scalar expressions.
//!
//! An [`Expr`] is an immutable, reference-counted tree that is always kept in
//! canonical form: every constructor goes through the simplifying builders in
//! [`canon`], so two expressions that differ only by reordering, flattening or
//! numeric folding compare equal structurally.
//!
//! Symbols carry no kind of their own. Whether a symbol is a coordinate or a
//! constant is decided by the chart an expression lives on: differentiation
//! with respect to a coordinate treats every other symbol as constant.

mod canon;
mod diff;
mod equiv;
mod eval;
mod print;

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub use equiv::{Comparison, Failure, Sampler, DEFAULT_POINTS, DEFAULT_TOLERANCE};
pub use eval::{Bindings, Evaluator, Value};

/// Exact rational number used for literals and exponents.
pub type Rational = num_rational::BigRational;

/// Name of the builtin symbol that evaluates to π when left unbound.
pub const PI: &str = "pi";

/// Errors raised while evaluating or comparing expressions.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain error in `{0}`")]
    DomainError(String),
    #[error("could not find {wanted} pole-free sample points after {attempts} attempts")]
    SamplingExhausted { wanted: usize, attempts: usize },
}

/// Elementary functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }
}

/// Node kinds of an expression tree.
#[derive(Debug)]
pub enum Node {
    Num(Rational),
    Sym(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rational),
    Func(Func, Expr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
    /// One bit per symbol (hashed into 64 buckets); a zero bit proves absence.
    mask: u64,
    /// True when the subtree may evaluate to an irrational number.
    irrational: bool,
}

/// Canonical symbolic expression.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

fn hash_bigint(h: u64, n: &BigInt) -> u64 {
    let (sign, bytes) = n.to_bytes_le();
    let h = fnv(h, &[sign as u8]);
    fnv(h, &bytes)
}

fn hash_rational(h: u64, q: &Rational) -> u64 {
    hash_bigint(hash_bigint(h, q.numer()), q.denom())
}

pub(crate) fn symbol_bit(name: &str) -> u64 {
    1u64 << (fnv(FNV_OFFSET, name.as_bytes()) % 64)
}

impl Expr {
    fn raw(node: Node) -> Expr {
        let (hash, mask, irrational) = match &node {
            Node::Num(q) => (hash_rational(fnv(FNV_OFFSET, b"n"), q), 0, false),
            Node::Sym(s) => (
                fnv(fnv(FNV_OFFSET, b"s"), s.as_bytes()),
                symbol_bit(s),
                &**s == PI,
            ),
            Node::Add(cs) | Node::Mul(cs) => {
                let tag: &[u8] = if matches!(node, Node::Add(_)) { b"a" } else { b"m" };
                let mut h = fnv(FNV_OFFSET, tag);
                let mut mask = 0;
                let mut irr = false;
                for c in cs {
                    h = fnv(h, &c.0.hash.to_le_bytes());
                    mask |= c.0.mask;
                    irr |= c.0.irrational;
                }
                (h, mask, irr)
            }
            Node::Pow(b, q) => {
                let h = hash_rational(fnv(fnv(FNV_OFFSET, b"p"), &b.0.hash.to_le_bytes()), q);
                (h, b.0.mask, b.0.irrational || !q.is_integer())
            }
            Node::Func(f, a) => {
                let h = fnv(fnv(FNV_OFFSET, f.name().as_bytes()), &a.0.hash.to_le_bytes());
                (h, a.0.mask, true)
            }
        };
        Expr(Arc::new(Inner { node, hash, mask, irrational }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub(crate) fn mask(&self) -> u64 {
        self.0.mask
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// True when exact rational evaluation may be impossible for this tree.
    pub fn may_be_irrational(&self) -> bool {
        self.0.irrational
    }

    pub fn num(q: Rational) -> Expr {
        Expr::raw(Node::Num(q))
    }

    pub fn int(i: i64) -> Expr {
        Expr::num(Rational::from_integer(BigInt::from(i)))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::num(Rational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::raw(Node::Sym(Arc::from(name)))
    }

    pub fn pi() -> Expr {
        Expr::sym(PI)
    }

    pub fn exp(self) -> Expr {
        Expr::func(Func::Exp, self)
    }

    pub fn log(self) -> Expr {
        Expr::func(Func::Log, self)
    }

    pub fn sin(self) -> Expr {
        Expr::func(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::func(Func::Cos, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::pow(self, Rational::new(1.into(), 2.into()))
    }

    pub fn powi(self, n: i64) -> Expr {
        Expr::pow(self, Rational::from_integer(n.into()))
    }

    pub fn recip(self) -> Expr {
        self.powi(-1)
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(q) if q.is_one())
    }

    /// Quick structural test: false proves the symbol does not occur.
    pub fn may_contain(&self, name: &str) -> bool {
        self.0.mask & symbol_bit(name) != 0
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.may_contain(name) && self.free_symbols().contains(name)
    }

    /// Direct children of this node.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Num(_) | Node::Sym(_) => Vec::new(),
            Node::Add(cs) | Node::Mul(cs) => cs.iter().collect(),
            Node::Pow(b, _) => vec![b],
            Node::Func(_, a) => vec![a],
        }
    }

    /// All symbols occurring in the expression, including `pi`.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        collect_symbols(self, &mut out, &mut seen);
        out
    }

    /// Number of distinct nodes in the (shared) tree.
    pub fn node_count(&self) -> usize {
        fn walk(e: &Expr, seen: &mut HashSet<usize>) {
            if seen.insert(e.ptr()) {
                for c in e.children() {
                    walk(c, seen);
                }
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Replace symbols by expressions, re-canonicalizing the result.
    pub fn subs(&self, map: &HashMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        let keys = map.keys().fold(0, |m, k| m | symbol_bit(k));
        let mut memo = HashMap::new();
        subs_rec(self, map, keys, &mut memo)
    }

    pub fn subs1(&self, name: &str, value: &Expr) -> Expr {
        let mut map = HashMap::new();
        map.insert(name.to_string(), value.clone());
        self.subs(&map)
    }

    /// Bases of negative powers and arguments of logarithms: the places where
    /// the expression can become singular.
    pub fn pole_factors(&self) -> Vec<Expr> {
        fn walk(e: &Expr, seen: &mut HashSet<usize>, out: &mut Vec<Expr>) {
            if !seen.insert(e.ptr()) {
                return;
            }
            match e.node() {
                Node::Pow(b, q) if q.is_negative() => out.push(b.clone()),
                Node::Func(Func::Log, a) => out.push(a.clone()),
                _ => {}
            }
            for c in e.children() {
                walk(c, seen, out);
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        walk(self, &mut seen, &mut out);
        out.sort();
        out.dedup();
        out
    }

    fn rank(&self) -> u8 {
        match self.node() {
            Node::Num(_) => 0,
            Node::Sym(_) => 1,
            Node::Func(..) => 2,
            Node::Pow(..) => 3,
            Node::Mul(_) => 4,
            Node::Add(_) => 5,
        }
    }
}

fn collect_symbols(e: &Expr, out: &mut BTreeSet<String>, seen: &mut HashSet<usize>) {
    if e.mask() == 0 || !seen.insert(e.ptr()) {
        return;
    }
    if let Node::Sym(s) = e.node() {
        out.insert(s.to_string());
    }
    for c in e.children() {
        collect_symbols(c, out, seen);
    }
}

fn subs_rec(
    e: &Expr,
    map: &HashMap<String, Expr>,
    keys: u64,
    memo: &mut HashMap<usize, Expr>,
) -> Expr {
    if e.mask() & keys == 0 {
        return e.clone();
    }
    if let Some(r) = memo.get(&e.ptr()) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Num(_) => e.clone(),
        Node::Sym(s) => map.get(&**s).cloned().unwrap_or_else(|| e.clone()),
        Node::Add(cs) => Expr::add_all(cs.iter().map(|c| subs_rec(c, map, keys, memo))),
        Node::Mul(cs) => Expr::mul_all(cs.iter().map(|c| subs_rec(c, map, keys, memo))),
        Node::Pow(b, q) => Expr::pow(subs_rec(b, map, keys, memo), q.clone()),
        Node::Func(f, a) => Expr::func(*f, subs_rec(a, map, keys, memo)),
    };
    memo.insert(e.ptr(), r.clone());
    r
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.cmp(other) == Ordering::Equal)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Expr) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Expr) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        match self.rank().cmp(&other.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (self.node(), other.node()) {
            (Node::Num(a), Node::Num(b)) => a.cmp(b),
            (Node::Sym(a), Node::Sym(b)) => a.cmp(b),
            (Node::Func(f, a), Node::Func(g, b)) => f.cmp(g).then_with(|| a.cmp(b)),
            (Node::Pow(a, p), Node::Pow(b, q)) => a.cmp(b).then_with(|| p.cmp(q)),
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a.cmp(b),
            _ => unreachable!("rank mismatch"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Expr {
    fn from(i: i64) -> Expr {
        Expr::int(i)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Expr {
        Expr::num(q)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl ops::$tr<i64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, Expr::int(rhs))
            }
        }
        impl ops::$tr<i64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: i64) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), Expr::int(rhs))
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::add_all([a, b]));
binop!(Sub, sub, |a, b| Expr::add_all([a, -b]));
binop!(Mul, mul, |a, b| Expr::mul_all([a, b]));
binop!(Div, div, |a, b| Expr::mul_all([a, b.recip()]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all([Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::add_all(iter)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        Expr::mul_all(iter)
    }
}

/// Canonical form of an expression. Every constructor already canonicalizes,
/// so this rebuilds bottom-up and is idempotent.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo = HashMap::new();
    rebuild(e, &mut memo)
}

fn rebuild(e: &Expr, memo: &mut HashMap<usize, Expr>) -> Expr {
    if let Some(r) = memo.get(&e.ptr()) {
        return r.clone();
    }
    let r = match e.node() {
        Node::Num(_) | Node::Sym(_) => e.clone(),
        Node::Add(cs) => Expr::add_all(cs.iter().map(|c| rebuild(c, memo))),
        Node::Mul(cs) => Expr::mul_all(cs.iter().map(|c| rebuild(c, memo))),
        Node::Pow(b, q) => Expr::pow(rebuild(b, memo), q.clone()),
        Node::Func(f, a) => Expr::func(*f, rebuild(a, memo)),
    };
    memo.insert(e.ptr(), r.clone());
    r
}

/// Partial derivative with respect to the symbol `coord`.
pub fn diff(e: &Expr, coord: &str) -> Expr {
    e.diff(coord)
}

/// Decide `a ≡ b` with the default sampler seeded by `seed`.
pub fn equivalent(a: &Expr, b: &Expr, seed: u64) -> Result<bool, ExprError> {
    Ok(Sampler::new(seed).compare_pair(a, b)?.passed())
}
