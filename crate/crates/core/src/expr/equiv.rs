//! Deterministic equivalence testing by canonical comparison with a sampled
//! evaluation fallback.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eval::Evaluator;
use super::{Bindings, Expr, ExprError, Rational, Value, PI};

pub const DEFAULT_POINTS: usize = 24;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Sampling configuration for equivalence checks.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub points: usize,
    /// Relative tolerance on the floating path.
    pub tolerance: f64,
    pub seed: u64,
    /// Symbols with fixed values; everything else free is sampled.
    pub fixed: Bindings,
    /// Numerators and denominators are drawn from `[-range, range]`.
    pub range: i64,
    pub pole_margin: f64,
    /// Symbols restricted to strictly positive samples.
    pub positive: BTreeSet<String>,
    pub max_attempts_per_point: usize,
}

/// The first sample point at which a pair disagreed.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub index: usize,
    pub point: Bindings,
    pub residual: f64,
}

/// Outcome of comparing a list of expression pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// Largest relative residual seen over all pairs and points.
    pub max_residual: f64,
    pub points_used: usize,
    /// Every pair coincided structurally; no sampling was needed.
    pub canonical: bool,
    /// Every sampled comparison was done in exact arithmetic.
    pub exact: bool,
    pub failure: Option<Failure>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl Default for Sampler {
    fn default() -> Sampler {
        Sampler::new(0)
    }
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            points: DEFAULT_POINTS,
            tolerance: DEFAULT_TOLERANCE,
            seed,
            fixed: Bindings::new(),
            range: 97,
            pole_margin: 1e-6,
            positive: BTreeSet::new(),
            max_attempts_per_point: 50,
        }
    }

    pub fn with_points(mut self, n: usize) -> Sampler {
        self.points = n;
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Sampler {
        self.tolerance = tol;
        self
    }

    pub fn with_fixed(mut self, fixed: Bindings) -> Sampler {
        self.fixed.extend(fixed);
        self
    }

    pub fn with_positive<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Sampler {
        self.positive.extend(names.into_iter().map(Into::into));
        self
    }

    /// Same configuration with a derived seed, for independent sub-checks.
    pub fn reseeded(&self, salt: u64) -> Sampler {
        let mut s = self.clone();
        s.seed = self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt);
        s
    }

    pub fn compare_pair(&self, a: &Expr, b: &Expr) -> Result<Comparison, ExprError> {
        self.compare(std::slice::from_ref(a), std::slice::from_ref(b))
    }

    /// Check every `lhs[i] ≡ rhs[i]` over one shared set of sample points.
    pub fn compare(&self, lhs: &[Expr], rhs: &[Expr]) -> Result<Comparison, ExprError> {
        assert_eq!(lhs.len(), rhs.len(), "comparison lists differ in length");
        let open: Vec<usize> = (0..lhs.len()).filter(|&i| lhs[i] != rhs[i]).collect();
        if open.is_empty() {
            return Ok(Comparison {
                max_residual: 0.0,
                points_used: 0,
                canonical: true,
                exact: true,
                failure: None,
            });
        }
        let mut symbols = BTreeSet::new();
        for &i in &open {
            symbols.extend(lhs[i].free_symbols());
            symbols.extend(rhs[i].free_symbols());
        }
        symbols.remove(PI);
        let free: Vec<String> = symbols.into_iter().filter(|s| !self.fixed.contains_key(s)).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Comparison {
            max_residual: 0.0,
            points_used: 0,
            canonical: false,
            exact: true,
            failure: None,
        };
        let budget = self.points * self.max_attempts_per_point;
        let mut attempts = 0;
        while out.points_used < self.points {
            if attempts >= budget {
                return Err(ExprError::SamplingExhausted { wanted: self.points, attempts });
            }
            attempts += 1;
            let mut point = self.fixed.clone();
            for s in &free {
                point.insert(s.clone(), Value::Exact(self.draw(&mut rng, self.positive.contains(s))));
            }
            match self.residuals_at(&point, lhs, rhs, &open) {
                Ok(rs) => {
                    out.points_used += 1;
                    for (i, r, exact) in rs {
                        out.exact &= exact;
                        if r > out.max_residual || r.is_nan() {
                            out.max_residual = r;
                        }
                        let bad = if exact { r != 0.0 } else { !(r <= self.tolerance) };
                        if bad && out.failure.is_none() {
                            out.failure = Some(Failure { index: i, point: point.clone(), residual: r });
                        }
                    }
                    if out.failure.is_some() {
                        return Ok(out);
                    }
                }
                Err(ExprError::DomainError(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    fn draw(&self, rng: &mut ChaCha8Rng, positive: bool) -> Rational {
        loop {
            let n: i64 = rng.gen_range(-self.range..=self.range);
            let d: i64 = rng.gen_range(1..=self.range);
            if n == 0 || (positive && n < 0) {
                continue;
            }
            return Rational::new(BigInt::from(n), BigInt::from(d));
        }
    }

    /// Relative residual of every open pair at one point; any domain error
    /// rejects the whole point.
    fn residuals_at(
        &self,
        point: &Bindings,
        lhs: &[Expr],
        rhs: &[Expr],
        open: &[usize],
    ) -> Result<Vec<(usize, f64, bool)>, ExprError> {
        let mut ev = Evaluator::with_margin(point, self.pole_margin);
        let mut out = Vec::with_capacity(open.len());
        // Floats first: they also detect poles near the sample point.
        let mut floats = Vec::with_capacity(open.len());
        for &i in open {
            let a = ev.float(&lhs[i])?;
            let b = ev.float(&rhs[i])?;
            floats.push((a, b));
        }
        for (k, &i) in open.iter().enumerate() {
            let exact = match (ev.exact(&lhs[i])?, ev.exact(&rhs[i])?) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            };
            let r = match exact {
                Some((a, b)) => {
                    if a == b {
                        (0.0, true)
                    } else {
                        let d = (&a - &b).abs();
                        let scale = a.abs().max(b.abs());
                        let r = if scale.is_zero() { d } else { d / scale };
                        (r.to_f64().unwrap_or(f64::INFINITY).max(f64::MIN_POSITIVE), true)
                    }
                }
                None => {
                    let ((av, am), (bv, bm)) = floats[k];
                    let scale = am.max(bm).max(av.abs()).max(bv.abs());
                    let d = (av - bv).abs();
                    (if scale == 0.0 { d } else { d / scale }, false)
                }
            };
            out.push((i, r.0, r.1));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::sym("x")
    }

    #[test]
    fn commutativity_is_canonical() {
        let y = Expr::sym("y");
        let c = Sampler::new(1).compare_pair(&(x() + &y), &(y + x())).unwrap();
        assert!(c.canonical && c.passed());
    }

    #[test]
    fn counterexample_is_reported() {
        let c = Sampler::new(1).compare_pair(&x(), &(x() + 1)).unwrap();
        let f = c.failure.expect("must fail");
        assert!(f.point.contains_key("x"));
    }

    #[test]
    fn rational_function_identity_by_sampling() {
        let lhs = (x().powi(2) - 1) / (x() - 1);
        let rhs = x() + 1;
        let c = Sampler::new(3).compare_pair(&lhs, &rhs).unwrap();
        assert!(!c.canonical);
        assert!(c.passed() && c.exact);
        assert_eq!(c.points_used, DEFAULT_POINTS);
    }

    #[test]
    fn pythagorean_identity_by_sampling() {
        let lhs = x().sin().powi(2) + x().cos().powi(2);
        let c = Sampler::new(7).with_points(20).compare_pair(&lhs, &Expr::one()).unwrap();
        assert!(c.passed());
        assert!(!c.exact);
        assert!(c.max_residual < 1e-12);
    }

    #[test]
    fn exhausted_when_every_point_is_a_pole() {
        let e = (x() - x() + Expr::zero()).recip() + x();
        // `e` has a literal pole everywhere
        let r = Sampler::new(0).compare_pair(&e, &x());
        assert!(matches!(r, Err(ExprError::SamplingExhausted { .. })));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let a = x().sin() * x().exp();
        let b = x().cos();
        let c1 = Sampler::new(42).compare_pair(&a, &b).unwrap();
        let c2 = Sampler::new(42).compare_pair(&a, &b).unwrap();
        assert_eq!(c1, c2);
    }
}
