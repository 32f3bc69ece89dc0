//! Standard metrics and seeded random fields used by the checks.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Rational};
use crate::tensor::{Chart, Metric, TensorField, Variance};

/// Minkowski space, signature (−+++).
pub fn flat4() -> Metric {
    let c = Chart::new("flat", ["t", "x", "y", "z"]);
    Metric::diagonal(&c, vec![Expr::int(-1), Expr::one(), Expr::one(), Expr::one()]).expect("regular")
}

/// Unit 2-sphere `dθ² + sin²θ dφ²`.
pub fn sphere2() -> Metric {
    let c = Chart::new("sphere", ["theta", "phi"]);
    let th = Expr::sym("theta");
    Metric::diagonal(&c, vec![Expr::one(), th.sin().powi(2)]).expect("regular")
}

fn spherical_chart(name: &str) -> Chart {
    Chart::new(name, ["t", "r", "theta", "phi"])
}

fn static_spherical(chart: &Chart, f: Expr) -> Metric {
    let r = Expr::sym("r");
    let th = Expr::sym("theta");
    Metric::diagonal(
        chart,
        vec![-f.clone(), f.recip(), r.clone().powi(2), r.powi(2) * th.sin().powi(2)],
    )
    .expect("regular")
}

/// Schwarzschild with free mass `M`.
pub fn schwarzschild() -> Metric {
    let (m, r) = (Expr::sym("M"), Expr::sym("r"));
    static_spherical(&spherical_chart("schwarzschild"), Expr::one() - Expr::int(2) * m / r)
}

/// `f = 1 − 2M/r + Q²/r²` with free `M` and `Q`.
pub fn rn_lapse() -> Expr {
    let (m, q, r) = (Expr::sym("M"), Expr::sym("Q"), Expr::sym("r"));
    Expr::one() - Expr::int(2) * m / r.clone() + q.powi(2) / r.powi(2)
}

/// Reissner–Nordström with free `M` and `Q`.
pub fn reissner_nordstrom() -> Metric {
    static_spherical(&spherical_chart("reissner-nordstrom"), rn_lapse())
}

/// The 4D fixture zoo: flat, sphere, Schwarzschild, Reissner–Nordström.
pub fn zoo() -> Vec<(&'static str, Metric)> {
    vec![
        ("flat", flat4()),
        ("sphere", sphere2()),
        ("schwarzschild", schwarzschild()),
        ("reissner-nordstrom", reissner_nordstrom()),
    ]
}

fn monomials(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dim]];
    for _ in 0..degree {
        let mut next = out.clone();
        for m in &out {
            for k in 0..dim {
                let mut e = m.clone();
                e[k] += 1;
                next.push(e);
            }
        }
        next.sort();
        next.dedup();
        out = next;
    }
    out
}

fn random_poly(chart: &Chart, rng: &mut ChaCha8Rng, degree: usize) -> Expr {
    let mut terms = Vec::new();
    for exps in monomials(chart.dim(), degree) {
        if rng.gen_bool(0.4) {
            continue;
        }
        let c: i64 = rng.gen_range(-3..=3);
        let mut factors = vec![Expr::int(c)];
        for (k, &e) in exps.iter().enumerate() {
            factors.push(chart.coord_expr(k).powi(e as i64));
        }
        terms.push(Expr::mul_all(factors));
    }
    Expr::add_all(terms)
}

/// Tensor field with independent random polynomial components of total
/// degree at most `degree` and coefficients in `[-3, 3]`.
pub fn random_field(chart: &Chart, slots: &[Variance], seed: u64, degree: usize) -> TensorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1e1d);
    TensorField::from_fn(chart, slots, |_| random_poly(chart, &mut rng, degree))
}

pub fn random_covector(chart: &Chart, seed: u64, degree: usize) -> TensorField {
    random_field(chart, &[Variance::Down], seed, degree)
}

/// Exact rational close to `x` (denominator at most 10⁹).
pub fn rational_approx(x: f64) -> Rational {
    let r = Rational::from_float(x).expect("finite");
    let scale = BigInt::from(1_000_000_000u64);
    let n = (r * Rational::from_integer(scale.clone())).round();
    let q = Rational::new(n.to_integer(), scale);
    debug_assert!((q.to_f64().unwrap() - x).abs() < 1e-8);
    q
}

/// Five-dimensional models: trivial flat, Schwarzschild and
/// Reissner–Nordström with `J = 1`, and Schwarzschild with varying `J`.
pub mod five {
    use super::*;
    use crate::projective::{build_adapted_fivemodel, FiveModel};

    fn zero_phi(m: &Metric) -> TensorField {
        TensorField::zeros(m.chart(), &[Variance::Down])
    }

    pub fn flat() -> FiveModel {
        let g = flat4();
        build_adapted_fivemodel(&g, &zero_phi(&g), &Expr::one()).expect("regular")
    }

    pub fn schwarzschild() -> FiveModel {
        let g = super::schwarzschild();
        build_adapted_fivemodel(&g, &zero_phi(&g), &Expr::one()).expect("regular")
    }

    /// `φ_t = 2Q/r`, the potential for which the reduced field equations
    /// reproduce Reissner–Nordström with `J = 1`.
    pub fn reissner_nordstrom() -> FiveModel {
        let g = super::reissner_nordstrom();
        let phi = TensorField::covector(
            g.chart(),
            vec![Expr::int(2) * Expr::sym("Q") / Expr::sym("r"), Expr::zero(), Expr::zero(), Expr::zero()],
        );
        build_adapted_fivemodel(&g, &phi, &Expr::one()).expect("regular")
    }

    /// `J = 1 + r²` on Schwarzschild with a small electric potential.
    pub fn varying_j() -> FiveModel {
        let g = super::schwarzschild();
        let r = Expr::sym("r");
        let phi = TensorField::covector(g.chart(), vec![Expr::sym("Q") / r.clone(), Expr::zero(), Expr::zero(), Expr::zero()]);
        build_adapted_fivemodel(&g, &phi, &(Expr::one() + r.powi(2))).expect("regular")
    }

    pub fn zoo() -> Vec<(&'static str, FiveModel)> {
        vec![
            ("flat", flat()),
            ("schwarzschild", schwarzschild()),
            ("reissner-nordstrom", reissner_nordstrom()),
            ("varying-j", varying_j()),
        ]
    }
}

/// Einstein–Maxwell configurations with free coupling `chi` and light
/// speed `c`.
pub mod em {
    use super::*;
    use crate::fieldeq::EMConfig;

    fn symbols() -> (Expr, Expr) {
        (Expr::sym("chi"), Expr::sym("c"))
    }

    pub fn vacuum(g: &Metric) -> EMConfig {
        let (chi, c) = symbols();
        EMConfig::new(g, TensorField::zeros(g.chart(), &[Variance::Down]), chi, c).expect("covector")
    }

    /// Coulomb potential `Φ_t = c √(2/χ) Q/r`; the normalization is the one
    /// that makes the residuals vanish.
    pub fn reissner_nordstrom() -> EMConfig {
        let (chi, c) = symbols();
        let g = super::reissner_nordstrom();
        let amp = &c * (Expr::int(2) / &chi).sqrt();
        let phi0 = amp * Expr::sym("Q") / Expr::sym("r");
        let potential = TensorField::covector(g.chart(), vec![phi0, Expr::zero(), Expr::zero(), Expr::zero()]);
        EMConfig::new(&g, potential, chi, c).expect("covector")
    }

    /// Sampler keeping `chi` and `c` positive.
    pub fn sampler(seed: u64) -> crate::expr::Sampler {
        crate::expr::Sampler::new(seed).with_positive(["chi", "c"])
    }
}
