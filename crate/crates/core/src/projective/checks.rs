//! Identity suites over a [`FiveModel`].

use std::time::Instant;

use super::{congruence_derivative, lift, reduce, CongruenceOp, FiveModel, ProjectiveError, ProjectorField};
use crate::expr::{Comparison, Expr, Sampler};
use crate::report::{CheckReport, Status};
use crate::riemann::{
    covariant_derivative, jordan_ricci, riemann_tensor, verify_axioms, AxiomFields, AXIOM_NAMES,
};
use crate::tensor::{multi_indices, TensorField};

fn labels(rank: usize, dim: usize) -> impl Fn(usize) -> String {
    move |i| format!("component {:?}", multi_indices(rank, dim).nth(i).unwrap_or_default())
}

fn record(report: &mut CheckReport, name: &str, started: Instant, lhs: Result<(TensorField, TensorField), ProjectiveError>, sampler: &Sampler) {
    match lhs.and_then(|(a, b)| Ok((a.compare(&b, sampler)?, a.rank(), a.dim()))) {
        Ok((c, rank, dim)) => report.record(name, started, &c, &labels(rank, dim)),
        Err(e) => report.record_error(name, started, e),
    }
}

pub const KILLING: &str = "Killing: X_(s||r) + X_(r||s) = 0";
pub const RIEMANN_CONTRACTION: &str = "R^n_(mst) X_n = X_(s||t||m)";
pub const RICCI_CONTRACTION: &str = "R_(nt) X^n = 1/2 X^m_(.t||m)";

/// Killing equation and the two curvature contractions of the position
/// vector. The curvature tensor is `G^ν_{μστ}` of the commutator relation;
/// the Ricci tensor is its contraction `G^ν_{μντ}`, the sign used by the
/// field equations.
pub fn verify_projective_identities(model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let sampler = model.sampler(sampler);
    let mut report = CheckReport::new("projective identities", sampler.seed);
    let m = model.metric();
    let xl = model.position_lower();

    let started = Instant::now();
    let killing = || -> Result<_, ProjectiveError> {
        let d = covariant_derivative(xl, m)?;
        Ok((d.add(&d.permute(&[1, 0])?)?, TensorField::zeros(m.chart(), d.slots())))
    };
    record(&mut report, KILLING, started, killing(), &sampler);

    let started = Instant::now();
    let riemann = || -> Result<_, ProjectiveError> {
        let r = riemann_tensor(m);
        // slots (μ, σ, τ) after contracting ν
        let lhs = xl.contract_with(0, &r, 0)?;
        // X_{σ||τ||μ} has slots (σ, τ, μ)
        let dd = covariant_derivative(&covariant_derivative(xl, m)?, m)?;
        Ok((lhs, dd.permute(&[2, 0, 1])?))
    };
    record(&mut report, RIEMANN_CONTRACTION, started, riemann(), &sampler);

    let started = Instant::now();
    let ricci = || -> Result<_, ProjectiveError> {
        let lhs = model.position().contract_with(0, &jordan_ricci(m), 0)?;
        let xu = model.x_curl().raise(0, m)?;
        let div = covariant_derivative(&xu, m)?.contract(0, 2)?;
        Ok((lhs, div.scale(&Expr::ratio(1, 2))))
    };
    record(&mut report, RICCI_CONTRACTION, started, ricci(), &sampler);
    report
}

/// `reduce(P_{|||λ}) = (reduce P)_{||l}`.
pub fn reduction_theorem_check(p: &ProjectorField, model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let sampler = model.sampler(sampler);
    let mut report = CheckReport::new("reduction theorem", sampler.seed);
    let started = Instant::now();
    let sides = || -> Result<_, ProjectiveError> {
        let lhs = reduce(&congruence_derivative(p, model)?, model)?;
        let rhs = covariant_derivative(&reduce(p, model)?, model.g4())?;
        Ok((lhs, rhs))
    };
    record(&mut report, &format!("reduction theorem, rank {}", p.field.rank()), started, sides(), &sampler);
    report
}

/// Sign pattern of the `J` terms in the Ricci relation
/// `G_{kl} = R_{kl} − X_{kj}X_l^{·j}/(2J) ± J_{|k||l}/(2J) ± J_{|k}J_{|l}/(4J²)`,
/// or the literal product of the two terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicciCorrection {
    Sum { hessian: i8, gradient: i8 },
    Product,
}

impl RicciCorrection {
    pub const CANDIDATES: [RicciCorrection; 5] = [
        RicciCorrection::Sum { hessian: -1, gradient: -1 },
        RicciCorrection::Sum { hessian: -1, gradient: 1 },
        RicciCorrection::Sum { hessian: 1, gradient: -1 },
        RicciCorrection::Sum { hessian: 1, gradient: 1 },
        RicciCorrection::Product,
    ];
}

/// The resolution found by [`fit_ricci_correction`] on the varying-`J`
/// fixture.
pub const RICCI_CORRECTION: RicciCorrection = RicciCorrection::Sum { hessian: -1, gradient: 1 };

struct Reduced {
    ricci5: TensorField,
    scalar5: Expr,
    g4_ricci: TensorField,
    g4_scalar: Expr,
    /// `X_{kj} X_l^{·j}`
    xx: TensorField,
    /// `X_{kl} X^{kl}`
    x_sq: Expr,
    hessian: TensorField,
    grad: TensorField,
    box_j: Expr,
    grad_sq: Expr,
}

fn reduced_pieces(model: &FiveModel) -> Result<Reduced, ProjectiveError> {
    let m5 = model.metric();
    let g4 = model.g4();
    let ricci5 = reduce(&ProjectorField::new(jordan_ricci(m5)), model)?;
    let scalar5 = crate::riemann::trace(m5, &jordan_ricci(m5)).subs1(super::X0, &Expr::one());
    let g4_ricci = jordan_ricci(g4);
    let g4_scalar = crate::riemann::trace(g4, &g4_ricci);
    let x = reduce(&ProjectorField::new(model.x_curl().clone()), model)?;
    let x_mixed = x.raise(1, g4)?;
    let xx = x.contract_with(1, &x_mixed, 1)?;
    let x_sq = x.raise(0, g4)?.raise(1, g4)?.contract_with(0, &x, 0)?.contract(0, 1)?;
    let x_sq = x_sq.as_scalar().expect("scalar").clone();
    let jf = TensorField::scalar(g4.chart(), model.j().clone());
    let grad = jf.partial();
    let hessian = covariant_derivative(&grad, g4)?;
    let box_j = crate::riemann::trace(g4, &hessian);
    let grad_sq = crate::riemann::trace(g4, &grad.tensor_product(&grad)?);
    Ok(Reduced { ricci5, scalar5, g4_ricci, g4_scalar, xx, x_sq, hessian, grad, box_j, grad_sq })
}

fn ricci_rhs(p: &Reduced, j: &Expr, c: RicciCorrection) -> Result<TensorField, ProjectiveError> {
    let two_j = Expr::int(2) * j;
    let four_j2 = Expr::int(4) * j.clone().powi(2);
    let base = p.ricci5.sub(&p.xx.scale(&two_j.clone().recip()))?;
    let hess = p.hessian.scale(&two_j.recip());
    let gg = p.grad.tensor_product(&p.grad)?.scale(&four_j2.recip());
    Ok(match c {
        RicciCorrection::Sum { hessian, gradient } => {
            base.add(&hess.scale(&Expr::int(hessian as i64)))?.add(&gg.scale(&Expr::int(gradient as i64)))?
        }
        RicciCorrection::Product => {
            let prod = TensorField::from_fn(base.chart(), base.slots(), |i| hess.get(i) * gg.get(i));
            base.sub(&prod)?
        }
    })
}

/// Tries every candidate reading of the Ricci relation on `model` and
/// returns the comparison for each.
pub fn fit_ricci_correction(
    model: &FiveModel,
    sampler: &Sampler,
) -> Result<Vec<(RicciCorrection, Comparison)>, ProjectiveError> {
    let p = reduced_pieces(model)?;
    let s = model.sampler(sampler);
    RicciCorrection::CANDIDATES
        .iter()
        .map(|&c| Ok((c, p.g4_ricci.compare(&ricci_rhs(&p, model.j(), c)?, &s)?)))
        .collect()
}

pub const RIEMANN_REDUCTION: &str = "Riemann reduction";
pub const RICCI_REDUCTION: &str = "Ricci reduction";
pub const SCALAR_REDUCTION: &str = "scalar reduction";
pub const RICCI_UNIT: &str = "Ricci reduction, J = 1";
pub const SCALAR_UNIT: &str = "scalar reduction, J = 1";

/// Four-dimensional curvature against the reduced five-dimensional one, at
/// the Riemann, Ricci and scalar level, plus the `J = 1` forms when they
/// apply. Ricci and scalar use the field-equation sign.
pub fn curvature_reduction_check(model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let sampler = model.sampler(sampler);
    let mut report = CheckReport::new("curvature reduction", sampler.seed);
    let j = model.j().clone();
    let g4 = model.g4();

    let started = Instant::now();
    let riemann = || -> Result<_, ProjectiveError> {
        let m5 = model.metric();
        let x = model.x_curl();
        let xm = x.raise(0, m5)?; // X^ν_{·σ}, slots (ν, σ)
        let quarter = (Expr::int(4) * &j).recip();
        let r5 = riemann_tensor(m5);
        let corr = TensorField::from_fn(m5.chart(), r5.slots(), |i| {
            let (nu, mu, s, t) = (i[0], i[1], i[2], i[3]);
            x.get(&[mu, t]) * xm.get(&[nu, s]) - x.get(&[mu, s]) * xm.get(&[nu, t])
                + Expr::int(2) * x.get(&[s, t]) * xm.get(&[nu, mu])
        });
        let lhs = reduce(&ProjectorField::new(r5.sub(&corr.scale(&quarter))?), model)?;
        Ok((riemann_tensor(g4), lhs))
    };
    record(&mut report, RIEMANN_REDUCTION, started, riemann(), &sampler);

    let pieces = reduced_pieces(model);
    let started = Instant::now();
    match &pieces {
        Ok(p) => {
            let sides = ricci_rhs(p, &j, RICCI_CORRECTION).map(|rhs| (p.g4_ricci.clone(), rhs));
            record(&mut report, RICCI_REDUCTION, started, sides, &sampler);
        }
        Err(e) => report.record_error(RICCI_REDUCTION, started, e),
    }

    let started = Instant::now();
    match &pieces {
        Ok(p) => {
            let rhs = Expr::add_all([
                p.g4_scalar.clone(),
                &p.x_sq / (Expr::int(4) * &j),
                &p.box_j / &j,
                -(&p.grad_sq / (Expr::int(2) * j.clone().powi(2))),
            ]);
            match sampler.compare_pair(&p.scalar5, &rhs) {
                Ok(c) => report.record(SCALAR_REDUCTION, started, &c, &|_| "R".into()),
                Err(e) => report.record_error(SCALAR_REDUCTION, started, e),
            }
        }
        Err(e) => report.record_error(SCALAR_REDUCTION, started, e),
    }

    if model.j_is_unit() {
        if let Ok(p) = &pieces {
            let started = Instant::now();
            let rhs = p.g4_ricci.add(&p.xx.scale(&Expr::ratio(1, 2)));
            record(&mut report, RICCI_UNIT, started, rhs.map(|r| (p.ricci5.clone(), r)).map_err(Into::into), &sampler);
            let started = Instant::now();
            let rhs = &p.g4_scalar + &p.x_sq * Expr::ratio(1, 4);
            match sampler.compare_pair(&p.scalar5, &rhs) {
                Ok(c) => report.record(SCALAR_UNIT, started, &c, &|_| "R".into()),
                Err(e) => report.record_error(SCALAR_UNIT, started, e),
            }
        }
    } else {
        report.skip(RICCI_UNIT, "J is not 1");
        report.skip(SCALAR_UNIT, "J is not 1");
    }
    report
}

/// Axioms I–IV for congruence differentiation on lifted random fields.
/// Axiom V is run and recorded as skipped with its outcome in the detail,
/// since the operation is not expected to satisfy it.
pub fn verify_congruence_axioms(model: &FiveModel, seed: u64, sampler: &Sampler) -> CheckReport {
    let sampler = model.sampler(sampler);
    let base = AxiomFields::random(model.g4().chart(), seed);
    let lifted = |t: &TensorField| lift(t, model).map(|p| p.field);
    let fields = (|| -> Result<AxiomFields, ProjectiveError> {
        Ok(AxiomFields {
            f: lifted(&base.f)?,
            h: lifted(&base.h)?,
            v: lifted(&base.v)?,
            w: lifted(&base.w)?,
            a: lifted(&base.a)?,
            b: lifted(&base.b)?,
            t: lifted(&base.t)?,
        })
    })();
    let mut report = match fields {
        Ok(f) => verify_axioms(&CongruenceOp(model), model.metric(), &f, &sampler),
        Err(e) => {
            let mut r = CheckReport::new("axioms", sampler.seed);
            r.record_error("lift", Instant::now(), e);
            return r;
        }
    };
    report.suite = "congruence axioms".into();
    if let Some(v) = report.results.iter_mut().find(|r| r.name == AXIOM_NAMES[4]) {
        v.detail = match v.status {
            Status::Pass => "recorded only: holds".into(),
            _ => format!("recorded only: fails ({})", if v.detail.is_empty() { "no witness" } else { &v.detail }),
        };
        v.status = Status::Skipped;
    }
    report
}
