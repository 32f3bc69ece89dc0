//! The five axioms characterizing covariant differentiation, checked for any
//! derivative operator.

use std::time::Instant;

use super::{christoffel, covariant_derivative_with};
use crate::expr::{Comparison, Expr, Sampler};
use crate::report::CheckReport;
use crate::tensor::{multi_indices, Chart, Metric, TensorError, TensorField, Variance};

/// A derivative operator on tensor fields that appends one down slot.
pub trait CovariantOp {
    fn chart(&self) -> &Chart;
    fn apply(&self, t: &TensorField) -> Result<TensorField, TensorError>;
}

/// Covariant derivative built from an arbitrary coefficient field.
#[derive(Debug, Clone)]
pub struct FormulaDerivative {
    pub gamma: TensorField,
}

impl FormulaDerivative {
    pub fn levi_civita(m: &Metric) -> FormulaDerivative {
        FormulaDerivative { gamma: christoffel(m).as_tensor().clone() }
    }

    /// Mutant with every Γ negated.
    pub fn flipped_sign(m: &Metric) -> FormulaDerivative {
        FormulaDerivative { gamma: christoffel(m).as_tensor().neg() }
    }

    /// Mutant with an antisymmetric (torsion) part added to Γ.
    pub fn with_torsion(m: &Metric, seed: u64) -> FormulaDerivative {
        let dim = m.dim();
        let s = crate::fixtures::random_field(m.chart(), &[Variance::Up, Variance::Down, Variance::Down], seed, 1);
        let gamma = christoffel(m).as_tensor().map_indexed(|i, e| {
            if dim < 2 {
                return e.clone();
            }
            e + s.get(&[i[0], i[1], i[2]]) - s.get(&[i[0], i[2], i[1]])
        });
        FormulaDerivative { gamma }
    }
}

impl CovariantOp for FormulaDerivative {
    fn chart(&self) -> &Chart {
        self.gamma.chart()
    }

    fn apply(&self, t: &TensorField) -> Result<TensorField, TensorError> {
        covariant_derivative_with(t, &self.gamma)
    }
}

/// Sample fields the axioms are exercised on.
#[derive(Debug, Clone)]
pub struct AxiomFields {
    pub f: TensorField,
    pub h: TensorField,
    pub v: TensorField,
    pub w: TensorField,
    pub a: TensorField,
    pub b: TensorField,
    pub t: TensorField,
}

impl AxiomFields {
    /// Seeded random polynomial fields of low degree.
    pub fn random(chart: &Chart, seed: u64) -> AxiomFields {
        use crate::fixtures::random_field;
        use Variance::{Down, Up};
        AxiomFields {
            f: random_field(chart, &[], seed, 2),
            h: random_field(chart, &[], seed + 1, 2),
            v: random_field(chart, &[Up], seed + 2, 2),
            w: random_field(chart, &[Up], seed + 3, 1),
            a: random_field(chart, &[Down], seed + 4, 2),
            b: random_field(chart, &[Down], seed + 5, 1),
            t: random_field(chart, &[Up, Down], seed + 6, 1),
        }
    }
}

fn label(idx: usize, splits: &[(String, usize, usize)], dim: usize) -> String {
    for (name, start, rank) in splits {
        let count = dim.pow(*rank as u32);
        if idx >= *start && idx < start + count {
            let comp = multi_indices(*rank, dim).nth(idx - start).unwrap_or_default();
            return format!("{name} component {comp:?}");
        }
    }
    format!("pair {idx}")
}

/// Builds one comparison from named pairs of equal-shape fields.
struct Pairs {
    lhs: Vec<Expr>,
    rhs: Vec<Expr>,
    splits: Vec<(String, usize, usize)>,
}

impl Pairs {
    fn new() -> Pairs {
        Pairs { lhs: Vec::new(), rhs: Vec::new(), splits: Vec::new() }
    }

    fn push(&mut self, name: &str, l: &TensorField, r: &TensorField) -> Result<(), TensorError> {
        l.same_chart(r)?;
        if l.slots() != r.slots() {
            return Err(TensorError::SignatureMismatch(format!("{name}: {:?} vs {:?}", l.slots(), r.slots())));
        }
        self.splits.push((name.to_string(), self.lhs.len(), l.rank()));
        self.lhs.extend(l.comps().iter().cloned());
        self.rhs.extend(r.comps().iter().cloned());
        Ok(())
    }

    fn compare(&self, sampler: &Sampler) -> Result<Comparison, TensorError> {
        Ok(sampler.compare(&self.lhs, &self.rhs)?)
    }
}

fn run(
    report: &mut CheckReport,
    name: &str,
    dim: usize,
    sampler: &Sampler,
    build: impl FnOnce(&mut Pairs) -> Result<(), TensorError>,
) {
    let started = Instant::now();
    let mut pairs = Pairs::new();
    match build(&mut pairs).and_then(|_| pairs.compare(sampler)) {
        Ok(c) => report.record(name, started, &c, &|i| label(i, &pairs.splits, dim)),
        Err(e) => report.record_error(name, started, e),
    }
}

pub const AXIOM_NAMES: [&str; 5] = [
    "I: sum and product rules",
    "II: commutes with contraction",
    "III: metric is constant",
    "IV: gradient of a scalar",
    "V: rotation of a covector",
];

/// Check axioms I–V of `op` against the metric `m`.
pub fn verify_axioms(op: &dyn CovariantOp, m: &Metric, fields: &AxiomFields, sampler: &Sampler) -> CheckReport {
    let mut report = CheckReport::new("axioms", sampler.seed);
    let dim = m.dim();
    let d = |t: &TensorField| op.apply(t);
    let fx = fields;

    run(&mut report, AXIOM_NAMES[0], dim, &sampler.reseeded(1), |p| {
        p.push("(v+w)||", &d(&fx.v.add(&fx.w)?)?, &d(&fx.v)?.add(&d(&fx.w)?)?)?;
        p.push("(a+b)||", &d(&fx.a.add(&fx.b)?)?, &d(&fx.a)?.add(&d(&fx.b)?)?)?;
        // (v a)_{||j} = v_{||j} a + v a_{||j}; v_{||j} a has slots (v, j, a)
        let va = fx.v.tensor_product(&fx.a)?;
        let right = d(&fx.v)?.tensor_product(&fx.a)?.permute(&[0, 2, 1])?.add(&fx.v.tensor_product(&d(&fx.a)?)?)?;
        p.push("(v a)||", &d(&va)?, &right)?;
        let fv = fx.v.scale(fx.f.as_scalar().unwrap());
        let right = d(&fx.f)?.tensor_product(&fx.v)?.permute(&[1, 0])?.add(&d(&fx.v)?.scale(fx.f.as_scalar().unwrap()))?;
        p.push("(f v)||", &d(&fv)?, &right)?;
        let fh = fx.f.tensor_product(&fx.h)?;
        let right = d(&fx.f)?.scale(fx.h.as_scalar().unwrap()).add(&d(&fx.h)?.scale(fx.f.as_scalar().unwrap()))?;
        p.push("(f h)||", &d(&fh)?, &right)
    });

    run(&mut report, AXIOM_NAMES[1], dim, &sampler.reseeded(2), |p| {
        p.push("tr(t)||", &d(&fx.t.contract(0, 1)?)?, &d(&fx.t)?.contract(0, 1)?)?;
        let va = fx.v.tensor_product(&fx.a)?;
        p.push("(v.a)||", &d(&va.contract(0, 1)?)?, &d(&va)?.contract(0, 1)?)?;
        let tw = fx.t.tensor_product(&fx.w)?;
        p.push("(t.w)||", &d(&tw.contract(2, 1)?)?, &d(&tw)?.contract(2, 1)?)
    });

    run(&mut report, AXIOM_NAMES[2], dim, &sampler.reseeded(3), |p| {
        let zero3 = |s: [Variance; 3]| TensorField::zeros(m.chart(), &s);
        use Variance::{Down, Up};
        p.push("g||", &d(m.tensor())?, &zero3([Down, Down, Down]))?;
        p.push("ginv||", &d(m.inverse())?, &zero3([Up, Up, Down]))
    });

    run(&mut report, AXIOM_NAMES[3], dim, &sampler.reseeded(4), |p| {
        p.push("f||", &d(&fx.f)?, &fx.f.partial())?;
        p.push("h||", &d(&fx.h)?, &fx.h.partial())
    });

    run(&mut report, AXIOM_NAMES[4], dim, &sampler.reseeded(5), |p| {
        for (name, a) in [("a", &fx.a), ("b", &fx.b)] {
            let da = d(a)?;
            let pa = a.partial();
            let curl = da.sub(&da.permute(&[1, 0])?)?;
            let plain = pa.sub(&pa.permute(&[1, 0])?)?;
            p.push(&format!("curl {name}"), &curl, &plain)?;
        }
        Ok(())
    });

    report
}
