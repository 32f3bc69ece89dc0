//! Homogeneous five-dimensional coordinates: projectors, reduction to four
//! dimensions, congruence differentiation and the curvature comparison.
//!
//! Models live in the adapted chart `(X0, x¹…x⁴)`, where the `x^k` are the
//! four-dimensional coordinates (homogeneous of degree zero) and the position
//! vector is `X^μ = (X0, 0, 0, 0, 0)`. The four-dimensional chart is embedded
//! by name, so a four-dimensional expression is a five-dimensional one that
//! does not depend on `X0`.

mod checks;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Sampler};
use crate::report::CheckReport;
use crate::riemann::{christoffel, covariant_derivative_with, CovariantOp};
use crate::tensor::{multi_indices, Chart, CoordMap, InverseJacobian, Metric, Symmetry, TensorError, TensorField, Variance};

pub use checks::{
    curvature_reduction_check, fit_ricci_correction, reduction_theorem_check, verify_congruence_axioms,
    verify_projective_identities, RicciCorrection, KILLING, RICCI_CONTRACTION, RICCI_CORRECTION, RICCI_REDUCTION, RICCI_UNIT,
    RIEMANN_CONTRACTION, RIEMANN_REDUCTION, SCALAR_REDUCTION, SCALAR_UNIT,
};

use Variance::{Down, Up};

/// Name of the homogeneous scale coordinate.
pub const X0: &str = "X0";

#[derive(Debug, Error)]
pub enum ProjectiveError {
    #[error("the invariant J vanishes")]
    ZeroJ,
    #[error("the model must declare J = 1, got J = {0}")]
    NonUnitJ(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

impl From<ExprError> for ProjectiveError {
    fn from(e: ExprError) -> Self {
        ProjectiveError::Tensor(e.into())
    }
}

/// Tensor field on the five-dimensional chart together with its declared
/// homogeneity degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorField {
    pub field: TensorField,
    pub degree: i64,
}

impl ProjectorField {
    /// Degree `n − m`: contravariant minus covariant slot count.
    pub fn new(field: TensorField) -> ProjectorField {
        let up = field.slots().iter().filter(|v| **v == Up).count() as i64;
        let degree = 2 * up - field.rank() as i64;
        ProjectorField { field, degree }
    }

    pub fn with_degree(field: TensorField, degree: i64) -> ProjectorField {
        ProjectorField { field, degree }
    }
}

#[derive(Debug)]
struct FiveModelInner {
    g4: Metric,
    phi: TensorField,
    j: Expr,
    chart: Chart,
    metric: Metric,
    position: TensorField,
    position_lower: TensorField,
    x_curl: TensorField,
    map_to_homogeneous: CoordMap,
    congruence: OnceLock<TensorField>,
}

/// Five-dimensional metric built from a four-dimensional metric `ĝ`, a
/// covector `φ` and the invariant `J`.
#[derive(Debug, Clone)]
pub struct FiveModel(Arc<FiveModelInner>);

/// Embed `(g4, φ, J)` in the adapted chart:
/// `g_00 = J/X0²`, `g_0k = J φ_k / X0`, `g_kl = ĝ_kl + J φ_k φ_l`.
pub fn build_adapted_fivemodel(g4: &Metric, phi: &TensorField, j: &Expr) -> Result<FiveModel, ProjectiveError> {
    if phi.chart() != g4.chart() {
        return Err(TensorError::ChartMismatch(phi.chart().name().into(), g4.chart().name().into()).into());
    }
    if phi.slots() != [Down] {
        return Err(TensorError::SignatureMismatch(format!("φ must be a covector, got {:?}", phi.slots())).into());
    }
    if g4.chart().index_of(X0).is_some() {
        return Err(TensorError::InvalidInput(format!("coordinate name `{X0}` is reserved")).into());
    }
    if j.is_zero() || Sampler::new(0).compare_pair(j, &Expr::zero())?.passed() {
        return Err(ProjectiveError::ZeroJ);
    }
    let n = g4.dim();
    let chart = Chart::new(
        &format!("{}-5", g4.chart().name()),
        std::iter::once(X0.to_string()).chain(g4.chart().coords().iter().cloned()),
    );
    let x0 = Expr::sym(X0);
    let ph = |k: usize| phi.get(&[k]).clone();
    let phi_up: Vec<Expr> = (0..n).map(|k| Expr::add_all((0..n).map(|l| g4.ginv(k, l) * phi.get(&[l])))).collect();
    let phi_sq = Expr::add_all((0..n).map(|k| ph(k) * &phi_up[k]));

    let g = TensorField::from_fn(&chart, &[Down, Down], |i| match (i[0], i[1]) {
        (0, 0) => j / x0.clone().powi(2),
        (0, l) | (l, 0) => j * ph(l - 1) / &x0,
        (k, l) => g4.g(k - 1, l - 1) + j * ph(k - 1) * ph(l - 1),
    });
    let inv = TensorField::from_fn(&chart, &[Up, Up], |i| match (i[0], i[1]) {
        (0, 0) => x0.clone().powi(2) * (j.clone().recip() + &phi_sq),
        (0, l) | (l, 0) => -(&x0 * &phi_up[l - 1]),
        (k, l) => g4.ginv(k - 1, l - 1).clone(),
    });
    let det = j * g4.det() / x0.clone().powi(2);
    let metric = Metric::with_inverse(g, inv, det)?;

    let position = TensorField::vector(&chart, (0..=n).map(|mu| if mu == 0 { x0.clone() } else { Expr::zero() }).collect());
    let position_lower = position.lower(0, &metric)?;
    let dx = position_lower.partial();
    let x_curl = TensorField::from_fn(&chart, &[Down, Down], |i| {
        let (rho, sigma) = (i[0], i[1]);
        dx.get(&[sigma, rho]) - dx.get(&[rho, sigma])
    })
    .with_symmetry(Symmetry::Antisymmetric(0, 1));

    let ys = Chart::new(&format!("{}-homogeneous", g4.chart().name()), (0..=n).map(|k| format!("Y{k}")));
    let y = |k: usize| ys.coord_expr(k);
    let old_in_new = (0..=n).map(|k| if k == 0 { y(0) } else { y(k) / y(0) }).collect();
    let new_in_old = (0..=n).map(|k| if k == 0 { x0.clone() } else { &x0 * chart.coord_expr(k) }).collect();
    let map_to_homogeneous = CoordMap::new(&chart, &ys, old_in_new, InverseJacobian::Map(new_in_old));

    Ok(FiveModel(Arc::new(FiveModelInner {
        g4: g4.clone(),
        phi: phi.clone(),
        j: j.clone(),
        chart,
        metric,
        position,
        position_lower,
        x_curl,
        map_to_homogeneous,
        congruence: OnceLock::new(),
    })))
}

impl FiveModel {
    pub fn g4(&self) -> &Metric {
        &self.0.g4
    }

    pub fn phi(&self) -> &TensorField {
        &self.0.phi
    }

    /// The invariant `J` as declared (a four-dimensional scalar).
    pub fn j(&self) -> &Expr {
        &self.0.j
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn metric(&self) -> &Metric {
        &self.0.metric
    }

    /// `X^μ`.
    pub fn position(&self) -> &TensorField {
        &self.0.position
    }

    /// `X_μ = g_{μν} X^ν`.
    pub fn position_lower(&self) -> &TensorField {
        &self.0.position_lower
    }

    /// `X_{ρσ} = X_{σ|ρ} − X_{ρ|σ}`.
    pub fn x_curl(&self) -> &TensorField {
        &self.0.x_curl
    }

    /// Map to the homogeneous chart `Y0 = X0`, `Y^k = X0 x^k`.
    pub fn homogeneous_map(&self) -> &CoordMap {
        &self.0.map_to_homogeneous
    }

    pub fn j_is_unit(&self) -> bool {
        self.0.j.is_one() || Sampler::new(0).compare_pair(&self.0.j, &Expr::one()).map(|c| c.passed()).unwrap_or(false)
    }

    /// Sampler with `X0` kept positive, on top of `base`.
    pub fn sampler(&self, base: &Sampler) -> Sampler {
        let mut s = base.clone();
        s.positive.insert(X0.to_string());
        s
    }

    /// Connection of the congruence derivative: `Γ^σ_{μλ} − K^σ_{μλ}` with
    /// `K^σ_{μλ} = (X_{μλ} X^σ − X^σ_{·λ} X_μ)/(2J)`.
    pub fn congruence_connection(&self) -> &TensorField {
        self.0.congruence.get_or_init(|| {
            let gamma = christoffel(self.metric());
            let xu = self.x_curl().raise(0, self.metric()).expect("down slot");
            let two_j = Expr::int(2) * self.j();
            gamma.as_tensor().map_indexed(|i, g| {
                let (s, mu, l) = (i[0], i[1], i[2]);
                let k = (self.x_curl().get(&[mu, l]) * self.position().get(&[s])
                    - xu.get(&[s, l]) * self.position_lower().get(&[mu]))
                    / &two_j;
                g - k
            })
        })
    }

    /// Frames relating the charts: `E_k = ∂_k − X0 φ_k ∂_0` and `dx^k`.
    fn frame(&self, v: Variance, toward4: bool, mu: usize, k: usize) -> Expr {
        let horizontal = || {
            if mu == k + 1 {
                Expr::one()
            } else if mu == 0 {
                -(Expr::sym(X0) * self.phi().get(&[k]))
            } else {
                Expr::zero()
            }
        };
        let coordinate = || if mu == k + 1 { Expr::one() } else { Expr::zero() };
        // Reducing contracts up slots with dx^k and down slots with E_k;
        // lifting does the opposite.
        match (v, toward4) {
            (Up, true) | (Down, false) => coordinate(),
            (Down, true) | (Up, false) => horizontal(),
        }
    }
}

/// Reduction: up slots contracted with `x^k_{|μ}`, down slots with the
/// horizontal frame `E_k`. The result is a field on the four-dimensional
/// chart; `X0` drops out for projectors and is set to one.
pub fn reduce(p: &ProjectorField, model: &FiveModel) -> Result<TensorField, ProjectiveError> {
    let t = &p.field;
    if t.chart() != model.chart() {
        return Err(TensorError::ChartMismatch(t.chart().name().into(), model.chart().name().into()).into());
    }
    let n = model.g4().dim();
    let rank = t.rank();
    let one: HashMap<String, Expr> = [(X0.to_string(), Expr::one())].into();
    let slots = t.slots().to_vec();
    let comps = multi_indices(rank, n)
        .map(|k| {
            let terms = multi_indices(rank, n + 1).filter_map(|mu| {
                let mut c = Vec::with_capacity(rank + 1);
                for s in 0..rank {
                    let f = model.frame(slots[s], true, mu[s], k[s]);
                    if f.is_zero() {
                        return None;
                    }
                    c.push(f);
                }
                let v = t.get(&mu);
                if v.is_zero() {
                    return None;
                }
                c.push(v.clone());
                Some(Expr::mul_all(c))
            });
            Expr::add_all(terms.collect::<Vec<_>>()).subs(&one)
        })
        .collect();
    Ok(TensorField::new(model.g4().chart(), &slots, comps)?)
}

/// Inverse of [`reduce`] on fields that do not depend on `X0`: up slots
/// through `E_k`, down slots through `dx^k`.
pub fn lift(t: &TensorField, model: &FiveModel) -> Result<ProjectorField, ProjectiveError> {
    if t.chart() != model.g4().chart() {
        return Err(TensorError::ChartMismatch(t.chart().name().into(), model.g4().chart().name().into()).into());
    }
    let n = model.g4().dim();
    let rank = t.rank();
    let slots = t.slots().to_vec();
    let field = TensorField::from_fn(model.chart(), &slots, |mu| {
        let terms: Vec<Expr> = multi_indices(rank, n)
            .filter_map(|k| {
                let mut c = Vec::with_capacity(rank + 1);
                for s in 0..rank {
                    let f = model.frame(slots[s], false, mu[s], k[s]);
                    if f.is_zero() {
                        return None;
                    }
                    c.push(f);
                }
                let v = t.get(&k);
                if v.is_zero() {
                    return None;
                }
                c.push(v.clone());
                Some(Expr::mul_all(c))
            })
            .collect();
        Expr::add_all(terms)
    });
    Ok(ProjectorField::new(field))
}

/// Random polynomial projector: each component is a polynomial in the
/// four-dimensional coordinates times `X0^(u − d)`, where `u` and `d` count
/// the up and down slots set to index 0.
pub fn random_projector(model: &FiveModel, slots: &[Variance], seed: u64, degree: usize) -> ProjectorField {
    let mut k = 0u64;
    let field = TensorField::from_fn(model.chart(), slots, |mu| {
        k += 1;
        let poly = crate::fixtures::random_field(model.g4().chart(), &[], seed.wrapping_mul(31).wrapping_add(k), degree);
        let power: i64 = mu
            .iter()
            .zip(slots)
            .filter(|(i, _)| **i == 0)
            .map(|(_, v)| if *v == Up { 1 } else { -1 })
            .sum();
        poly.as_scalar().expect("scalar").clone() * Expr::sym(X0).powi(power)
    });
    ProjectorField::new(field)
}

/// Checks `P_{…|λ} X^λ = d · P_{…}` in the homogeneous chart.
pub fn euler_degree_check(p: &ProjectorField, model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let mut report = CheckReport::new("euler", sampler.seed);
    let name = format!("degree {}", p.degree);
    let started = Instant::now();
    let run = || -> Result<_, ProjectiveError> {
        let map = model.homogeneous_map();
        let py = p.field.transform(map)?;
        let dim = py.dim();
        let d = py.partial();
        let rank = py.rank();
        let deg = Expr::int(p.degree);
        let mut idx = vec![0; rank + 1];
        let lhs: Vec<Expr> = multi_indices(rank, dim)
            .map(|i| {
                idx[..rank].copy_from_slice(&i);
                Expr::add_all((0..dim).map(|l| {
                    idx[rank] = l;
                    d.get(&idx) * map.to.coord_expr(l)
                }))
            })
            .collect();
        let rhs: Vec<Expr> = py.comps().iter().map(|c| c * &deg).collect();
        let mut s = sampler.clone();
        s.positive.insert("Y0".into());
        Ok(s.compare(&lhs, &rhs)?)
    };
    match run() {
        Ok(c) => {
            let rank = p.field.rank();
            let dim = p.field.dim();
            report.record(&name, started, &c, &|i| {
                format!("component {:?}", multi_indices(rank, dim).nth(i).unwrap_or_default())
            })
        }
        Err(e) => report.record_error(&name, started, e),
    }
    report
}

/// `X0 ∂_0 P_I = w(I) P_I` in adapted components, decided on canonical
/// forms alone. The weight is `d − u + l + u0(I) − l0(I)`, with `u`, `l` the
/// up and down slot counts and `u0`, `l0` those set to index 0.
pub fn euler_weight_exact(p: &ProjectorField, model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let mut report = CheckReport::new("euler", sampler.seed);
    let name = format!("degree {}, exact", p.degree);
    let started = Instant::now();
    if p.field.chart() != model.chart() {
        report.record_error(&name, started, TensorError::ChartMismatch(p.field.chart().name().into(), model.chart().name().into()));
        return report;
    }
    let slots = p.field.slots();
    let ups = slots.iter().filter(|v| **v == Up).count() as i64;
    let base = p.degree - ups + (slots.len() as i64 - ups);
    let x0 = Expr::sym(X0);
    let residual: Vec<Expr> = multi_indices(p.field.rank(), p.field.dim())
        .map(|i| {
            let w: i64 = i.iter().zip(slots).filter(|(k, _)| **k == 0).map(|(_, v)| if *v == Up { 1 } else { -1 }).sum();
            let c = p.field.get(&i);
            &x0 * c.diff(X0) - c * Expr::int(base + w)
        })
        .collect();
    if residual.iter().all(Expr::is_zero) {
        report.record_numeric(&name, started, 0.0, 0.0, Default::default());
        return report;
    }
    let zeros = vec![Expr::zero(); residual.len()];
    match sampler.compare(&residual, &zeros) {
        Ok(c) => {
            let witness = c.failure.as_ref().map(|f| f.point.iter().map(|(k, v)| (k.clone(), v.to_string())).collect());
            report.record_numeric(&name, started, c.max_residual.max(f64::MIN_POSITIVE), 0.0, witness.unwrap_or_default());
        }
        Err(e) => report.record_error(&name, started, e),
    }
    report
}

/// The congruence derivative `P_{|||λ}`: the covariant derivative of the
/// five-dimensional metric plus, per down slot, `K^σ_{μλ} P_{..σ..}` and,
/// per up slot, `−K^μ_{σλ} P^{..σ..}`.
pub fn congruence_derivative(p: &ProjectorField, model: &FiveModel) -> Result<ProjectorField, ProjectiveError> {
    if p.field.chart() != model.chart() {
        return Err(TensorError::ChartMismatch(p.field.chart().name().into(), model.chart().name().into()).into());
    }
    let d = covariant_derivative_with(&p.field, model.congruence_connection())?;
    Ok(ProjectorField::with_degree(d, p.degree - 1))
}

/// Congruence differentiation as an operator, for the axiom checks.
pub struct CongruenceOp<'a>(pub &'a FiveModel);

impl CovariantOp for CongruenceOp<'_> {
    fn chart(&self) -> &Chart {
        self.0.chart()
    }

    fn apply(&self, t: &TensorField) -> Result<TensorField, TensorError> {
        covariant_derivative_with(t, self.0.congruence_connection())
    }
}

/// Checks of the builder postconditions: metric of degree −2, `x^k` of
/// degree 0, `J = g_{μν}X^μX^ν`, antisymmetry of `X_{ρσ}` and
/// `reduce(g^{μν}) = ĝ^{kl}`.
pub fn verify_model(model: &FiveModel, sampler: &Sampler) -> CheckReport {
    let sampler = model.sampler(sampler);
    let mut report = CheckReport::new("fivemodel", sampler.seed);
    let mut sub = euler_degree_check(&ProjectorField::new(model.metric().tensor().clone()), model, &sampler);
    for r in &mut sub.results {
        r.name = format!("metric {}", r.name);
    }
    report.extend(sub);

    let started = Instant::now();
    let map = model.homogeneous_map();
    let ys = &map.to;
    let lhs: Vec<Expr> = map.old_in_new[1..]
        .iter()
        .map(|x| Expr::add_all((0..ys.dim()).map(|l| x.diff(ys.coord(l)) * ys.coord_expr(l))))
        .collect();
    let zeros = vec![Expr::zero(); lhs.len()];
    let mut ys_sampler = sampler.clone();
    ys_sampler.positive.insert("Y0".into());
    match ys_sampler.compare(&lhs, &zeros) {
        Ok(c) => report.record("x^k degree 0", started, &c, &|i| format!("x^{}", i + 1)),
        Err(e) => report.record_error("x^k degree 0", started, e),
    }

    let started = Instant::now();
    let jj = model.position_lower().contract_with(0, model.position(), 0).expect("matching slots");
    match sampler.compare_pair(jj.as_scalar().expect("scalar"), model.j()) {
        Ok(c) => report.record("J = g X X", started, &c, &|_| "J".into()),
        Err(e) => report.record_error("J = g X X", started, e),
    }

    let started = Instant::now();
    match model.x_curl().verify_symmetries(&sampler) {
        Ok(c) => report.record("X antisymmetric", started, &c, &|i| format!("pair {i}")),
        Err(e) => report.record_error("X antisymmetric", started, e),
    }

    let started = Instant::now();
    let red = reduce(&ProjectorField::new(model.metric().inverse().clone()), model)
        .and_then(|r| Ok(r.compare(model.g4().inverse(), &sampler)?));
    match red {
        Ok(c) => report.record("reduce(g^-1) = g4^-1", started, &c, &|i| format!("component {i}")),
        Err(e) => report.record_error("reduce(g^-1) = g4^-1", started, e),
    }
    report
}
