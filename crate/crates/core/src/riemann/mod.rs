//! Levi-Civita connection, covariant differentiation, curvature and
//! parallel transport.
//!
//! Index conventions: `Γ^m_{jr}` is stored with slots (up, down, down). The
//! curvature tensor `G^m_{klj}` is the one with
//! `a_{k||l||j} − a_{k||j||l} = −G^m_{klj} a_m`, where `a_{k||l||j}` takes the
//! derivative along `l` first.

mod axioms;
mod checks;
mod plane;
mod transport;

use crate::expr::{Comparison, Expr, Sampler};
use crate::tensor::{Chart, Metric, Symmetry, TensorError, TensorField, Variance};

pub use checks::{
    plane_route_check, sample_points, veblen_shift_check, verify_curvature, BIANCHI, CHRISTOFFEL_SYMMETRY, COMMUTATOR,
    PLANE_ROUTE, RIEMANN_ANTISYMMETRY, VEBLEN_SHIFT, VEBLEN_TRACE,
};
pub use axioms::{verify_axioms, AxiomFields, CovariantOp, FormulaDerivative, AXIOM_NAMES};
pub use plane::{plane_coordinates_at, plane_route_derivative, PlaneCoordinates};
pub use transport::{parallel_transport, CurveSpec, Transport, DEFAULT_STEPS};

use Variance::{Down, Up};

/// Symmetric connection coefficients `Γ^m_{jr}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionCoeffs {
    gamma: TensorField,
}

impl ConnectionCoeffs {
    /// Wrap an (up, down, down) field; the lower pair must be symmetric.
    pub fn new(gamma: TensorField, sampler: &Sampler) -> Result<ConnectionCoeffs, TensorError> {
        if gamma.slots() != [Up, Down, Down] {
            return Err(TensorError::SignatureMismatch(format!(
                "connection needs (up, down, down), got {:?}",
                gamma.slots()
            )));
        }
        let gamma = gamma.with_symmetry(Symmetry::Symmetric(1, 2));
        let c = gamma.verify_symmetries(sampler)?;
        if !c.passed() {
            return Err(TensorError::SlotError("connection is not symmetric in its lower pair".into()));
        }
        Ok(ConnectionCoeffs { gamma })
    }

    pub fn zero(chart: &Chart) -> ConnectionCoeffs {
        ConnectionCoeffs { gamma: TensorField::zeros(chart, &[Up, Down, Down]).with_symmetry(Symmetry::Symmetric(1, 2)) }
    }

    pub fn chart(&self) -> &Chart {
        self.gamma.chart()
    }

    pub fn get(&self, m: usize, j: usize, r: usize) -> &Expr {
        self.gamma.get(&[m, j, r])
    }

    pub fn as_tensor(&self) -> &TensorField {
        &self.gamma
    }
}

/// `Γ^m_{jr} = ½ g^{mh}(g_{hj|r} + g_{hr|j} − g_{jr|h})`.
pub fn christoffel(m: &Metric) -> ConnectionCoeffs {
    let gamma = m.christoffel_cache().get_or_init(|| {
        let dim = m.dim();
        let dg = m.tensor().partial();
        let half = Expr::ratio(1, 2);
        let lowered = TensorField::from_fn(m.chart(), &[Down, Down, Down], |i| {
            let (h, j, r) = (i[0], i[1], i[2]);
            if j > r {
                return Expr::zero();
            }
            (dg.get(&[h, j, r]) + dg.get(&[h, r, j]) - dg.get(&[j, r, h])) * &half
        });
        let upper = TensorField::from_fn(m.chart(), &[Up, Down, Down], |i| {
            if i[1] > i[2] {
                return Expr::zero();
            }
            Expr::add_all((0..dim).map(|h| m.ginv(i[0], h) * lowered.get(&[h, i[1], i[2]])))
        });
        TensorField::from_fn(m.chart(), &[Up, Down, Down], |i| {
            upper.get(&[i[0], i[1].min(i[2]), i[1].max(i[2])]).clone()
        })
        .with_symmetry(Symmetry::Symmetric(1, 2))
    });
    ConnectionCoeffs { gamma: gamma.clone() }
}

/// Covariant derivative for an arbitrary (possibly non-symmetric) coefficient field:
/// partial derivative, plus `Γ^l_{sj} T^{..s..}` per up slot, minus
/// `Γ^s_{kj} T_{..s..}` per down slot. The new slot `j` is appended.
pub fn covariant_derivative_with(t: &TensorField, gamma: &TensorField) -> Result<TensorField, TensorError> {
    t.same_chart(gamma)?;
    let dim = t.dim();
    let rank = t.rank();
    let partial = t.partial();
    let mut src = vec![0; rank];
    let out = partial.map_indexed(|idx, d| {
        let j = idx[rank];
        let mut terms = vec![d.clone()];
        for slot in 0..rank {
            src.copy_from_slice(&idx[..rank]);
            let l = idx[slot];
            for s in 0..dim {
                src[slot] = s;
                let c = match t.slots()[slot] {
                    Up => gamma.get(&[l, s, j]),
                    Down => gamma.get(&[s, l, j]),
                };
                if c.is_zero() {
                    continue;
                }
                let v = t.get(&src);
                if v.is_zero() {
                    continue;
                }
                match t.slots()[slot] {
                    Up => terms.push(c * v),
                    Down => terms.push(-(c * v)),
                }
            }
        }
        Expr::add_all(terms)
    });
    Ok(out)
}

/// `T_{||j}` for the Levi-Civita connection of `m`.
pub fn covariant_derivative(t: &TensorField, m: &Metric) -> Result<TensorField, TensorError> {
    if t.chart() != m.chart() {
        return Err(TensorError::ChartMismatch(t.chart().name().into(), m.chart().name().into()));
    }
    covariant_derivative_with(t, christoffel(m).as_tensor())
}

/// `G^m_{klj} = Γ^m_{kl|j} − Γ^m_{kj|l} + Γ^m_{sj}Γ^s_{kl} − Γ^m_{sl}Γ^s_{kj}`
/// for any coefficient field.
pub fn riemann_from(gamma: &TensorField) -> TensorField {
    let dim = gamma.dim();
    let dgamma = gamma.partial();
    let g = |a: usize, b: usize, c: usize| gamma.get(&[a, b, c]);
    TensorField::from_fn(gamma.chart(), &[Up, Down, Down, Down], |i| {
        let (m, k, l, j) = (i[0], i[1], i[2], i[3]);
        if l == j {
            return Expr::zero();
        }
        let mut terms = vec![dgamma.get(&[m, k, l, j]).clone(), -dgamma.get(&[m, k, j, l])];
        for s in 0..dim {
            terms.push(g(m, s, j) * g(s, k, l));
            terms.push(-(g(m, s, l) * g(s, k, j)));
        }
        Expr::add_all(terms)
    })
    .with_symmetry(Symmetry::Antisymmetric(2, 3))
}

pub fn riemann_tensor(m: &Metric) -> TensorField {
    riemann_from(christoffel(m).as_tensor())
}

/// `G_{kl} = G^m_{klm}`; positive scalar curvature on the round sphere.
pub fn ricci_from_riemann(riem: &TensorField) -> TensorField {
    riem.contract(0, 3).expect("riemann has an up first slot and a down last slot")
}

pub fn ricci(m: &Metric) -> TensorField {
    ricci_from_riemann(&riemann_tensor(m)).with_symmetry(Symmetry::Symmetric(0, 1))
}

/// Negated Ricci, the sign under which the field equations are written:
/// `G_{kl} = G^m_{kml}`.
pub fn jordan_ricci(m: &Metric) -> TensorField {
    ricci(m).neg()
}

/// `g^{kl} G_{kl}` for any (down, down) field.
pub fn trace(m: &Metric, t: &TensorField) -> Expr {
    let dim = m.dim();
    Expr::add_all((0..dim).flat_map(|k| (0..dim).map(move |l| (k, l))).map(|(k, l)| m.ginv(k, l) * t.get(&[k, l])))
}

pub fn scalar_curvature(m: &Metric) -> Expr {
    trace(m, &ricci(m))
}

/// Checks `a_{k||l||j} − a_{k||j||l} + G^m_{klj} a_m = 0` for every field.
pub fn commutator_check(
    gamma: &TensorField,
    riem: &TensorField,
    fields: &[TensorField],
    sampler: &Sampler,
) -> Result<Comparison, TensorError> {
    let mut lhs = Vec::new();
    for a in fields {
        let dd = covariant_derivative_with(&covariant_derivative_with(a, gamma)?, gamma)?;
        let comm = dd.sub(&dd.permute(&[0, 2, 1])?)?;
        let ga = riem.contract_with(0, a, 0)?;
        lhs.extend(comm.add(&ga)?.into_comps());
    }
    let zeros = vec![Expr::zero(); lhs.len()];
    Ok(sampler.compare(&lhs, &zeros)?)
}

/// Cyclic sum of `G^m_{klj}` over its three lower slots.
pub fn bianchi_cyclic(riem: &TensorField) -> Result<TensorField, TensorError> {
    riem.add(&riem.permute(&[0, 3, 1, 2])?)?.add(&riem.permute(&[0, 2, 3, 1])?)
}

/// `Π^i_{jk} = Γ^i_{jk} − (Γ^a_{aj} δ^i_k + Γ^a_{ak} δ^i_j)/(n+1)`.
pub fn veblen_projective_connection(c: &ConnectionCoeffs) -> TensorField {
    let dim = c.chart().dim();
    let w = Expr::ratio(1, dim as i64 + 1);
    let tr: Vec<Expr> = (0..dim).map(|j| Expr::add_all((0..dim).map(|a| c.get(a, a, j).clone()))).collect();
    TensorField::from_fn(c.chart(), &[Up, Down, Down], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut e = c.get(i, j, k).clone();
        if i == k {
            e = e - &tr[j] * &w;
        }
        if i == j {
            e = e - &tr[k] * &w;
        }
        e
    })
    .with_symmetry(Symmetry::Symmetric(1, 2))
}

/// `Γ^i_{jk} + δ^i_j φ_k + δ^i_k φ_j`.
pub fn gamma_phi_shift(c: &ConnectionCoeffs, phi: &TensorField) -> Result<ConnectionCoeffs, TensorError> {
    c.as_tensor().same_chart(phi)?;
    if phi.slots() != [Down] {
        return Err(TensorError::SignatureMismatch(format!("φ must be a covector, got {:?}", phi.slots())));
    }
    let gamma = c.as_tensor().map_indexed(|ix, e| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let mut e = e.clone();
        if i == j {
            e = e + phi.get(&[k]);
        }
        if i == k {
            e = e + phi.get(&[j]);
        }
        e
    });
    Ok(ConnectionCoeffs { gamma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn flat_metric_has_no_connection() {
        let m = fixtures::flat4();
        assert!(christoffel(&m).as_tensor().is_zero());
        assert!(riemann_tensor(&m).is_zero());
    }

    #[test]
    fn sphere_christoffel_symbols() {
        let m = fixtures::sphere2();
        let c = christoffel(&m);
        let th = Expr::sym("theta");
        assert_eq!(c.get(0, 1, 1), &-(th.clone().sin() * th.clone().cos()));
        assert_eq!(c.get(1, 0, 1), &(th.clone().cos() / th.clone().sin()));
        assert_eq!(c.get(1, 1, 0), c.get(1, 0, 1));
    }

    #[test]
    fn schwarzschild_gamma_r_tt() {
        let m = fixtures::schwarzschild();
        let c = christoffel(&m);
        let (mm, r) = (Expr::sym("M"), Expr::sym("r"));
        let want = mm.clone() / r.clone().powi(2) * (Expr::one() - Expr::int(2) * mm / r);
        assert!(Sampler::new(0).compare_pair(c.get(1, 0, 0), &want).unwrap().passed());
    }

    #[test]
    fn sphere_curvature() {
        let m = fixtures::sphere2();
        let riem = riemann_tensor(&m);
        let s2 = Expr::sym("theta").sin().powi(2);
        // G^θ_{φθφ} with a_{k||l||j} − a_{k||j||l} = −G^m_{klj} a_m
        assert_eq!(riem.get(&[0, 1, 0, 1]), &-s2.clone());
        assert_eq!(riem.get(&[0, 1, 1, 0]), &s2);
        assert_eq!(scalar_curvature(&m), Expr::int(2));
    }

    #[test]
    fn schwarzschild_is_ricci_flat() {
        let m = fixtures::schwarzschild();
        let ric = ricci(&m);
        assert!(ric.compare_zero(&Sampler::new(0).with_tolerance(1e-10)).unwrap().passed());
    }

    #[test]
    fn metric_is_covariantly_constant() {
        for m in [fixtures::sphere2(), fixtures::schwarzschild()] {
            let d = covariant_derivative(m.tensor(), &m).unwrap();
            assert!(d.compare_zero(&Sampler::new(1)).unwrap().passed());
        }
    }

    #[test]
    fn veblen_is_trace_free_and_shift_invariant() {
        let m = fixtures::schwarzschild();
        let c = christoffel(&m);
        let pi = veblen_projective_connection(&c);
        let tr = pi.contract(0, 1).unwrap();
        assert!(tr.compare_zero(&Sampler::new(0)).unwrap().passed());
        let phi = fixtures::random_covector(m.chart(), 7, 2);
        let shifted = gamma_phi_shift(&c, &phi).unwrap();
        let pi2 = veblen_projective_connection(&shifted);
        assert!(pi.compare(&pi2, &Sampler::new(0)).unwrap().passed());
    }

    #[test]
    fn phi_shift_on_flat_connection() {
        let chart = Chart::new("p", ["x", "y"]);
        let c = ConnectionCoeffs::zero(&chart);
        let phi = TensorField::covector(&chart, vec![Expr::one(), Expr::zero()]);
        let s = gamma_phi_shift(&c, &phi).unwrap();
        assert_eq!(s.get(0, 0, 0), &Expr::int(2));
        assert_eq!(s.get(0, 0, 1), &Expr::zero());
        assert_eq!(s.get(1, 0, 1), &Expr::one());
        assert_eq!(s.get(1, 1, 0), &Expr::one());
        let z = TensorField::covector(&chart, vec![Expr::zero(), Expr::zero()]);
        assert_eq!(gamma_phi_shift(&c, &z).unwrap(), c);
    }
}
