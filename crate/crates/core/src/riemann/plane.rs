//! Coordinates that are plane at a point, and the covariant derivative
//! obtained from them.

use std::collections::HashMap;

use super::christoffel;
use crate::expr::{Expr, Sampler};
use crate::tensor::{Chart, CoordMap, InverseJacobian, Metric, TensorError, TensorField};

/// `x^k = p^k + x̄^k − ½ Γ^k_{lj}(P) x̄^l x̄^j` around the point `P`.
#[derive(Debug, Clone)]
pub struct PlaneCoordinates {
    pub point: Vec<Expr>,
    pub map: CoordMap,
}

impl PlaneCoordinates {
    pub fn chart(&self) -> &Chart {
        &self.map.to
    }

    /// Substitution sending every new coordinate to zero, i.e. to `P`.
    pub fn at_origin(&self) -> HashMap<String, Expr> {
        self.chart().coords().iter().map(|c| (c.clone(), Expr::zero())).collect()
    }

    /// First partials of the metric in the new chart, evaluated at `P`.
    pub fn metric_partials_at_point(&self, m: &Metric) -> Result<TensorField, TensorError> {
        let gbar = m.tensor().transform(&self.map)?;
        let origin = self.at_origin();
        Ok(gbar.partial().map(|e| e.subs(&origin)))
    }
}

fn at_point(chart: &Chart, point: &[Expr]) -> HashMap<String, Expr> {
    chart.coords().iter().cloned().zip(point.iter().cloned()).collect()
}

/// The quadratic coordinate change that makes `m` plane at `point`.
pub fn plane_coordinates_at(m: &Metric, point: &[Expr]) -> Result<PlaneCoordinates, TensorError> {
    let chart = m.chart();
    let dim = chart.dim();
    assert_eq!(point.len(), dim, "one value per coordinate");
    let sub = at_point(chart, point);
    let det = m.det().subs(&sub);
    if det.is_zero() || Sampler::new(0).compare_pair(&det, &Expr::zero())?.passed() {
        return Err(TensorError::SingularMetric(format!("determinant vanishes at {point:?}")));
    }
    let gamma = christoffel(m);
    let gp: Vec<Expr> = gamma.as_tensor().comps().iter().map(|e| e.subs(&sub)).collect();
    let gp = |k: usize, l: usize, j: usize| &gp[(k * dim + l) * dim + j];
    let bar = Chart::new(&format!("{}-plane", chart.name()), chart.coords().iter().map(|c| format!("{c}bar")));
    let xb: Vec<Expr> = (0..dim).map(|k| bar.coord_expr(k)).collect();
    let half = Expr::ratio(1, 2);
    let old_in_new = (0..dim)
        .map(|k| {
            let mut terms = vec![point[k].clone(), xb[k].clone()];
            for l in 0..dim {
                for j in 0..dim {
                    terms.push(-(gp(k, l, j) * &xb[l] * &xb[j] * &half));
                }
            }
            Expr::add_all(terms)
        })
        .collect();
    // The forward Jacobian is 1 − Γ(P)x̄; 1 + Γ(P)x̄ inverts it to first
    // order, which is all a first derivative at P can see.
    let inv = (0..dim)
        .map(|a| {
            (0..dim)
                .map(|i| {
                    let delta = if a == i { Expr::one() } else { Expr::zero() };
                    delta + Expr::add_all((0..dim).map(|j| gp(a, i, j) * &xb[j]))
                })
                .collect()
        })
        .collect();
    let map = CoordMap::new(chart, &bar, old_in_new, InverseJacobian::Matrix(inv));
    Ok(PlaneCoordinates { point: point.to_vec(), map })
}

/// Covariant derivative at `point` by the constructive route: transform to
/// plane coordinates, differentiate, and read off the components at `P`
/// (where the Jacobian is the identity).
pub fn plane_route_derivative(t: &TensorField, m: &Metric, point: &[Expr]) -> Result<TensorField, TensorError> {
    let pc = plane_coordinates_at(m, point)?;
    let tbar = t.transform(&pc.map)?;
    let origin = pc.at_origin();
    let d = tbar.partial().map(|e| e.subs(&origin));
    let slots = d.slots().to_vec();
    TensorField::new(m.chart(), &slots, d.into_comps())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::riemann::covariant_derivative;

    #[test]
    fn flat_metric_gives_identity_map() {
        let m = fixtures::flat4();
        let p: Vec<Expr> = (1..=4).map(Expr::int).collect();
        let pc = plane_coordinates_at(&m, &p).unwrap();
        for (k, x) in pc.map.old_in_new.iter().enumerate() {
            assert_eq!(x, &(Expr::int(k as i64 + 1) + pc.chart().coord_expr(k)));
        }
    }

    #[test]
    fn sphere_metric_is_plane_at_point() {
        let m = fixtures::sphere2();
        let p = vec![Expr::pi() / 3, Expr::zero()];
        let pc = plane_coordinates_at(&m, &p).unwrap();
        let dg = pc.metric_partials_at_point(&m).unwrap();
        let c = dg.compare_zero(&Sampler::new(0)).unwrap();
        assert!(c.passed() && c.max_residual < 1e-9, "{c:?}");
    }

    #[test]
    fn schwarzschild_metric_is_plane_at_point() {
        let m = fixtures::schwarzschild();
        let mm = Expr::sym("M");
        let p = vec![Expr::zero(), mm * 5, Expr::pi() / 2, Expr::zero()];
        let pc = plane_coordinates_at(&m, &p).unwrap();
        let dg = pc.metric_partials_at_point(&m).unwrap();
        let s = Sampler::new(0).with_positive(["M"]);
        assert!(dg.compare_zero(&s).unwrap().passed());
    }

    #[test]
    fn plane_route_matches_formula_on_sphere() {
        let m = fixtures::sphere2();
        let a = fixtures::random_field(m.chart(), &[crate::tensor::Variance::Down], 5, 2);
        let p = vec![Expr::ratio(7, 5), Expr::ratio(1, 3)];
        let via_plane = plane_route_derivative(&a, &m, &p).unwrap();
        let sub = at_point(m.chart(), &p);
        let direct = covariant_derivative(&a, &m).unwrap().map(|e| e.subs(&sub));
        assert!(via_plane.compare(&direct, &Sampler::new(0).with_tolerance(1e-8)).unwrap().passed());
    }

    #[test]
    fn singular_point_is_rejected() {
        let m = fixtures::sphere2();
        let r = plane_coordinates_at(&m, &[Expr::zero(), Expr::zero()]);
        assert!(matches!(r, Err(TensorError::SingularMetric(_))));
    }
}
