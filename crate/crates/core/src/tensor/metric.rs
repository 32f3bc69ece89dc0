use std::sync::{Arc, OnceLock};

use super::{Chart, Symmetry, TensorError, TensorField, Variance};
use crate::expr::{Expr, Sampler};

/// Symmetric (down, down) metric with its inverse and determinant.
#[derive(Debug, Clone)]
pub struct Metric(Arc<MetricInner>);

#[derive(Debug)]
struct MetricInner {
    g: TensorField,
    inv: TensorField,
    det: Expr,
    christoffel: OnceLock<TensorField>,
}

impl PartialEq for Metric {
    fn eq(&self, other: &Metric) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.g == other.0.g
    }
}

const DD: [Variance; 2] = [Variance::Down, Variance::Down];
const UU: [Variance; 2] = [Variance::Up, Variance::Up];

/// Symbolic Gauss-Jordan inverse and determinant. Pivots are structurally
/// nonzero entries of least size; `None` when no pivot exists.
pub(crate) fn invert(a: &[Vec<Expr>]) -> Option<(Vec<Vec<Expr>>, Expr)> {
    let n = a.len();
    let mut m: Vec<Vec<Expr>> = a.to_vec();
    let mut inv: Vec<Vec<Expr>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect())
        .collect();
    let mut det = Expr::one();
    for col in 0..n {
        let pivot = (col..n).filter(|&r| !m[r][col].is_zero()).min_by_key(|&r| m[r][col].node_count())?;
        if pivot != col {
            m.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * &p;
        let pr = p.recip();
        for j in 0..n {
            m[col][j] = &m[col][j] * &pr;
            inv[col][j] = &inv[col][j] * &pr;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                m[r][j] = &m[r][j] - &(&f * &m[col][j]);
                inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Some((inv, det))
}

impl Metric {
    /// Build from a (down, down) field; the inverse is computed symbolically.
    pub fn new(g: TensorField) -> Result<Metric, TensorError> {
        if g.slots() != DD {
            return Err(TensorError::SignatureMismatch(format!("metric needs (down, down), got {:?}", g.slots())));
        }
        let n = g.dim();
        let rows: Vec<Vec<Expr>> = (0..n).map(|i| (0..n).map(|j| g.get(&[i, j]).clone()).collect()).collect();
        let (inv, det) = invert(&rows).ok_or_else(|| TensorError::SingularMetric("no nonzero pivot".into()))?;
        let inv = TensorField::from_fn(g.chart(), &UU, |i| inv[i[0]][i[1]].clone());
        Metric::assemble(g, inv, det)
    }

    pub fn from_rows(chart: &Chart, rows: Vec<Vec<Expr>>) -> Result<Metric, TensorError> {
        let g = TensorField::from_fn(chart, &DD, |i| rows[i[0]][i[1]].clone());
        Metric::new(g)
    }

    pub fn diagonal(chart: &Chart, diag: Vec<Expr>) -> Result<Metric, TensorError> {
        assert_eq!(diag.len(), chart.dim());
        let g = TensorField::from_fn(chart, &DD, |i| if i[0] == i[1] { diag[i[0]].clone() } else { Expr::zero() });
        Metric::new(g)
    }

    /// Build from a known inverse and determinant; `g · inv = 1` is checked
    /// by sampling.
    pub fn with_inverse(g: TensorField, inv: TensorField, det: Expr) -> Result<Metric, TensorError> {
        if g.slots() != DD || inv.slots() != UU {
            return Err(TensorError::SignatureMismatch("metric needs (down, down) and (up, up)".into()));
        }
        g.same_chart(&inv)?;
        let mixed = g.contract_with(1, &inv, 0)?;
        let delta = TensorField::kronecker(g.chart());
        let cmp = Sampler::new(0).compare(mixed.comps(), delta.comps())?;
        if let Some(f) = cmp.failure {
            return Err(TensorError::SingularMetric(format!("supplied inverse fails at component {}", f.index)));
        }
        Metric::assemble(g, inv, det)
    }

    fn assemble(g: TensorField, inv: TensorField, det: Expr) -> Result<Metric, TensorError> {
        if det.is_zero() {
            return Err(TensorError::SingularMetric("determinant is identically zero".into()));
        }
        let g = g.with_symmetry(Symmetry::Symmetric(0, 1));
        let inv = inv.with_symmetry(Symmetry::Symmetric(0, 1));
        Ok(Metric(Arc::new(MetricInner { g, inv, det, christoffel: OnceLock::new() })))
    }

    pub fn chart(&self) -> &Chart {
        self.0.g.chart()
    }

    pub fn dim(&self) -> usize {
        self.chart().dim()
    }

    pub fn tensor(&self) -> &TensorField {
        &self.0.g
    }

    pub fn inverse(&self) -> &TensorField {
        &self.0.inv
    }

    pub fn det(&self) -> &Expr {
        &self.0.det
    }

    pub fn g(&self, i: usize, j: usize) -> &Expr {
        self.0.g.get(&[i, j])
    }

    pub fn ginv(&self, i: usize, j: usize) -> &Expr {
        self.0.inv.get(&[i, j])
    }

    /// `√(−g)` for Lorentzian signature.
    pub fn volume_lorentzian(&self) -> Expr {
        (-self.det()).sqrt()
    }

    /// Symmetry of g and `g · g⁻¹ = 1`, by sampling.
    pub fn verify(&self, sampler: &Sampler) -> Result<bool, TensorError> {
        if !self.0.g.verify_symmetries(sampler)?.passed() {
            return Ok(false);
        }
        let mixed = self.0.g.contract_with(1, &self.0.inv, 0)?;
        let delta = TensorField::kronecker(self.chart());
        Ok(sampler.compare(mixed.comps(), delta.comps())?.passed())
    }

    pub(crate) fn christoffel_cache(&self) -> &OnceLock<TensorField> {
        &self.0.christoffel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Sampler;

    #[test]
    fn inverse_of_diagonal_metric() {
        let c = Chart::new("sph", ["theta", "phi"]);
        let th = Expr::sym("theta");
        let m = Metric::diagonal(&c, vec![Expr::one(), th.clone().sin().powi(2)]).unwrap();
        assert_eq!(m.ginv(1, 1), &th.clone().sin().powi(-2));
        assert_eq!(m.det(), &th.sin().powi(2));
        assert!(m.verify(&Sampler::new(0)).unwrap());
    }

    #[test]
    fn inverse_of_full_symmetric_metric() {
        let c = Chart::new("c", ["x", "y", "z"]);
        let (x, y, z) = (Expr::sym("x"), Expr::sym("y"), Expr::sym("z"));
        let rows = vec![
            vec![x.clone() + 2, y.clone(), Expr::one()],
            vec![y.clone(), z.clone() * z.clone() + 1, x.clone()],
            vec![Expr::one(), x.clone(), Expr::int(3)],
        ];
        let m = Metric::from_rows(&c, rows).unwrap();
        assert!(m.verify(&Sampler::new(5)).unwrap());
    }

    #[test]
    fn singular_metric_is_rejected() {
        let c = Chart::new("c", ["x", "y"]);
        let r = Metric::diagonal(&c, vec![Expr::one(), Expr::zero()]);
        assert!(matches!(r, Err(TensorError::SingularMetric(_))));
    }

    #[test]
    fn wrong_supplied_inverse_is_rejected() {
        let c = Chart::new("c", ["x", "y"]);
        let g = TensorField::from_fn(&c, &DD, |i| if i[0] == i[1] { Expr::int(2) } else { Expr::zero() });
        let inv = TensorField::from_fn(&c, &UU, |i| if i[0] == i[1] { Expr::one() } else { Expr::zero() });
        assert!(Metric::with_inverse(g, inv, Expr::int(4)).is_err());
    }
}
