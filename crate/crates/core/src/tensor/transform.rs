use std::collections::HashMap;

use super::metric::invert;
use super::{Chart, TensorError, TensorField, Variance};
use crate::expr::{Expr, Sampler};

/// How up slots get the Jacobian `∂x̄^a/∂x^i`.
#[derive(Debug, Clone)]
pub enum InverseJacobian {
    /// Explicit inverse map `x̄^a(x)`; mutual inversion is checked.
    Map(Vec<Expr>),
    /// Matrix `[a][i]` already expressed in the new coordinates.
    Matrix(Vec<Vec<Expr>>),
    /// Invert the forward Jacobian symbolically.
    Symbolic,
}

/// Coordinate change from chart `from` (x) to chart `to` (x̄), given as the
/// old coordinates in terms of the new ones.
#[derive(Debug, Clone)]
pub struct CoordMap {
    pub from: Chart,
    pub to: Chart,
    pub old_in_new: Vec<Expr>,
    pub inverse: InverseJacobian,
}

impl CoordMap {
    pub fn new(from: &Chart, to: &Chart, old_in_new: Vec<Expr>, inverse: InverseJacobian) -> CoordMap {
        assert_eq!(from.dim(), to.dim(), "charts of different dimension");
        assert_eq!(old_in_new.len(), from.dim(), "one expression per old coordinate");
        CoordMap { from: from.clone(), to: to.clone(), old_in_new, inverse }
    }

    pub fn identity(chart: &Chart) -> CoordMap {
        let xs: Vec<Expr> = (0..chart.dim()).map(|k| chart.coord_expr(k)).collect();
        CoordMap::new(chart, chart, xs.clone(), InverseJacobian::Map(xs))
    }

    fn to_new(&self) -> HashMap<String, Expr> {
        self.from.coords().iter().cloned().zip(self.old_in_new.iter().cloned()).collect()
    }

    /// Old coordinates replaced by their expressions in the new ones.
    pub fn pull(&self, e: &Expr) -> Expr {
        e.subs(&self.to_new())
    }

    /// `∂x^i/∂x̄^b`, indexed `[i][b]`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.old_in_new
            .iter()
            .map(|x| self.to.coords().iter().map(|c| x.diff(c)).collect())
            .collect()
    }

    /// `∂x̄^a/∂x^i` in the new coordinates, indexed `[a][i]`.
    pub fn inverse_jacobian(&self) -> Result<Vec<Vec<Expr>>, TensorError> {
        match &self.inverse {
            InverseJacobian::Matrix(m) => Ok(m.clone()),
            InverseJacobian::Map(xbar) => {
                let sub = self.to_new();
                Ok(xbar
                    .iter()
                    .map(|f| self.from.coords().iter().map(|c| f.diff(c).subs(&sub)).collect())
                    .collect())
            }
            InverseJacobian::Symbolic => invert(&self.jacobian())
                .map(|(m, _)| m)
                .ok_or_else(|| TensorError::MapError("Jacobian is singular".into())),
        }
    }

    /// Check that an explicit inverse map really inverts the forward map.
    pub fn verify(&self, sampler: &Sampler) -> Result<(), TensorError> {
        let InverseJacobian::Map(xbar) = &self.inverse else {
            return Ok(());
        };
        let sub = self.to_new();
        let there: Vec<Expr> = xbar.iter().map(|f| f.subs(&sub)).collect();
        let ids: Vec<Expr> = (0..self.to.dim()).map(|k| self.to.coord_expr(k)).collect();
        let c = sampler.compare(&there, &ids)?;
        if let Some(f) = c.failure {
            return Err(TensorError::MapError(format!(
                "x̄^{} does not return to itself (residual {:.3e})",
                f.index, f.residual
            )));
        }
        let back: HashMap<String, Expr> = self.to.coords().iter().cloned().zip(xbar.iter().cloned()).collect();
        let here: Vec<Expr> = self.old_in_new.iter().map(|x| x.subs(&back)).collect();
        let ids: Vec<Expr> = (0..self.from.dim()).map(|k| self.from.coord_expr(k)).collect();
        let c = sampler.compare(&here, &ids)?;
        if let Some(f) = c.failure {
            return Err(TensorError::MapError(format!(
                "x^{} does not return to itself (residual {:.3e})",
                f.index, f.residual
            )));
        }
        Ok(())
    }

    /// `other ∘ self`: first this map, then `other`.
    pub fn then(&self, other: &CoordMap) -> CoordMap {
        assert!(self.to == other.from, "maps do not chain");
        let sub = other.to_new();
        let old_in_new = self.old_in_new.iter().map(|x| x.subs(&sub)).collect();
        let inverse = match (&self.inverse, &other.inverse) {
            (InverseJacobian::Map(a), InverseJacobian::Map(b)) => {
                let sub: HashMap<String, Expr> = self.to.coords().iter().cloned().zip(a.iter().cloned()).collect();
                InverseJacobian::Map(b.iter().map(|f| f.subs(&sub)).collect())
            }
            _ => InverseJacobian::Symbolic,
        };
        CoordMap::new(&self.from, &other.to, old_in_new, inverse)
    }
}

impl TensorField {
    /// Components in the new chart of `map`, by the Jacobian law per slot.
    pub fn transform(&self, map: &CoordMap) -> Result<TensorField, TensorError> {
        if self.chart() != &map.from {
            return Err(TensorError::ChartMismatch(self.chart().name().into(), map.from.name().into()));
        }
        map.verify(&Sampler::new(0))?;
        let a = map.jacobian();
        let b = if self.slots().contains(&Variance::Up) {
            map.inverse_jacobian()?
        } else {
            Vec::new()
        };
        let sub = map.to_new();
        let mut t = TensorField::new(&map.to, self.slots(), self.comps().iter().map(|e| e.subs(&sub)).collect())?;
        for slot in 0..self.rank() {
            t = t.apply(slot, |new, old| match self.slots()[slot] {
                Variance::Up => b[new][old].clone(),
                Variance::Down => a[old][new].clone(),
            });
        }
        Ok(TensorField { symmetries: self.symmetries().to_vec(), ..t })
    }

    /// `T'[.. n ..] = Σ_o m(n, o) T[.. o ..]` on one slot.
    fn apply(&self, slot: usize, m: impl Fn(usize, usize) -> Expr) -> TensorField {
        let dim = self.dim();
        let mut src = vec![0; self.rank()];
        self.map_indexed(|idx, _| {
            src.copy_from_slice(idx);
            Expr::add_all((0..dim).map(|o| {
                src[slot] = o;
                m(idx[slot], o) * self.get(&src)
            }))
        })
    }
}
