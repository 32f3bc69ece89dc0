//! Dense tensor fields on a coordinate chart.

pub(crate) mod metric;
mod transform;

use std::fmt;
use std::sync::Arc;

use crate::expr::{Comparison, Expr, ExprError, Sampler};

pub use metric::Metric;
pub use transform::{CoordMap, InverseJacobian};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("slot error: {0}")]
    SlotError(String),
    #[error("signature mismatch: {0}")]
    SignatureMismatch(String),
    #[error("fields live on different charts (`{0}` vs `{1}`)")]
    ChartMismatch(String, String),
    #[error("coordinate maps are not mutually inverse: {0}")]
    MapError(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("metric is singular: {0}")]
    SingularMetric(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Named coordinate system.
#[derive(Clone, PartialEq, Eq)]
pub struct Chart(Arc<ChartInner>);

#[derive(PartialEq, Eq)]
struct ChartInner {
    name: String,
    coords: Vec<String>,
}

impl Chart {
    pub fn new<S: Into<String>>(name: &str, coords: impl IntoIterator<Item = S>) -> Chart {
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        assert!(!coords.is_empty(), "a chart needs at least one coordinate");
        for (i, c) in coords.iter().enumerate() {
            assert!(!coords[..i].contains(c), "coordinate `{c}` repeated");
        }
        Chart(Arc::new(ChartInner { name: name.to_string(), coords }))
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.0.coords
    }

    pub fn coord(&self, k: usize) -> &str {
        &self.0.coords[k]
    }

    pub fn coord_expr(&self, k: usize) -> Expr {
        Expr::sym(&self.0.coords[k])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.coords.iter().position(|c| c == name)
    }
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.0.name, self.0.coords.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variance {
    Up,
    Down,
}

impl Variance {
    pub fn flip(self) -> Variance {
        match self {
            Variance::Up => Variance::Down,
            Variance::Down => Variance::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Symmetric(usize, usize),
    Antisymmetric(usize, usize),
}

impl Symmetry {
    fn slots(self) -> (usize, usize) {
        match self {
            Symmetry::Symmetric(a, b) | Symmetry::Antisymmetric(a, b) => (a, b),
        }
    }

    fn remap(self, f: impl Fn(usize) -> Option<usize>) -> Option<Symmetry> {
        let (a, b) = self.slots();
        let (a, b) = (f(a)?, f(b)?);
        Some(match self {
            Symmetry::Symmetric(..) => Symmetry::Symmetric(a, b),
            Symmetry::Antisymmetric(..) => Symmetry::Antisymmetric(a, b),
        })
    }
}

/// Every multi-index of the given rank, in lexicographic order.
pub fn multi_indices(rank: usize, dim: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = dim.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % dim;
            flat /= dim;
        }
        idx
    })
}

fn flat_index(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| {
        debug_assert!(i < dim);
        acc * dim + i
    })
}

/// Component array with a variance signature; the first slot varies slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    chart: Chart,
    slots: Vec<Variance>,
    comps: Vec<Expr>,
    symmetries: Vec<Symmetry>,
}

impl TensorField {
    pub fn new(chart: &Chart, slots: &[Variance], comps: Vec<Expr>) -> Result<TensorField, TensorError> {
        let want = chart.dim().pow(slots.len() as u32);
        if comps.len() != want {
            return Err(TensorError::SignatureMismatch(format!(
                "{} components given, rank {} on dimension {} needs {want}",
                comps.len(),
                slots.len(),
                chart.dim()
            )));
        }
        Ok(TensorField { chart: chart.clone(), slots: slots.to_vec(), comps, symmetries: Vec::new() })
    }

    pub fn from_fn(chart: &Chart, slots: &[Variance], mut f: impl FnMut(&[usize]) -> Expr) -> TensorField {
        let comps = multi_indices(slots.len(), chart.dim()).map(|i| f(&i)).collect();
        TensorField { chart: chart.clone(), slots: slots.to_vec(), comps, symmetries: Vec::new() }
    }

    pub fn zeros(chart: &Chart, slots: &[Variance]) -> TensorField {
        TensorField::from_fn(chart, slots, |_| Expr::zero())
    }

    pub fn scalar(chart: &Chart, e: Expr) -> TensorField {
        TensorField { chart: chart.clone(), slots: Vec::new(), comps: vec![e], symmetries: Vec::new() }
    }

    pub fn vector(chart: &Chart, comps: Vec<Expr>) -> TensorField {
        TensorField::new(chart, &[Variance::Up], comps).expect("one component per coordinate")
    }

    pub fn covector(chart: &Chart, comps: Vec<Expr>) -> TensorField {
        TensorField::new(chart, &[Variance::Down], comps).expect("one component per coordinate")
    }

    /// Mixed Kronecker delta δ^i_j.
    pub fn kronecker(chart: &Chart) -> TensorField {
        TensorField::from_fn(chart, &[Variance::Up, Variance::Down], |i| {
            if i[0] == i[1] {
                Expr::one()
            } else {
                Expr::zero()
            }
        })
    }

    /// Declare a slot symmetry; it is checked by [`TensorField::verify_symmetries`].
    pub fn with_symmetry(mut self, s: Symmetry) -> TensorField {
        let (a, b) = s.slots();
        assert!(a < self.rank() && b < self.rank() && a != b, "bad symmetry slots {s:?}");
        assert_eq!(self.slots[a], self.slots[b], "symmetric slots must share variance");
        if !self.symmetries.contains(&s) {
            self.symmetries.push(s);
        }
        self
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Variance] {
        &self.slots
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<Expr> {
        self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        assert_eq!(idx.len(), self.rank(), "index rank");
        &self.comps[flat_index(idx, self.dim())]
    }

    pub fn as_scalar(&self) -> Option<&Expr> {
        (self.rank() == 0).then(|| &self.comps[0])
    }

    /// Structurally zero in every component.
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn map(&self, f: impl FnMut(&Expr) -> Expr) -> TensorField {
        TensorField { comps: self.comps.iter().map(f).collect(), ..self.clone() }
    }

    /// Like [`TensorField::map`] but with the multi-index of each component.
    pub fn map_indexed(&self, mut f: impl FnMut(&[usize], &Expr) -> Expr) -> TensorField {
        let comps = multi_indices(self.rank(), self.dim()).zip(&self.comps).map(|(i, e)| f(&i, e)).collect();
        TensorField { comps, ..self.clone() }
    }

    fn same_shape(&self, other: &TensorField) -> Result<(), TensorError> {
        self.same_chart(other)?;
        if self.slots != other.slots {
            return Err(TensorError::SignatureMismatch(format!("{:?} vs {:?}", self.slots, other.slots)));
        }
        Ok(())
    }

    pub fn same_chart(&self, other: &TensorField) -> Result<(), TensorError> {
        if self.chart != other.chart {
            return Err(TensorError::ChartMismatch(self.chart.name().into(), other.chart.name().into()));
        }
        Ok(())
    }

    fn common_symmetries(&self, other: &TensorField) -> Vec<Symmetry> {
        self.symmetries.iter().copied().filter(|s| other.symmetries.contains(s)).collect()
    }

    pub fn add(&self, other: &TensorField) -> Result<TensorField, TensorError> {
        self.same_shape(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a + b).collect();
        Ok(TensorField { comps, symmetries: self.common_symmetries(other), ..self.clone() })
    }

    pub fn sub(&self, other: &TensorField) -> Result<TensorField, TensorError> {
        self.same_shape(other)?;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a - b).collect();
        Ok(TensorField { comps, symmetries: self.common_symmetries(other), ..self.clone() })
    }

    pub fn neg(&self) -> TensorField {
        self.map(|e| -e)
    }

    pub fn scale(&self, s: &Expr) -> TensorField {
        self.map(|e| e * s)
    }

    pub fn tensor_product(&self, other: &TensorField) -> Result<TensorField, TensorError> {
        self.same_chart(other)?;
        let mut comps = Vec::with_capacity(self.comps.len() * other.comps.len());
        for a in &self.comps {
            for b in &other.comps {
                comps.push(a * b);
            }
        }
        let mut slots = self.slots.clone();
        slots.extend(&other.slots);
        let shift = self.rank();
        let mut symmetries = self.symmetries.clone();
        symmetries.extend(other.symmetries.iter().filter_map(|s| s.remap(|i| Some(i + shift))));
        Ok(TensorField { chart: self.chart.clone(), slots, comps, symmetries })
    }

    fn check_slot(&self, slot: usize) -> Result<(), TensorError> {
        if slot >= self.rank() {
            return Err(TensorError::SlotError(format!("slot {slot} does not exist on a rank-{} field", self.rank())));
        }
        Ok(())
    }

    /// Trace over one up slot and one down slot.
    pub fn contract(&self, up: usize, down: usize) -> Result<TensorField, TensorError> {
        self.check_slot(up)?;
        self.check_slot(down)?;
        if up == down || self.slots[up] == self.slots[down] {
            return Err(TensorError::SlotError(format!(
                "slots {up} and {down} do not have opposite variance"
            )));
        }
        let rank = self.rank();
        let keep: Vec<usize> = (0..rank).filter(|&s| s != up && s != down).collect();
        let slots: Vec<Variance> = keep.iter().map(|&s| self.slots[s]).collect();
        let dim = self.dim();
        let mut full = vec![0; rank];
        let comps = multi_indices(keep.len(), dim)
            .map(|idx| {
                for (k, &s) in keep.iter().enumerate() {
                    full[s] = idx[k];
                }
                Expr::add_all((0..dim).map(|a| {
                    full[up] = a;
                    full[down] = a;
                    self.get(&full).clone()
                }))
            })
            .collect();
        let symmetries = self
            .symmetries
            .iter()
            .filter_map(|s| s.remap(|i| keep.iter().position(|&k| k == i)))
            .collect();
        Ok(TensorField { chart: self.chart.clone(), slots, comps, symmetries })
    }

    /// Contract slot `a` of `self` against slot `b` of `other` (opposite
    /// variance); remaining slots of `self` come first.
    pub fn contract_with(&self, a: usize, other: &TensorField, b: usize) -> Result<TensorField, TensorError> {
        self.same_chart(other)?;
        self.check_slot(a)?;
        other.check_slot(b)?;
        if self.slots[a] == other.slots[b] {
            return Err(TensorError::SlotError(format!("slots {a} and {b} do not have opposite variance")));
        }
        let dim = self.dim();
        let keep_a: Vec<usize> = (0..self.rank()).filter(|&s| s != a).collect();
        let keep_b: Vec<usize> = (0..other.rank()).filter(|&s| s != b).collect();
        let mut slots: Vec<Variance> = keep_a.iter().map(|&s| self.slots[s]).collect();
        slots.extend(keep_b.iter().map(|&s| other.slots[s]));
        let mut ia = vec![0; self.rank()];
        let mut ib = vec![0; other.rank()];
        let comps = multi_indices(slots.len(), dim)
            .map(|idx| {
                for (k, &s) in keep_a.iter().enumerate() {
                    ia[s] = idx[k];
                }
                for (k, &s) in keep_b.iter().enumerate() {
                    ib[s] = idx[keep_a.len() + k];
                }
                Expr::add_all((0..dim).map(|m| {
                    ia[a] = m;
                    ib[b] = m;
                    self.get(&ia) * other.get(&ib)
                }))
            })
            .collect();
        Ok(TensorField { chart: self.chart.clone(), slots, comps, symmetries: Vec::new() })
    }

    /// Reorder slots: slot `k` of the result is slot `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<TensorField, TensorError> {
        let rank = self.rank();
        let mut seen = vec![false; rank];
        if order.len() != rank || order.iter().any(|&s| s >= rank || std::mem::replace(&mut seen[s], true)) {
            return Err(TensorError::SlotError(format!("{order:?} is not a permutation of {rank} slots")));
        }
        let slots = order.iter().map(|&s| self.slots[s]).collect();
        let mut old = vec![0; rank];
        let comps = multi_indices(rank, self.dim())
            .map(|idx| {
                for (k, &s) in order.iter().enumerate() {
                    old[s] = idx[k];
                }
                self.get(&old).clone()
            })
            .collect();
        let symmetries = self
            .symmetries
            .iter()
            .filter_map(|s| s.remap(|i| order.iter().position(|&k| k == i)))
            .collect();
        Ok(TensorField { chart: self.chart.clone(), slots, comps, symmetries })
    }

    /// Plain partial derivatives, appended as a trailing down slot.
    pub fn partial(&self) -> TensorField {
        let dim = self.dim();
        let mut comps = Vec::with_capacity(self.comps.len() * dim);
        for e in &self.comps {
            for k in 0..dim {
                comps.push(e.diff(self.chart.coord(k)));
            }
        }
        let mut slots = self.slots.clone();
        slots.push(Variance::Down);
        TensorField { chart: self.chart.clone(), slots, comps, symmetries: self.symmetries.clone() }
    }

    fn convert(&self, slot: usize, from: Variance, with: &TensorField) -> Result<TensorField, TensorError> {
        self.check_slot(slot)?;
        self.same_chart(with)?;
        if self.slots[slot] != from {
            return Err(TensorError::SlotError(format!("slot {slot} is not {from:?}")));
        }
        let dim = self.dim();
        let mut slots = self.slots.clone();
        slots[slot] = from.flip();
        let mut src = vec![0; self.rank()];
        let comps = multi_indices(self.rank(), dim)
            .map(|idx| {
                src.copy_from_slice(&idx);
                Expr::add_all((0..dim).map(|b| {
                    src[slot] = b;
                    with.get(&[idx[slot], b]) * self.get(&src)
                }))
            })
            .collect();
        let symmetries = self.symmetries.iter().copied().filter(|s| !matches!(s.slots(), (a, b) if a == slot || b == slot)).collect();
        Ok(TensorField { chart: self.chart.clone(), slots, comps, symmetries })
    }

    /// Raise a down slot with g^{kl}.
    pub fn raise(&self, slot: usize, m: &Metric) -> Result<TensorField, TensorError> {
        self.convert(slot, Variance::Down, m.inverse())
    }

    /// Lower an up slot with g_{kl}.
    pub fn lower(&self, slot: usize, m: &Metric) -> Result<TensorField, TensorError> {
        self.convert(slot, Variance::Up, m.tensor())
    }

    /// Componentwise comparison with another field of the same shape.
    pub fn compare(&self, other: &TensorField, sampler: &Sampler) -> Result<Comparison, TensorError> {
        self.same_shape(other)?;
        Ok(sampler.compare(&self.comps, &other.comps)?)
    }

    /// Compare every component against zero.
    pub fn compare_zero(&self, sampler: &Sampler) -> Result<Comparison, TensorError> {
        let zeros = vec![Expr::zero(); self.comps.len()];
        Ok(sampler.compare(&self.comps, &zeros)?)
    }

    /// Check every declared symmetry componentwise.
    pub fn verify_symmetries(&self, sampler: &Sampler) -> Result<Comparison, TensorError> {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        for s in &self.symmetries {
            let (a, b) = s.slots();
            for idx in multi_indices(self.rank(), self.dim()) {
                if idx[a] >= idx[b] {
                    continue;
                }
                let mut sw = idx.clone();
                sw.swap(a, b);
                lhs.push(self.get(&idx).clone());
                rhs.push(match s {
                    Symmetry::Symmetric(..) => self.get(&sw).clone(),
                    Symmetry::Antisymmetric(..) => -self.get(&sw),
                });
            }
        }
        Ok(sampler.compare(&lhs, &rhs)?)
    }

    /// Replace symbols in every component.
    pub fn subs(&self, map: &std::collections::HashMap<String, Expr>) -> TensorField {
        self.map(|e| e.subs(map))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Sampler;

    fn chart(n: usize) -> Chart {
        Chart::new("test", (0..n).map(|i| format!("x{i}")))
    }

    #[test]
    fn kronecker_trace_is_dimension() {
        let d = TensorField::kronecker(&chart(4));
        let t = d.contract(0, 1).unwrap();
        assert_eq!(t.as_scalar().unwrap(), &Expr::int(4));
    }

    #[test]
    fn contraction_of_vector_and_covector() {
        let c = chart(3);
        let a = TensorField::vector(&c, (0..3).map(|i| Expr::sym(&format!("a{i}"))).collect());
        let b = TensorField::covector(&c, (0..3).map(|i| Expr::sym(&format!("b{i}"))).collect());
        let ab = a.tensor_product(&b).unwrap();
        assert_eq!(ab.comps().len(), 9);
        assert_eq!(ab.get(&[1, 2]), &(Expr::sym("a1") * Expr::sym("b2")));
        let s = ab.contract(0, 1).unwrap();
        let expected: Expr = (0..3).map(|i| Expr::sym(&format!("a{i}")) * Expr::sym(&format!("b{i}"))).sum();
        assert_eq!(s.as_scalar().unwrap(), &expected);
    }

    #[test]
    fn contraction_rejects_bad_slots() {
        let c = chart(2);
        let t = TensorField::zeros(&c, &[Variance::Down, Variance::Down]);
        assert!(matches!(t.contract(0, 1), Err(TensorError::SlotError(_))));
        assert!(matches!(t.contract(0, 5), Err(TensorError::SlotError(_))));
    }

    #[test]
    fn additive_identity_and_inverse() {
        let c = chart(2);
        let t = TensorField::from_fn(&c, &[Variance::Up, Variance::Down], |i| {
            Expr::sym(&format!("x{}", i[0])) * (i[1] as i64 + 1)
        });
        let z = TensorField::zeros(&c, t.slots());
        assert_eq!(t.add(&z).unwrap(), t);
        assert!(t.add(&t.neg()).unwrap().is_zero());
        let v = TensorField::zeros(&c, &[Variance::Up]);
        assert!(matches!(t.add(&v), Err(TensorError::SignatureMismatch(_))));
    }

    #[test]
    fn delta_product_contracts_back() {
        let c = chart(3);
        let t = TensorField::from_fn(&c, &[Variance::Up, Variance::Down], |i| {
            Expr::sym(&format!("x{}", i[0])).powi(i[1] as i64 + 1)
        });
        let dt = TensorField::kronecker(&c).tensor_product(&t).unwrap();
        // δ^a_b T^b_c
        let back = dt.contract(2, 1).unwrap();
        assert_eq!(back.comps(), t.comps());
    }

    #[test]
    fn permute_swaps_slots() {
        let c = chart(2);
        let t = TensorField::from_fn(&c, &[Variance::Up, Variance::Down], |i| Expr::int((10 * i[0] + i[1]) as i64));
        let p = t.permute(&[1, 0]).unwrap();
        assert_eq!(p.slots(), &[Variance::Down, Variance::Up]);
        assert_eq!(p.get(&[0, 1]), &Expr::int(10));
    }

    #[test]
    fn symmetry_verification_detects_violation() {
        let c = chart(2);
        let good = TensorField::from_fn(&c, &[Variance::Down, Variance::Down], |i| Expr::sym(&format!("x{}", i[0] + i[1])))
            .with_symmetry(Symmetry::Symmetric(0, 1));
        assert!(good.verify_symmetries(&Sampler::new(0)).unwrap().passed());
        let bad = TensorField::from_fn(&c, &[Variance::Down, Variance::Down], |i| Expr::sym(&format!("x{}", i[0])))
            .with_symmetry(Symmetry::Antisymmetric(0, 1));
        assert!(!bad.verify_symmetries(&Sampler::new(0)).unwrap().passed());
    }
}
