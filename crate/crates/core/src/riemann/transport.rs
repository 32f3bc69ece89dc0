//! Fixed-step RK4 parallel transport along a parameterized curve.

use super::christoffel;
use crate::expr::{Bindings, Expr, ExprError, Value};
use crate::tensor::{Metric, TensorError, Variance};

pub const DEFAULT_STEPS: usize = 4096;

/// Curve `x^k(s)` for `s` in `[start, end]`.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub param: String,
    pub coords: Vec<Expr>,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl CurveSpec {
    pub fn new(param: &str, coords: Vec<Expr>, start: f64, end: f64) -> CurveSpec {
        CurveSpec { param: param.to_string(), coords, start, end, steps: DEFAULT_STEPS }
    }

    pub fn with_steps(mut self, steps: usize) -> CurveSpec {
        self.steps = steps;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transport {
    /// Transported components at the end of the curve.
    pub end: Vec<f64>,
    pub end_point: Vec<f64>,
    pub norm_start: f64,
    pub norm_end: f64,
    /// Largest `|N(s) − N(start)| / max(|N(start)|, 1)` over the step points.
    pub max_drift: f64,
}

struct Field<'a> {
    m: &'a Metric,
    curve: &'a CurveSpec,
    constants: &'a Bindings,
    velocity: Vec<Expr>,
    gamma: Vec<Expr>,
    poles: Vec<Expr>,
    pole_signs: Vec<f64>,
}

impl Field<'_> {
    fn point(&self, s: f64) -> Result<(Bindings, Vec<f64>), TensorError> {
        let mut b = self.constants.clone();
        b.insert(self.curve.param.clone(), Value::Float(s));
        let mut xs = Vec::with_capacity(self.curve.coords.len());
        for x in &self.curve.coords {
            xs.push(x.eval_f64(&b)?);
        }
        let mut at = self.constants.clone();
        for (c, x) in self.m.chart().coords().iter().zip(&xs) {
            at.insert(c.clone(), Value::Float(*x));
        }
        Ok((at, xs))
    }

    fn check_poles(&mut self, at: &Bindings) -> Result<(), TensorError> {
        for (k, p) in self.poles.iter().enumerate() {
            let v = p.eval_f64(at)?;
            let sign = &mut self.pole_signs[k];
            if *sign == 0.0 {
                *sign = v.signum();
            }
            if v == 0.0 || v.signum() != *sign || v.abs() < 1e-12 {
                return Err(TensorError::Expr(ExprError::DomainError(format!("curve crosses {p} = 0"))));
            }
        }
        Ok(())
    }

    /// Right-hand side of the transport equation at parameter `s`.
    fn rhs(&mut self, s: f64, a: &[f64], variance: Variance) -> Result<Vec<f64>, TensorError> {
        let dim = a.len();
        let mut b = self.constants.clone();
        b.insert(self.curve.param.clone(), Value::Float(s));
        let mut xdot = Vec::with_capacity(dim);
        for v in &self.velocity {
            xdot.push(v.eval_f64(&b)?);
        }
        let (at, _) = self.point(s)?;
        self.check_poles(&at)?;
        let mut ev = crate::expr::Evaluator::new(&at);
        let mut g = Vec::with_capacity(self.gamma.len());
        for e in &self.gamma {
            g.push(ev.float(e)?.0);
        }
        let gam = |m: usize, j: usize, k: usize| g[(m * dim + j) * dim + k];
        let mut out = vec![0.0; dim];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..dim {
                for k in 0..dim {
                    acc += match variance {
                        // da_i/ds = Γ^j_{ik} a_j dx^k/ds
                        Variance::Down => gam(j, i, k) * a[j] * xdot[k],
                        // da^i/ds = −Γ^i_{jk} a^j dx^k/ds
                        Variance::Up => -gam(i, j, k) * a[j] * xdot[k],
                    };
                }
            }
            *o = acc;
        }
        Ok(out)
    }

    fn norm(&self, s: f64, a: &[f64], variance: Variance) -> Result<f64, TensorError> {
        let (at, _) = self.point(s)?;
        let dim = a.len();
        let mut n = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let g = match variance {
                    Variance::Down => self.m.ginv(i, j),
                    Variance::Up => self.m.g(i, j),
                };
                if !g.is_zero() {
                    n += g.eval_f64(&at)? * a[i] * a[j];
                }
            }
        }
        Ok(n)
    }
}

/// Transport `v0` (components of the given variance) along `curve`.
/// `constants` binds every non-coordinate symbol of the metric.
pub fn parallel_transport(
    m: &Metric,
    curve: &CurveSpec,
    v0: &[f64],
    variance: Variance,
    constants: &Bindings,
) -> Result<Transport, TensorError> {
    let dim = m.dim();
    if curve.steps == 0 {
        return Err(TensorError::InvalidInput("step count must be at least 1".into()));
    }
    if curve.coords.len() != dim || v0.len() != dim {
        return Err(TensorError::InvalidInput(format!(
            "curve and vector need {dim} components, got {} and {}",
            curve.coords.len(),
            v0.len()
        )));
    }
    let gamma = christoffel(m).as_tensor().comps().to_vec();
    let mut poles: Vec<Expr> = gamma.iter().flat_map(|e| e.pole_factors()).collect();
    for e in m.tensor().comps().iter().chain(m.inverse().comps()) {
        poles.extend(e.pole_factors());
    }
    poles.push(m.det().clone());
    poles.sort();
    poles.dedup();
    poles.retain(|p| p.as_rational().is_none());
    // Poles that do not depend on the coordinates cannot be crossed.
    let coord_bits: Vec<&String> = m.chart().coords().iter().collect();
    poles.retain(|p| coord_bits.iter().any(|c| p.contains_symbol(c)));
    let velocity = curve.coords.iter().map(|x| x.diff(&curve.param)).collect();
    let n_poles = poles.len();
    let mut field = Field { m, curve, constants, velocity, gamma, poles, pole_signs: vec![0.0; n_poles] };

    let h = (curve.end - curve.start) / curve.steps as f64;
    let mut a = v0.to_vec();
    let mut s = curve.start;
    let norm_start = field.norm(s, &a, variance)?;
    let scale = norm_start.abs().max(1.0);
    let mut max_drift: f64 = 0.0;
    let axpy = |a: &[f64], k: &[f64], f: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + f * y).collect() };
    for step in 0..curve.steps {
        let k1 = field.rhs(s, &a, variance)?;
        let k2 = field.rhs(s + h / 2.0, &axpy(&a, &k1, h / 2.0), variance)?;
        let k3 = field.rhs(s + h / 2.0, &axpy(&a, &k2, h / 2.0), variance)?;
        let k4 = field.rhs(s + h, &axpy(&a, &k3, h), variance)?;
        for i in 0..dim {
            a[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        s = curve.start + h * (step + 1) as f64;
        let n = field.norm(s, &a, variance)?;
        max_drift = max_drift.max((n - norm_start).abs() / scale);
    }
    let (at, end_point) = field.point(curve.end)?;
    field.check_poles(&at)?;
    let norm_end = field.norm(curve.end, &a, variance)?;
    Ok(Transport { end: a, end_point, norm_start, norm_end, max_drift })
}
