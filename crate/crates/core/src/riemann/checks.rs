//! The curvature suite: defining identities of the curvature tensor, the
//! plane-coordinate route, and the projective-connection invariant.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::fixtures::{random_covector, random_field};
use crate::report::CheckReport;
use crate::tensor::multi_indices;

pub const CHRISTOFFEL_SYMMETRY: &str = "Christoffel lower symmetry";
pub const RIEMANN_ANTISYMMETRY: &str = "Riemann antisymmetry";
pub const BIANCHI: &str = "first Bianchi identity";
pub const COMMUTATOR: &str = "commutator definition";
pub const PLANE_ROUTE: &str = "plane route = formula";
pub const VEBLEN_TRACE: &str = "projective connection trace-free";
pub const VEBLEN_SHIFT: &str = "projective connection shift-invariant";

pub const COMMUTATOR_FIELDS: u64 = 3;
pub const PLANE_POINTS: usize = 5;
pub const VEBLEN_SHIFTS: u64 = 10;

fn label(rank: usize, dim: usize) -> impl Fn(usize) -> String {
    move |i| {
        let per = dim.pow(rank as u32);
        let comp = multi_indices(rank, dim).nth(i % per).unwrap_or_default();
        if i >= per {
            format!("sample {} component {comp:?}", i / per)
        } else {
            format!("component {comp:?}")
        }
    }
}

fn record(report: &mut CheckReport, name: &str, started: Instant, rank: usize, dim: usize, c: Result<Comparison, TensorError>) {
    match c {
        Ok(c) => report.record(name, started, &c, &label(rank, dim)),
        Err(e) => report.record_error(name, started, e),
    }
}

/// Seeded interior points: every coordinate drawn from `[1/2, 5/2]` in
/// steps of 1/8, which keeps angular coordinates off the axis.
pub fn sample_points(chart: &Chart, n: usize, seed: u64) -> Vec<Vec<Expr>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x91a7e);
    (0..n).map(|_| (0..chart.dim()).map(|_| Expr::ratio(rng.gen_range(4..=20), 8)).collect()).collect()
}

/// Largest disagreement between the plane-coordinate route and the formula
/// at `points`, for a covector and a mixed tensor.
pub fn plane_route_check(m: &Metric, points: &[Vec<Expr>], seed: u64, sampler: &Sampler) -> Result<Comparison, TensorError> {
    let fields = [random_field(m.chart(), &[Down], seed, 2), random_field(m.chart(), &[Up, Down], seed + 1, 1)];
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for t in &fields {
        let formula = covariant_derivative(t, m)?;
        for p in points {
            let at = m.chart().coords().iter().cloned().zip(p.iter().cloned()).collect();
            lhs.extend(plane_route_derivative(t, m, p)?.into_comps());
            rhs.extend(formula.subs(&at).into_comps());
        }
    }
    Ok(sampler.compare(&lhs, &rhs)?)
}

/// `Π` of the shifted connection for `count` seeded covectors, against `Π`.
pub fn veblen_shift_check(c: &ConnectionCoeffs, count: u64, seed: u64, sampler: &Sampler) -> Result<Comparison, TensorError> {
    let pi = veblen_projective_connection(c);
    let (mut lhs, mut rhs) = (Vec::new(), Vec::new());
    for k in 0..count {
        let phi = random_covector(c.chart(), seed + k, 2);
        lhs.extend(veblen_projective_connection(&gamma_phi_shift(c, &phi)?).into_comps());
        rhs.extend(pi.comps().iter().cloned());
    }
    Ok(sampler.compare(&lhs, &rhs)?)
}

pub fn verify_curvature(m: &Metric, seed: u64, sampler: &Sampler) -> CheckReport {
    let mut report = CheckReport::new("curvature", sampler.seed);
    let dim = m.dim();
    let gamma = christoffel(m);
    let riem = riemann_tensor(m);

    let t = Instant::now();
    let sym = gamma.as_tensor().sub(&gamma.as_tensor().permute(&[0, 2, 1]).expect("rank 3"));
    record(&mut report, CHRISTOFFEL_SYMMETRY, t, 3, dim, sym.and_then(|d| d.compare_zero(sampler)));

    let t = Instant::now();
    let anti = riem.add(&riem.permute(&[0, 1, 3, 2]).expect("rank 4"));
    record(&mut report, RIEMANN_ANTISYMMETRY, t, 4, dim, anti.and_then(|d| d.compare_zero(sampler)));

    let t = Instant::now();
    record(&mut report, BIANCHI, t, 4, dim, bianchi_cyclic(&riem).and_then(|d| d.compare_zero(sampler)));

    let t = Instant::now();
    let fields: Vec<TensorField> = (0..COMMUTATOR_FIELDS).map(|k| random_covector(m.chart(), seed + k, 2)).collect();
    record(&mut report, COMMUTATOR, t, 3, dim, commutator_check(gamma.as_tensor(), &riem, &fields, sampler));

    let t = Instant::now();
    let points = sample_points(m.chart(), PLANE_POINTS, seed);
    let plane = plane_route_check(m, &points, seed, &sampler.clone().with_tolerance(1e-8));
    record(&mut report, PLANE_ROUTE, t, 2, dim, plane);

    let t = Instant::now();
    let pi = veblen_projective_connection(&gamma);
    let tr = pi.contract(0, 1).and_then(|a| a.compare_zero(&sampler.clone().with_tolerance(1e-10)));
    record(&mut report, VEBLEN_TRACE, t, 1, dim, tr);

    let t = Instant::now();
    let shift = veblen_shift_check(&gamma, VEBLEN_SHIFTS, seed, &sampler.clone().with_tolerance(1e-10));
    record(&mut report, VEBLEN_SHIFT, t, 3, dim, shift);
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn flat_suite_passes() {
        let r = verify_curvature(&fixtures::flat4(), 0, &Sampler::new(0));
        assert!(r.all_passed(), "{r}");
        assert_eq!(r.results.len(), 7);
    }

    #[test]
    fn points_are_seeded() {
        let c = fixtures::sphere2();
        assert_eq!(sample_points(c.chart(), 5, 3), sample_points(c.chart(), 5, 3));
        assert_ne!(sample_points(c.chart(), 5, 3), sample_points(c.chart(), 5, 4));
    }

    #[test]
    fn wrong_curvature_fails_the_commutator() {
        let m = fixtures::sphere2();
        let gamma = christoffel(&m);
        let fields = [random_covector(m.chart(), 1, 2)];
        let bad = riemann_tensor(&m).neg();
        assert!(!commutator_check(gamma.as_tensor(), &bad, &fields, &Sampler::new(0)).unwrap().passed());
    }
}
