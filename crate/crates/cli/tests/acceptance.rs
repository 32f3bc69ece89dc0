//! Acceptance suite: each criterion prints one PASS or FAIL line, and the
//! process fails if any criterion does.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use projektor::expr::{Bindings, Expr, Sampler};
use projektor::fieldeq::{
    chi_of, em_residuals, lagrangian_equivalence_check, projective_field_residual, sixvector_cyclic_check, EQUIVALENCE,
};
use projektor::fixtures::{self, em, five};
use projektor::projective::{
    curvature_reduction_check, euler_weight_exact, fit_ricci_correction, lift, random_projector,
    reduction_theorem_check, verify_congruence_axioms, verify_projective_identities, ProjectorField, RICCI_CORRECTION,
    RICCI_REDUCTION, RICCI_UNIT, RIEMANN_REDUCTION, SCALAR_REDUCTION, SCALAR_UNIT,
};
use projektor::report::{CheckReport, Status};
use projektor::riemann::{
    christoffel, commutator_check, parallel_transport, plane_route_check, ricci, riemann_tensor, sample_points,
    scalar_curvature, veblen_projective_connection, veblen_shift_check, verify_axioms, AxiomFields, CurveSpec,
    FormulaDerivative, AXIOM_NAMES,
};
use projektor::tensor::Variance::{self, Down, Up};

type Verdict = Result<String, String>;

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn report_ok(label: &str, r: &CheckReport) -> Result<f64, String> {
    match r.failures().next() {
        None => Ok(r.results.iter().filter(|x| x.status == Status::Pass).map(|x| x.max_residual).fold(0.0, f64::max)),
        Some(f) => Err(format!("{label}: {} failed ({:.3e}, {})", f.name, f.max_residual, f.detail)),
    }
}

fn axiom_suite() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for (name, m) in fixtures::zoo() {
        let fields = AxiomFields::random(m.chart(), 0);
        let r = verify_axioms(&FormulaDerivative::levi_civita(&m), &m, &fields, &Sampler::new(0));
        ensure(r.results.len() == 5, || format!("{name}: {} verdicts", r.results.len()))?;
        worst = worst.max(report_ok(name, &r)?);
        ensure(r.results.iter().all(|x| x.status == Status::Pass), || format!("{name}: not all passed"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("4 fixtures x 5 axioms, max residual {worst:.1e}, {secs:.2} s"))
}

fn constructive_agreement() -> Verdict {
    let mut worst: f64 = 0.0;
    for (name, m) in fixtures::zoo() {
        let points = sample_points(m.chart(), 5, 0);
        let c = plane_route_check(&m, &points, 0, &Sampler::new(0).with_tolerance(1e-8)).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.passed(), || format!("{name}: residual {:.3e}", c.max_residual))?;
        worst = worst.max(c.max_residual);
    }
    Ok(format!("5 points per fixture, max residual {worst:.1e} (tolerance 1e-8)"))
}

fn curvature() -> Verdict {
    let ric = ricci(&fixtures::schwarzschild());
    let exact = ric.is_zero();
    let c = ric.compare_zero(&Sampler::new(0).with_tolerance(1e-10)).map_err(|e| e.to_string())?;
    ensure(c.passed(), || format!("Schwarzschild Ricci residual {:.3e}", c.max_residual))?;
    let r = scalar_curvature(&fixtures::sphere2());
    ensure(r == Expr::int(2), || format!("sphere scalar curvature {r}"))?;
    let mut worst: f64 = 0.0;
    for (name, m) in fixtures::zoo() {
        let fields: Vec<_> = (0..3).map(|k| fixtures::random_covector(m.chart(), 100 + k, 2)).collect();
        let c = commutator_check(christoffel(&m).as_tensor(), &riemann_tensor(&m), &fields, &Sampler::new(0))
            .map_err(|e| format!("{name}: {e}"))?;
        ensure(c.passed(), || format!("{name}: commutator residual {:.3e}", c.max_residual))?;
        worst = worst.max(c.max_residual);
    }
    let how = if exact { "exact zero".to_string() } else { format!("residual {:.1e}", c.max_residual) };
    Ok(format!("Schwarzschild Ricci {how}; sphere R = {r}; commutator max residual {worst:.1e}"))
}

fn latitude_end(theta0: Expr, steps: usize) -> Result<projektor::riemann::Transport, String> {
    let curve = CurveSpec::new("s", vec![theta0, Expr::sym("s")], 0.0, 2.0 * PI).with_steps(steps);
    parallel_transport(&fixtures::sphere2(), &curve, &[1.0, 0.0], Variance::Down, &Bindings::new()).map_err(|e| e.to_string())
}

fn transport() -> Verdict {
    let theta0 = PI / 3.0;
    let t = latitude_end(Expr::pi() / 3, 10_000)?;
    let angle = (t.end[1] / theta0.sin()).atan2(t.end[0]);
    let want = 2.0 * PI * (1.0 - theta0.cos());
    let off = ((angle - want + PI).rem_euclid(2.0 * PI) - PI).abs();
    ensure(off < 1e-6, || format!("holonomy {angle} vs {want}"))?;
    ensure(t.max_drift < 1e-7, || format!("drift {:.3e}", t.max_drift))?;

    let th = 1.1_f64;
    let exact = 2.0 * PI * (1.0 - th.cos());
    let truth = [exact.cos(), exact.sin() * th.sin()];
    let err = |n: usize| -> Result<f64, String> {
        let e = latitude_end(Expr::num(fixtures::rational_approx(th)), n)?.end;
        Ok(((e[0] - truth[0]).powi(2) + (e[1] - truth[1]).powi(2)).sqrt())
    };
    let (e1, e2) = (err(32)?, err(64)?);
    let order = (e1 / e2).log2();
    ensure(order >= 3.5, || format!("convergence order {order:.2}"))?;
    Ok(format!("angle error {off:.1e}, order {order:.2}, drift {:.1e}", t.max_drift))
}

fn projective_identities() -> Verdict {
    let s = Sampler::new(0);
    let mut worst: f64 = 0.0;
    for (name, m) in five::zoo() {
        let fields = [
            ProjectorField::new(m.metric().tensor().clone()),
            ProjectorField::new(m.position().clone()),
            random_projector(&m, &[Up, Down], 1, 1),
            lift(&fixtures::random_covector(m.g4().chart(), 2, 1), &m).map_err(|e| e.to_string())?,
        ];
        for p in &fields {
            let r = euler_weight_exact(p, &m, &s);
            report_ok(name, &r)?;
            ensure(r.results[0].max_residual == 0.0, || format!("{name}: Euler check not exact"))?;
        }
        worst = worst.max(report_ok(name, &verify_projective_identities(&m, &s))?);
        for (k, slots) in [vec![Up], vec![Down], vec![Down, Down]].iter().enumerate() {
            let p = random_projector(&m, slots, 10 + k as u64, 1);
            worst = worst.max(report_ok(name, &reduction_theorem_check(&p, &m, &s))?);
        }
        let ax = verify_congruence_axioms(&m, 7, &s);
        for a in &AXIOM_NAMES[..4] {
            let r = ax.get(a).ok_or_else(|| format!("{name}: {a} missing"))?;
            ensure(r.passed(), || format!("{name}: congruence {a} {}", r.status))?;
            worst = worst.max(r.max_residual);
        }
    }
    ensure(worst < 1e-9, || format!("max residual {worst:.3e}"))?;
    Ok(format!("4 FiveModels: Euler exact, Killing, contractions, reduction theorem, axioms I-IV; max residual {worst:.1e}"))
}

fn curvature_reduction() -> Verdict {
    let s = Sampler::new(0);
    let rn = curvature_reduction_check(&five::reissner_nordstrom(), &s);
    for name in [RICCI_UNIT, SCALAR_UNIT] {
        let r = rn.get(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(r.passed() && r.max_residual < 1e-9, || format!("{name}: {} {:.3e}", r.status, r.max_residual))?;
    }
    let vj = curvature_reduction_check(&five::varying_j(), &s);
    for name in [RIEMANN_REDUCTION, RICCI_REDUCTION, SCALAR_REDUCTION] {
        let r = vj.get(name).ok_or_else(|| format!("{name} missing"))?;
        ensure(r.passed(), || format!("varying J, {name}: {} {:.3e}", r.status, r.max_residual))?;
    }
    let fits = fit_ricci_correction(&five::varying_j(), &s).map_err(|e| e.to_string())?;
    let passing: Vec<_> = fits.iter().filter(|(_, c)| c.passed()).map(|(r, _)| *r).collect();
    ensure(passing == vec![RICCI_CORRECTION], || format!("fit selects {passing:?}"))?;
    Ok(format!("J = 1 relations hold on Reissner-Nordstrom; varying J selects {RICCI_CORRECTION:?} uniquely"))
}

fn field_equations() -> Verdict {
    let cfg = em::reissner_nordstrom();
    let res = em_residuals(&cfg, &em::sampler(0)).map_err(|e| e.to_string())?;
    ensure(res.passed(), || format!("Einstein-Maxwell {:.3e} / {:.3e}", res.max_gravity(), res.max_maxwell()))?;
    let m = five::reissner_nordstrom();
    let pf = projective_field_residual(&m, &Expr::sym("c"), &em::sampler(0)).map_err(|e| e.to_string())?;
    let five_worst = report_ok("projective field equations", &pf)?;
    let mut six: f64 = 0.0;
    for (name, m) in five::zoo() {
        six = six.max(report_ok(name, &sixvector_cyclic_check(&m, &Sampler::new(0)))?);
    }
    Ok(format!(
        "EM residuals {:.1e}; five-dimensional {five_worst:.1e} and reduced system agrees; six-vector {six:.1e}",
        res.max_gravity().max(res.max_maxwell())
    ))
}

fn variable_gravitational_invariant() -> Verdict {
    let m = five::varying_j();
    ensure(m.j().free_symbols().contains("r"), || format!("J = {} is constant", m.j()))?;
    let r = lagrangian_equivalence_check(&m, &em::sampler(0)).map_err(|e| e.to_string())?;
    let worst = report_ok("variational", &r)?;
    let eq = r.get(EQUIVALENCE).ok_or("equivalence entry missing")?;
    ensure(eq.passed(), || "equivalence not run".into())?;
    let chi = chi_of(&m, &Expr::sym("c"));
    let norm = r.results.iter().find(|x| !x.detail.is_empty()).map(|x| x.detail.clone()).unwrap_or_default();
    Ok(format!("J = {}, chi = {chi}; residual {worst:.1e}; {norm}", m.j()))
}

fn veblen() -> Verdict {
    let mut worst: f64 = 0.0;
    for (name, m) in fixtures::zoo() {
        let gamma = christoffel(&m);
        let tight = Sampler::new(0).with_tolerance(1e-10);
        let pi = veblen_projective_connection(&gamma);
        let tr = pi.contract(0, 1).and_then(|t| t.compare_zero(&tight)).map_err(|e| format!("{name}: {e}"))?;
        ensure(tr.passed(), || format!("{name}: trace {:.3e}", tr.max_residual))?;
        let sh = veblen_shift_check(&gamma, 10, 0, &tight).map_err(|e| format!("{name}: {e}"))?;
        ensure(sh.passed(), || format!("{name}: shift {:.3e}", sh.max_residual))?;
        worst = worst.max(tr.max_residual).max(sh.max_residual);
    }
    Ok(format!("trace-free and invariant under 10 shifts per fixture, max residual {worst:.1e}"))
}

fn bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_projektor")).args(args).env_remove("PROJEKTOR_SEED").output().expect("binary runs")
}

fn cli(start: Instant) -> Verdict {
    let models = Path::new(env!("CARGO_MANIFEST_DIR")).join("models");
    let model = |n: &str| models.join(n).display().to_string();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    let mut outs = Vec::new();
    for k in 0..2 {
        let json = dir.path().join(format!("{k}.json")).display().to_string();
        let o = bin(&["verify", "--suite", "all", "--seed", "7", "--no-timing", "--json", &json, &model("reissner.toml")]);
        outs.push((o.status.code(), o.stdout, std::fs::read(&json).map_err(|e| e.to_string())?));
    }
    ensure(outs[0] == outs[1], || "reruns differ".into())?;

    let wrong = dir.path().join("wrong.toml");
    std::fs::write(
        &wrong,
        "[manifold]\nname = \"w\"\ndim = 2\ncoords = [\"t\", \"x\"]\n[metric]\ng[0][0] = \"-1\"\ng[1][1] = \"1\"\n[potential]\nphi[0] = \"x\"\n[scalars]\nchi = \"2\"\n",
    )
    .map_err(|e| e.to_string())?;
    let horizon = [
        "transport", &model("schwarzschild.toml"), "--set", "M=1", "--curve", "t=0", "--curve", "r=s", "--curve",
        "theta=pi/2", "--curve", "phi=0", "--range", "3", "1", "--vector", "1,0,0,0",
    ];
    let flat = model("flat.toml");
    let schwarzschild = model("schwarzschild.toml");
    let cases: Vec<(i32, Vec<&str>)> = vec![
        (0, vec!["verify", "--suite", "axioms", &flat]),
        (1, vec!["verify", "--suite", "fieldeq", wrong.to_str().unwrap()]),
        (2, vec!["compute", "--target", "ricci", "missing.toml"]),
        (3, horizon.to_vec()),
        (4, vec!["verify", "--suite", "projective", &schwarzschild]),
    ];
    for (want, args) in &cases {
        let got = bin(args).status.code();
        ensure(got == Some(*want), || format!("{args:?} exited {got:?}, expected {want}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let crashes = (0..10_000).filter(|&k| !common::survives(&common::input(&mut rng, k))).count();
    ensure(crashes == 0, || format!("{crashes} parser crashes"))?;

    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 600.0, || format!("suite took {secs:.0} s"))?;
    Ok(format!("byte-identical reruns, exit codes 0-4, 10000 fuzz inputs without a crash, {secs:.1} s in total"))
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, Box<dyn Fn() -> Verdict>); 10] = [
        ("axiom suite", Box::new(axiom_suite)),
        ("constructive/axiomatic agreement", Box::new(constructive_agreement)),
        ("curvature", Box::new(curvature)),
        ("transport", Box::new(transport)),
        ("projective identities", Box::new(projective_identities)),
        ("curvature reduction", Box::new(curvature_reduction)),
        ("field equations", Box::new(field_equations)),
        ("variable gravitational invariant", Box::new(variable_gravitational_invariant)),
        ("Veblen invariant", Box::new(veblen)),
        ("CLI", Box::new(move || cli(start))),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
