use std::time::Instant;

use projektor::expr::{Expr, Sampler};
use projektor::fieldeq::{
    config_from_model, em_residuals, lagrangian_equivalence_check, projective_field_residual, sixvector_cyclic_check,
    EMConfig, FieldError, FIELD_EQUATIONS, REDUCED_AGREES,
};
use projektor::projective::{
    curvature_reduction_check, euler_degree_check, euler_weight_exact, random_projector, reduction_theorem_check, verify_congruence_axioms,
    verify_model, verify_projective_identities, FiveModel, ProjectorField,
};
use projektor::report::CheckReport;
use projektor::riemann::{verify_axioms, verify_curvature, AxiomFields, FormulaDerivative};
use projektor::tensor::multi_indices;
use projektor::tensor::Variance::{Down, Up};

use crate::model::{CliError, Model};

pub const SUITES: [&str; 4] = ["axioms", "curvature", "projective", "fieldeq"];

/// Append `sub`, naming each entry `prefix: name`.
fn absorb(report: &mut CheckReport, prefix: &str, sub: CheckReport) {
    for mut r in sub.results {
        r.name = format!("{prefix}: {}", r.name);
        report.push(r);
    }
}

fn axioms(model: &Model, seed: u64, sampler: &Sampler) -> CheckReport {
    let fields = AxiomFields::random(&model.chart, seed);
    verify_axioms(&FormulaDerivative::levi_civita(&model.metric), &model.metric, &fields, sampler)
}

fn projective(model: &Model, seed: u64, sampler: &Sampler) -> Result<CheckReport, CliError> {
    let five = model.five()?;
    let mut report = CheckReport::new("projective", sampler.seed);
    absorb(&mut report, "model", verify_model(&five, sampler));
    let metric = ProjectorField::new(five.metric().tensor().clone());
    absorb(&mut report, "euler, metric", euler_degree_check(&metric, &five, sampler));
    let position = ProjectorField::new(five.position().clone());
    absorb(&mut report, "euler, position", euler_degree_check(&position, &five, sampler));
    absorb(&mut report, "euler, metric", euler_weight_exact(&metric, &five, sampler));
    absorb(&mut report, "euler, position", euler_weight_exact(&position, &five, sampler));
    absorb(&mut report, "identities", verify_projective_identities(&five, sampler));
    for (k, slots) in [vec![Up], vec![Down], vec![Down, Down]].iter().enumerate() {
        let p = random_projector(&five, slots, seed + k as u64, 1);
        let label: Vec<&str> = slots.iter().map(|v| if *v == Up { "up" } else { "down" }).collect();
        absorb(&mut report, &format!("projector ({})", label.join(", ")), reduction_theorem_check(&p, &five, sampler));
    }
    absorb(&mut report, "curvature reduction", curvature_reduction_check(&five, sampler));
    absorb(&mut report, "congruence", verify_congruence_axioms(&five, seed, sampler));
    absorb(&mut report, "six-vector", sixvector_cyclic_check(&five, sampler));
    Ok(report)
}

fn einstein_maxwell(report: &mut CheckReport, cfg: &EMConfig, sampler: &Sampler) -> Result<(), CliError> {
    let started = Instant::now();
    let res = em_residuals(cfg, sampler).map_err(field)?;
    let dim = cfg.g4.dim();
    let comp = |rank: usize| move |i: usize| format!("component {:?}", multi_indices(rank, dim).nth(i).unwrap_or_default());
    report.record("Einstein equations", started, &res.gravity_check, &comp(2));
    report.record("Maxwell equations", started, &res.maxwell_check, &comp(1));
    Ok(())
}

fn field(e: FieldError) -> CliError {
    match e {
        FieldError::Projective(p) => p.into(),
        FieldError::ZeroChi => CliError::Singular("chi vanishes identically".into()),
    }
}

fn fieldeq(model: &Model, sampler: &Sampler) -> Result<CheckReport, CliError> {
    let potential = model
        .potential
        .as_ref()
        .ok_or_else(|| CliError::Inapplicable("manifest declares no [potential]".into()))?;
    let sampler = sampler.clone().with_positive(["c", "chi"]);
    let c = Expr::sym("c");
    let mut report = CheckReport::new("fieldeq", sampler.seed);
    if model.j.is_some() {
        let five: FiveModel = model.five()?;
        let cfg = config_from_model(&five, &c).map_err(field)?;
        einstein_maxwell(&mut report, &cfg, &five.sampler(&sampler))?;
        if five.j_is_unit() {
            absorb(&mut report, "projective", projective_field_residual(&five, &c, &sampler).map_err(field)?);
        } else {
            for name in [FIELD_EQUATIONS, REDUCED_AGREES] {
                report.skip(&format!("projective: {name}"), "requires J = 1");
            }
        }
        absorb(&mut report, "variational", lagrangian_equivalence_check(&five, &sampler).map_err(field)?);
        absorb(&mut report, "six-vector", sixvector_cyclic_check(&five, &sampler));
    } else if let Some(chi) = &model.chi {
        let cfg = EMConfig::new(&model.metric, potential.clone(), chi.clone(), c).map_err(field)?;
        einstein_maxwell(&mut report, &cfg, &sampler)?;
    } else {
        return Err(CliError::Inapplicable("fieldeq needs [scalars] J or chi".into()));
    }
    Ok(report)
}

/// Run one suite, or every applicable suite for `all`.
pub fn run(model: &Model, suite: &str, seed: u64) -> Result<CheckReport, CliError> {
    let sampler = Sampler::new(seed);
    match suite {
        "axioms" => Ok(axioms(model, seed, &sampler)),
        "curvature" => Ok(verify_curvature(&model.metric, seed, &sampler)),
        "projective" => projective(model, seed, &sampler),
        "fieldeq" => fieldeq(model, &sampler),
        "all" => {
            let mut report = CheckReport::new("all", seed);
            for name in SUITES {
                match run(model, name, seed) {
                    Ok(sub) => absorb(&mut report, name, sub),
                    Err(CliError::Inapplicable(why)) => report.skip(name, &why),
                    Err(e) => return Err(e),
                }
            }
            Ok(report)
        }
        other => Err(CliError::Usage(format!("unknown suite `{other}`"))),
    }
}
