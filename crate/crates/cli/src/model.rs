//! Turning a manifest into the objects the engine works on.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use projektor::expr::{Expr, ExprError};
use projektor::parser::{parse_expr, parse_manifest, ManifestError, ModelSpec};
use projektor::projective::{build_adapted_fivemodel, FiveModel, ProjectiveError};
use projektor::tensor::{Chart, Metric, TensorError, TensorField, Variance};

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Manifest(ManifestError),
    Singular(String),
    Domain(String),
    Inapplicable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Manifest(_) => 2,
            CliError::Singular(_) | CliError::Domain(_) => 3,
            CliError::Inapplicable(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Domain(m) => f.write_str(m),
            CliError::Manifest(e) => write!(f, "{e}"),
            CliError::Singular(m) => write!(f, "singular metric: {m}"),
            CliError::Inapplicable(m) => write!(f, "suite not applicable: {m}"),
        }
    }
}

impl From<TensorError> for CliError {
    fn from(e: TensorError) -> CliError {
        match e {
            TensorError::SingularMetric(m) => CliError::Singular(m),
            TensorError::Expr(e) => e.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> CliError {
        match e {
            ExprError::DomainError(_) => CliError::Domain(e.to_string()),
            ExprError::UnboundSymbol(s) => CliError::Usage(format!("symbol `{s}` has no value; bind it with --set")),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<ProjectiveError> for CliError {
    fn from(e: ProjectiveError) -> CliError {
        match e {
            ProjectiveError::Tensor(t) => t.into(),
            ProjectiveError::ZeroJ => CliError::Singular("J vanishes identically".into()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// `NAME=VALUE` with a rational value.
pub fn parse_assignment(text: &str) -> Result<(String, Expr), CliError> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected NAME=VALUE, got `{text}`")))?;
    let e = parse_expr(value).map_err(|e| CliError::Usage(format!("`{text}`: {e}")))?;
    if e.as_rational().is_none() {
        return Err(CliError::Usage(format!("`{text}`: value must be a rational number")));
    }
    Ok((name.trim().to_string(), e))
}

/// A loaded manifest with every fixed constant substituted.
pub struct Model {
    pub spec: ModelSpec,
    pub chart: Chart,
    pub metric: Metric,
    pub potential: Option<TensorField>,
    pub j: Option<Expr>,
    pub chi: Option<Expr>,
}

impl Model {
    pub fn load(path: &Path, sets: &[String]) -> Result<Model, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut spec = parse_manifest(&text).map_err(CliError::Manifest)?;
        for s in sets {
            let (name, value) = parse_assignment(s)?;
            if spec.coords.contains(&name) {
                return Err(CliError::Usage(format!("`{name}` is a coordinate, not a constant")));
            }
            spec.set_constant(&name, value.as_rational().cloned());
        }
        let values: HashMap<String, Expr> =
            spec.constants.iter().filter_map(|(k, v)| v.clone().map(|q| (k.clone(), Expr::num(q)))).collect();
        let fix = |e: Expr| e.subs(&values);

        let chart = Chart::new(&spec.name, spec.coords.iter().cloned());
        let dim = spec.dim;
        let rows = (0..dim).map(|i| (0..dim).map(|j| fix(spec.metric_component(i, j))).collect()).collect();
        let metric = Metric::from_rows(&chart, rows)?;
        let potential = spec
            .has_potential()
            .then(|| TensorField::covector(&chart, (0..dim).map(|i| fix(spec.potential_component(i))).collect()));
        let j = spec.scalar("J").cloned().map(fix);
        let chi = spec.scalar("chi").cloned().map(fix);
        Ok(Model { spec, chart, metric, potential, j, chi })
    }

    /// Constants still free after `--set`.
    pub fn free_constants(&self) -> Vec<String> {
        self.spec.free_constants()
    }

    /// The adapted five-dimensional model; the potential defaults to zero.
    pub fn five(&self) -> Result<FiveModel, CliError> {
        let j = self.j.as_ref().ok_or_else(|| CliError::Inapplicable("manifest declares no [scalars] J".into()))?;
        let phi = self.potential.clone().unwrap_or_else(|| TensorField::zeros(&self.chart, &[Variance::Down]));
        Ok(build_adapted_fivemodel(&self.metric, &phi, j)?)
    }
}
