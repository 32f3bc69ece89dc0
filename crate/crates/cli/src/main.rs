mod model;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use projektor::expr::{Bindings, Expr, PI};
use projektor::parser::parse_expr;
use projektor::riemann::{christoffel, parallel_transport, ricci, riemann_tensor, scalar_curvature, CurveSpec, DEFAULT_STEPS};
use projektor::tensor::{multi_indices, TensorField, Variance};

use model::{CliError, Model};

#[derive(Parser)]
#[command(name = "projektor", version, about = "Symbolic tensor calculus on metric manifests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Christoffel,
    Riemann,
    Ricci,
    Scalar,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Axioms,
    Curvature,
    Projective,
    Fieldeq,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Axioms => "axioms",
            Suite::Curvature => "curvature",
            Suite::Projective => "projective",
            Suite::Fieldeq => "fieldeq",
            Suite::All => "all",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the nonzero components of a curvature quantity
    Compute {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        target: Target,
        /// Fix a constant, e.g. `--set M=1`
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Run a verification suite and report every identity
    Verify {
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Sampling seed; defaults to $PROJEKTOR_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the report as JSON
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Write zero for every wall time, so reports are byte-comparable
        #[arg(long)]
        no_timing: bool,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
    /// Parallel-transport a vector along a curve
    Transport {
        manifest: PathBuf,
        /// One `coord=expr` per coordinate, in the curve parameter
        #[arg(long, required = true, value_name = "COORD=EXPR")]
        curve: Vec<String>,
        /// Parameter interval
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_hyphen_values = true, required = true)]
        range: Vec<String>,
        /// Comma-separated components at the start of the curve
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value = "s")]
        param: String,
        /// Treat the components as covariant
        #[arg(long)]
        covariant: bool,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        sets: Vec<String>,
    },
}

fn index_name(model: &Model, ix: &[usize]) -> String {
    let names: Vec<&str> = ix.iter().map(|&i| model.chart.coord(i)).collect();
    let sep = if model.chart.coords().iter().all(|c| c.chars().count() == 1) { "" } else { " " };
    names.join(sep)
}

/// Nonzero components, skipping those fixed by a symmetry of the lower slots.
fn components(model: &Model, t: &TensorField, symbol: &str, keep: impl Fn(&[usize]) -> bool) -> Vec<String> {
    multi_indices(t.rank(), t.dim())
        .filter(|ix| keep(ix))
        .filter_map(|ix| {
            let e = t.get(&ix);
            if e.is_zero() {
                return None;
            }
            let head = match t.slots().first() {
                Some(Variance::Up) => format!("{symbol}^{}_{{{}}}", index_name(model, &ix[..1]), index_name(model, &ix[1..])),
                _ => format!("{symbol}_{{{}}}", index_name(model, &ix)),
            };
            Some(format!("{head} = {e}"))
        })
        .collect()
}

fn compute(manifest: &Path, target: Target, sets: &[String]) -> Result<(), CliError> {
    let model = Model::load(manifest, sets)?;
    let m = &model.metric;
    let lines = match target {
        Target::Christoffel => components(&model, christoffel(m).as_tensor(), "Γ", |ix| ix[1] <= ix[2]),
        Target::Riemann => components(&model, &riemann_tensor(m), "R", |ix| ix[2] < ix[3]),
        Target::Ricci => components(&model, &ricci(m), "R", |ix| ix[0] <= ix[1]),
        Target::Scalar => {
            let r = scalar_curvature(m);
            if r.is_zero() {
                vec![]
            } else {
                vec![format!("R = {r}")]
            }
        }
    };
    if lines.is_empty() {
        println!("all components zero");
    }
    for l in lines {
        println!("{l}");
    }
    Ok(())
}

fn seed_from_env() -> Result<u64, CliError> {
    match std::env::var("PROJEKTOR_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("PROJEKTOR_SEED must be an integer, got `{v}`"))),
        Err(_) => Ok(0),
    }
}

fn verify(
    manifest: &Path,
    suite: Suite,
    seed: Option<u64>,
    json: Option<&Path>,
    no_timing: bool,
    sets: &[String],
) -> Result<bool, CliError> {
    let model = Model::load(manifest, sets)?;
    let seed = match seed {
        Some(s) => s,
        None => seed_from_env()?,
    };
    let mut report = suites::run(&model, suite.name(), seed)?;
    if no_timing {
        for r in &mut report.results {
            r.ms = 0;
        }
    }
    println!("{report}");
    if let Some(path) = json {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(report.all_passed())
}

/// A decimal literal, or any constant expression in the manifest grammar.
fn number(text: &str, constants: &Bindings) -> Result<f64, CliError> {
    if let Ok(x) = text.parse::<f64>() {
        return Ok(x);
    }
    let e = parse_expr(text).map_err(|e| CliError::Usage(format!("`{text}`: {e}")))?;
    Ok(e.eval_f64(constants)?)
}

#[allow(clippy::too_many_arguments)]
fn transport(
    manifest: &Path,
    curve: &[String],
    range: &[String],
    vector: &str,
    steps: usize,
    param: &str,
    covariant: bool,
    sets: &[String],
) -> Result<(), CliError> {
    let model = Model::load(manifest, sets)?;
    let free = model.free_constants();
    if !free.is_empty() {
        return Err(CliError::Usage(format!("transport needs numeric constants; bind {} with --set", free.join(", "))));
    }
    let constants = model.spec.bindings();
    let dim = model.chart.dim();
    if model.chart.index_of(param).is_some() {
        return Err(CliError::Usage(format!("parameter `{param}` clashes with a coordinate")));
    }
    let mut coords: Vec<Option<Expr>> = vec![None; dim];
    for c in curve {
        let (name, text) = c.split_once('=').ok_or_else(|| CliError::Usage(format!("expected COORD=EXPR, got `{c}`")))?;
        let k = model
            .chart
            .index_of(name.trim())
            .ok_or_else(|| CliError::Usage(format!("`{}` is not a coordinate", name.trim())))?;
        if coords[k].is_some() {
            return Err(CliError::Usage(format!("coordinate `{}` given twice", name.trim())));
        }
        let e = parse_expr(text).map_err(|e| CliError::Usage(format!("`{c}`: {e}")))?;
        if let Some(s) = e.free_symbols().into_iter().find(|s| s != param && s != PI && !constants.contains_key(s)) {
            return Err(CliError::Usage(format!("`{c}`: unknown symbol `{s}`")));
        }
        coords[k] = Some(e);
    }
    let coords: Vec<Expr> = coords
        .into_iter()
        .enumerate()
        .map(|(k, e)| e.ok_or_else(|| CliError::Usage(format!("missing --curve for `{}`", model.chart.coord(k)))))
        .collect::<Result<_, _>>()?;
    let start = number(&range[0], &constants)?;
    let end = number(&range[1], &constants)?;
    let v0: Vec<f64> = vector.split(',').map(|x| number(x.trim(), &constants)).collect::<Result<_, _>>()?;
    let spec = CurveSpec::new(param, coords, start, end).with_steps(steps);
    let variance = if covariant { Variance::Down } else { Variance::Up };
    let t = parallel_transport(&model.metric, &spec, &v0, variance, &constants)?;

    let point: Vec<String> =
        t.end_point.iter().enumerate().map(|(k, x)| format!("{} = {x:.12}", model.chart.coord(k))).collect();
    let comps: Vec<String> = t.end.iter().map(|x| format!("{x:.12}")).collect();
    println!("end point: {}", point.join(", "));
    println!("components: {}", comps.join(", "));
    println!("norm: {:.12} -> {:.12}", t.norm_start, t.norm_end);
    println!("drift: {:.3e}", t.max_drift);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Compute { manifest, target, sets } => compute(manifest, *target, sets).map(|_| true),
        Command::Verify { manifest, suite, seed, json, no_timing, sets } => {
            verify(manifest, *suite, *seed, json.as_deref(), *no_timing, sets)
        }
        Command::Transport { manifest, curve, range, vector, steps, param, covariant, sets } => {
            transport(manifest, curve, range, vector, *steps, param, *covariant, sets).map(|_| true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
