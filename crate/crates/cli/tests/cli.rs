use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use projektor::expr::equivalent;
use projektor::parser::parse_expr;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn model(name: &str) -> String {
    models().join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projektor"))
        .args(args)
        .env_remove("PROJEKTOR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn write_manifest(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn christoffel_listing_contains_gamma_r_tt() {
    let o = run(&["compute", "--target", "christoffel", &model("schwarzschild.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("Γ^r_{t t} = ")).expect("component listed");
    let got = parse_expr(line.split_once(" = ").unwrap().1).unwrap();
    let want = parse_expr("M/r^2*(1 - 2*M/r)").unwrap();
    assert!(equivalent(&got, &want, 0).unwrap());
    assert_eq!(out.lines().count(), 9);
}

#[test]
fn flat_manifest_has_no_curvature() {
    for target in ["christoffel", "riemann", "ricci", "scalar"] {
        let o = run(&["compute", "--target", target, &model("flat.toml")]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o), "all components zero\n");
    }
}

#[test]
fn sphere_scalar_curvature_is_two() {
    let o = run(&["compute", "--target", "scalar", &model("sphere.toml")]);
    assert_eq!(stdout(&o), "R = 2\n");
}

#[test]
fn missing_file_exits_two() {
    let o = run(&["compute", "--target", "ricci", "no-such-manifest.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_manifests_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let asym = write_manifest(
        &dir,
        "asym.toml",
        "[manifold]\nname = \"a\"\ndim = 2\ncoords = [\"r\", \"s\"]\n[metric]\ng[0][0] = \"1\"\ng[0][1] = \"r\"\ng[1][0] = \"r+1\"\ng[1][1] = \"1\"\n",
    );
    let syntax = write_manifest(&dir, "syntax.toml", "[manifold]\nname = \"b\"\ndim = 1\ncoords = [\"x\"]\n[metric]\ng[0][0] = \"1 +\"\n");
    for path in [asym, syntax] {
        let o = run(&["verify", "--suite", "axioms", &path]);
        assert_eq!(o.status.code(), Some(2), "{path}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    }
    let o = run(&["compute", "--target", "ricci", &model("flat.toml"), "--set", "M"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn singular_metric_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_manifest(&dir, "degenerate.toml", "[manifold]\nname = \"d\"\ndim = 2\ncoords = [\"x\", \"y\"]\n[metric]\ng[0][0] = \"1\"\n");
    let o = run(&["compute", "--target", "christoffel", &p]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn axioms_pass_on_flat() {
    let o = run(&["verify", "--suite", "axioms", &model("flat.toml")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("5/5 passed\n"));
}

#[test]
fn fieldeq_chain_passes_on_reissner() {
    let o = run(&["verify", "--suite", "fieldeq", &model("reissner.toml")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["Einstein equations", "Maxwell equations", "lambda X^m X^n", "agrees with Einstein-Maxwell", "L5(alpha = 1/2)"] {
        let line = out.lines().find(|l| l.contains(name)).unwrap_or_else(|| panic!("{name} missing"));
        assert!(line.contains(" pass "), "{line}");
    }
}

#[test]
fn inapplicable_suites_exit_four() {
    for suite in ["projective", "fieldeq"] {
        let o = run(&["verify", "--suite", suite, &model("schwarzschild.toml")]);
        assert_eq!(o.status.code(), Some(4), "{suite}");
    }
}

#[test]
fn failing_identity_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a uniform field that is not a solution on flat space
    let p = write_manifest(
        &dir,
        "wrong.toml",
        "[manifold]\nname = \"w\"\ndim = 2\ncoords = [\"t\", \"x\"]\n[metric]\ng[0][0] = \"-1\"\ng[1][1] = \"1\"\n[potential]\nphi[0] = \"x\"\n[scalars]\nchi = \"2\"\n",
    );
    let o = run(&["verify", "--suite", "fieldeq", &p]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.contains("Einstein equations")).unwrap();
    assert!(line.contains("fail") && line.contains(" at "), "{line}");
}

#[test]
fn json_report_has_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = run(&["verify", "--suite", "curvature", "--seed", "3", "--json", json.to_str().unwrap(), &model("sphere.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&json).unwrap();
    let at = |k: &str| text.find(&format!("\"{k}\"")).unwrap_or_else(|| panic!("{k} missing"));
    assert!(at("suite") < at("seed") && at("seed") < at("results"));
    assert!(at("name") < at("status") && at("status") < at("max_residual"));
    assert!(at("max_residual") < at("witness") && at("witness") < at("ms"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["suite"], "curvature");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["results"].as_array().unwrap().len(), 7);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for k in 0..2 {
        let json = dir.path().join(format!("{k}.json"));
        let o = run(&["verify", "--suite", "all", "--seed", "11", "--no-timing", "--json", json.to_str().unwrap(), &model("reissner.toml")]);
        assert_eq!(o.status.code(), Some(0));
        outs.push((o.stdout, std::fs::read(&json).unwrap()));
    }
    assert_eq!(outs[0], outs[1]);
    let a = run(&["compute", "--target", "riemann", &model("schwarzschild.toml")]);
    let b = run(&["compute", "--target", "riemann", &model("schwarzschild.toml")]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_comes_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_projektor");
    let with_env = |v: &str| {
        Command::new(bin).args(["verify", "--suite", "axioms", &model("sphere.toml")]).env("PROJEKTOR_SEED", v).output().unwrap()
    };
    let o = with_env("42");
    assert!(stdout(&o).starts_with("suite axioms (seed 42)"));
    let flag = Command::new(bin)
        .args(["verify", "--suite", "axioms", "--seed", "5", &model("sphere.toml")])
        .env("PROJEKTOR_SEED", "42")
        .output()
        .unwrap();
    assert!(stdout(&flag).starts_with("suite axioms (seed 5)"));
    assert_eq!(with_env("many").status.code(), Some(2));
    assert!(stdout(&run(&["verify", "--suite", "axioms", &model("sphere.toml")])).starts_with("suite axioms (seed 0)"));
}

fn transported(out: &str) -> Vec<f64> {
    let line = out.lines().find_map(|l| l.strip_prefix("components: ")).expect("components line");
    line.split(", ").map(|x| x.parse().unwrap()).collect()
}

#[test]
fn sphere_latitude_loop_rotates_by_pi() {
    let o = run(&[
        "transport", &model("sphere.toml"), "--curve", "theta=pi/3", "--curve", "phi=s", "--range", "0", "2*pi",
        "--vector", "1,0", "--covariant", "--steps", "10000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let end = transported(&stdout(&o));
    let angle = (end[1] / (std::f64::consts::PI / 3.0).sin()).atan2(end[0]);
    assert!((angle.abs() - std::f64::consts::PI).abs() < 1e-6, "{angle}");
}

#[test]
fn flat_transport_leaves_the_vector_alone() {
    let o = run(&[
        "transport", &model("flat.toml"), "--curve", "t=s", "--curve", "x=sin(s)", "--curve", "y=s^2", "--curve", "z=1",
        "--range", "0", "2", "--vector", "1,-2,0.5,3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(transported(&stdout(&o)), vec![1.0, -2.0, 0.5, 3.0]);
    assert!(stdout(&o).contains("drift: 0.000e0"));
}

#[test]
fn crossing_the_horizon_exits_three() {
    let o = run(&[
        "transport", &model("schwarzschild.toml"), "--set", "M=1", "--curve", "t=0", "--curve", "r=s", "--curve",
        "theta=pi/2", "--curve", "phi=0", "--range", "3", "1", "--vector", "1,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn transport_argument_errors_exit_two() {
    let sphere = model("sphere.toml");
    let cases: [&[&str]; 4] = [
        &["--curve", "theta=1", "--range", "0", "1", "--vector", "1,0"],
        &["--curve", "theta=1", "--curve", "psi=s", "--range", "0", "1", "--vector", "1,0"],
        &["--curve", "theta=1", "--curve", "phi=q*s", "--range", "0", "1", "--vector", "1,0"],
        &["--curve", "theta=1", "--curve", "phi=s", "--range", "0", "1", "--vector", "1"],
    ];
    for extra in cases {
        let mut args = vec!["transport", sphere.as_str()];
        args.extend_from_slice(extra);
        assert_eq!(run(&args).status.code(), Some(2), "{extra:?}");
    }
    let unbound = run(&[
        "transport", &model("schwarzschild.toml"), "--curve", "t=0", "--curve", "r=s", "--curve", "theta=1", "--curve",
        "phi=0", "--range", "3", "4", "--vector", "1,0,0,0",
    ]);
    assert_eq!(unbound.status.code(), Some(2));
}

#[test]
fn seeds_change_witness_points_not_verdicts() {
    for seed in ["1", "2"] {
        let o = run(&["verify", "--suite", "curvature", "--seed", seed, &model("schwarzschild.toml")]);
        assert_eq!(o.status.code(), Some(0));
    }
}
