use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const FIXED_T: &str = r#"
x0 = [10.0]

[problem]
name = "quartic1d"

[solver]
regime = "trppm_fixed_t"
t = 0.5
lambda_rule = "bisection"

[outputs]
csv = "trace.csv"
report = "report.json"

[[verification]]
name = "envelope"

[[verification]]
name = "active_step"
"#;

const PPM: &str = r#"
x0 = [10.0]

[problem]
name = "quartic1d"

[solver]
regime = "ppm"
lambda = 1.0
max_iters = 20000

[[verification]]
name = "slope"
quantity = "dist"
basis = "loglog"
window = [1000, 20000]
range = [-0.55, -0.45]
"#;

const FIXED_LAMBDA: &str = r#"
x0 = [3.0, 4.0]

[problem]
name = "quadratic"
q = [[2.0, 0.0], [0.0, 0.5]]

[solver]
regime = "trppm_fixed_lambda"
lambda = 1.0
epsilon = 0.1
theta = 1.0
"#;

fn trppm(dir: &Path, args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_trppm"));
    cmd.current_dir(dir).args(args).env_remove("TRPPM_SEED");
    if let Some(s) = seed {
        cmd.env("TRPPM_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn setup(config: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), config).unwrap();
    dir
}

fn text(out: &Output) -> String {
    format!(
        "{}{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    )
}

/// Reads one column of a summary CSV as strings.
fn column(csv_text: &str, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_reader(csv_text.as_bytes());
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records()
        .map(|rec| rec.unwrap()[idx].to_string())
        .collect()
}

#[test]
fn fixed_t_run_passes_and_writes_outputs() {
    let dir = setup(FIXED_T);
    let out = trppm(dir.path(), &["run", "exp.toml"], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let csv_text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(csv_text.starts_with("k,f_gap,dist,step_len,active,lambda_k,t_k,q_k,envelope"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn ppm_slope_check_passes() {
    let dir = setup(PPM);
    let out = trppm(dir.path(), &["run", "exp.toml"], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(text(&out).contains("PASS slope"), "{}", text(&out));
}

#[test]
fn oversized_constant_lambda_fails_active_step() {
    // At x = 10 the radius-0.5 boundary is reached for lambda = 9.5^3 / 0.5; double it.
    let lambda = 2.0 * 9.5f64.powi(3) / 0.5;
    let config = FIXED_T.replace(
        "lambda_rule = \"bisection\"",
        &format!("lambda_rule = \"constant\"\nlambda = {lambda}"),
    );
    let dir = setup(&config);
    let out = trppm(dir.path(), &["run", "exp.toml"], None);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out));
    assert!(text(&out).contains("FAIL active_step"), "{}", text(&out));
}

#[test]
fn negative_radius_is_a_config_error_naming_the_key() {
    let dir = setup(&FIXED_T.replace("t = 0.5", "t = -1.0"));
    let out = trppm(dir.path(), &["run", "exp.toml"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("solver.t"),
        "{}",
        text(&out)
    );
}

#[test]
fn unknown_key_is_a_config_error_naming_the_key() {
    let dir = setup(&FIXED_T.replace("t = 0.5", "t = 0.5\nmomentum = 0.9"));
    let out = trppm(dir.path(), &["run", "exp.toml"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("solver.momentum"),
        "{}",
        text(&out)
    );
}

#[test]
fn missing_config_file_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = trppm(dir.path(), &["run", "nope.toml"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = setup(FIXED_T);
    assert_eq!(
        trppm(dir.path(), &["run", "exp.toml"], None).status.code(),
        Some(0)
    );
    let first = fs::read(dir.path().join("trace.csv")).unwrap();
    let first_report = fs::read(dir.path().join("report.json")).unwrap();
    assert_eq!(
        trppm(dir.path(), &["run", "exp.toml"], None).status.code(),
        Some(0)
    );
    assert_eq!(first, fs::read(dir.path().join("trace.csv")).unwrap());
    assert_eq!(
        first_report,
        fs::read(dir.path().join("report.json")).unwrap()
    );
}

#[test]
fn sweep_over_radius_needs_fewer_iterations_for_larger_radius() {
    let dir = setup(&FIXED_T.replace(
        "[outputs]\ncsv = \"trace.csv\"\nreport = \"report.json\"\n",
        "",
    ));
    let out = trppm(
        dir.path(),
        &[
            "sweep",
            "exp.toml",
            "--axis",
            "solver.t",
            "--values",
            "0.25,0.5,1,2",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let iters: Vec<usize> = column(&String::from_utf8_lossy(&out.stdout), "iterations")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(iters.len(), 4);
    assert!(iters.windows(2).all(|w| w[1] < w[0]), "{iters:?}");
}

#[test]
fn sweep_over_lambda_shrinks_the_fixed_radius() {
    let dir = setup(FIXED_LAMBDA);
    let out = trppm(
        dir.path(),
        &[
            "sweep",
            "exp.toml",
            "--axis",
            "solver.lambda",
            "--values",
            "0.5,1,2,4",
            "--out",
            "summary.csv",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let t: Vec<f64> = column(&summary, "t_used")
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(t.len(), 4);
    assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
    for (lambda, t) in [0.5, 1.0, 2.0, 4.0].iter().zip(&t) {
        assert!((t - 0.5 / (0.5 + lambda) * 0.1).abs() < 1e-15);
    }
}

#[test]
fn empty_sweep_succeeds_with_header_only() {
    let dir = setup(FIXED_T);
    let out = trppm(
        dir.path(),
        &["sweep", "exp.toml", "--axis", "solver.t", "--values", ""],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
}

#[test]
fn sweep_rejects_non_numeric_axis() {
    let dir = setup(FIXED_T);
    let out = trppm(
        dir.path(),
        &[
            "sweep",
            "exp.toml",
            "--axis",
            "solver.regime",
            "--values",
            "1",
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_equivalence_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = trppm(dir.path(), &["verify", "equivalence"], None);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    assert!(text(&out).contains("overall: PASS"));
}

#[test]
fn verify_rejects_unknown_suite() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        trppm(dir.path(), &["verify", "everything"], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seed_environment_variable_overrides_config_seed() {
    // No closed form for the quartic, so the fixed radius comes from seeded sampling.
    let config = r#"
seed = 42
x0 = [3.0]

[problem]
name = "quartic1d"

[solver]
regime = "trppm_fixed_lambda"
lambda = 1.0
epsilon = 0.5
max_iters = 5

[outputs]
csv = "trace.csv"
"#;
    let dir = setup(config);
    let trace = |seed: Option<&str>| {
        let out = trppm(dir.path(), &["run", "exp.toml"], seed);
        assert_eq!(out.status.code(), Some(0), "{}", text(&out));
        fs::read(dir.path().join("trace.csv")).unwrap()
    };
    let base = trace(None);
    assert_eq!(base, trace(Some("42")));
    assert_ne!(base, trace(Some("7")));
}
