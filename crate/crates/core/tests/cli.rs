use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kernelforge::cli::exit_code;
use kernelforge::io::parse_complex;
use kernelforge::Error;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kernelforge"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(args: &[&str], spec: Option<&Path>, out: Option<&Path>) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    if let Some(s) = spec {
        cmd.arg("--spec").arg(s);
    }
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().expect("binary runs")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {:?}", String::from_utf8_lossy(&o.stderr)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Drops the header row and the leading row-label column.
fn csv_matrix(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(str::to_owned).collect())
        .collect()
}

#[test]
fn gram_of_integer_points_under_sinc_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(
        &["gram", "--format", "csv"],
        Some(&specs().join("gram_sinc.json")),
        Some(&out),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some("0,1,2"));
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), 3);
        for (j, cell) in row.iter().enumerate() {
            let v = parse_complex(cell).unwrap();
            let want = if i == j { 1.0 } else { 0.0 };
            assert!(
                (v.re - want).abs() <= 1e-15 && v.im.abs() <= 1e-15,
                "({i},{j}) = {cell}"
            );
        }
    }
}

#[test]
fn build_kernel_default_grid_has_unit_diagonal() {
    let o = run(
        &["build-kernel", "--format", "csv"],
        Some(&specs().join("paley_wiener.json")),
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 42);
    let rows = csv_matrix(&text);
    assert_eq!(rows.len(), 41);
    // x = 0 is the middle of the 41-point grid on [-2, 2]
    let v = parse_complex(&rows[20][20]).unwrap();
    assert!((v.re - 1.0).abs() <= 1e-15 && v.im.abs() <= 1e-15);
    for (i, row) in rows.iter().enumerate() {
        let v = parse_complex(&row[i]).unwrap();
        assert!((v.re - 1.0).abs() <= 1e-12, "diagonal {i}");
    }
}

#[test]
fn every_example_spec_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("build-kernel", "sobolev.json"),
        ("build-kernel", "gaussian_mixture.json"),
        ("build-kernel", "schoenberg.json"),
        ("build-kernel", "expansion.json"),
        ("build-kernel", "transform_quadrature.json"),
        ("sample-reconstruct", "sample_shifted_sinc.json"),
        ("solve-inverse", "solve_inverse.json"),
        ("error-bound", "error_bound.json"),
    ];
    for (cmd, spec) in cases {
        let out = dir.path().join(format!("{cmd}-{spec}"));
        let o = run(&[cmd], Some(&specs().join(spec)), Some(&out));
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd} {spec}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!fs::read(&out).unwrap().is_empty());
    }
}

#[test]
fn solve_inverse_json_serializes_complex_values() {
    let o = run(
        &["solve-inverse", "--format", "json"],
        Some(&specs().join("solve_inverse.json")),
        None,
    );
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let alpha = v["alpha"].as_array().unwrap();
    assert_eq!(alpha.len(), 4);
    assert!(alpha.iter().all(|a| a["re"].is_f64() && a["im"].is_f64()));
    assert!(v["normal_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn error_bound_writes_report_and_power_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bound.json");
    let o = run(&["error-bound"], Some(&specs().join("error_bound.json")), Some(&out));
    assert_eq!(o.status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let ratio = report["ratio"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ratio));
    let csv = fs::read_to_string(dir.path().join("bound.power.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("omega,power"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn malformed_json_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "bad.json", "{\"type\": \"paley_wiener\",\n \"x\": }");
    let o = run(&["build-kernel"], Some(&spec), None);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error_kind"], "parse");
    let detail = e["detail"].as_str().unwrap();
    assert!(detail.contains("line 2 column 7"), "{detail}");
}

#[test]
fn unknown_family_lists_known_ones() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "unk.json",
        r#"{"kernel": {"type": "matern"}, "points": [0, 1]}"#,
    );
    let o = run(&["gram"], Some(&spec), None);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr_json(&o);
    assert_eq!(e["error_kind"], "unknown_family");
    let detail = e["detail"].as_str().unwrap();
    for family in kernelforge::spec::KNOWN_FAMILIES {
        assert!(detail.contains(family), "{detail}");
    }
}

#[test]
fn domain_errors_keep_their_kind() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "neg.json",
        r#"{"type": "expansion", "basis": "cosine", "weights": [1.0, -0.5]}"#,
    );
    let o = run(&["build-kernel"], Some(&spec), None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error_kind"], "domain");
}

#[test]
fn usage_errors_exit_one_with_json() {
    for args in [&["frobnicate"][..], &["gram"][..], &["gram", "--format", "xml"][..]] {
        let o = run(args, None, None);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert_eq!(stderr_json(&o)["error_kind"], "argument");
    }
    let o = run(&["gram"], Some(Path::new("/nonexistent/spec.json")), None);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"], None, None);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("audit"));
}

#[test]
fn invariant_violations_map_to_exit_two() {
    assert_eq!(
        exit_code(&Error::InvariantViolation {
            message: "bound violated".into(),
            report: None
        }),
        2
    );
    assert_eq!(exit_code(&Error::Argument("x".into())), 1);
    assert_eq!(exit_code(&Error::Parse("x".into())), 1);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("s{threads}.csv"));
        let o = bin()
            .env("KERNELFORGE_THREADS", threads)
            .args(["sample-reconstruct", "--spec"])
            .arg(specs().join("sample_shifted_sinc.json"))
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
