//! End-to-end tests of the command-line binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qinfogeom(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_qinfogeom")).current_dir(dir).args(args).output().expect("spawn");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &Path, name: &str, v: Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

/// Inputs shared by most tests: two qubit states, a qubit tangent and probability vectors.
fn fixture() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "a.json", json!([[[0.6, 0.0], [0.1, 0.2]], [[0.1, -0.2], [0.4, 0.0]]]));
    write(d, "b.json", json!([[0.3, 0.0], [0.0, 0.7]]));
    write(d, "d.json", json!([[0.01, 0.02], [0.02, -0.01]]));
    write(d, "p.json", json!([1.0, 0.0, 0.0]));
    write(d, "q.json", json!([0.0, 0.5, 0.5]));
    write(d, "r.json", json!([0.2, 0.3, 0.5]));
    write(d, "pd.json", json!([[2.0, 0.5], [0.5, 1.0]]));
    dir
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the subset of JSON Schema used by the shipped schemas.
fn conforms(v: &Value, s: &Value, at: &str) -> Result<(), String> {
    let fail = |msg: String| Err(format!("{at}: {msg}"));
    if let Some(t) = s.get("type") {
        let types: Vec<&str> = match t {
            Value::String(x) => vec![x.as_str()],
            Value::Array(xs) => xs.iter().map(|x| x.as_str().unwrap()).collect(),
            _ => unreachable!(),
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "string" => v.is_string(),
            "null" => v.is_null(),
            _ => false,
        });
        if !ok {
            return fail(format!("{v} is not {types:?}"));
        }
    }
    if let Some(options) = s.get("enum").and_then(Value::as_array) {
        if !options.contains(v) {
            return fail(format!("{v} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return fail(format!("{x} < {min}"));
        }
    }
    if let (Some(max), Some(x)) = (s.get("maximum").and_then(Value::as_f64), v.as_f64()) {
        if x > max {
            return fail(format!("{x} > {max}"));
        }
    }
    if let Some(obj) = v.as_object() {
        let props = s.get("properties").and_then(Value::as_object);
        for key in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(key.as_str().unwrap()) {
                return fail(format!("missing {key}"));
            }
        }
        for (k, x) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => conforms(x, sub, &format!("{at}.{k}"))?,
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return fail(format!("unexpected property {k}"))
                }
                None => {}
            }
        }
    }
    if let Some(arr) = v.as_array() {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < n {
                return fail(format!("fewer than {n} items"));
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if arr.len() as u64 > n {
                return fail(format!("more than {n} items"));
            }
        }
        if let Some(items) = s.get("items") {
            for (i, x) in arr.iter().enumerate() {
                conforms(x, items, &format!("{at}[{i}]"))?;
            }
        }
    }
    Ok(())
}

fn report(dir: &Path, args: &[&str]) -> Value {
    let run = qinfogeom(dir, args);
    assert_eq!(run.code, 0, "{args:?}: {}", run.stderr);
    let v: Value = serde_json::from_str(&run.stdout).unwrap();
    conforms(&v, &schema(args[0]), "$").unwrap_or_else(|e| panic!("{args:?}: {e}"));
    v
}

fn error(dir: &Path, args: &[&str], code: i32) -> Value {
    let run = qinfogeom(dir, args);
    assert_eq!(run.code, code, "{args:?}: {}{}", run.stdout, run.stderr);
    let v: Value = serde_json::from_str(&run.stderr).unwrap_or_else(|e| panic!("{e}: {}", run.stderr));
    conforms(&v, &schema("error"), "$").unwrap();
    v
}

#[test]
fn fidelity_of_equal_files_is_one() {
    let dir = fixture();
    let v = report(dir.path(), &["fidelity", "a.json", "a.json"]);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn classical_distance_of_vertices_is_right_angle() {
    let dir = fixture();
    let v = report(dir.path(), &["classical-distance", "p.json", "q.json"]);
    assert!((v["distance"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn billiard_from_seed() {
    let dir = fixture();
    let v = report(dir.path(), &["billiard", "--dim", "3", "--seed", "7"]);
    assert_eq!(v["bounce_ts"].as_array().unwrap().len(), 3);
    assert_eq!(v["kernel_states"].as_array().unwrap().len(), 3);
    assert_eq!(v["matched"], json!(true));
    assert!(v["max_infidelity"].as_f64().unwrap() <= 1e-6);
    assert_eq!(v["seed"], json!(7));
}

#[test]
fn every_subcommand_matches_its_schema() {
    let dir = fixture();
    let d = dir.path();
    report(d, &["jeffreys", "r.json"]);
    report(d, &["multinomial-experiment", "r.json", "--samples", "1000", "--trials", "200"]);
    report(d, &["monotone-stress", "--trials", "100"]);
    for f in ["arithmetic", "geometric", "harmonic"] {
        let v = report(d, &["mean", "pd.json", "b.json", "--f", f]);
        assert_eq!(v["f"], json!(f));
        let v = report(d, &["monotone-metric", "a.json", "d.json", "--f", f]);
        assert!(v["ds2"].as_f64().unwrap() > 0.0);
    }
    report(d, &["bures-distance", "a.json", "b.json"]);
    let g = report(d, &["geodesic", "a.json", "b.json", "--samples", "5"]);
    assert_eq!(g["samples"].as_array().unwrap().len(), 5);
    report(d, &["geodesic", "a.json", "b.json", "--samples", "5", "--full"]);
    let om = report(d, &["optimal-measurement", "a.json", "b.json"]);
    assert!((om["attained_angle"].as_f64().unwrap() - om["bures_angle"].as_f64().unwrap()).abs() < 1e-9);
    let ps = report(d, &["povm-search", "a.json", "b.json", "--grid", "60"]);
    assert!((ps["best_angle"].as_f64().unwrap() - ps["bures_angle"].as_f64().unwrap()).abs() < 1e-6);
    report(d, &["billiard", "a.json", "b.json"]);
    let va = report(d, &["verify-all", "--only", "6", "--only", "9"]);
    assert_eq!(va["passed"], json!(true));
    assert_eq!(va["criteria"].as_array().unwrap().len(), 2);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = fixture();
    let d = dir.path();
    for args in [
        &["billiard", "--dim", "4", "--seed", "11"][..],
        &["monotone-stress", "--trials", "500", "--seed", "3"],
        &["multinomial-experiment", "r.json", "--samples", "500", "--trials", "300", "--seed", "5"],
        &["verify-all", "--only", "9", "--seed", "1"],
    ] {
        let a = qinfogeom(d, args);
        let b = qinfogeom(d, args);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let a = qinfogeom(d, &["billiard", "--dim", "3", "--seed", "1"]).stdout;
    let b = qinfogeom(d, &["billiard", "--dim", "3", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn output_file_and_csv() {
    let dir = fixture();
    let d = dir.path();
    let run = qinfogeom(d, &["fidelity", "a.json", "b.json", "--out", "f.json"]);
    assert_eq!(run.code, 0);
    assert!(run.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(d.join("f.json")).unwrap()).unwrap();
    assert!(v["fidelity"].as_f64().unwrap() < 1.0);

    let csv = qinfogeom(d, &["geodesic", "a.json", "b.json", "--samples", "4", "--format", "csv"]).stdout;
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0].split(',').count(), 1 + 8 + 1);
    let last: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
    // endpoint is ρ₂ = diag(0.3, 0.7)
    assert!((last[1] - 0.3).abs() < 1e-9 && (last[7] - 0.7).abs() < 1e-9);
    assert!((last[9] - 0.3).abs() < 1e-9);

    let csv = qinfogeom(d, &["billiard", "--dim", "2", "--samples", "64", "--format", "csv"]).stdout;
    assert_eq!(csv.lines().count(), 65);
    assert_eq!(csv.lines().next(), Some("t,lambda_min"));
}

#[test]
fn exit_codes_and_error_objects() {
    let dir = fixture();
    let d = dir.path();
    std::fs::write(d.join("broken.json"), "[[0.5, 0],\n [0, 0.5]\n").unwrap();
    let e = error(d, &["fidelity", "a.json", "broken.json"], 1);
    assert_eq!(e["error"], json!("ParseError"));
    assert!(e["message"].as_str().unwrap().contains("line 3"), "{e}");

    write(d, "typo.json", json!([[0.5, 0], [0, "x"]]));
    let e = error(d, &["fidelity", "a.json", "typo.json"], 1);
    assert!(e["message"].as_str().unwrap().contains("[1][1]"), "{e}");

    error(d, &["fidelity", "a.json", "missing.json"], 1);
    error(d, &["fidelity", "a.json"], 1);
    error(d, &["no-such-command"], 1);
    error(d, &["monotone-stress", "--trials", "0"], 1);
    error(d, &["billiard", "--tol", "-1"], 1);
    error(d, &["fidelity", "a.json", "b.json", "--format", "csv"], 1);

    write(d, "neg.json", json!([[1.2, 0], [0, -0.2]]));
    let e = error(d, &["fidelity", "a.json", "neg.json"], 2);
    assert_eq!(e["error"], json!("InvalidInput"));
    let e = error(d, &["jeffreys", "p.json"], 2);
    assert_eq!(e["error"], json!("BoundaryError"));
    let e = error(d, &["billiard", "b.json", "b.json"], 2);
    assert_eq!(e["error"], json!("DegenerateError"));
    write(d, "c3.json", json!([[0.25, 0, 0], [0, 0.25, 0], [0, 0, 0.5]]));
    let e = error(d, &["fidelity", "a.json", "c3.json"], 2);
    assert_eq!(e["error"], json!("DimensionMismatch"));

    assert_eq!(qinfogeom(d, &["--help"]).code, 0);
}

#[test]
fn mean_output_parses_back() {
    let dir = fixture();
    let d = dir.path();
    let v = report(d, &["mean", "pd.json", "pd.json", "--f", "geometric"]);
    let m = qinfogeom::io::parse_complex_matrix(&v["mean"], "mean").unwrap();
    assert!((m[(0, 0)].re - 2.0).abs() < 1e-12 && (m[(0, 1)].re - 0.5).abs() < 1e-12);
}
