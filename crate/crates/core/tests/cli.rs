use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rmt-spacing"));
    c.env_remove("RMT_SPACING_OUTPUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

#[test]
fn tabulate_csv_shape_and_reproducibility() {
    let args = ["tabulate", "--beta", "2", "--s-max", "5", "--step", "0.01", "--format", "csv"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,E,p,surmise,deviation"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 501);
    assert!(rows.iter().all(|r| r.len() == 5));
    assert!((rows[500][0] - 5.0).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_output_matches_schema() {
    let out = run(&["tabulate", "--beta", "4", "--s-max", "1", "--step", "0.1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../schema/spacing_table.schema.json")).unwrap();
    if let Err(path) = validate(&schema, &doc, "$") {
        panic!("schema violation at {path}");
    }
    assert_eq!(doc["rows"].as_array().unwrap().len(), 11);
}

/// The subset of JSON Schema used by the table schema.
fn validate(schema: &serde_json::Value, v: &serde_json::Value, path: &str) -> Result<(), String> {
    use serde_json::Value;
    let fail = || Err(path.to_string());
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "number" => v.is_number(),
            "integer" => v.is_i64() || v.is_u64(),
            "boolean" => v.is_boolean(),
            "string" => v.is_string(),
            _ => false,
        };
        if !ok {
            return fail();
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return fail();
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return fail();
        }
    }
    if let (Some(max), Some(x)) = (schema.get("maximum").and_then(Value::as_f64), v.as_f64()) {
        if x > max {
            return fail();
        }
    }
    if let (Some(p), Some(s)) = (schema.get("pattern").and_then(Value::as_str), v.as_str()) {
        // only ^[0-9a-f]{16}$ is used
        assert_eq!(p, "^[0-9a-f]{16}$");
        if !(s.len() == 16 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))) {
            return fail();
        }
    }
    if let Some(obj) = v.as_object() {
        for r in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            if !obj.contains_key(r.as_str().unwrap()) {
                return Err(format!("{path}.{}", r.as_str().unwrap()));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, val) in obj {
            let sub = props.and_then(|p| p.get(k));
            match (sub, schema.get("additionalProperties")) {
                (Some(s), _) => validate(s, val, &format!("{path}.{k}"))?,
                (None, Some(Value::Bool(false))) => return Err(format!("{path}.{k}")),
                (None, Some(s @ Value::Object(_))) => validate(s, val, &format!("{path}.{k}"))?,
                _ => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(items, x, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--suite", "identities", "--tol", "1e-8"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = run(&["verify", "--suite", "oracle", "--tol", "1e-40"]);
    assert_eq!(bad.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&bad.stderr);
    assert!(msg.contains("worst") && msg.contains(" at "), "{msg}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["tabulate", "--beta", "3"][..],
        &["tabulate", "--beta", "2", "--rel-tol", "1e-3"],
        &["tabulate", "--beta", "2", "--s-max", "1", "--step", "2"],
        &["mc", "--beta", "1", "--samples", "0"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("RMT_SPACING_OUTPUT_DIR", dir.path())
        .args(["tabulate", "--beta", "1", "--s-max", "1", "--step", "0.25"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("tabulate-beta1.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    let explicit = dir.path().join("x.csv");
    let out = run(&["tabulate", "--beta", "1", "--s-max", "1", "--step", "0.25", "-o", explicit.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(explicit).unwrap(), text);
}

#[test]
fn mc_histogram_and_tail_warning() {
    let out = run(&["mc", "--beta", "2", "--samples", "100", "--seed", "3", "--bins", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("bin_left,bin_right,count,density,exact_p\n"));
    assert_eq!(text.lines().count(), 21);
    assert!(String::from_utf8_lossy(&out.stderr).contains("KS distance"));
    let tail = run(&["tabulate", "--beta", "2", "--s-max", "9", "--step", "0.5"]);
    assert_eq!(tail.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&tail.stderr).contains("tail"));
}

#[test]
fn oracle_compare_csv() {
    let out = run(&["oracle-compare", "--grid", "0.5,1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("s,E2_painleve,E2_fredholm,diff\n"));
    assert_eq!(text.lines().count(), 4);
}
