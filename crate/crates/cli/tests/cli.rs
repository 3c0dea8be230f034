use std::path::Path;
use std::process::{Command, Output};

fn svetnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_svetnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn bounds_examples() {
    let o = svetnet(&["bounds", "-n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("classical 4, quantum 5.656854"),
        "{}",
        stdout(&o)
    );
    let o = svetnet(&["bounds", "-n", "2", "--variant", "minus"]);
    assert!(stdout(&o).starts_with("classical 2, quantum 2.828427"));
    let o = svetnet(&["bounds", "-n", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn certify_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "canonical.json",
        r#"{"n_parties": 3, "preset": "canonical"}"#,
    );
    let report = dir.path().join("report.json");
    let o = svetnet(&[
        "certify",
        &spec,
        "--exact",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let s = rep["s_hat"].as_f64().unwrap();
    assert!((s - 4.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    assert_eq!(rep["gme_certified"], true);
    assert_eq!(rep["mode"], "exact");

    let o = svetnet(&["certify", "--preset", "classical-optimal", "--parties", "3"]);
    assert_eq!(o.status.code(), Some(1));

    let truncated = write(dir.path(), "bad.json", r#"{"n_parties": 3, "pre"#);
    let o = svetnet(&["certify", &truncated]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let o = svetnet(&["certify", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sampled_certify_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = svetnet(&[
            "certify",
            "--preset",
            "canonical",
            "--rounds",
            "20000",
            "--seed",
            "7",
            "--report",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn selftest_examples() {
    let o = svetnet(&["selftest", "--preset", "canonical"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("ancilla fidelity with graph state 1\n"),
        "{}",
        stdout(&o)
    );

    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("st.json");
    let o = svetnet(&[
        "selftest",
        "--preset",
        "noisy-ghz:0.9",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(rep["state_fidelity_to_ghz"].as_f64().unwrap() < 1.0);
    assert!(rep["stabilizer_residuals"][0].as_f64().unwrap() > 1e-3);

    let non_binary = write(
        dir.path(),
        "nb.json",
        r#"{"n_parties": 2, "state": "graph", "units": [
            {"parties": [1], "observables": "canonical-1"},
            {"parties": [2], "observables": ["pauli-z", [[[1,0],[0,0]],[[0,0],[0,0]]]]}]}"#,
    );
    let o = svetnet(&["selftest", &non_binary]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("units[1].observables[1]"));
}

#[test]
fn stopi_k2_and_unsupported_k() {
    let o = svetnet(&["stopi", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let f: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("f = "))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    let analytic = (4.0 + 5.0 * std::f64::consts::SQRT_2) / 16.0;
    assert!((f - analytic).abs() / analytic < 1e-3);
    assert_eq!(svetnet(&["stopi", "--k", "5"]).status.code(), Some(2));
}

#[test]
fn curve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert_eq!(
            svetnet(&["curve", "-n", "4", "--out", p.to_str().unwrap()])
                .status
                .code(),
            Some(0)
        );
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.as_bytes(), std::fs::read(&b).unwrap().as_slice());
    assert_eq!(text.lines().count(), 1 + 3 * 200);
}

#[test]
fn decompose_and_value() {
    let o = svetnet(&["decompose", "-n", "4", "--coalition", "3,4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().filter(|l| l.contains("fixed")).count(),
        2
    );
    let o = svetnet(&["decompose", "-n", "4", "--coalition", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = svetnet(&["value", "--preset", "canonical", "--parties", "4"]);
    assert!(stdout(&o).contains("11.313708499"), "{}", stdout(&o));
}

#[test]
fn thread_variable_is_honored_and_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_svetnet"))
        .args(["bounds", "-n", "3"])
        .env("SVETNET_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_svetnet"))
        .args(["bounds", "-n", "3"])
        .env("SVETNET_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_matches_shipped_schema_keys() {
    let schema: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../schemas/report.schema.json"
        ))
        .unwrap(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    svetnet(&[
        "certify",
        "--preset",
        "canonical",
        "--rounds",
        "100",
        "--report",
        report.to_str().unwrap(),
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let obj = rep.as_object().unwrap();
    let props = schema["properties"].as_object().unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(obj.contains_key(key.as_str().unwrap()), "missing {key}");
    }
    for key in obj.keys() {
        assert!(props.contains_key(key), "undocumented {key}");
    }
    let strategy: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../schemas/strategy.schema.json"
        ))
        .unwrap(),
    )
    .unwrap();
    assert_eq!(strategy["additionalProperties"], false);
}
