use std::path::Path;
use std::process::{Command, Output};

fn nctrunc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nctrunc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn last_value(csv_path: &Path) -> f64 {
    let mut r = csv::Reader::from_path(csv_path).unwrap();
    let header = r.headers().unwrap().clone();
    let col = header.iter().position(|h| h == "value_re").unwrap();
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    rows.last().unwrap()[col].parse().unwrap()
}

#[test]
fn bundled_config_reproduces_the_szego_limit() {
    let dir = tempfile::tempdir().unwrap();
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/szego_toeplitz.json");
    let out = nctrunc(&["run", config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = last_value(&dir.path().join("szego_x2.csv"));
    assert!((v / 2.0 - 1.0).abs() < 0.02, "{v}");
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = nctrunc(&[
            "qe",
            "--model",
            "flat_torus:2",
            "--op",
            "angular(x1^2 - x2^2)",
            "--lambda-ladder",
            "10,20,40",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("qe.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn subcommands_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["weyl", "--model", "circle"], "weyl.csv"),
        (&["integrate", "--op", "mult(0, 1, 1)", "--estimator", "heat"], "integrate.csv"),
        (&["szego", "--model", "toeplitz", "--op", "toeplitz(0, 1, 1)", "--rhs", "truncated"], "szego.csv"),
        (&["widom", "--op", "mult(0, 1)"], "widom.csv"),
        (&["frohlich", "--op", "proj_pos"], "frohlich.csv"),
        (&["timeavg", "--op", "mult(0, 0, 1)", "--lambda", "16", "--horizon", "1000"], "timeavg.csv"),
    ];
    for (args, file) in cases {
        let mut full = args.to_vec();
        full.extend(["--out", out_dir]);
        let out = nctrunc(&full);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(text.starts_with("schema_version,estimator,model,operator,ladder_point,count,value_re,value_im"));
        assert!(text.lines().count() >= 2);
    }
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let bad_expr = nctrunc(&["integrate", "--op", "mult(0, 1", "--out", out_dir]);
    assert_eq!(bad_expr.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&bad_expr.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);

    let too_big = nctrunc(&["integrate", "--op", "mult(0, 1, 1)", "--lambda-ladder", "1e9", "--out", out_dir]);
    assert_eq!(too_big.status.code(), Some(3));

    let config = dir.path().join("failing.json");
    std::fs::write(
        &config,
        r#"{"schema_version": 1, "model": {"name": "circle"},
            "estimators": [{"id": "t", "estimator": "truncated_integral", "op": "id",
                            "lambda_ladder": [10], "assert": {"value": 3, "abs_tol": 0.1}}]}"#,
    )
    .unwrap();
    let failing = nctrunc(&["run", config.to_str().unwrap(), "--out", out_dir]);
    assert_eq!(failing.status.code(), Some(4));
}
