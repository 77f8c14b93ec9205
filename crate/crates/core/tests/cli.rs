use std::process::{Command, Output};

fn fracplap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracplap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn cbeta_single_row_csv() {
    let o = fracplap(&["cbeta", "--N", "3", "--s", "0.5", "--p", "2", "--beta", "-1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("schema_version,"));
    for col in ["beta", "value", "err_est", "predicted_sign", "rhs_exponent"] {
        assert!(lines[0].split(',').any(|c| c == col), "missing column {col}");
    }
}

#[test]
fn cbeta_zero_at_origin() {
    let o = fracplap(&["cbeta", "--N", "3", "--s", "0.5", "--p", "2", "--beta", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["kind"], "cbeta");
    let row = &v["rows"][0];
    assert_eq!(row["value"].as_f64(), Some(0.0));
    assert_eq!(row["predicted_sign"], "zero");
}

#[test]
fn cbeta_grid_follows_chart() {
    let o = fracplap(&[
        "cbeta", "--N", "2", "--s", "0.5", "--p", "2", "--beta-grid", "-1.8:0.4:12", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    for row in rows {
        let value = row["value"].as_f64().unwrap();
        let err = row["err_est"].as_f64().unwrap();
        if value.abs() > 10.0 * err {
            let sign = if value > 0.0 { "positive" } else { "negative" };
            assert_eq!(row["predicted_sign"], sign, "{row}");
        }
    }
}

#[test]
fn usage_errors_exit_64() {
    for args in [
        vec!["cbeta", "--N", "2", "--s", "0.5", "--p", "2", "--beta-grid", "1:2"],
        vec!["cbeta", "--N", "2", "--s", "0.5", "--p", "2"],
        vec!["frobnicate"],
        vec!["kernel", "--rho", "abc"],
    ] {
        assert_eq!(fracplap(&args).status.code(), Some(64), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(fracplap(&["--help"]).status.code(), Some(0));
    assert_eq!(fracplap(&["--version"]).status.code(), Some(0));
}

#[test]
fn domain_errors_exit_2() {
    let o = fracplap(&["kernel", "--rho", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = fracplap(&["cbeta", "--N", "2", "--s", "0.5", "--p", "2", "--beta", "-5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = fracplap(&["verify", "log", "--N", "2", "--s", "0.5", "--p", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn kernel_compare_and_origin() {
    let o = fracplap(&["kernel", "--N", "2", "--s", "0.5", "--p", "2", "--rho", "0.25", "--compare", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &json(&o)["rows"][0];
    let k = row["k"].as_f64().unwrap();
    let kt = row["k_theta"].as_f64().unwrap();
    assert!(((k - kt) / kt).abs() < 1e-8);
    assert!(row["rel_diff"].as_f64().unwrap() < 1e-8);

    let o = fracplap(&["kernel", "--rho", "0", "--format", "json"]);
    let k0 = json(&o)["rows"][0]["k"].as_f64().unwrap();
    assert!((k0 - std::f64::consts::PI).abs() < 1e-14);
}

#[test]
fn verify_reports_pass() {
    let o = fracplap(&["verify", "fundamental", "--N", "2", "--s", "0.5", "--p", "3", "--beta", "-0.3", "--radii", "0.5,1,2,5"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["verdict"], "pass");
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);

    let o = fracplap(&["verify", "log", "--N", "2", "--s", "0.5", "--p", "4", "--radii", "0.5,1,3"]);
    assert_eq!(o.status.code(), Some(0));

    let o = fracplap(&["verify", "supercritical", "--N", "3", "--s", "0.5", "--p", "2", "--q", "4", "--radii", "0.5,1,2,8"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["verdict"], "pass");
}

#[test]
fn failed_check_exits_1() {
    // the constant in the psi threshold is not sufficient at this set
    let o = fracplap(&["verify", "psi", "--N", "3", "--s", "0.5", "--p", "2", "--beta", "-2.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["verdict"], "fail");
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("fracplap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    let args = ["kernel", "--rho", "0.1,0.5,2", "--compare"];
    let direct = fracplap(&args);
    let mut with_file: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_file.extend(["--output", p]);
    let o = fracplap(&with_file);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["cbeta", "--N", "3", "--s", "0.5", "--p", "2", "--beta-grid", "-2.5:0.5:7"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_fracplap"))
            .args(args)
            .env("FRACPLAP_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let auto = run("0");
    let three = run("3");
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, auto.stdout);
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(run("many").status.code(), Some(64));
}

#[test]
fn json_outputs_match_documented_schema() {
    let schema: serde_json::Value =
        serde_json::from_str(include_str!("../../../docs/report_schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let runs: [&[&str]; 9] = [
        &["cbeta", "--N", "2", "--s", "0.5", "--p", "2", "--beta-grid", "-1.8:0.4:5"],
        &["kernel", "--rho", "0,0.5,2", "--compare", "--format", "json"],
        &["kernel", "--rho", "0.3"],
        &["verify", "fundamental", "--N", "3", "--s", "0.5", "--p", "2", "--beta", "-1.5"],
        &["verify", "log", "--N", "3", "--s", "0.75", "--p", "4"],
        &["verify", "phi", "--N", "3", "--s", "0.5", "--p", "2", "--beta", "-2.5", "--samples", "4"],
        &["verify", "theta", "--N", "2", "--s", "0.9", "--p", "5", "--beta", "0.3"],
        &["verify", "cutoff", "--N", "2", "--s", "0.5", "--p", "3"],
        &["verify", "supercritical", "--N", "3", "--s", "0.5", "--p", "2", "--q", "4"],
    ];
    for args in runs {
        let mut args = args.to_vec();
        if !args.contains(&"--format") {
            args.extend(["--format", "json"]);
        }
        let o = fracplap(&args);
        let doc = json(&o);
        let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}
