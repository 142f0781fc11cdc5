use std::process::{Command, Output};

use serde_json::Value;

fn mlkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const HEADER: &str = "alpha,beta,lambda_re,lambda_im,t,value_re,value_im,method,err_est";

#[test]
fn eval_matches_erfc_value() {
    let o = mlkit(&["eval", "--alpha", "0.5", "--beta", "1", "--lambda", "1", "--t", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // e·erfc(-1)
    let want = 5.008_980_080_762_283;
    let got = v["value_re"].as_f64().unwrap();
    assert!((got - want).abs() < 1e-9 * want, "{got}");
    assert_eq!(v["region"], "ResiduePresent");
    assert!(v["err_est"].as_f64().unwrap() >= 0.0);
}

#[test]
fn eval_every_method_in_plain_format() {
    for method in ["auto", "repr", "asympt"] {
        let o = mlkit(&["eval", "--alpha", "0.5", "--lambda", "-1", "--t", "30", "--method", method]);
        assert_eq!(o.status.code(), Some(0), "{method}: {}", stderr(&o));
        let out = stdout(&o);
        let value: f64 = out.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
        // E_{1/2}(-√30) = e^30·erfc(√30)
        assert!((value - 0.101_369_093_440_292_27).abs() < 1e-6, "{method}: {value}");
        assert!(out.lines().any(|l| l.starts_with("region")));
    }
    // |z| ≈ 5.5 cancels too much for the double-precision series at 1e-10
    let o = mlkit(&["eval", "--alpha", "0.5", "--lambda", "-1", "--t", "30", "--method", "series"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cancellation"));
}

#[test]
fn eval_complex_lambda() {
    let o = mlkit(&[
        "eval", "--alpha", "0.6", "--lambda-re", "0.3", "--lambda-im", "-0.4", "--t", "2", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], HEADER);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells.len(), 9);
    assert!(cells[6].parse::<f64>().unwrap() != 0.0);
}

#[test]
fn eval_domain_errors_exit_one() {
    let o = mlkit(&["eval", "--alpha", "0.5", "--beta", "0.5", "--t", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("singular limit"), "{}", stderr(&o));

    let o = mlkit(&["eval", "--alpha", "1.2", "--t", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha must lie in (0,1)"), "{}", stderr(&o));

    let o = mlkit(&["eval", "--alpha", "0.5", "--lambda-re", "0", "--lambda-im", "1", "--t", "1", "--method", "repr"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("wedge boundary"));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["eval", "--alpha", "0.5"][..],
        &["eval", "--alpha", "0.5", "--t", "1", "--tol", "0.1"],
        &["eval", "--alpha", "0.5", "--t", "1", "--tol", "1e-16"],
        &["eval", "--alpha", "0.5", "--t", "1", "--format", "xml"],
        &["eval", "--alpha", "0.5", "--t", "1", "--lambda", "1", "--lambda-re", "2"],
        &["table", "--alpha", "0.5", "--t-log", "1:0.5:10"],
        &["table", "--alpha", "0.5", "--t-log", "0:1:10"],
        &["table", "--alpha", "0.5", "--t-lin", "0:1:1"],
        &["table", "--alpha", "0.5", "--t-lin", "0:1"],
        &["table", "--alpha", "0.5", "--t-lin", "a:1:5"],
        &["table", "--alpha", "0.5"],
        &["bounds", "--alpha", "0.5", "--lambda", "-1", "--eq", "99"],
        &["frobnicate"],
    ] {
        let o = mlkit(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn table_rows_decrease_for_negative_lambda() {
    let o = mlkit(&["table", "--alpha", "0.5", "--beta", "1", "--lambda", "-1", "--t-log", "0.01:100:50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(!out.contains('\r'));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 50);
    let t: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(t[0], 0.01);
    assert_eq!(t[49], 100.0);
    let values: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn table_linear_json() {
    let o = mlkit(&["table", "--alpha", "0.7", "--beta", "1.2", "--lambda", "2", "--t-lin", "0:4:5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0]["value_re"].as_f64(), Some(0.0));
    assert_eq!(rows[4]["t"].as_f64(), Some(4.0));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["table", "--alpha", "0.3", "--lambda", "-5", "--t-log", "0.1:50:20", "--tol", "1e-12"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mlkit"))
            .args(args)
            .env("MLKIT_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("0"));
    let o = Command::new(env!("CARGO_BIN_EXE_mlkit"))
        .args(args)
        .env("MLKIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numbers_carry_seventeen_digits() {
    let o = mlkit(&["eval", "--alpha", "0.5", "--t", "1", "--format", "csv"]);
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    let value = row.split(',').nth(5).unwrap();
    let mantissa = value.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{value}");

    let o = mlkit(&["eval", "--alpha", "0.5", "--t", "1"]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let plain = first.split_whitespace().nth(1).unwrap();
    assert_eq!(plain.split('e').next().unwrap().replace('.', "").len(), 10, "{plain}");
}

#[test]
fn verify_single_check() {
    let o = mlkit(&["verify", "trig_identity"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["check_name"], "trig_identity");
    assert_eq!(reports[0]["passed"], true);
    assert_eq!(reports[0]["grid_points"], 1000);
    assert!(reports[0]["seed"].as_u64().is_some());
}

#[test]
fn verify_seed_changes_only_randomized_output() {
    let a = stdout(&mlkit(&["verify", "density_relation", "--seed", "1"]));
    let b = stdout(&mlkit(&["verify", "density_relation", "--seed", "1"]));
    let c = stdout(&mlkit(&["verify", "density_relation", "--seed", "2"]));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn verify_unknown_check_lists_names() {
    let o = mlkit(&["verify", "no_such_check"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("series_vs_repr") && err.contains("J_decay"), "{err}");
}

#[test]
fn verify_all_reports_every_check() {
    let o = mlkit(&["verify", "all"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 13);
    let all_passed = reports.iter().all(|r| r["passed"] == true);
    assert_eq!(o.status.code(), Some(if all_passed { 0 } else { 1 }));
    for r in reports {
        let thr = r["threshold"].as_f64().unwrap();
        let within = |k: &str| r[k].as_f64().is_some_and(|x| x <= thr);
        assert_eq!(r["passed"] == true, within("max_rel_defect") || within("max_abs_defect"));
    }
}

#[test]
fn verify_csv_rows() {
    let o = mlkit(&["verify", "mellin_sine", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 21);
    assert!(out.lines().nth(1).unwrap().starts_with("mellin_sine,phi="));
}

#[test]
fn bounds_examples() {
    let o = mlkit(&["bounds", "--alpha", "0.5", "--lambda", "-1", "--eq", "24", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["constant"].as_f64().unwrap();
    // |a₁Γ(1/2)| = 1/√π
    assert!(c.is_finite() && c >= 1.0 / std::f64::consts::PI.sqrt(), "{c}");
    assert_eq!(v["grid_size"], 100);

    let o = mlkit(&["bounds", "--alpha", "0.7", "--lambda", "2", "--eq", "25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("t_star")));
    let c: f64 = out.lines().next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(c.is_finite() && c > 0.0);

    let o = mlkit(&["bounds", "--alpha", "1.5", "--lambda", "-1", "--eq", "24"]);
    assert_eq!(o.status.code(), Some(1));
}
