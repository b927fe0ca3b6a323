use impred::PredictionRegion;
use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};

fn impred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impred"))
        .args(args)
        .env_remove("IMPRED_SEED")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = impred(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn region(v: &Value) -> PredictionRegion {
    serde_json::from_value(v["region"].clone()).expect("region parses")
}

#[test]
fn soil_lead_upper_bound() {
    let v = ok_json(&[
        "interval", "--model", "lognormal", "--data", "soil_lead_offsite", "--target", "mean-of-m:5",
        "--assertion", "right", "--alpha", "0.05", "--mc-draws", "100000",
    ]);
    let r = region(&v);
    assert_eq!(r.lower, f64::NEG_INFINITY);
    assert!((r.upper / 136.16 - 1.0).abs() < 0.02, "{}", r.upper);
    assert!(v["region"]["lower"].is_null());
    assert_eq!(v["model"], "lognormal");
    assert_eq!(v["mc_draws"], 100000);
}

#[test]
fn breakdown_lower_bound() {
    let v = ok_json(&[
        "interval", "--model", "gamma", "--data", "machine_breakdowns", "--target", "max-of-m:5",
        "--assertion", "left", "--alpha", "0.10", "--mc-draws", "100000",
    ]);
    let r = region(&v);
    assert!((r.lower / 73.53 - 1.0).abs() < 0.02, "{}", r.lower);
    assert_eq!(v["method"], "gamma_matched_approx");
}

#[test]
fn hearing_loss_interval() {
    let v = ok_json(&[
        "interval", "--model", "binomial", "--count", "23/23061", "--future-trials", "12694",
        "--assertion", "singleton", "--alpha", "0.10",
    ]);
    let r = region(&v);
    assert_eq!((r.lower, r.upper), (6.0, 21.0));
    assert_eq!(v["target"], "count-of-m:12694");
}

#[test]
fn json_has_required_keys_and_round_trips() {
    let out = impred(&["interval", "--model", "normal", "--data", "soil_lead_onsite", "--alpha", "0.1", "--seed", "9"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["version", "model", "target", "assertion", "alpha", "mc_draws", "seed", "region"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["seed"], 9);
    let r = region(&v);
    let again: PredictionRegion = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(r.lower.to_bits(), again.lower.to_bits());
    assert_eq!(r.upper.to_bits(), again.upper.to_bits());

    let csv = impred(&["interval", "--model", "normal", "--data", "soil_lead_onsite", "--alpha", "0.1", "--seed", "9", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[6].parse::<f64>().unwrap().to_bits(), r.lower.to_bits());
    assert_eq!(row[7].parse::<f64>().unwrap().to_bits(), r.upper.to_bits());
}

#[test]
fn identical_requests_are_byte_identical() {
    let args = ["plaus", "--model", "gamma", "--data", "machine_breakdowns", "--assertion", "left", "--mc-draws", "2000"];
    let a = impred(&args);
    let b = impred(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_from_environment() {
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_impred"));
        c.args(["interval", "--model", "normal", "--data", "soil_lead_onsite", "--mc-draws", "500"]);
        match seed {
            Some(s) => c.env("IMPRED_SEED", s),
            None => c.env_remove("IMPRED_SEED"),
        };
        serde_json::from_slice::<Value>(&c.output().unwrap().stdout).unwrap()
    };
    let env = run(Some("77"));
    assert_eq!(env["seed"], 77);
    assert_ne!(env["region"], run(None)["region"]);
}

#[test]
fn plausibility_curve_shape() {
    let v = ok_json(&["plaus", "--model", "lognormal", "--data", "soil_lead_offsite", "--target", "mean-of-m:5", "--assertion", "right", "--grid-points", "64"]);
    let pts = v["curve"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 64);
    let pl: Vec<f64> = pts.iter().map(|p| p[1].as_f64().unwrap()).collect();
    assert!(pl.windows(2).all(|w| w[1] <= w[0]), "right-sided plausibility is non-increasing");
    assert_eq!(pl[0], 1.0);
    assert_eq!(*pl.last().unwrap(), 0.0);
}

#[test]
fn svg_output() {
    let out = impred(&["plaus", "--model", "gamma", "--data", "machine_breakdowns", "--target", "max-of-m:5", "--assertion", "left", "--alpha", "0.1", "--mc-draws", "2000", "--format", "svg"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
    assert!(s.contains("stroke-dasharray"));
    assert!(s.contains("<path d=\"M"));
}

#[test]
fn input_file_with_header() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "lead").unwrap();
    for v in [26, 63, 3, 70, 16, 5, 1, 57, 5, 3, 24, 2, 1, 48, 3] {
        writeln!(f, "{v}").unwrap();
    }
    let path = f.path().to_str().unwrap();
    let a = ok_json(&["interval", "--model", "lognormal", "--input", path, "--target", "mean-of-m:5", "--assertion", "right"]);
    let b = ok_json(&["interval", "--model", "lognormal", "--data", "soil_lead_offsite", "--target", "mean-of-m:5", "--assertion", "right"]);
    assert_eq!(a["region"], b["region"]);
}

#[test]
fn poisson_arrival_interval() {
    let v = ok_json(&["interval", "--model", "poisson_process", "--arrival", "12.5/10", "--target", "arrival:2", "--assertion", "right", "--alpha", "0.1"]);
    let r = region(&v);
    assert!(r.upper > 12.5);
}

#[test]
fn usage_errors_exit_2() {
    let mismatch = impred(&["interval", "--model", "binomial", "--count", "3/10", "--target", "mean-of-m:3"]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(!mismatch.stderr.is_empty());
    assert_eq!(impred(&["interval", "--bogus"]).status.code(), Some(2));
    assert_eq!(impred(&["interval", "--model", "normal", "--data", "soil_lead_onsite", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(impred(&["interval", "--model", "normal"]).status.code(), Some(2));

    let empty = tempfile::NamedTempFile::new().unwrap();
    let out = impred(&["interval", "--model", "normal", "--input", empty.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, "1\n2\nthree\n").unwrap();
    let out = impred(&["interval", "--model", "normal", "--input", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn numeric_failure_exits_3() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "1e300\n1e-300\n1e250\n1e-250\n").unwrap();
    let out = impred(&["interval", "--model", "lognormal", "--input", f.path().to_str().unwrap(), "--target", "mean-of-m:5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn datasets_listing() {
    let v = ok_json(&["datasets"]);
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|d| d["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["soil_lead_offsite", "soil_lead_onsite", "machine_breakdowns"]);
    assert_eq!(v[2]["n"], 20);
}

#[test]
fn coverage_single_scenario_csv() {
    let out = impred(&[
        "coverage", "--model", "normal", "--mu", "0", "--sigma", "1", "--n", "10", "--reps", "200",
        "--mc-draws", "1000", "--alpha", "0.1", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("model,param1,param2,n"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let cov: f64 = row[10].parse().unwrap();
    assert!((cov - 0.9).abs() < 0.07, "{cov}");
}

#[test]
fn pit_json_report() {
    let v = ok_json(&["pit", "--model", "normal", "--mu", "-1", "--sigma", "2", "--n", "6", "--reps", "150", "--mc-draws", "1000"]);
    assert_eq!(v["report"]["pit_samples"].as_array().unwrap().len(), 150);
    assert!(v["report"]["ks_statistic"].as_f64().unwrap() < 0.2);
    assert_eq!(impred(&["pit", "--model", "normal", "--mu", "0", "--sigma", "1", "--n", "6", "--reps", "50"]).status.code(), Some(2));
}
