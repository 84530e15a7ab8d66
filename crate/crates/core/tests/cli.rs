use serde_json::Value;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_battery-gates")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn f(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or_else(|| panic!("{path:?} missing"))
}

const HADAMARD: &str = r#"{"type":"qubit","theta":0.7853981633974483,"gamma":0,"delta":0}"#;

#[test]
fn identity_gate_report_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "c.json", r#"{"gate":{"type":"qubit","theta":0,"gamma":0,"delta":3.141592653589793},"battery":{"kind":"sine","n_levels":12}}"#);
    let r = json(&run(&["infidelity", "--config", c.to_str().unwrap()]));
    assert!(f(&r, &["eps_c_exact"]).abs() < 1e-15);
    assert!(r.get("eps_c_closed").is_some());
    assert!(r.get("eps_wc_lb").is_some());
    assert!(r["units"].as_str().unwrap().contains("omega"));
}

#[test]
fn sine_report_band() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "c.json", &format!(r#"{{"gate":{HADAMARD},"battery":{{"kind":"sine","n_levels":64}}}}"#));
    let r = json(&run(&["infidelity", "--config", c.to_str().unwrap()]));
    let exact = f(&r, &["eps_c_exact"]);
    let spectral = f(&r, &["eps_c_spectral", "eps_c_spectral"]);
    let band = f(&r, &["eps_c_spectral", "expected_gap"]);
    assert!((spectral - exact - band).abs() < 1e-14);
    // The gap is one order of N below the infidelity itself.
    assert!(band < exact / 64.0);
    assert_eq!(r["sandwich_ok"], Value::Bool(true));
}

#[test]
fn coherent_report_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "c.json", &format!(r#"{{"gate":{HADAMARD},"battery":{{"kind":"poisson","alpha":10}},"worst_case":{{"restarts":0}}}}"#));
    let r = json(&run(&["infidelity", "--config", c.to_str().unwrap()]));
    let x = f(&r, &["eps_c_exact"]) * f(&r, &["resources", "mean_energy"]) / 0.5;
    assert!((x / 0.25 - 1.0).abs() < 0.1, "{x}");
    assert_eq!(r["eps_wc_lb"], Value::Null);
}

#[test]
fn optimal_state_predictions() {
    let r = json(&run(&["optimal-state", "--resource", "n-levels", "--budget", "16"]));
    let re = r["state"]["amps_re"].as_array().unwrap();
    assert_eq!(re.iter().filter(|x| x.as_f64().unwrap() != 0.0).count(), 15);
    assert!((f(&r, &["predicted_ud"]) - PI * PI / 256.0).abs() < 1e-15);

    let r = json(&run(&["optimal-state", "--resource", "mean-sq-energy", "--budget", "100"]));
    assert!((f(&r, &["predicted_ud"]) - 0.0225).abs() < 1e-15);
    assert_eq!(r["profile"], "hermite1");

    let r = json(&run(&["optimal-state", "--resource", "mean-energy", "--budget", "50"]));
    // eta^2 = 1.8936059 from the computed constants.
    assert!((f(&r, &["predicted_ud"]) - 1.8936059 / 2500.0).abs() < 1e-9);
    assert!((f(&r, &["resources", "mean_energy"]) / 50.0 - 1.0).abs() < 0.01);

    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "c.json", r#"{"resource":"qfi","budget":400}"#);
    let r = json(&run(&["optimal-state", "--config", c.to_str().unwrap()]));
    assert_eq!(r["profile"], "qfi_gaussian");
    assert!((f(&r, &["resources", "qfi"]) / 400.0 - 1.0).abs() < 0.01);
}

#[test]
fn unknown_resource_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "c.json", r#"{"resource":"entropy","budget":4}"#);
    assert_eq!(run(&["optimal-state", "--config", c.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["optimal-state", "--resource", "n-levels", "--budget", "2.5"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.json", "{ not json");
    assert_eq!(run(&["infidelity", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["infidelity"]).status.code(), Some(2));
    assert_eq!(run(&["infidelity", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let nonunitary = config(dir.path(), "nu.json", r#"{"gate":{"type":"matrix","re":[[1,1],[0,1]],"im":[[0,0],[0,0]]},"battery":{"kind":"sine","n_levels":8}}"#);
    assert_eq!(run(&["infidelity", "--config", nonunitary.to_str().unwrap()]).status.code(), Some(2));
    // A truncation that cuts the Airy tail is a numerical failure.
    let tail = config(
        dir.path(),
        "tail.json",
        &format!(r#"{{"gate":{HADAMARD},"battery":{{"kind":"profile","profile":{{"tag":"airy","mean_energy":2}},"delta":0.25,"truncation":8}}}}"#),
    );
    let out = run(&["infidelity", "--config", tail.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tail"));
}

fn sweep_csv(body: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "s.json", body);
    let out = run(&["sweep", "--config", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (headers, rows)
}

#[test]
fn sine_level_sweep_converges() {
    let (h, rows) = sweep_csv(&format!(
        r#"{{"variable":"n_levels","grid":[8,16,32,64,128,256],"gate":{HADAMARD},"outputs":["param","eps_times_n2","eps_c_spectral"]}}"#
    ));
    assert_eq!(h, vec!["n_levels[1]", "eps_times_n2[1]", "eps_c_spectral[1]"]);
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((last / (0.5 * PI * PI) - 1.0).abs() < 5e-3);
    let mut prev = 0.0;
    for r in &rows {
        let x: f64 = r[1].parse().unwrap();
        assert!(x > prev);
        prev = x;
        // Seventeen significant digits in scientific notation.
        let mantissa = r[1].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17, "{}", r[1]);
    }
}

#[test]
fn airy_delta_sweep_converges() {
    let (_, rows) = sweep_csv(&format!(
        r#"{{"variable":"delta","grid":[0.03125,0.015625,0.0078125],"gate":{HADAMARD},"profile":{{"tag":"airy","mean_energy":1}},"outputs":["param","eps_over_delta2","eps_times_e2"]}}"#
    ));
    // eps / delta^2 -> eta^2 |V01|^2 omega^2 / <E>^2 with <E> = 1 at unit step.
    let target = 1.8936059 * 0.5;
    let errs: Vec<f64> = rows.iter().map(|r| (r[1].parse::<f64>().unwrap() / target - 1.0).abs()).collect();
    assert!(errs[2] < errs[0]);
    assert!(errs[2] < 0.01, "{errs:?}");
}

#[test]
fn sweep_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        format!(r#"{{"variable":"n_levels","grid":[8,16],"gate":{HADAMARD},"outputs":[]}}"#),
        format!(r#"{{"variable":"n_levels","grid":[],"gate":{HADAMARD},"outputs":["param"]}}"#),
        format!(r#"{{"variable":"n_levels","grid":[8,8],"gate":{HADAMARD},"outputs":["param"]}}"#),
        format!(r#"{{"variable":"n_levels","grid":[8,16],"gate":{HADAMARD},"outputs":["bogus"]}}"#),
        format!(r#"{{"variable":"delta","grid":[0.1],"gate":{HADAMARD},"outputs":["param"]}}"#),
    ] {
        let c = config(dir.path(), "s.json", &body);
        assert_eq!(run(&["sweep", "--config", c.to_str().unwrap()]).status.code(), Some(2), "{body}");
    }
}

#[test]
fn sweep_csv_quotes_and_json_agree() {
    let body = format!(r#"{{"variable":"alpha","grid":[4,6],"gate":{HADAMARD},"outputs":["param","mean_energy","eps_times_e"]}}"#);
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "s.json", &body);
    let csv_out = run(&["sweep", "--config", c.to_str().unwrap()]).stdout;
    assert!(csv_out.windows(2).any(|w| w == b"\r\n"));
    let j = json(&run(&["sweep", "--config", c.to_str().unwrap(), "--format", "json"]));
    let mut r = csv::Reader::from_reader(csv_out.as_slice());
    for (rec, row) in r.records().zip(j["rows"].as_array().unwrap()) {
        let rec = rec.unwrap();
        assert_eq!(rec[1].parse::<f64>().unwrap(), row["mean_energy"].as_f64().unwrap());
    }
}

#[test]
fn bounds_certification() {
    let dir = tempfile::tempdir().unwrap();
    let airy = config(
        dir.path(),
        "a.json",
        &format!(r#"{{"gate":{HADAMARD},"battery":{{"kind":"profile","profile":{{"tag":"airy","mean_energy":1}},"delta":0.015625}},"worst_case":{{"restarts":0}}}}"#),
    );
    let report = run(&["infidelity", "--config", airy.to_str().unwrap(), "--out", dir.path().join("ar.json").to_str().unwrap()]);
    assert_eq!(report.status.code(), Some(0));
    let b = json(&run(&["bounds", "--config", dir.path().join("ar.json").to_str().unwrap()]));
    assert_eq!(b["any_violated"], Value::Bool(false));
    let energy = &b["checks"][0];
    assert_eq!(energy["resource"], "mean_energy");
    assert!(f(energy, &["relative_slack"]).abs() < 0.01);

    let coherent = config(dir.path(), "c.json", &format!(r#"{{"gate":{HADAMARD},"battery":{{"kind":"poisson","alpha":20}},"worst_case":{{"restarts":0}}}}"#));
    std::fs::write(dir.path().join("cr.json"), run(&["infidelity", "--config", coherent.to_str().unwrap()]).stdout).unwrap();
    let b = json(&run(&["bounds", "--config", dir.path().join("cr.json").to_str().unwrap()]));
    assert!(f(&b["checks"][0], &["relative_slack"]) > 1.0);
    assert_eq!(b["any_violated"], Value::Bool(false));

    let csv = run(&["bounds", "--config", dir.path().join("cr.json").to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("resource,requirement,actual,slack,relative_slack,violated"));
}

#[test]
fn constants_side_by_side() {
    let c = json(&run(&["constants"]));
    assert!((f(&c, &["computed", "airy_root"]) - 2.338107410459767).abs() < 1e-12);
    assert_eq!(f(&c, &["quoted", "airy_root"]), 2.338);
    let out = run(&["constants", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,computed,quoted\r\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn qudit_compare_record() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), "q.json", &format!(r#"{{"gate":{HADAMARD},"d":3,"profile":{{"tag":"sine"}},"delta":0.015625}}"#));
    let r = json(&run(&["qudit-compare", "--config", c.to_str().unwrap()]));
    for k in ["d", "eps_scheme1", "eps_scheme2", "ratio", "resources"] {
        assert!(r.get(k).is_some(), "{k}");
    }
    assert!((f(&r, &["ratio"]) / 4.0 - 1.0).abs() < 0.15);
    let full = config(dir.path(), "f.json", r#"{"gate":{"type":"matrix","re":[[0,0,1],[0,1,0],[1,0,0.5]],"im":[[0,0,0],[0,0,0],[0,0,0]]},"profile":{"tag":"sine"},"delta":0.1}"#);
    assert_eq!(run(&["qudit-compare", "--config", full.to_str().unwrap()]).status.code(), Some(2));
}
