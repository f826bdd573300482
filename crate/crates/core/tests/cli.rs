use std::process::{Command, Output};

use entmono::catalog::w_state;
use entmono::measures::f_tsallis;
use entmono::qstate::QuantumState;
use serde_json::Value;

fn entmono(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entmono"))
        .args(args)
        .env_remove("ENTMONO_SEED")
        .env_remove("ENTMONO_THREADS")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = entmono(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn first_report(v: &Value) -> &Value {
    &v["reports"][0]
}

fn num(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

#[test]
fn measure_dicke_focus_concurrence() {
    let v = ok_json(&["measure", "--family", "dicke:4,2", "--cut", "0|rest", "--measure", "concurrence"]);
    assert_eq!(v[0]["kind"], "concurrence");
    assert_eq!(v[0]["cut"], "0|1,2,3");
    assert!((num(&v[0]["value"]) - 1.0).abs() < 1e-12);
}

#[test]
fn measure_bell_eof() {
    let v = ok_json(&["measure", "--family", "bell", "--measure", "eof"]);
    assert!((num(&v[0]["value"]) - 1.0).abs() < 1e-12);
}

#[test]
fn measure_state_file_tsallis_on_two_qubit_marginal() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w3.json");
    std::fs::write(&path, QuantumState::Pure(w_state(3).unwrap()).to_json().unwrap()).unwrap();
    let v = ok_json(&["measure", "--state", path.to_str().unwrap(), "--measure", "tsallis", "--q", "0.7", "--cut", "0|1"]);
    let expected = f_tsallis((2.0f64 / 3.0).powi(2), 0.7).unwrap();
    assert!((num(&v[0]["value"]) - expected).abs() < 1e-10);
    assert_eq!(v[0]["method"], "functional_of_c2");
}

#[test]
fn measure_several_cuts_and_measures_in_csv() {
    let out = entmono(&[
        "measure", "--family", "ghz:3", "--cut", "0|rest", "--cut", "0,1|2", "-m", "concurrence", "-m", "renyi:2",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "state,cut,measure,params,value,method");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[2], "ghz:3,\"0|1,2\",renyi,q=2,1,spectral");
}

#[test]
fn check_dicke_thm2_residual_two_thirds() {
    let v = ok_json(&[
        "check", "--family", "dicke:4,2", "--kind", "thm2", "--measure", "concurrence", "--alpha", "2", "--gamma", "1",
    ]);
    let r = first_report(&v);
    assert_eq!(r["kind"], "thm2");
    assert!((num(&r["residual"]) - 2.0 / 3.0).abs() < 1e-11);
    assert_eq!(r["pass"], true);
}

#[test]
fn check_dfs_auto_gamma_passes() {
    let v = ok_json(&["check", "--family", "dfs:0.7071,0.7071", "--kind", "thm2", "--alpha", "2", "--gamma", "auto"]);
    let r = first_report(&v);
    assert_eq!(r["pass"], true);
    assert!(num(&r["gamma"]) >= 1.0);
}

#[test]
fn check_product_base_is_zero() {
    let v = ok_json(&["check", "--family", "product", "--kind", "base"]);
    let r = first_report(&v);
    assert_eq!(num(&r["residual"]), 0.0);
    assert_eq!(r["pass"], true);
}

#[test]
fn check_upper_bounds_on_pure_states() {
    for kind in ["thm7", "thm8"] {
        let v = ok_json(&["check", "--family", "w:4", "--kind", kind, "--cut", "0|1,2,3"]);
        assert_eq!(first_report(&v)["pass"], true, "{kind}");
    }
    let v = ok_json(&["check", "--family", "w:4", "--kind", "thm9", "--cut", "0|1,2,3", "-m", "unified:2,1"]);
    assert_eq!(first_report(&v)["pass"], true);
}

#[test]
fn premise_violation_is_informational() {
    let out = entmono(&["check", "--family", "dicke:4,2", "--kind", "thm2", "--alpha", "2", "--gamma", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(first_report(&v)["premise_ok"], false);
}

#[test]
fn sweep_fig1_full_grid_is_nonnegative() {
    let out = entmono(&["sweep", "--fig", "1", "--res", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], ["family", "theta", "phi"]);
    let mut rows = 0;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    for rec in reader.records() {
        let rec = rec.unwrap();
        for field in rec.iter().skip(3) {
            assert!(field.parse::<f64>().unwrap() >= -1e-9);
        }
        rows += 1;
    }
    assert_eq!(rows, 2500);
}

#[test]
fn sweep_fig3_matches_closed_form() {
    let out = entmono(&["sweep", "--fig", "3", "--alpha", "0:5:0.05", "-m", "concurrence"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(&out.stdout[..]);
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let n: f64 = rec[1].parse().unwrap();
        let k: f64 = rec[2].parse().unwrap();
        let alpha: f64 = rec[3].parse().unwrap();
        let tau: f64 = rec[4].parse().unwrap();
        let (whole, pair): (f64, f64) = match (n as u32, k as u32) {
            (4, 2) => (1.0, 1.0 / 3.0),
            (5, 2) => (2.0 * 6f64.sqrt() / 5.0, (3.0 - 3f64.sqrt()) / 5.0),
            (6, 3) => (1.0, 0.2),
            other => panic!("unexpected family {other:?}"),
        };
        let t = alpha / 2.0;
        // gamma = 1: term j carries weight (2^t - 1)^(Hamming weight of j).
        let rhs: f64 = (0..n as u64 - 1)
            .map(|j| (2f64.powf(t) - 1.0).powi(j.count_ones() as i32) * pair.powf(alpha))
            .sum();
        let expected = whole.powf(alpha) - rhs;
        assert!((tau - expected).abs() < 1e-9, "n={n} k={k} alpha={alpha}: {tau} vs {expected}");
        rows += 1;
    }
    assert_eq!(rows, 3 * 101);
}

#[test]
fn sweep_fig2_residuals_nonnegative() {
    let out = entmono(&["sweep", "--fig", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(&out.stdout[..]);
    let header = reader.headers().unwrap().clone();
    let first_tau = header.iter().position(|h| h.starts_with("tau:")).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        for field in rec.unwrap().iter().skip(first_tau).filter(|f| !f.is_empty()) {
            assert!(field.parse::<f64>().unwrap() >= -1e-9);
        }
        rows += 1;
    }
    assert_eq!(rows, 3 * 37);
}

#[test]
fn sample_lemma6_mean_near_lubkin() {
    let v = ok_json(&["sample", "lemma6", "--n", "4", "--s", "4", "--N", "10000", "--t", "0.3", "--seed", "7"]);
    let mean = num(&v["empirical_mean"]);
    let sem = num(&v["empirical_std"]) / 100.0;
    assert!((mean - entmono::concentration::lubkin_mean(4, 4)).abs() <= 3.0 * sem);
    assert_eq!(num(&v["seed"]), 7.0);
}

#[test]
fn sample_lemma6_single_environment_is_zero() {
    let v = ok_json(&["sample", "lemma6", "--n", "4", "--s", "1", "--N", "50", "--t", "0.1"]);
    assert_eq!(num(&v["empirical_mean"]), 0.0);
}

#[test]
fn sample_thm10_reports_band_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("samples.csv");
    let v = ok_json(&[
        "sample", "thm10", "--d", "2", "--s", "2", "--N", "20", "--t", "0.5", "--restarts", "4", "--iters", "100",
        "--dump", dump.to_str().unwrap(),
    ]);
    assert!(v["in_band_fraction"].is_number());
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("index,value,concurrence_sq\n"));
    assert_eq!(text.lines().count(), 21);
}

#[test]
fn seeded_commands_are_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["sample", "lemma6", "--n", "4", "--s", "4", "--N", "500", "--t", "0.2", "--seed", "11"],
        &["sample", "thm10", "--d", "2", "--s", "2", "--N", "10", "--restarts", "3", "--iters", "60", "--seed", "3"],
        &["sweep", "--fig", "1", "--res", "8"],
    ];
    for args in runs {
        let a = entmono(args);
        let b = entmono(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["sample", "lemma6", "--n", "4", "--s", "4", "--N", "400", "--t", "0.2", "--seed", "5"];
    let one = Command::new(env!("CARGO_BIN_EXE_entmono")).args(args).env("ENTMONO_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_entmono")).args(args).env("ENTMONO_THREADS", "4").output().unwrap();
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn seed_env_override_is_echoed() {
    let out = Command::new(env!("CARGO_BIN_EXE_entmono"))
        .args(["sample", "lemma6", "--n", "2", "--s", "2", "--N", "10", "--t", "0.1"])
        .env("ENTMONO_SEED", "99")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(num(&v["seed"]), 99.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = entmono(&["measure", "--family", "bell", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((num(&v[0]["value"]) - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes_distinguish_io_from_domain() {
    let missing = entmono(&["measure", "--state", "/nonexistent/state.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());

    let unwritable = entmono(&["measure", "--family", "bell", "--out", "/nonexistent/dir/out.json"]);
    assert_eq!(unwritable.status.code(), Some(1));

    for args in [
        &["measure", "--family", "dicke:4,9"][..],
        &["measure", "--family", "bell", "--measure", "renyi:1"],
        &["measure", "--family", "ghz:3", "--cut", "0|3"],
        &["check", "--family", "ghz:3", "--kind", "thm9"],
        &["sample", "lemma6", "--n", "0", "--s", "2", "--N", "10", "--t", "0.1"],
        &["bogus"],
    ] {
        let out = entmono(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn malformed_state_file_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"dims\": [2], \"kind\": \"pure\", \"data\": [[1, 0], [1, 0]]}").unwrap();
    let out = entmono(&["measure", "--state", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
