use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn racket(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_racket")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

fn sidecar(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tre_pulse_has_no_second_component() {
    let tmp = tempfile::tempdir().unwrap();
    let o = racket(tmp.path(), &["pulse", "--family", "tre", "--k", "0.5", "--eps", "0.01", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("o/pulse.csv"));
    assert_eq!(rows.len(), 2048);
    assert!(rows.iter().all(|r| r[2] == 0.0));
    let side = sidecar(&tmp.path().join("o/pulse.json"));
    assert_eq!(side["config"]["k"], 0.5);
    assert_eq!(side["details"]["pulse"]["family"], "tre-rotating");
    assert_eq!(side["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn allen_eberly_peak_in_file() {
    let tmp = tempfile::tempdir().unwrap();
    let o = racket(tmp.path(), &["pulse", "--family", "allen-eberly", "--k", "0.5", "--samples", "2049", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let peak = csv_rows(&tmp.path().join("o/pulse.csv")).iter().map(|r| r[1]).fold(f64::MIN, f64::max);
    assert!((peak - 1.154_700_538_379_251_5).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for args in [
        vec!["pulse", "--family", "tre", "--eps", "0.01"],
        vec!["gate", "toffoli", "--k", "0.5"],
        vec!["pulse", "--family", "tre", "--k", "1.5", "--eps", "0.01"],
        vec!["pulse", "--bogus"],
        vec!["sweep", "--preset", "nope"],
        vec![],
    ] {
        let o = racket(tmp.path(), &args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn tuned_transfer_in_experiment_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--family", "tre", "--k", "0.5", "--eps", "0.01", "--frame", "experiment", "--m0", "0,1,0", "--out", "o"];
    assert_eq!(code(&racket(tmp.path(), &args)), 0);
    let last = csv_rows(&tmp.path().join("o/trajectory.csv")).pop().unwrap();
    assert!(last[2] <= -0.99, "{last:?}");
    assert!(sidecar(&tmp.path().join("o/trajectory.json"))["details"]["J2"].as_f64().unwrap() >= 0.99);
}

#[test]
fn rect_axis_angle_export() {
    let tmp = tempfile::tempdir().unwrap();
    let o = racket(tmp.path(), &["simulate", "--family", "rect", "--samples", "64", "--emit", "axis-angle", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(tmp.path().join("o/axis_angle.csv")).unwrap();
    assert!(text.starts_with("t,n1,n2,n3,angle,defined\n"));
    let rows = csv_rows(&tmp.path().join("o/axis_angle.csv"));
    assert_eq!(rows.len(), 64);
    for r in &rows[1..] {
        assert!((r[1] - 1.0).abs() < 1e-12 && r[2].abs() < 1e-12 && r[3].abs() < 1e-12);
    }
}

#[test]
fn zero_duration_gives_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let o = racket(tmp.path(), &["simulate", "--family", "zero", "--duration", "0", "--m0", "0.6,0,0.8", "--out", "o"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&tmp.path().join("o/trajectory.csv"));
    assert_eq!(rows, vec![vec![0.0, 0.6, 0.0, 0.8]]);
}

#[test]
fn experiment_preset_has_eleven_points() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&racket(tmp.path(), &["sweep", "--preset", "experiment", "--out", "o"])), 0);
    let tre = csv_rows(&tmp.path().join("o/experiment_tre.csv"));
    let rect = csv_rows(&tmp.path().join("o/experiment_rect.csv"));
    assert_eq!((tre.len(), rect.len()), (11, 11));
    assert!(tre[5][2] >= 0.99);
    for r in &rect {
        assert!((r[2] - (std::f64::consts::PI * r[0]).cos()).abs() <= 1e-9);
    }
}

#[test]
fn sweep_bytes_do_not_depend_on_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["sweep", "--family", "tre", "--k", "0.6", "--eps", "0.01", "--samples", "600", "--alpha-steps", "9", "--delta-steps", "7"];
    let mut outputs = Vec::new();
    for (w, dir) in [("1", "w1"), ("8", "w8")] {
        let mut args = base.to_vec();
        args.extend(["--workers", w, "--out", dir]);
        assert_eq!(code(&racket(tmp.path(), &args)), 0);
        outputs.push((
            std::fs::read(tmp.path().join(dir).join("map.csv")).unwrap(),
            std::fs::read(tmp.path().join(dir).join("map.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn fig3_preset_writes_four_maps() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["sweep", "--preset", "fig3", "--alpha-steps", "5", "--delta-steps", "5", "--out", "o"];
    assert_eq!(code(&racket(tmp.path(), &args)), 0);
    for k in ["0.2", "0.6", "0.9", "0.99"] {
        let rows = csv_rows(&tmp.path().join(format!("o/fig3_k{k}.csv")));
        assert_eq!(rows.len(), 25);
        assert!(rows[12][2] >= 0.99, "k = {k}");
    }
}

#[test]
fn not_gate_report() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&racket(tmp.path(), &["gate", "not", "--k", "0.5", "--out", "o"])), 0);
    let side = sidecar(&tmp.path().join("o/gate_not.json"));
    assert!(side["details"]["not"]["fidelity"].as_f64().unwrap() >= 1.0 - 1e-6);
    assert_eq!(side["details"]["not"]["converged"], true);
}

#[test]
fn phase_gate_budget() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&racket(tmp.path(), &["gate", "phase", "--target", "1.5707963", "--out", "o"])), 0);
    let side = sidecar(&tmp.path().join("o/gate_phase.json"));
    let geometric = side["details"]["budget"]["geometric"].as_f64().unwrap();
    assert!((geometric - std::f64::consts::FRAC_PI_2).abs() < 1e-3, "{geometric}");
    assert_eq!(side["details"]["report"]["feasible"], true);
}

#[test]
fn failed_tuning_exits_3_and_still_writes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = racket(tmp.path(), &["gate", "not", "--k", "0.5", "--range", "0.5,0.6", "--out", "o"]);
    assert_eq!(code(&o), 3);
    assert!(tmp.path().join("o/gate_not.csv").exists());
    assert_eq!(sidecar(&tmp.path().join("o/gate_not.json"))["details"]["not"]["converged"], false);
}

#[test]
fn config_file_and_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("run.toml"), "k = 0.3\neps = 0.05\nfamily = \"tre\"\nsamples = 100\n").unwrap();
    let o = racket(tmp.path(), &["pulse", "--config", "run.toml", "--k", "0.7", "--out", "o"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let side = sidecar(&tmp.path().join("o/pulse.json"));
    assert_eq!(side["config"]["k"], 0.7);
    assert_eq!(side["config"]["eps"], 0.05);
    assert_eq!(side["details"]["pulse"]["n"], 100);

    std::fs::write(tmp.path().join("bad.toml"), "kay = 0.3\n").unwrap();
    assert_eq!(code(&racket(tmp.path(), &["pulse", "--config", "bad.toml", "--out", "o"])), 2);
}

#[test]
fn sidecar_replay_reproduces_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["simulate", "--family", "allen-eberly", "--k", "0.4", "--alpha", "0.1", "--delta", "-0.2", "--samples", "300", "--out", "a"];
    assert_eq!(code(&racket(tmp.path(), &args)), 0);
    assert_eq!(code(&racket(tmp.path(), &["--config", "a/trajectory.json", "--out", "b"])), 0);
    for f in ["trajectory.csv", "trajectory.json"] {
        assert_eq!(std::fs::read(tmp.path().join("a").join(f)).unwrap(), std::fs::read(tmp.path().join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn time_scale_rescales_time_column_only() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["pulse", "--family", "tre", "--k", "0.5", "--eps", "0.01", "--samples", "50"];
    assert_eq!(code(&racket(tmp.path(), &[&base[..], &["--out", "a"]].concat())), 0);
    assert_eq!(code(&racket(tmp.path(), &[&base[..], &["--time-scale", "1e-3", "--out", "b"]].concat())), 0);
    let a = csv_rows(&tmp.path().join("a/pulse.csv"));
    let b = csv_rows(&tmp.path().join("b/pulse.csv"));
    for (x, y) in a.iter().zip(&b) {
        assert!((x[0] * 1e-3 - y[0]).abs() <= 1e-15 * x[0].abs().max(1.0));
        assert_eq!(x[1..], y[1..]);
    }
    // A scaled file reads back onto the body-time grid.
    let o = racket(tmp.path(), &["simulate", "--input", "b/pulse.csv", "--time-scale", "1e-3", "--out", "c"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let last = csv_rows(&tmp.path().join("c/trajectory.csv")).pop().unwrap();
    assert!(last[3] <= -0.99);
}

#[test]
fn montgomery_and_fit_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&racket(tmp.path(), &["montgomery", "--k", "0.5", "--eps", "0.1", "--out", "o"])), 0);
    let text = std::fs::read_to_string(tmp.path().join("o/montgomery.csv")).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let total: f64 = row[4].parse().unwrap();
    assert!((total + 1.395_798_282_6).abs() < 1e-8);
    assert_eq!(code(&racket(tmp.path(), &["fit-period", "--k", "0.5", "--out", "o"])), 0);
    let side = sidecar(&tmp.path().join("o/fit_period.json"));
    assert!(side["details"]["fit"]["r_squared"].as_f64().unwrap() >= 0.999);
    assert_eq!(csv_rows(&tmp.path().join("o/fit_period.csv")).len(), 5);
}
