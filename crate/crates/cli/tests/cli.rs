use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str], input: &str, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcbound"))
        .args(args)
        .arg("--input")
        .arg(fixture(input))
        .arg("--out")
        .arg(out)
        .env_remove("WCBOUND_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bound_writes_the_tfc_value() {
    let dir = TempDir::new().unwrap();
    let o = run(&["bound", "--times", "0,1.5"], "tfc_complex.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_json(&dir.path().join("bound.json"));
    let ti = b["time_independent"].as_f64().unwrap();
    assert!((ti - 0.49955).abs() < 1e-5);
    assert_eq!(b["loose_bound"].as_f64().unwrap(), ti);
    let per_time = b["per_time"].as_array().unwrap();
    assert_eq!(per_time.len(), 2);
    assert_eq!(per_time[0]["bound"].as_f64().unwrap(), 0.0);
    assert!(per_time[1]["bound"].as_f64().unwrap() < ti);
    assert_eq!(b["per_group"][0]["kind"], "complex_pair");
}

#[test]
fn open_loop_input_matches_closed_loop_input() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(code(&run(&["bound"], "open_loop.json", a.path())), 0);
    assert_eq!(code(&run(&["bound"], "tfc_complex.json", b.path())), 0);
    let x = read_json(&a.path().join("bound.json"))["time_independent"].as_f64().unwrap();
    let y = read_json(&b.path().join("bound.json"))["time_independent"].as_f64().unwrap();
    assert!((x - y).abs() < 1e-12 * y);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let unstable = run(&["bound"], "unstable.json", dir.path());
    assert_eq!(code(&unstable), 3);
    assert!(String::from_utf8_lossy(&unstable.stderr).contains("0.5"));
    assert_eq!(code(&run(&["bound"], "triple_pole.json", dir.path())), 4);
    assert_eq!(code(&run(&["classify"], "malformed.json", dir.path())), 2);
    assert_eq!(code(&run(&["bound"], "missing.json", dir.path())), 2);
    assert_eq!(code(&run(&["bound", "--tol", "-1"], "tfc_complex.json", dir.path())), 2);
    assert_eq!(code(&run(&["sweep"], "three_state.json", dir.path())), 2);
    assert_eq!(code(&run(&["simulate", "--dt", "0"], "tfc_complex.json", dir.path())), 2);
}

#[test]
fn bad_thread_count_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_wcbound"))
        .args(["classify", "--input"])
        .arg(fixture("tfc_complex.json"))
        .arg("--out")
        .arg(dir.path())
        .env("WCBOUND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn help_lists_every_flag() {
    for sub in ["bound", "simulate", "sweep", "verify", "classify"] {
        let o = Command::new(env!("CARGO_BIN_EXE_wcbound")).args([sub, "--help"]).output().unwrap();
        let text = String::from_utf8_lossy(&o.stdout);
        for flag in ["--input", "--out", "--horizon", "--dt", "--times", "--tol", "--pairing"] {
            assert!(text.contains(flag), "{sub} --help lacks {flag}");
        }
    }
    let o = Command::new(env!("CARGO_BIN_EXE_wcbound")).arg("--help").output().unwrap();
    assert!(String::from_utf8_lossy(&o.stdout).contains("WCBOUND_THREADS"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert_eq!(code(&run(&["simulate", "--horizon", "3"], "tfc_complex.json", dir.path())), 0);
        assert_eq!(code(&run(&["sweep", "--resolution", "40"], "tfc_complex.json", dir.path())), 0);
        assert_eq!(code(&run(&["bound", "--times", "1,2"], "three_state.json", dir.path())), 0);
    }
    for name in ["trace_worst.csv", "trace_fixed.csv", "fig1.svg", "sweep.csv", "fig2.svg", "bound.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn thread_count_does_not_change_the_sweep() {
    let dirs: Vec<TempDir> = (0..2).map(|_| TempDir::new().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "3"]) {
        let o = Command::new(env!("CARGO_BIN_EXE_wcbound"))
            .args(["sweep", "--resolution", "30", "--input"])
            .arg(fixture("tfc_complex.json"))
            .arg("--out")
            .arg(dir.path())
            .env("WCBOUND_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
    }
    assert_eq!(
        fs::read(dirs[0].path().join("sweep.csv")).unwrap(),
        fs::read(dirs[1].path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn sweep_marks_safe_cells() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["sweep", "--kd-range", "0.1,0.5", "--ktheta-range", "0.5,1.5", "--resolution", "5"],
        "tfc_complex.json",
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k_d,k_theta,bound_m,safe,regime"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 25);
    // (0.3, 0.5) lies in the complex regime above d_max; (0.3, 1.5) is real with z/K_d = 1/3
    let find = |kd: &str, kt: &str| rows.iter().find(|r| r[0] == kd && r[1] == kt).unwrap().clone();
    assert_eq!(find("0.30000000000000004", "0.5")[3], "false");
    let real = find("0.30000000000000004", "1.5");
    assert_eq!((real[3], real[4]), ("true", "real_distinct"));
    for r in &rows {
        let (kd, kt): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        if kt * kt > 4.0 * kd {
            assert_eq!(r[3] == "true", kd >= 0.25);
        }
    }
}

#[test]
fn zero_disturbance_gives_flat_traces() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["simulate", "--horizon", "2"], "zero_disturbance.json", dir.path())), 0);
    for name in ["trace_worst.csv", "trace_fixed.csv"] {
        let csv = fs::read_to_string(dir.path().join(name)).unwrap();
        for line in csv.lines().skip(1) {
            assert!(line.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0), "{name}: {line}");
        }
    }
}

#[test]
fn simulate_reaches_the_bound() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["simulate", "--horizon", "6", "--dt", "1e-3"], "tfc_complex.json", dir.path())), 0);
    let csv = fs::read_to_string(dir.path().join("trace_worst.csv")).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 6.0).abs() < 1e-12);
    assert!(last[1] > 0.98 * 0.49955 && last[1] < 0.49955 + 1e-4);
    let svg = fs::read_to_string(dir.path().join("fig1.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let dir = TempDir::new().unwrap();
    for input in ["tfc_complex.json", "tfc_real.json"] {
        let o = run(&["verify", "--times", "0.5,2"], input, dir.path());
        assert_eq!(code(&o), 0, "{input}: {}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(read_json(&dir.path().join("verify.json"))["pass"], true);
    }
    let o = run(&["verify", "--times", "2", "--perturb-coefficients", "1.001"], "tfc_complex.json", dir.path());
    assert_eq!(code(&o), 5);
    assert_eq!(read_json(&dir.path().join("verify.json"))["pass"], false);
}

#[test]
fn verify_reports_gap_for_three_states() {
    let dir = TempDir::new().unwrap();
    let o = run(&["verify", "--times", "1,3"], "three_state.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = read_json(&dir.path().join("verify.json"));
    for e in report["entries"].as_array().unwrap() {
        assert!(e["gap_ratio"].as_f64().unwrap() >= 1.0);
    }
}

#[test]
fn classify_reports_the_regime() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(&["classify"], "tfc_real.json", dir.path())), 0);
    let c = read_json(&dir.path().join("classify.json"));
    assert_eq!(c["regime"], "real_distinct");
    assert_eq!(c["eigenvalues"]["entries"].as_array().unwrap().len(), 2);
}
