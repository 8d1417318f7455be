use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use noisy_euler::calib::bundled_device;
use noisy_euler::optimize::{optimize_gate, InitialStateDistribution, OptimizationResult, OptimizerConfig, TargetGate};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisy-euler")).args(args).env_remove("NOISY_EULER_JOBS").output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn line_value<'a>(stdout: &'a str, key: &str) -> &'a str {
    stdout.lines().find_map(|l| l.strip_prefix(key)).unwrap().trim()
}

#[test]
fn optimize_without_noise_keeps_the_angles() {
    let out = ok(&["optimize", "--gate", "h", "--state", "0,0", "--lambda", "0"]);
    let default = line_value(&out, "default");
    let optimized = line_value(&out, "optimized");
    assert_eq!(default, optimized);
    assert!(out.contains("optimized = 1.000000000000000, default = 1.000000000000000"));
}

#[test]
fn optimize_on_rome_improves_and_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = ok(&["optimize", "--gate", "h", "--state", "0,0", "--device", "rome", "--qubit", "3", "--out", out_dir]);
    let improvement: f64 = line_value(&out, "improvement").parse().unwrap();
    assert!(improvement > 0.0);

    let written: OptimizationResult = serde_json::from_value(json(&dir.path().join("optimize.json"))).unwrap();
    let noise = bundled_device("rome").unwrap().qubit(3).unwrap().noise_params().unwrap();
    let h = TargetGate::from_unitary(&noisy_euler::math::Mat2::from_real([[1.0, 1.0], [1.0, -1.0]]).scale(std::f64::consts::FRAC_1_SQRT_2.into())).unwrap();
    let direct = optimize_gate(&h, &InitialStateDistribution::point(noisy_euler::math::BlochState::GROUND), &noise, &OptimizerConfig::default()).unwrap();
    assert_eq!(written, direct);
}

#[test]
fn cap_distribution_is_dispatched() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["optimize", "--gate", "sx", "--dist", "cap:0.5", "--lambda", "0.02", "--out", dir.path().to_str().unwrap()]);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["distribution"]["kind"], "spherical-cap");
    assert_eq!(m["config"]["distribution"]["theta_max"], 0.5);
    assert_eq!(m["command"], "optimize");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&["optimize", "--gate", "h", "--device", "rome", "--qubit", "3", "--lambda", "0.1"]), 2);
    assert_eq!(code(&["optimize", "--gate", "h", "--device", "rome", "--qubit", "7"]), 2);
    assert_eq!(code(&["optimize", "--gate", "h", "--device", "sycamore", "--qubit", "0"]), 2);
    assert_eq!(code(&["optimize", "--gate", "cnot", "--lambda", "0.1"]), 2);
    assert_eq!(code(&["optimize", "--gate", "h"]), 2);
    assert_eq!(code(&["optimize", "--gate", "h", "--lambda", "0.1", "--dist", "uniform", "--state", "1,0"]), 2);
    assert_eq!(code(&["rb", "--lambda", "0.1", "--shots", "0"]), 2);
    assert_eq!(code(&["drift", "--lambda", "0.1", "--k-grid", "1:10:3lin"]), 2);
    assert_eq!(code(&[]), 2);
    // Drift rescales T1 and T2, so bare damping probabilities are rejected.
    assert_eq!(code(&["drift", "--lambda", "0.01", "--circuits", "1", "--gates", "10", "--depths", "10", "--k-grid", "1,2"]), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_noisy-euler"))
        .args(["optimize", "--gate", "h", "--lambda", "0"])
        .env("NOISY_EULER_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"device_name": "x", "calibration_date": "2020-01-01", "qubits": []}"#).unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("qubits"));
    assert_eq!(code(&["--from-manifest", dir.path().join("missing.json").to_str().unwrap()]), 1);
}

#[test]
fn validate_reports_impossible_coherence() {
    let out = ok(&["validate", "rome"]);
    assert_eq!(out.matches("warning:").count(), 1);
    assert!(out.contains("qubit 3: T2 = 105 us exceeds 2*T1 = 92.8 us"));
    let bogota = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/bogota.json");
    assert!(ok(&["validate", bogota]).contains("no warnings"));
}

#[test]
fn rb_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    ok(&["rb", "--device", "rome", "--qubit", "3", "--circuits", "3", "--gates", "30", "--depths", "1,10,20,30", "--shots", "8192", "--seed", "7", "--raw", "--out", d]);
    let got = fs::read_to_string(dir.path().join("rb.csv")).unwrap();
    assert_eq!(got, include_str!("golden/rb_rome_q3.csv"));
}

#[test]
fn rb_paper_configuration_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        ["rb", "--device", "rome", "--qubit", "3", "--circuits", "10", "--gates", "246", "--shots", "inf", "--seed", "7", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([d.to_str().unwrap().to_string()])
            .collect::<Vec<_>>()
    };
    let run_in = |d: &Path| ok(&args(d).iter().map(String::as_str).collect::<Vec<_>>());
    run_in(a.path());
    run_in(b.path());
    let csv = fs::read(a.path().join("rb.csv")).unwrap();
    assert_eq!(csv, fs::read(b.path().join("rb.csv")).unwrap());
    // 36 depths × 2 arms plus the header.
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 73);
}

#[test]
fn drift_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["drift", "--device", "bogota", "--qubit", "2", "--circuits", "2", "--gates", "30", "--depths", "10,20,30", "--k-grid", "1e-3:1e6:19log", "--out", dir.path().to_str().unwrap()]);
    let text = fs::read_to_string(dir.path().join("drift.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 19 * 3 * 2);
    for depth in ["10", "20", "30"] {
        for arm in ["opt", "unopt"] {
            let n = rows.iter().filter(|r| r.split(',').nth(3) == Some(depth) && r.split(',').nth(4) == Some(arm)).count();
            assert_eq!(n, 19);
        }
    }
}

#[test]
fn manifests_reproduce_every_experiment() {
    let cases: [(&[&str], &str); 4] = [
        (&["rb", "--lambda", "0.01", "--circuits", "2", "--gates", "20", "--depths", "5,10,20", "--shots", "500", "--seed", "3", "--raw"], "rb.csv"),
        (&["drift", "--device", "rome", "--qubit", "3", "--circuits", "2", "--gates", "20", "--depths", "10,20", "--k-grid", "0.1,1,10", "--seed", "3"], "drift.csv"),
        (&["prep-sweep", "--lambda-points", "4", "--targets", "10", "--seed", "3"], "prep_sweep.csv"),
        (&["knowledge", "--lambda-points", "2", "--theta-points", "3", "--targets", "4", "--seed", "3"], "knowledge.csv"),
    ];
    for (args, file) in cases {
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        let rerun = tempfile::tempdir().unwrap();
        for d in [&first, &second] {
            let mut a = args.to_vec();
            a.extend(["--out", d.path().to_str().unwrap()]);
            ok(&a);
        }
        ok(&["--from-manifest", first.path().join("manifest.json").to_str().unwrap(), "--out", rerun.path().to_str().unwrap()]);
        let original = fs::read(first.path().join(file)).unwrap();
        assert_eq!(original, fs::read(second.path().join(file)).unwrap(), "{file}: rerun with the same flags differs");
        assert_eq!(original, fs::read(rerun.path().join(file)).unwrap(), "{file}: manifest rerun differs");
        let m = json(&first.path().join("manifest.json"));
        assert_eq!(m["rng_seed"], 3);
        assert!(m["outputs"].as_array().unwrap().iter().any(|p| p.as_str().unwrap().ends_with(file)));
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let one = tempfile::tempdir().unwrap();
    let three = tempfile::tempdir().unwrap();
    let base = ["knowledge", "--lambda-points", "2", "--theta-points", "3", "--targets", "4", "--seed", "5", "--out"];
    let mut a = base.to_vec();
    a.extend([one.path().to_str().unwrap(), "--jobs", "1"]);
    ok(&a);
    let mut b = base.to_vec();
    b.extend([three.path().to_str().unwrap(), "--jobs", "3"]);
    ok(&b);
    assert_eq!(fs::read(one.path().join("knowledge.csv")).unwrap(), fs::read(three.path().join("knowledge.csv")).unwrap());
}
