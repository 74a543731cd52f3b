use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn flocklab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flocklab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("flocklab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lists_presets() {
    let o = flocklab(&["presets"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 9);
}

#[test]
fn simulate_writes_frames_and_summary() {
    let dir = scratch("simulate");
    let out = dir.to_str().unwrap();
    let o = flocklab(&["simulate", "--preset", "riccati-single", "--set", "run.T=0.5", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("frames.csv")).unwrap();
    assert!(csv.starts_with('#'));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["threshold"]["verdict"], "smooth_guaranteed");
    assert!((summary["final_time"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let again = scratch("simulate-again");
    flocklab(&[
        "simulate",
        "--preset",
        "riccati-single",
        "--set",
        "run.T=0.5",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(csv, fs::read_to_string(again.join("frames.csv")).unwrap());
}

#[test]
fn config_errors_name_the_key() {
    let dir = scratch("bad");
    let path = dir.join("bad.toml");
    fs::write(&path, "[run]\nscenario = \"smooth-1d\"\ndt = -1.0\n").unwrap();
    let o = flocklab(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("run.dt"));
}

#[test]
fn classify_and_constants_print_json() {
    let o = flocklab(&["classify", "--preset", "blowup-1d-unconditional"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "blowup_guaranteed");
    assert_eq!(v["condition"], "unconditional_blowup");

    let o = flocklab(&["constants", "--preset", "quadratic-flocking-1d"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["lambda"]["value"].as_f64().unwrap() > 0.0);
    assert!(v["r0"]["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_prints_one_row_per_point() {
    let o = flocklab(&[
        "sweep",
        "--preset",
        "smooth-1d",
        "--axis",
        "potential.a=0.1:0.5:3",
        "--axis",
        "initial.amplitude=-0.7,0.5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("potential.a,initial.amplitude,verdict"));
}

#[test]
fn check_reports_each_bound() {
    let o = flocklab(&["check", "riccati-single"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
    assert!(text.contains("riccati_oracle"));
}
