use std::path::Path;
use std::process::{Command, Output};

use airbutton_core::io::{read_commands_csv, read_events_csv, read_field_binary, read_sweep_csv, RunManifest};
use airbutton_core::harness::SCALE_STEP;

fn airbutton(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airbutton"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("AIRBUTTON_SCENE")
        .env("AIRBUTTON_LOG", "warn")
        .output()
        .expect("run airbutton")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sweep_writes_hundred_rows_and_quantizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("raw");
    let o = airbutton(&out, &["sweep"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_sweep_csv(std::fs::File::open(out.join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.2 >= 0.0));
    let manifest = RunManifest::from_json(&std::fs::read_to_string(out.join("sweep_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.outputs, vec!["sweep.csv"]);

    let q_out = dir.path().join("quantized");
    let o = airbutton(&q_out, &["sweep", "--quantize-scale"]);
    assert!(o.status.success());
    let q = read_sweep_csv(std::fs::File::open(q_out.join("sweep.csv")).unwrap()).unwrap();
    let step_mn = SCALE_STEP * 1e3;
    for (a, b) in rows.iter().zip(&q) {
        let k = b.2 / step_mn;
        assert!((k - k.round()).abs() < 1e-6, "{} not on the 0.98 mN lattice", b.2);
        assert!((a.2 - b.2).abs() <= 0.49 + 1e-6);
    }
}

#[test]
fn missing_scene_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = airbutton(&out, &["--scene", "/no/such/scene.toml", "sweep"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("scene"));
    assert!(!out.exists());
}

#[test]
fn malformed_scene_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("bad.toml");
    std::fs::write(&scene, "[scene]\nfrequency = -40000.0\n").unwrap();
    let out = dir.path().join("out");
    let o = airbutton(&out, &["--scene", scene.to_str().unwrap(), "session"]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn shipped_scene_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let scene = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenes/paper_default.toml");
    let o = airbutton(dir.path(), &["--scene", scene, "session", "both", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn session_counts_match_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let o = airbutton(dir.path(), &["session", "both", "50"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("commands=10"), "{}", stdout(&o));

    let o = airbutton(dir.path(), &["session", "down", "100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("commands=5"));
    let cmds = read_commands_csv(std::fs::File::open(dir.path().join("session_commands.csv")).unwrap()).unwrap();
    assert_eq!(cmds.len(), 5);
    assert!(cmds.iter().all(|c| c.duration == 0.1));

    let o = airbutton(dir.path(), &["session", "--condition", "up", "--burst-ms", "50", "--touch", "airborne"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("commands=5"));
}

#[test]
fn chatter_keeps_counts() {
    let dir = tempfile::tempdir().unwrap();
    let clean = airbutton(&dir.path().join("clean"), &["session", "both", "50"]);
    let noisy = airbutton(&dir.path().join("noisy"), &["session", "both", "50", "--chatter-seed", "7"]);
    assert!(clean.status.success() && noisy.status.success());
    let counts = |o: &Output| {
        let s = stdout(o);
        let start = s.find("events=").unwrap();
        let end = s.find(" max_latency").unwrap();
        s[start..end].to_owned()
    };
    assert_eq!(counts(&clean), counts(&noisy));
    let ev = read_events_csv(std::fs::File::open(dir.path().join("noisy/session_events.csv")).unwrap()).unwrap();
    assert_eq!(ev.len(), 10);
}

#[test]
fn unknown_condition_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = airbutton(dir.path(), &["session", "sideways", "50"]);
    assert_eq!(o.status.code(), Some(2));
    let o = airbutton(dir.path(), &["session", "both", "70"]);
    assert!(!o.status.success());
}

#[test]
fn slow_sampling_is_a_budget_violation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = airbutton(&out, &["session", "both", "50", "--sampling-hz", "50"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("latency budget violation"));
    assert!(!out.exists());
}

#[test]
fn env_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_airbutton"))
        .args(["session"])
        .env("AIRBUTTON_OUT_DIR", dir.path())
        .env("AIRBUTTON_CONDITION", "down")
        .env("AIRBUTTON_BURST_MS", "100")
        .env_remove("AIRBUTTON_SCENE")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).contains("condition=down burst_ms=100"), "{}", stdout(&o));
    assert!(dir.path().join("session_events.csv").exists());
}

#[test]
fn repeated_sessions_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert!(airbutton(out, &["--seed", "11", "session", "both", "100"]).status.success());
    }
    for f in ["session_events.csv", "session_commands.csv", "session_trace.csv", "session_manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn field_exports_agree() {
    let dir = tempfile::tempdir().unwrap();
    let o = airbutton(dir.path(), &["field", "--extent-mm", "5", "--height-mm", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read_field_binary(std::fs::File::open(dir.path().join("field.bin")).unwrap()).unwrap();
    assert_eq!(grid.spec.dims, [11, 11, 5]);
    let csv = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(csv.lines().count(), grid.values.len() + 1);
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[3], grid.values[0].re);
    assert_eq!(first[4], grid.values[0].im);
}

#[test]
fn default_scene_command_prints_loadable_toml() {
    let dir = tempfile::tempdir().unwrap();
    let o = airbutton(dir.path(), &["default-scene"]);
    assert!(o.status.success());
    let cfg = airbutton_core::Config::from_toml_str(&stdout(&o)).unwrap();
    assert_eq!(cfg, airbutton_core::Config::paper_default());
}
