use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn modspace(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_modspace"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("MODSPACE_THREADS", t),
        None => cmd.env_remove("MODSPACE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p.to_string_lossy().into_owned()
}

fn shubin_pair(s1: f64, s2: f64) -> Value {
    json!({
        "$schema_version": 1,
        "command": "embed-analyze",
        "omega1": {"kind": "shubin", "params": {"s": s1}, "dim": 2},
        "omega2": {"kind": "shubin", "params": {"s": s2}, "dim": 2},
    })
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout {:?} stderr {:?}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

#[test]
fn shubin_embedding_is_compact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &shubin_pair(2.0, 1.0));
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["continuity_verdict"], "continuous");
    assert_eq!(r["result"]["compactness_verdict"], "compact");
    assert_eq!(r["result"]["channels"]["agree"], true);
    assert_eq!(r["config"]["options"]["k_grid"], 3);
    assert!(chrono::DateTime::parse_from_rfc3339(r["timestamp"].as_str().unwrap()).is_ok());
}

#[test]
fn identical_weights_are_continuous_not_compact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &shubin_pair(1.0, 1.0));
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["continuity_verdict"], "continuous");
    assert_eq!(r["result"]["compactness_verdict"], "not_compact");
}

#[test]
fn overrides_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &shubin_pair(1.0, 1.0));
    let out = modspace(&["embed-analyze", "--config", &cfg, "--set", "omega1.params.s=2"], None);
    let r = report(&out);
    assert_eq!(r["config"]["omega1"]["params"]["s"], 2.0);
    assert_eq!(r["result"]["compactness_verdict"], "compact");
}

#[test]
fn malformed_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = shubin_pair(2.0, 1.0);
    v["options"] = json!({"sphere_samples": "many"});
    let cfg = write_config(dir.path(), "bad.json", &v);
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("options.sphere_samples"), "{err}");

    v["options"] = json!({"radii": [1, 2], "colour": 1});
    let cfg = write_config(dir.path(), "bad2.json", &v);
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));

    let mut v = shubin_pair(2.0, 1.0);
    v.as_object_mut().unwrap().remove("$schema_version");
    let cfg = write_config(dir.path(), "bad3.json", &v);
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$schema_version"));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = modspace(&["embed-analyze", "--config", "/nonexistent/modspace.json"], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn failed_assertion_exits_one_but_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "$schema_version": 1,
        "grid": {"step": 0.0625, "extent": 10.0},
        "orders": [3],
        "points": [[std::f64::consts::FRAC_1_SQRT_2, -1.0]],
        "tol": 1e-30,
    });
    let cfg = write_config(dir.path(), "b.json", &v);
    let out_path = dir.path().join("r.json");
    let out = modspace(&["bargmann-compare", "--config", &cfg, "--out", out_path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_path).unwrap()).unwrap();
    assert_eq!(r["assertions"]["passed"], false);
}

#[test]
fn replay_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let v = json!({
        "$schema_version": 1,
        "grid": {"step": 0.125, "extent": 12.0},
        "phase": {"x_stride": 2, "xi_extent": 12.0},
        "functions": [{"kind": "hermite", "alpha": [1]}],
    });
    let cfg = write_config(dir.path(), "t.json", &v);
    let mut runs = Vec::new();
    for threads in ["1", "4"] {
        let out = modspace(&["twisted-check", "--config", &cfg], Some(threads));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let mut r = report(&out);
        r.as_object_mut().unwrap().remove("timestamp");
        runs.push(r);
    }
    assert_eq!(runs[0], runs[1]);

    let replay = write_config(dir.path(), "replay.json", &runs[0]["config"]);
    let out = modspace(&["twisted-check", "--config", &replay], None);
    let mut r = report(&out);
    r.as_object_mut().unwrap().remove("timestamp");
    assert_eq!(r, runs[0]);
}

#[test]
fn csv_output_and_field_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("v.mssf");
    let v = json!({
        "$schema_version": 1,
        "function": {"kind": "gaussian"},
        "grid": {"step": 0.25, "extent": 6.0},
        "phase": {"x_stride": 2, "xi_extent": 6.0},
        "field_out": dump,
    });
    let cfg = write_config(dir.path(), "s.json", &v);
    let out = modspace(&["stft", "--config", &cfg, "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["x0", "xi0", "re", "im", "abs"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let (field, id) = modspace::format::read_field(&mut std::fs::File::open(&dump).unwrap()).unwrap();
    assert_eq!(rows.len(), field.samples().len());
    assert_eq!(id.map(|s| s.len()), Some(64));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "e.json", &shubin_pair(2.0, 1.0));
    let out = modspace(&["embed-analyze", "--config", &cfg], Some("lots"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_block_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("r.csv");
    let mut v = shubin_pair(2.0, 1.0);
    v["output"] = json!({"path": target, "format": "csv"});
    let cfg = write_config(dir.path(), "e.json", &v);
    let out = modspace(&["embed-analyze", "--config", &cfg], None);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("radius,annulus_sup,tail_max"));

    let out = modspace(&["embed-analyze", "--config", &cfg, "--format", "json"], None);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(r["config"]["output"]["format"], "csv");

    let out = modspace(&["embed-analyze", "--config", &cfg, "--out", "/nonexistent/dir/r.json"], None);
    assert_eq!(out.status.code(), Some(3));
}
