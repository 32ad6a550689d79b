// The binary end to end: exit codes, artifacts, manifest.

use std::fs;
use std::process::Command;

use ricci_collapse::pipeline::Manifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ricci-collapse"))
}

#[test]
fn simulate_sphere_writes_solution_and_area_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sphere.json");
    fs::write(&cfg, r#"{"profile": {"kind": "sphere", "radius": 1.0, "h": 0.04}, "flow": {"t_end": 0.2, "output_stride": 100}}"#).unwrap();
    let out = dir.path().join("run");
    let st = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(st.success());
    let area = fs::read_to_string(out.join("area.csv")).unwrap();
    assert!(area.starts_with("t,area,max_K\n"));
    // >= 12 significant digits
    let first = area.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert!(first.split('e').next().unwrap().len() >= 14, "{first}");
    let m: Manifest = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(m.files.iter().any(|f| f.path == "solution/index.json"));
    assert!(m.files.iter().all(|f| f.sha256.len() == 64));
}

#[test]
fn invalid_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"profile": {"kind": "cigar", "length": 8.0, "h": -0.04}}"#).unwrap();
    let out = dir.path().join("run");
    let st = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert!(!out.exists());
    let st = bin().args(["simulate"]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn failing_stage_exits_1_and_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("glue.json");
    // a sphere closes at both ends, which the gluing stage rejects
    fs::write(&cfg, r#"{"profile": {"kind": "sphere", "radius": 3.0, "h": 0.05}, "glue": {"arclength_spacing": null}}"#).unwrap();
    let out = bin().args(["glue", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("run")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`glue`") && err.contains("both ends"), "{err}");
    // windows cut before the failure are kept
    assert!(dir.path().join("run/windows/window_00.csv").exists());
}

#[test]
fn classify_and_compare_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"classify": {"models": [{"m": 2, "gamma": {"kind": "zp", "p": 3}, "has_fixed_point": true}, {"m": 0, "gamma": {"kind": "trivial"}}],
            "points": [{"position": 0.0, "kind": {"kind": "cone", "p": 2}}, {"position": 4.0, "kind": {"kind": "cone", "p": 3}}],
            "curvature": [0.5, 0.25]}}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    assert!(bin().args(["classify", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap().success());
    let models = fs::read_to_string(out.join("local_models.json")).unwrap();
    assert!(models.contains("\"2bi\"") && models.contains("unbounded diameters"));
    let sp: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("singular_points.json")).unwrap()).unwrap();
    assert_eq!(sp["rule_violation"], true);

    let out = dir.path().join("cmp");
    assert!(bin().args(["compare", "--out"]).arg(&out).status().unwrap().success());
    let series = fs::read_to_string(out.join("cigar_series.csv")).unwrap();
    assert!(series.starts_with("s,K_over_K_tip\n"));
}

#[test]
fn pipeline_type2b_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert!(bin().args(["pipeline", "type2b", "--seed", "3", "--out"]).arg(&out).status().unwrap().success());
        fs::read(out.join("manifest.json")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}
