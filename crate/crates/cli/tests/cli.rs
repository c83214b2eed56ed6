use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SINGLE: &str = r#"{"slits":{"kind":"finite","entries":[{"k":0.0,"b":1.0}]}}"#;
const DISTINCT: &str = r#"{"slits":{"kind":"finite","entries":[{"k":3.0,"b":1.0},{"k":-3.0,"b":1.0}]}}"#;
const DOUBLE: &str = r#"{"slits":{"kind":"finite","entries":[{"k":4.0,"b":1.0}]}}"#;

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn loewner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loewner")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_csv(p: &Path) -> (String, Vec<Vec<f64>>) {
    let text = fs::read_to_string(p).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn classify_reports_case_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let single = write_config(dir.path(), "single.json", SINGLE);
    let o = loewner(&["classify", "--config", single.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ComplexPair beta=0+2i psi=0"), "{}", stdout(&o));

    let double = write_config(dir.path(), "double.json", DOUBLE);
    let out = dir.path().join("out");
    let o = loewner(&["classify", "--config", double.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("DoubleRoot rho0=2"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("classification.json")).unwrap()).unwrap();
    assert_eq!(report["case"], "DoubleRoot");
    assert_eq!(report["residue"]["residual"].as_f64(), Some(0.0));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn near_degenerate_family_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let k = 2.0 * 2f64.sqrt() * (1.0 + 1e-11);
    let body = format!(r#"{{"slits":{{"kind":"finite","entries":[{{"k":{},"b":1.0}},{{"k":{},"b":1.0}}]}}}}"#, -k, k);
    let cfg = write_config(dir.path(), "near.json", &body);
    let o = loewner(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let o = loewner(&["trace", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"slits":{"kind":"finite","entries":[{"k":1.0,"b":}]}}"#);
    let o = loewner(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let neg = write_config(dir.path(), "neg.json", r#"{"slits":{"kind":"finite","entries":[{"k":1.0,"b":-1.0}]}}"#);
    assert_eq!(loewner(&["classify", "--config", neg.to_str().unwrap()]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(loewner(&["validate", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn single_slit_trace_is_vertical_segment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "single.json", SINGLE);
    let o = loewner(&["trace", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&dir.path().join("slit_1.csv"));
    assert_eq!(header, "t,re,im,dist_to_limit");
    assert!(rows.len() > 100);
    for r in &rows {
        assert!(r[1].abs() < 1e-9);
        assert!((r[2] - 2.0 * r[0].sqrt()).abs() < 1e-9, "{r:?}");
        assert!((r[3] - (2.0 - r[2])).abs() < 1e-9);
    }
    assert!((rows.last().unwrap()[0] - (1.0 - 1e-6)).abs() < 1e-15);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("slit_1.geometry.json")).unwrap()).unwrap();
    assert_eq!(side["approach"]["verdict"], "radial");
}

#[test]
fn empty_slit_list_traces_every_slit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "distinct.json", DISTINCT);
    let o = loewner(&["trace", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--grid-points", "40"]);
    assert_eq!(o.status.code(), Some(0));
    for n in 1..=2 {
        let (_, rows) = read_csv(&dir.path().join(format!("slit_{n}.csv")));
        assert_eq!(rows.len(), 41);
    }
    let bad = loewner(&["trace", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--slits", "3"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "distinct.json", DISTINCT);
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = Command::new(env!("CARGO_BIN_EXE_loewner"))
            .env("LOEWNER_THREADS", threads)
            .args(["trace", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outputs.push(out);
    }
    for name in ["slit_1.csv", "slit_2.csv", "slit_1.geometry.json", "slit_2.geometry.json"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn manifest_replays_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "double.json", DOUBLE);
    let first = dir.path().join("first");
    let o = loewner(&["export-image", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--grid-points", "256"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = first.join("manifest.json");
    let mut m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    let second = dir.path().join("second");
    m["out"] = serde_json::json!(second);
    let replay = dir.path().join("replay.json");
    fs::write(&replay, m.to_string()).unwrap();
    let o = loewner(&["run", "--manifest", replay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(first.join("image.csv")).unwrap(), fs::read(second.join("image.csv")).unwrap());
}

#[test]
fn injected_residue_fault_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "distinct.json", DISTINCT);
    let o = loewner(&["validate", "--config", cfg.to_str().unwrap(), "--inject-fault", "residue"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("residue identity")).unwrap();
    assert!(line.starts_with("FAIL"));
}

#[test]
fn validate_passes_on_distinct_real_family() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "distinct.json", DISTINCT);
    let out = dir.path().join("v");
    let o = loewner(&["validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);
    assert!(doc["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn double_root_image_lies_on_two_levels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "double.json", DOUBLE);
    let o = loewner(&["export-image", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("image.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,re_h,im_h,branch_flags"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.len() >= 4096);
    let mut levels = std::collections::BTreeSet::new();
    for r in rows.iter().filter(|r| r[3] == "0") {
        let im: f64 = r[2].parse().unwrap();
        assert!(im.abs() < 1e-9 || (im - std::f64::consts::PI).abs() < 1e-9, "{r:?}");
        levels.insert(im > 1.0);
    }
    assert_eq!(levels.len(), 2);
}

#[test]
fn distinct_real_tips_match_sector() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "distinct.json", DISTINCT);
    let o = loewner(&["export-image", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("image.json")).unwrap()).unwrap();
    let tips = doc["tips"].as_array().unwrap();
    let args: Vec<f64> = tips.iter().map(|t| t["gauged_arg"].as_f64().unwrap()).collect();
    let pi = std::f64::consts::PI;
    assert!((args[0] - 4.0 * pi / 9.0).abs() < 1e-9);
    assert!((args[1] - 5.0 * pi / 9.0).abs() < 1e-9);
    assert!((doc["report"]["amplitude"].as_f64().unwrap() - pi / 9.0).abs() < 1e-9);
    let text = fs::read_to_string(dir.path().join("image.csv")).unwrap();
    for (tip, k) in tips.iter().zip([-3.0, 3.0]) {
        let h = &tip["h"];
        let row = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|r| r[3] == "1" && r[0].parse::<f64>().unwrap() == k)
            .unwrap();
        assert_eq!(row[1].parse::<f64>().unwrap(), h[0].as_f64().unwrap());
        assert_eq!(row[2].parse::<f64>().unwrap(), h[1].as_f64().unwrap());
    }
}
