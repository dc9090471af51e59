use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use varilab::planefield::io;
use varilab::varifold::mesh;

fn varilab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varilab")).args(args).current_dir(dir).output().unwrap()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stage<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["stages"].as_array().unwrap().iter().find(|s| s["stage"] == name).unwrap_or_else(|| panic!("no stage {name}"))
}

#[test]
fn gamma_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let o = varilab(&["run", "--pipeline", "gamma", "--out", "g"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d.path().join("g/report.json"));
    assert_eq!(r["schema"], 1);
    assert_eq!(r["pass"], true);
    assert!(stage(&r, "integrand::gamma_estimate")["report"]["detail"]["gamma"].as_f64().unwrap() > 4.0);
}

#[test]
fn det_sharpness_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let o = varilab(&["run", "--pipeline", "det-sharpness", "--eps", "0.02", "--grid", "512", "--out", "."], d.path());
    assert!(o.status.success());
    let r = report(&d.path().join("report.json"));
    assert_eq!(r["pass"], true);
    let gap = &stage(&r, "planefield::det_integral")["report"];
    assert!(gap["lhs"].as_f64().unwrap() <= 0.03);
    let s = io::load(&d.path().join("s.bin")).unwrap();
    assert_eq!(s.grid.nx, 512);
    assert!(std::fs::read_to_string(d.path().join("div_t.csv")).unwrap().starts_with("i,j,x,y,value\n"));
}

#[test]
fn ms_ratio_on_generated_icosphere() {
    let d = tempfile::tempdir().unwrap();
    assert!(varilab(&["generate", "icosphere", "--param", "subdiv=5", "--out", "m"], d.path()).status.success());
    let v = mesh::read_off(&d.path().join("m/icosphere.off"), None).unwrap();
    assert_eq!(v.triangles.len(), 20480);
    let o = varilab(&["run", "--pipeline", "ms-ratio", "--mesh", "m/icosphere.off", "--integrand", "area", "--out", "r"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&d.path().join("r/report.json"));
    let c = stage(&r, "varifold::ms_ratio")["report"]["detail"]["c_hat"].as_f64().unwrap();
    assert!((c - 0.141).abs() < 1e-3, "{c}");
    assert_eq!(stage(&r, "varifold::project_to_plane")["pass"], true);
    assert!(d.path().join("r/normalization.json").exists());
}

#[test]
fn config_runs_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "pipeline": "kakeya", "grid": 64, "seed": 11}"#;
    std::fs::write(d.path().join("c.json"), cfg).unwrap();
    for out in ["a", "b"] {
        assert!(varilab(&["run", "--config", "c.json", "--out", out], d.path()).status.success());
    }
    for f in ["report.json", "s.bin", "pair.json"] {
        assert_eq!(std::fs::read(d.path().join("a").join(f)).unwrap(), std::fs::read(d.path().join("b").join(f)).unwrap(), "{f}");
    }
    assert_eq!(report(&d.path().join("a/report.json"))["seed"], 11);
}

#[test]
fn failed_checks_exit_zero_unless_strict() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"schema": 1, "pipeline": "kakeya", "grid": 64, "sign_violating": true}"#).unwrap();
    let o = varilab(&["run", "--config", "c.json", "--out", "x"], d.path());
    assert!(o.status.success());
    assert_eq!(report(&d.path().join("x/report.json"))["pass"], false);
    let o = varilab(&["run", "--config", "c.json", "--out", "y", "--strict"], d.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bad_config_is_a_process_error() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("c.json"), r#"{"schema": 7, "pipeline": "gamma"}"#).unwrap();
    let o = varilab(&["run", "--config", "c.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
    let o = varilab(&["run", "--config", "missing.json"], d.path());
    assert_eq!(o.status.code(), Some(2));
    let o = varilab(&["generate", "cube"], d.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_over_grid() {
    let d = tempfile::tempdir().unwrap();
    let cfg = r#"{"schema": 1, "base": {"schema": 1, "pipeline": "det-sharpness", "eps": 0.05}, "field": "grid", "values": [64, 128, 256]}"#;
    std::fs::write(d.path().join("s.json"), cfg).unwrap();
    let o = varilab(&["sweep", "--config", "s.json", "--out", "sw", "--jobs", "2"], d.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("sw/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    for (i, n) in [64, 128, 256].iter().enumerate() {
        let r = report(&d.path().join(format!("sw/run-{i:03}/report.json")));
        assert_eq!(r["config"]["grid"], *n);
    }
}

#[test]
fn generators_write_expected_files() {
    let d = tempfile::tempdir().unwrap();
    let o = varilab(&["generate", "torus", "--param", "R=2", "--param", "r=0.5", "--param", "nu=128", "--param", "nv=64", "--out", "t"], d.path());
    assert!(o.status.success());
    assert_eq!(mesh::read_off(&d.path().join("t/torus.off"), None).unwrap().euler_characteristic(), 0);
    assert!(varilab(&["generate", "crossing-tubes", "--param", "eps=0.05", "--out", "c"], d.path()).status.success());
    let s = io::load(&d.path().join("c/s.bin")).unwrap();
    let t = io::load(&d.path().join("c/t.bin")).unwrap();
    assert_eq!(s.grid, t.grid);
    assert!(varilab(&["generate", "transverse-flow-pair", "--seed", "3", "--out", "p"], d.path()).status.success());
    assert!(d.path().join("p/pair.json").exists());
    assert!(varilab(&["generate", "sheared-integrand", "--seed", "3", "--out", "i"], d.path()).status.success());
    let f = std::fs::read_to_string(d.path().join("i/integrand.json")).unwrap();
    assert!(varilab::Integrand::from_json(&f).is_ok());
}

#[test]
fn normalize_pipeline_on_sheared_integrand() {
    let d = tempfile::tempdir().unwrap();
    assert!(varilab(&["generate", "sheared-integrand", "--seed", "2", "--out", "."], d.path()).status.success());
    let f = std::fs::read_to_string(d.path().join("integrand.json")).unwrap();
    let o = varilab(&["run", "--pipeline", "normalize", "--integrand", &f, "--out", "n"], d.path());
    assert!(o.status.success());
    let r = report(&d.path().join("n/report.json"));
    assert_eq!(stage(&r, "normalize::check_geo_condition[before]")["pass"], false);
    assert_eq!(stage(&r, "normalize::compute_normalization")["pass"], true);
}

#[test]
fn flow_suite_pipeline() {
    let d = tempfile::tempdir().unwrap();
    let o = varilab(&["run", "--pipeline", "flow-suite", "--seed", "1", "--grid", "8", "--out", "f"], d.path());
    assert!(o.status.success());
    let r = report(&d.path().join("f/report.json"));
    assert_eq!(r["pass"], true, "{}", serde_json::to_string_pretty(&r).unwrap());
    let mask = std::fs::read_to_string(d.path().join("f/good_set.csv")).unwrap();
    assert_eq!(mask.lines().count(), 1 + 64);
    assert!(d.path().join("f/suite.json").exists());
}
