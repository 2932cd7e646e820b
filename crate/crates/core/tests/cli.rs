use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

fn membrane(dir: &Path, command: &str, config: &Value, extra: &[&str]) -> (i32, String) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_membrane"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sphere(n1: usize, n2: usize) -> Value {
    json!({
        "surface": {"kind": "sphere_band", "params": {"radius": 1.0, "margin": 0.4}},
        "grid": {"n1": n1, "n2": n2},
        "model": {"preset": "helfrich", "alpha": 1.0, "mu": 0.5}
    })
}

#[test]
fn audit_passes_on_smooth_sphere() {
    let dir = TempDir::new().unwrap();
    let (code, err) = membrane(dir.path(), "audit", &sphere(64, 65), &["--tol", "1e-3"]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    for f in ["identities.json", "identities.csv", "surface.obj", "manifest.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let report = read_json(&out.join("identities.json"));
    let names: Vec<&str> = report.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"gauss_codazzi"), "{names:?}");
}

#[test]
fn audit_flags_perturbed_node() {
    let dir = TempDir::new().unwrap();
    let mut cfg = sphere(64, 65);
    cfg["perturb"] = json!({"node": [10, 32], "offset": [0.0, 0.0, 1e-2]});
    let (code, _) = membrane(dir.path(), "audit", &cfg, &["--tol", "1e-3"]);
    assert_eq!(code, 2);
    let manifest = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(manifest["exit_code"], 2);
}

#[test]
fn missing_kind_is_a_config_error_naming_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"params": {"radius": 1.0, "margin": 0.4}},
        "grid": {"n1": 16, "n2": 17}
    });
    let (code, err) = membrane(dir.path(), "audit", &cfg, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("kind"), "{err}");
}

#[test]
fn unknown_preset_and_missing_model_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let mut cfg = sphere(16, 17);
    cfg["model"] = json!({"preset": "elastic", "mu": 1.0});
    assert_eq!(membrane(dir.path(), "stress", &cfg, &[]).0, 1);
    cfg.as_object_mut().unwrap().remove("model");
    let (code, err) = membrane(dir.path(), "energy", &cfg, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("model"), "{err}");
}

#[test]
fn stress_on_sphere_gives_twice_the_tension() {
    let dir = TempDir::new().unwrap();
    let (code, err) = membrane(dir.path(), "stress", &sphere(64, 65), &["--formats", "json,csv"]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    assert!(!out.join("surface.obj").exists());
    let mut rdr = csv::Reader::from_path(out.join("residuals.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "shape").unwrap();
    let (i1, i2) = (headers.iter().position(|h| h == "i1").unwrap(), headers.iter().position(|h| h == "i2").unwrap());
    let mut seen = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let j: usize = rec[i2].parse().unwrap();
        let _: usize = rec[i1].parse().unwrap();
        if (16..=48).contains(&j) {
            let eps: f64 = rec[col].parse().unwrap();
            assert!((eps - 1.0).abs() < 1e-6, "shape {eps} at row {j}");
            seen += 1;
        }
    }
    assert!(seen > 0);
}

#[test]
fn stress_tolerance_sets_exit_code() {
    let dir = TempDir::new().unwrap();
    // the sphere is not in equilibrium under helfrich(1, 0.5)
    assert_eq!(membrane(dir.path(), "stress", &sphere(32, 33), &["--tol", "1e-3"]).0, 2);
}

#[test]
fn energy_of_cylinder_soap_film_is_its_area() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"kind": "cylinder", "params": {"radius": 1.0, "length": 2.0}},
        "grid": {"n1": 64, "n2": 33},
        "model": {"preset": "soap_film", "mu": 1.0}
    });
    let (code, err) = membrane(dir.path(), "energy", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let e = read_json(&dir.path().join("out/energy.json"));
    let energy = e["energy"].as_f64().unwrap();
    assert!((energy - 4.0 * PI).abs() < 1e-5 * 4.0 * PI, "energy {energy}");
}

#[test]
fn force_on_cylinder_circle() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"kind": "cylinder", "params": {"radius": 1.0, "length": 2.0}},
        "grid": {"n1": 128, "n2": 33},
        "model": {"preset": "soap_film", "mu": 1.0},
        "curve": {"fixed": "u2", "index": 16, "side": "lower"}
    });
    let (code, err) = membrane(dir.path(), "force", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let f = read_json(&dir.path().join("out/force.json"));
    let m = f["magnitude"].as_f64().unwrap();
    assert!((m - 2.0 * PI).abs() < 1e-3 * 2.0 * PI, "magnitude {m}");
}

#[test]
fn force_on_open_curve_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"kind": "cylinder", "params": {"radius": 1.0, "length": 2.0}},
        "grid": {"n1": 32, "n2": 17},
        "model": {"preset": "soap_film", "mu": 1.0},
        "curve": {"fixed": "u1", "index": 3, "side": "lower"}
    });
    assert_eq!(membrane(dir.path(), "force", &cfg, &[]).0, 1);
}

#[test]
fn outputs_are_deterministic_up_to_timestamp() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = sphere(32, 33);
    assert_eq!(membrane(a.path(), "stress", &cfg, &[]).0, 0);
    assert_eq!(membrane(b.path(), "stress", &cfg, &[]).0, 0);
    for f in ["residual_norms.json", "stress.csv", "residuals.csv", "surface.obj"] {
        let x = std::fs::read(a.path().join("out").join(f)).unwrap();
        let y = std::fs::read(b.path().join("out").join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let mut ma = read_json(&a.path().join("out/manifest.json"));
    let mut mb = read_json(&b.path().join("out/manifest.json"));
    for m in [&mut ma, &mut mb] {
        m.as_object_mut().unwrap().remove("timestamp");
        m["config"].as_object_mut().unwrap().remove("out");
    }
    assert_eq!(ma, mb);
}

#[test]
fn obj_has_quad_split_faces() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"kind": "cylinder", "params": {"radius": 1.0, "length": 1.0}},
        "grid": {"n1": 12, "n2": 9}
    });
    assert_eq!(membrane(dir.path(), "audit", &cfg, &["--formats", "obj", "--tol", "1"]).0, 0);
    let obj = std::fs::read_to_string(dir.path().join("out/surface.obj")).unwrap();
    let v = obj.lines().filter(|l| l.starts_with("v ")).count();
    let f = obj.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(v, 108);
    // periodic around, clamped along: 12 x 8 quads
    assert_eq!(f, 192);
    assert!(!dir.path().join("out/identities.json").exists());
}

#[test]
fn flow_finds_catenoid() {
    let dir = TempDir::new().unwrap();
    let cfg = json!({
        "surface": {"kind": "cylinder", "params": {"radius": 1.0, "length": 1.0}},
        "grid": {"n1": 32, "n2": 33},
        "model": {"preset": "soap_film", "mu": 1.0},
        "flow": {"dt0": 1e-3, "tol": 1e-3, "max_steps": 20000}
    });
    let (code, err) = membrane(dir.path(), "flow", &cfg, &[]);
    assert_eq!(code, 0, "{err}");
    let out = dir.path().join("out");
    let summary = read_json(&out.join("flow.json"));
    let neck = summary["neck_radius"].as_f64().unwrap();
    let root = membrane_stress::flow::catenoid_neck(1.0, 1.0).unwrap();
    assert!((neck - root).abs() < 0.01 * root, "neck {neck} vs {root}");
    assert!(out.join("final.obj").exists());
    let mut rdr = csv::Reader::from_path(out.join("trajectory.csv")).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "energy").unwrap();
    let energies: Vec<f64> = rdr.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn bad_flow_parameter_is_config_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = sphere(16, 17);
    cfg["flow"] = json!({"dt_shrink": 1.5});
    assert_eq!(membrane(dir.path(), "flow", &cfg, &[]).0, 1);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str, dir: &Path| {
        let cfg = dir.join("config.json");
        std::fs::write(&cfg, serde_json::to_string(&sphere(32, 33)).unwrap()).unwrap();
        let status = Command::new(env!("CARGO_BIN_EXE_membrane"))
            .env("MEMBRANE_THREADS", threads)
            .args(["stress", "--formats", "csv", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(dir.join("out"))
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.join("out/stress.csv")).unwrap()
    };
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert!(run("1", a.path()) == run("4", b.path()));
}
