mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use serde_json::Value;

fn mech(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mech")).args(args).arg("--out").arg(out).output().unwrap()
}

fn report(out: &Path, stem: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(format!("{stem}.report.json"))).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn all_is_the_union_of_single_analyses() {
    let dir = tempfile::tempdir().unwrap();
    for path in model_paths() {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let p = path.to_str().unwrap();
        let all_dir = dir.path().join(format!("{stem}-all"));
        let o = mech(&["all", p, "--seed", "5"], &all_dir);
        assert_eq!(o.status.code(), Some(0), "{stem}: {}", String::from_utf8_lossy(&o.stderr));
        let all = report(&all_dir, &stem);
        let sections = all["analyses"].as_object().unwrap();
        assert!(!sections.is_empty(), "{stem}");
        for (name, section) in sections {
            let one_dir = dir.path().join(format!("{stem}-{name}"));
            mech(&[name, p, "--seed", "5"], &one_dir);
            let one = report(&one_dir, &stem);
            assert_eq!(&one["analyses"][name], section, "{stem}/{name}");
            assert_eq!(one["model_hash"], all["model_hash"]);
        }
    }
}

#[test]
fn report_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = models_dir().join("oscillator.toml");
    let o = mech(&["lagrangian", p.to_str().unwrap(), "--json-only"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let printed: Value = serde_json::from_slice(&o.stdout).unwrap();
    let r = report(dir.path(), "oscillator");
    assert_eq!(printed, r);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["command"], "lagrangian");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["model_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("oscillator.lagrangian.csv")).unwrap();
    assert!(csv.starts_with("t,q,v\n"));
}

#[test]
fn seeds_change_only_seeded_fields() {
    let dir = tempfile::tempdir().unwrap();
    let p = models_dir().join("singular_xy.toml");
    let a = mech(&["constraints", p.to_str().unwrap(), "--seed", "1", "--json-only"], &dir.path().join("a"));
    let b = mech(&["constraints", p.to_str().unwrap(), "--seed", "2", "--json-only"], &dir.path().join("b"));
    let (a, b): (Value, Value) = (serde_json::from_slice(&a.stdout).unwrap(), serde_json::from_slice(&b.stdout).unwrap());
    assert_ne!(a["seed"], b["seed"]);
    assert_eq!(a["analyses"]["constraints"]["generations"], b["analyses"]["constraints"]["generations"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let bad_toml = write(d, "bad.toml", "[manifold\n");
    assert_eq!(mech(&["all", &bad_toml], d).status.code(), Some(1));
    let bad_expr = write(d, "expr.toml", "[manifold]\ncoordinates = [\"q\"]\n[lagrangian]\nL = \"v^^2\"\n");
    assert_eq!(mech(&["lagrangian", &bad_expr], d).status.code(), Some(1));
    let foreign = write(d, "foreign.toml", "[manifold]\ncoordinates = [\"q\"]\n[lagrangian]\nL = \"w^2\"\n");
    assert_eq!(mech(&["lagrangian", &foreign], d).status.code(), Some(1));
    assert_eq!(mech(&["nonsense", &bad_toml], d).status.code(), Some(1));
    assert_eq!(mech(&["all", "/no/such/model.toml"], d).status.code(), Some(1));

    let singular = models_dir().join("singular_xy.toml");
    let o = mech(&["geodesic", singular.to_str().unwrap()], d);
    assert_eq!(o.status.code(), Some(2));

    let pole = write(
        d,
        "pole.toml",
        "[manifold]\ncoordinates = [\"th\", \"ph\"]\n[connection]\nlinear = true\nchristoffel = [\n  [[\"0\", \"0\"], [\"0\", \"-sin(th)*cos(th)\"]],\n  [[\"0\", \"cos(th)/sin(th)\"], [\"cos(th)/sin(th)\", \"0\"]],\n]\nguard = \"sin(th)\"\n[integrate]\nx0 = [0.5, 0.0, -1.0, 0.0]\nT = 2.0\nh = 1e-3\n",
    );
    let o = mech(&["geodesic", &pole], d);
    assert_eq!(o.status.code(), Some(3));
    let r = report(d, "pole");
    assert_eq!(r["analyses"]["geodesic"]["exit_code"], 3);
}

#[test]
fn summary_is_the_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = models_dir().join("heisenberg.toml");
    let o = mech(&["control", p.to_str().unwrap()], dir.path());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("analyses.control.")), "{text}");
    assert!(text.contains("schema = 1"));
}
