use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn squish(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_squish"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = squish(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn small_plant(dir: &Path, seed: &str) -> (String, String) {
    let db = path(dir, &format!("plant{seed}.txt"));
    let targets = path(dir, &format!("targets{seed}.txt"));
    ok(&[
        "gen",
        "plant",
        "--seed",
        seed,
        "--alphabet",
        "200",
        "--length",
        "2000",
        "--patterns",
        "4",
        "--out",
        &db,
        "--targets",
        &targets,
    ]);
    (db, targets)
}

fn all_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_finite),
        Value::Object(o) => o.values().all(all_finite),
        _ => true,
    }
}

#[test]
fn gen_mine_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (db, targets) = small_plant(dir.path(), "3");
    let mined = path(dir.path(), "mined.txt");
    let json: Value = serde_json::from_str(&ok(&[
        "mine",
        &db,
        "--format",
        "json",
        "--out",
        &mined,
        "--targets",
        &targets,
    ]))
    .unwrap();
    assert!(all_finite(&json));
    assert_eq!(json["stats"]["num_patterns"], 4);
    assert!(json["stats"]["delta_l"].as_f64().unwrap() > 0.0);
    assert_eq!(json["recall"]["pattern_recall"], 1.0);

    let eval: Value =
        serde_json::from_str(&ok(&["eval", &mined, &targets, "--db", &db, "--format", "json"])).unwrap();
    assert_eq!(eval["pattern_recall"], 1.0);
    let delta = eval["delta_l"].as_f64().unwrap();
    assert!((delta - json["stats"]["delta_l"].as_f64().unwrap()).abs() < 1e-6);
}

#[test]
fn gen_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (db_a, t_a) = small_plant(a.path(), "9");
    let (db_b, t_b) = small_plant(b.path(), "9");
    assert_eq!(std::fs::read(db_a).unwrap(), std::fs::read(db_b).unwrap());
    assert_eq!(std::fs::read(t_a).unwrap(), std::fs::read(t_b).unwrap());
    let other = ok(&["gen", "indep", "--seed", "10", "--length", "500"]);
    assert_ne!(other, ok(&["gen", "indep", "--seed", "11", "--length", "500"]));
}

#[test]
fn stats_reports_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let db = path(dir.path(), "d.txt");
    std::fs::write(&db, "a b c\na b\n").unwrap();
    let text = ok(&["stats", &db]);
    assert!(text.contains("|Omega|\t3"));
    assert!(text.contains("||D||\t5"));
    let json: Value = serde_json::from_str(&ok(&["stats", &db, "--format", "json"])).unwrap();
    assert!(all_finite(&json));
    assert!(json["standard_bits"].as_f64().unwrap() > 0.0);
}

#[test]
fn stdin_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let (db, _) = small_plant(dir.path(), "4");
    for mode in ["disjoint", "interleave", "choicisode"] {
        let json: Value =
            serde_json::from_str(&ok(&["mine", &db, "--mode", mode, "--format", "json"])).unwrap();
        assert_eq!(json["stats"]["mode"].as_str().unwrap().to_lowercase(), mode);
    }
    let mut child = Command::new(env!("CARGO_BIN_EXE_squish"))
        .args(["mine", "-", "--format", "tsv"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"a b a b a b a b a b\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path(dir.path(), "missing.txt");
    let out = squish(&["stats", &missing]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("squish:"));

    let empty = path(dir.path(), "empty.txt");
    std::fs::write(&empty, "").unwrap();
    assert!(!squish(&["mine", &empty]).status.success());

    let ints = path(dir.path(), "ints.txt");
    std::fs::write(&ints, "1 2 x\n").unwrap();
    assert!(!squish(&["stats", &ints, "--input-format", "integers"])
        .status
        .success());

    let db = path(dir.path(), "d.txt");
    std::fs::write(&db, "a b\n").unwrap();
    assert!(!squish(&["mine", &db, "--budget-seconds", "-1"]).status.success());
    assert!(!squish(&["mine", &db, "--mode", "bogus"]).status.success());
}
