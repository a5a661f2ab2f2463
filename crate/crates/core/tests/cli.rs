use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], cfg: &str, out: &Path) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_spdekit"))
        .args(args)
        .arg("--config")
        .arg(config(cfg))
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn spdekit");
    status.status.code().expect("exit code")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["check"], "allen_cahn.toml", &dir.path().join("ac")), 0);
    assert_eq!(run(&["check"], "swift_hohenberg_d4_rho2.toml", &dir.path().join("sh")), 1);
    assert_eq!(run(&["check"], "invalid/missing_noise.toml", &dir.path().join("bad")), 2);
    assert_eq!(run(&["check"], "no_such_file.toml", &dir.path().join("none")), 2);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("sh/report.json")).unwrap()).unwrap();
    assert_eq!(report["admissibility"][0]["status"], "fail", "{report}");
    assert_eq!(report["admissibility"][0]["interval"], "[0, 2)");
}

#[test]
fn unaudited_experiment_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(run(&["experiment"], "allen_cahn_unaudited.toml", &out), 3);
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 3);
    assert!(m["verdicts"]["error"].as_str().unwrap().contains("coercivity"));
    assert!(!out.join("summary.json").exists());
}

#[test]
fn usage_errors_exit_2() {
    let out = Command::new(env!("CARGO_BIN_EXE_spdekit")).args(["simulate", "--paths", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_spdekit")).arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn smoke_simulation_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["simulate"], "heat_smoke.toml", &a), 0);
    assert_eq!(run(&["simulate"], "heat_smoke.toml", &b), 0);
    let csv = fs::read_to_string(a.join("norms.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12, "{csv}");
    for f in ["norms.csv", "snapshots.bin", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let m = manifest(&a);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(m["command"], "simulate");
}

#[test]
fn ensemble_csv_is_reproducible_and_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    assert_eq!(run(&["experiment", "--paths", "70"], "ledger_additive.toml", &p("a")), 0);
    assert_eq!(run(&["experiment", "--paths", "70"], "ledger_additive.toml", &p("b")), 0);
    assert_eq!(run(&["experiment", "--paths", "70", "--seed", "99"], "ledger_additive.toml", &p("c")), 0);
    let read = |n: &str| fs::read(p(n).join("paths.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    assert_eq!(String::from_utf8(read("a")).unwrap().lines().count(), 71);
    let m = manifest(&p("c"));
    assert_eq!(m["seed"], 99);
    assert_eq!(m["overrides"]["paths"], "70");
}

#[test]
fn gronwall_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    assert_eq!(run(&["gronwall", "--plot"], "gronwall_deterministic.toml", &out), 0);
    assert!(fs::read_to_string(out.join("gronwall.svg")).unwrap().starts_with("<svg"));
    assert!(out.join("rows.csv").exists());
}

#[test]
fn blowup_probe_and_twin() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["experiment"], "blowup_probe.toml", &dir.path().join("p")), 0);
    assert_eq!(run(&["experiment", "--paths", "32"], "dissipative_twin.toml", &dir.path().join("t")), 0);
}
