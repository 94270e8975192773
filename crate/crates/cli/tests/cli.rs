use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stretchperc"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .arg("run")
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn exact_scale0_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["exact_scale0", "p=0.9", "h=1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir.path().join("exact_scale0.csv"));
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("experiment,params_json,mean,stderr,trials,seed"));
    let u0: f64 = rows.next().unwrap().rsplit(',').nth(3).unwrap().parse().unwrap();
    assert!((u0 - 0.1).abs() < 1e-12);
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["p"], 0.9);
    assert!(manifest["wall_seconds"].is_number());
}

#[test]
fn schema_violations_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["estimate_pk", "trials=0"][..],
        &["estimate_pk", "colour=red"],
        &["estimate_pk", "trials"],
        &["no_such_experiment"],
    ] {
        assert_eq!(run(args, dir.path()).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(bin().args(["suite", "nope"]).status().unwrap().code(), Some(2));
}

#[test]
fn unreadable_config_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let o = bin()
        .args(["run", "exact_scale0", "--config"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn failed_check_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check_certificate", "l=2", "h_max=100", "k_max=10", "b_max=10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["check_certificate", "h_max=100", "k_max=10", "b_max=10"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reruns_and_config_echo_reproduce() {
    let base = tempfile::tempdir().unwrap();
    let (a, b, c) = (base.path().join("a"), base.path().join("b"), base.path().join("c"));
    let args = ["oriented_percolation", "p=0.7", "depth=32", "trials=300", "seed=5"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    let csv = |d: &Path| read(&d.join("oriented_percolation.csv"));
    assert_eq!(csv(&a), csv(&b));

    let o = bin()
        .args(["run", "oriented_percolation", "--config"])
        .arg(a.join("config.toml"))
        .arg("--out")
        .arg(&c)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(csv(&a), csv(&c));
}

#[test]
fn config_file_is_flat_and_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "experiment = \"exact_scale0\"\np = 0.5\nh = 2\n").unwrap();
    let o = bin()
        .args(["run", "exact_scale0", "h=1", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let echo = read(&dir.path().join("config.toml"));
    assert!(echo.contains("p = 0.5") && echo.contains("h = 1"), "{echo}");

    std::fs::write(&cfg, "experiment = \"estimate_pk\"\n").unwrap();
    let o = bin().args(["run", "exact_scale0", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, "[nested]\np = 1\n").unwrap();
    let o = bin().args(["run", "exact_scale0", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn certificate_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["suite", "certificate", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion  6"));
    assert!(dir.path().join("manifest.json").exists());
}
