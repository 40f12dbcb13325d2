use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fragmenta(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fragmenta"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = fragmenta(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path.join("manifest.json")).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn ternary_roots_are_two_and_minus_three() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["roots", "--m", "3", "--out", "r"]);
    let table = rows(&tmp.path().join("r/roots.csv"));
    assert_eq!(table.len(), 2);
    let root = |r: &Vec<String>| (r[2].parse::<f64>().unwrap(), r[3].parse::<f64>().unwrap());
    let (re1, im1) = root(&table[0]);
    let (re2, im2) = root(&table[1]);
    assert!((re1 - 2.0).abs() < 1e-10 && im1.abs() < 1e-10);
    assert!((re2 + 3.0).abs() < 1e-10 && im2.abs() < 1e-10);
    assert!(table.iter().all(|r| r[4].parse::<f64>().unwrap() < 1e-8));
}

#[test]
fn ternary_theory_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    ok(tmp.path(), &["theory", "--law", "buniform3", "--out", "t"]);
    let m = manifest(&tmp.path().join("t"));
    assert!((m["summary"]["C"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    let table = rows(&tmp.path().join("t/stationary_cdf.csv"));
    assert!(!table.is_empty());
    for r in table {
        let x: f64 = r[0].parse().unwrap();
        let u: f64 = r[1].parse().unwrap();
        assert!((u - 0.5 * x * (3.0 - x)).abs() < 1e-8, "u({x}) = {u}");
    }
}

#[test]
fn simulate_is_reproducible_and_rerunnable_from_its_manifest() {
    let tmp = TempDir::new().unwrap();
    let args = [
        "simulate",
        "--xc",
        "1e-2",
        "--replicates",
        "3",
        "--seed",
        "42",
    ];
    ok(tmp.path(), &[&args[..], &["--out", "a"]].concat());
    ok(tmp.path(), &[&args[..], &["--out", "b"]].concat());
    ok(
        tmp.path(),
        &["simulate", "--config", "a/manifest.json", "--out", "c"],
    );
    let a = manifest(&tmp.path().join("a"));
    let b = manifest(&tmp.path().join("b"));
    let c = manifest(&tmp.path().join("c"));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["outputs"], c["outputs"]);
    assert_eq!(a["seeds"], c["seeds"]);
    assert_eq!(a["outputs"].as_object().unwrap().len(), 4);
    let spacings = rows(&tmp.path().join("a/spacings_0000.csv"));
    let total: f64 = spacings.iter().map(|r| r[1].parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(spacings
        .iter()
        .all(|r| r[1].parse::<f64>().unwrap() <= 1e-2));
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("run.json"),
        r#"{"command": "simulate", "law": {"kind": "buniform", "b": 3}, "x_c": 0.05, "replicates": 2}"#,
    )
    .unwrap();
    ok(
        tmp.path(),
        &[
            "simulate", "--config", "run.json", "--xc", "0.02", "--out", "o",
        ],
    );
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["config"]["x_c"].as_f64(), Some(0.02));
    assert_eq!(m["config"]["replicates"].as_u64(), Some(2));
    assert_eq!(m["config"]["law"]["kind"], "buniform");

    let out = fragmenta(tmp.path(), &["theory", "--config", "run.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("command"));
}

#[test]
fn bad_configuration_exits_two_and_names_the_field() {
    let tmp = TempDir::new().unwrap();
    let out = fragmenta(tmp.path(), &["simulate", "--law", "heavy1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("law"));

    let out = fragmenta(tmp.path(), &["simulate", "--xc", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x_c"));

    let out = fragmenta(tmp.path(), &["simulate", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_prints_pass_lines() {
    let tmp = TempDir::new().unwrap();
    let out = ok(tmp.path(), &["verify", "--criteria", "5,7", "--out", "v"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  5: PASS"));
    assert!(stdout.contains("criterion  7: PASS"));
    assert!(tmp.path().join("v/verify.csv").exists());
}

#[test]
fn verify_spacing_criteria_at_documented_scale() {
    let tmp = TempDir::new().unwrap();
    let out = ok(
        tmp.path(),
        &[
            "verify",
            "--law",
            "kakutani",
            "--xc",
            "1e-3",
            "--replicates",
            "200",
            "--seed",
            "7",
            "--criteria",
            "1,2",
            "--out",
            "v",
        ],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("criterion  1: PASS"), "{stdout}");
    assert!(stdout.contains("criterion  2: PASS"), "{stdout}");
}

#[test]
fn discrete_run_writes_profiles_and_a_critical_snapshot() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &[
            "discrete",
            "--n",
            "100000",
            "--alpha",
            "1.5",
            "--snapshots",
            "1000",
            "--out",
            "d",
        ],
    );
    let d = tmp.path().join("d");
    for f in [
        "final.csv",
        "snapshot_1000.csv",
        "largest_counts.csv",
        "summary.json",
    ] {
        assert!(d.join(f).exists(), "{f}");
    }
    let mass: u64 = rows(&d.join("snapshot_1000.csv"))
        .iter()
        .map(|r| r[0].parse::<u64>().unwrap() * r[1].parse::<u64>().unwrap())
        .sum();
    assert_eq!(mass, 100_000);
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
    assert!(summary["predicted"]["m_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn report_renders_overlay_and_slope() {
    let tmp = TempDir::new().unwrap();
    ok(
        tmp.path(),
        &[
            "simulate",
            "--xc",
            "1e-3",
            "--replicates",
            "2",
            "--out",
            "s",
        ],
    );
    ok(
        tmp.path(),
        &[
            "discrete",
            "--n",
            "100000",
            "--snapshots",
            "1000",
            "--out",
            "d",
        ],
    );
    let out = ok(
        tmp.path(),
        &[
            "report",
            "--spacings",
            "s/spacings_0000.csv",
            "--spacings",
            "s/spacings_0001.csv",
            "--manifest",
            "s/manifest.json",
            "--sizes",
            "d/snapshot_1000.csv",
            "--fit",
            "10,100",
            "--out",
            "rep",
        ],
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sup deviation"));
    let cdf = fs::read_to_string(tmp.path().join("rep/cdf.svg")).unwrap();
    assert!(cdf.contains(r#"id="empirical""#));
    assert!(cdf.contains(r#"id="theory-u-x-""#));
    let sizes = fs::read_to_string(tmp.path().join("rep/sizes.svg")).unwrap();
    assert!(sizes.contains(r#"class="note""#) && sizes.contains("slope = "));
    assert!(tmp.path().join("rep/summary.txt").exists());
}

#[test]
fn report_rejects_empty_and_malformed_tables() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.csv"), "size,count\n").unwrap();
    let out = fragmenta(tmp.path(), &["report", "--sizes", "empty.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));

    fs::write(tmp.path().join("bad.csv"), "size,number\n1,2\n").unwrap();
    let out = fragmenta(tmp.path(), &["report", "--sizes", "bad.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("number"));

    fs::write(tmp.path().join("nan.csv"), "size,count\n1,many\n").unwrap();
    let out = fragmenta(tmp.path(), &["report", "--sizes", "nan.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("many"));
}
