use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lipfree::scalar::parse_rational;
use serde_json::Value;
use tempfile::TempDir;

fn lipfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfree")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const LINE: &str = r#"{"labels":["0","a","b","c"],"base":0,"d":[
  ["0","1","3","4"],["1","0","2","3"],["3","2","0","1"],["4","3","1","0"]]}"#;

#[test]
fn freenorm_of_a_molecule_is_one() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", LINE);
    let elem = write(&dir, "m.json", r#"{"weights":{"a":"1/2","b":"-1/2"}}"#);
    let out = lipfree(&["freenorm", "--space", s(&space), "--element", s(&elem)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["value"], "1");
    assert_eq!(v["plan_cost"], "1");
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["seed"], 0);
}

#[test]
fn example1_prints_alpha_formula() {
    let out = lipfree(&["certify", "example1", "--N", "24", "--n", "3", "--samples", "3", "--seed", "11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["parameters"]["alpha"], "1/9 - 1/12 = 1/36");
    assert_eq!(v["verified"], true);
    assert_eq!(v["seed"], 11);
    assert!(stderr(&out).starts_with("PASS"));
}

#[test]
fn example2_echoes_the_molecule_distance() {
    let out = lipfree(&["certify", "example2", "--n", "6", "--eps", "1/5", "--samples", "2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["witnesses"]["molecule_distance"]["lp"], "1");
    assert_eq!(v["witnesses"]["molecule_distance"]["formula"], "1");
}

#[test]
fn parse_errors_exit_2_with_location() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "bad.json", r#"{"labels":["a","b"],"base":0,"d":[["0","x"],["1","0"]]}"#);
    let out = lipfree(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("d[0][1]"), "{}", stderr(&out));

    let broken = write(&dir, "broken.json", "{\"labels\": [");
    let out = lipfree(&["validate", "--space", s(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"), "{}", stderr(&out));

    let out = lipfree(&["certify", "example2", "--eps", "abc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--eps"));
}

#[test]
fn failed_checks_exit_1_and_are_named() {
    let dir = TempDir::new().unwrap();
    let space = write(
        &dir,
        "tri.json",
        r#"{"labels":["a","b","c"],"base":0,"d":[["0","1","5"],["1","0","1"],["5","1","0"]]}"#,
    );
    let out = lipfree(&["validate", "--space", s(&space)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FAIL metric axiom"), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["ok"], false);

    let pairs = write(
        &dir,
        "pairs.json",
        r#"[{"u":"0","v":"a","set":["0","a","b"]},{"u":"b","v":"c","set":["b","c"]}]"#,
    );
    let line = write(&dir, "line.json", LINE);
    let out = lipfree(&[
        "certify",
        "annuli",
        "--space",
        s(&line),
        "--pairs",
        s(&pairs),
        "--battery",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL sets are pairwise disjoint"), "{}", stderr(&out));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = lipfree(&["certify", "annuli", "--stages", "3", "--battery", "4", "--seed", "5", "--out", s(p)]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn float_mode_records_tolerance() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", LINE);
    let elem = write(&dir, "e.json", r#"{"weights":{"a":"0.25","c":"-0.5"}}"#);
    let out = lipfree(&[
        "freenorm",
        "--mode",
        "float",
        "--tol",
        "1e-6",
        "--space",
        s(&space),
        "--element",
        s(&elem),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["mode"], "float");
    assert_eq!(v["tolerance"], "1e-6");
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((value - 1.75).abs() < 1e-12);
}

#[test]
fn constructed_functions_feed_other_commands() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("hat.json");
    let out = lipfree(&["construct", "delta-hat", "--k", "5", "--out", s(&f)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = lipfree(&["lipnorm", "--function", s(&f)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["norm"], "1");

    let out = lipfree(&["slice", "--function", s(&f), "--alpha", "1/2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout_json(&out)["count"].as_u64().unwrap() > 0);

    let out = lipfree(&["scan-dichotomy", "--function", s(&f), "--eps", "1/4,1", "--radius", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# mode=exact seed=0");
    assert!(lines[1].starts_with("eps,slice_molecules"));
    assert_eq!(lines.len(), 4);
}

#[test]
fn daugavet_construction_meets_stage_bounds() {
    let out = lipfree(&["construct", "daugavet", "--stages", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 3);
    assert_eq!(stages[2]["lip_bound"], "7/8");
    assert_eq!(stages[2]["molecule_bound"], "3/4");
}

#[test]
fn extension_and_nearest_point_functions() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", LINE);
    let partial = write(&dir, "p.json", r#"{"values":{"0":"0","c":"2"}}"#);
    let out = lipfree(&["extend", "--space", s(&space), "--partial", s(&partial), "--direction", "upper"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["lip"], "1/2");
    assert_eq!(v["values"]["a"], "1/2");
    assert_eq!(v["values"]["c"], "2");

    let out = lipfree(&["construct", "nearest", "--space", s(&space), "--sites", "c"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["values"], serde_json::json!(["0", "1", "1", "0"]));
}

#[test]
fn molecule_table_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let space = write(&dir, "space.json", LINE);
    let out = lipfree(&["dist", "--space", s(&space), "--molecule-table"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 12 * 11 / 2);
    for r in rows {
        let cols: Vec<&str> = r.split(',').collect();
        let lp = parse_rational(cols[4]).unwrap();
        let formula = parse_rational(cols[5]).unwrap();
        assert!(lp <= formula, "{r}");
    }

    let a = write(&dir, "a.json", r#"{"weights":{"a":"1"}}"#);
    let b = write(&dir, "b.json", r#"{"weights":{"b":"1"}}"#);
    let out = lipfree(&["dist", "--space", s(&space), "--a", s(&a), "--b", s(&b)]);
    assert_eq!(stdout_json(&out)["distance"], "2");
}
