use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn pinch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = pinch(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Glued slot pairs, unordered, ignoring each edge's reference side.
fn gluing(tri: &str) -> Vec<[String; 2]> {
    let mut pairs: Vec<[String; 2]> = tri
        .lines()
        .filter_map(|l| l.strip_prefix("glue "))
        .map(|l| {
            let (a, b) = l.split_once(' ').unwrap();
            let mut p = [a.to_string(), b.to_string()];
            p.sort();
            p
        })
        .collect();
    pairs.sort();
    pairs
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fixtures_list() {
    let out = stdout(&["fixtures", "--list"]);
    let names: Vec<&str> = out
        .lines()
        .filter(|l| !l.starts_with("family"))
        .map(|l| l.split('\t').next().unwrap())
        .collect();
    assert_eq!(names, ["torus1", "sphere3", "sphere4", "torus2"]);
    assert!(out.contains("torus1\tedges 3\tpunctures 1"));
}

#[test]
fn pinch_torus_gamma() {
    let out = stdout(&["pinch", "--fixture", "torus1", "--curve", "gamma"]);
    let (tri, table) = out.split_once("\n\n").unwrap();
    assert!(tri.starts_with("triangles 2"));
    let rows: Vec<Vec<&str>> = table.lines().map(|l| l.split('\t').collect()).collect();
    let y = rows[0].iter().position(|&c| c == "y").unwrap();
    for row in &rows[1..] {
        let ones: Vec<usize> = (1..row.len()).filter(|&i| row[i] == "1").collect();
        if row[0] == "y" {
            assert_eq!(ones, [y]);
        } else {
            assert_eq!(ones.len(), 2);
            assert!(!ones.contains(&y));
        }
    }
}

#[test]
fn theta_and_trace_values() {
    let theta = stdout(&[
        "theta",
        "--fixture",
        "torus1",
        "--curve",
        "gamma",
        "--point",
        "x=3,y=5,z=7",
    ]);
    let mut vals: Vec<&str> = theta
        .lines()
        .map(|l| l.split_once('=').unwrap().1)
        .collect();
    vals.sort();
    assert_eq!(vals, ["21", "21", "5"]);
    let tr = stdout(&[
        "trace",
        "--fixture",
        "torus1",
        "--curve",
        "gamma",
        "--point",
        "x=1,y=1,z=1",
    ]);
    assert!(tr.starts_with("trace 3\n"));
    let len = stdout(&[
        "length",
        "--fixture",
        "torus1",
        "--curve",
        "gamma",
        "--point",
        "x=1,y=1,z=1",
    ]);
    let v: f64 = len.trim().strip_prefix("length ").unwrap().parse().unwrap();
    assert!((v - 2.0 * 1.5f64.acosh()).abs() < 1e-12);
}

#[test]
fn files_round_trip_through_commands() {
    let dir = TempDir::new().unwrap();
    let tri = write(
        &dir,
        "torus.tri",
        stdout(&["fixtures", "--show", "torus1"])
            .split("\ncurve")
            .next()
            .unwrap(),
    );
    let validate = stdout(&["validate", "--tri", &tri]);
    assert!(validate.contains("punctures 1\n") && validate.contains("genus 1\n"));
    let path = write(&dir, "twice.path", "flip z\nflip z\n");
    let back = stdout(&["flip-path", "--tri", &tri, "--path", &path]);
    assert_eq!(
        gluing(&back),
        gluing(&std::fs::read_to_string(&tri).unwrap())
    );
    let point = write(&dir, "p.shv", "x=2\ny=1/3\nz=3/2\n");
    let moved = stdout(&[
        "change-coords",
        "--tri",
        &tri,
        "--path",
        &path,
        "--point",
        &point,
    ]);
    let mut sorted: Vec<&str> = moved.lines().collect();
    sorted.sort();
    assert_eq!(sorted, ["x=2", "y=1/3", "z=3/2"]);
    let curve = write(&dir, "g.crv", "curve g\nw x=1\nw y=0\nw z=1\n");
    let comps = stdout(&["curve-validate", "--tri", &tri, "--curve", &curve]);
    assert!(comps.starts_with("components 1\n"));
    let turns = stdout(&["curve-turns", "--tri", &tri, "--curve", &curve]);
    assert!(turns.contains("LR") || turns.contains("RL"));
}

#[test]
fn twist_actions() {
    let act = stdout(&[
        "act",
        "--fixture",
        "torus1",
        "--mcg",
        "twist",
        "--point",
        "x=1,y=2,z=3",
    ]);
    assert!(act.contains("x=1/3"));
    let dir = TempDir::new().unwrap();
    let out = stdout(&["pinch", "--fixture", "torus1", "--curve", "gamma"]);
    let names: Vec<&str> = out
        .lines()
        .filter_map(|l| l.strip_prefix("edge "))
        .map(|l| l.split(' ').next().unwrap())
        .collect();
    let y: String = names
        .iter()
        .zip([2, 3, 5])
        .map(|(n, v)| format!("{n}={v}\n"))
        .collect();
    let point = write(&dir, "y.shv", &y);
    let fixed = stdout(&[
        "act-pinched",
        "--fixture",
        "torus1",
        "--mcg",
        "twist",
        "--curve",
        "gamma",
        "--point",
        &point,
    ]);
    let mut a: Vec<&str> = fixed.lines().collect();
    let mut b: Vec<&str> = y.lines().collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn relations_check_is_deterministic() {
    let args = [
        "relations-check",
        "--fixture",
        "sphere4",
        "--count",
        "5",
        "--seed",
        "11",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    assert_eq!(first, "bigon\t5/5\nsquare\t5/5\npentagon\t5/5\n");
    let torus = stdout(&["relations-check", "--fixture", "torus1", "--count", "3"]);
    assert!(torus.contains("pentagon\tn/a"));
}

#[test]
fn degenerate_writes_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.csv");
    stdout(&[
        "degenerate",
        "--fixture",
        "torus2",
        "--family",
        "pinch-gamma",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header[..2], ["t", "ell_gamma_0"]);
    assert!(header.contains(&"ell_alpha_target_0"));
    let last: Vec<f64> = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(last[0], 1e-6);
    let col = |n: &str| last[header.iter().position(|h| *h == n).unwrap()];
    assert!((col("ell_alpha_0") - col("ell_alpha_target_0")).abs() < 1e-3);
}

#[test]
fn degenerate_from_family_file() {
    let dir = TempDir::new().unwrap();
    let fam = write(
        &dir,
        "f.fam",
        "gamma x=1 z=1\nedge z coeff 1 power 1\nedge x coeff 1 power -1\ntarget y=1\ntarget f0=1\ntarget f1=1\ngrid list 1,0.01,0.0001\n",
    );
    let csv = stdout(&["degenerate", "--fixture", "torus1", "--family", &fam]);
    assert_eq!(csv.lines().count(), 4);
    let bad = write(
        &dir,
        "bad.fam",
        "gamma x=1 z=1\nedge z coeff 1 power 1\ntarget y=1\ntarget f0=1\ntarget f1=1\n",
    );
    let out = pinch(&["degenerate", "--fixture", "torus1", "--family", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not converge"));
}

#[test]
fn exit_codes() {
    assert_eq!(pinch(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        pinch(&["validate", "--fixture", "nowhere"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pinch(&["validate", "--tri", "/definitely/missing.tri"])
            .status
            .code(),
        Some(2)
    );
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.tri", "triangles 2\nglue 0.0 1.0\nglue 0.1 zz\n");
    let out = pinch(&["validate", "--tri", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.tri") && err.contains("line 3"), "{err}");
    let parity = pinch(&["curve-validate", "--fixture", "torus1", "--curve", "x=1"]);
    assert_eq!(parity.status.code(), Some(1));
    assert!(Path::new(env!("CARGO_BIN_EXE_pinch")).exists());
}

#[test]
fn help_documents_formats() {
    let help = stdout(&["--help"]);
    for needle in [".tri", ".crv", ".shv", ".mcg", ".fam", "Exit status"] {
        assert!(help.contains(needle), "{needle}");
    }
}
