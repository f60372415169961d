//! End-to-end binary tests: parsing, exit codes, determinism of trace and
//! SVG output.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> PathBuf {
    let mut p = PathBuf::from(env!("CARGO_BIN_EXE_amoebot"));
    assert!(p.exists(), "{}", p.display());
    p.pop();
    p.push("amoebot");
    p
}

fn write_tmp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("amoebot-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

#[test]
fn stripe_run_agrees_and_exits_zero() {
    let input = write_tmp("line3.txt", "0 0\n1 0\n2 0\n");
    let out = Command::new(bin())
        .args(["run", "stripe", "--input"])
        .arg(&input)
        .args(["--dir", "ENE", "--ref", "0,0", "--check"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("check=agree"), "{stdout}");
}

#[test]
fn duplicate_node_rejected_with_exit_two() {
    let input = write_tmp("dup.txt", "0 0\n0 0\n");
    let out = Command::new(bin())
        .args(["run", "stripe", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("occupied twice"), "{err}");
}

#[test]
fn disconnected_structure_rejected() {
    let input = write_tmp("disc.txt", "0 0\n3 3\n");
    let out = Command::new(bin())
        .args(["run", "stripe", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_reports_line_number() {
    let input = write_tmp("bad.txt", "0 0\nnonsense here\n");
    let out = Command::new(bin())
        .args(["run", "stripe", "--input"])
        .arg(&input)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn comments_and_ring_parse() {
    let input = write_tmp("ring.txt", "# ring\n0 1\n1 0\n1 -1\n0 -1\n-1 0\n-1 1\n");
    let out = Command::new(bin())
        .args(["run", "maxima", "--input"])
        .arg(&input)
        .args(["--dir", "N", "--pins", "4", "--check"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("maxima=(0,1)"), "{stdout}");
}

#[test]
fn trace_and_svg_are_deterministic() {
    let input = write_tmp("tri.txt", "0 0\n1 0\n0 1\n");
    let run = |tag: &str| {
        let trace = std::env::temp_dir()
            .join("amoebot-cli-tests")
            .join(format!("t-{tag}.trace"));
        let svg = std::env::temp_dir()
            .join("amoebot-cli-tests")
            .join(format!("t-{tag}.svg"));
        let out = Command::new(bin())
            .args(["run", "skeleton", "--input"])
            .arg(&input)
            .args(["--dir", "N", "--sign", "+", "--seed", "9"])
            .arg("--trace")
            .arg(&trace)
            .arg("--svg")
            .arg(&svg)
            .output()
            .unwrap();
        assert!(out.status.success());
        (
            std::fs::read(&trace).unwrap(),
            std::fs::read(&svg).unwrap(),
            out.stdout,
        )
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a.0, b.0, "trace bytes identical");
    assert_eq!(a.1, b.1, "svg bytes identical");
    assert_eq!(a.2, b.2, "report identical");
    assert!(!a.0.is_empty());
    assert!(String::from_utf8_lossy(&a.1).starts_with("<svg"));
}

#[test]
fn sweep_emits_rows() {
    let out = Command::new(bin())
        .args(["sweep", "--sizes", "8,12", "--trials", "1", "stripe"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = stdout.lines().filter(|l| l.starts_with("stripe")).collect();
    assert_eq!(rows.len(), 2, "{stdout}");
}
