//! End-to-end runs of the installed binary: determinism, manifest integrity,
//! config precedence, and dry-run behavior.

use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};
use tempfile::tempdir;

fn hopnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hopnet"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("spawning the binary");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("stdout is text")
}

fn verify_manifest(dir: &Path, name: &str) {
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap();
    let outputs = manifest["outputs"].as_object().unwrap();
    assert!(!outputs.is_empty(), "manifest lists no outputs");
    for (file, recorded) in outputs {
        let bytes = fs::read(dir.join(file)).unwrap();
        let digest: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(
            recorded.as_str().unwrap(),
            digest,
            "digest mismatch for {file}"
        );
    }
}

#[test]
fn fixed_seed_reruns_are_byte_identical_and_manifests_verify() {
    let (a, b) = (tempdir().unwrap(), tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        run_ok(hopnet().args([
            "dream",
            "--n",
            "32",
            "--p",
            "4",
            "--max-cycles",
            "40",
            "--realizations",
            "3",
            "--seed",
            "7",
            "--out-dir",
            dir.to_str().unwrap(),
        ]));
        verify_manifest(dir, "dream-manifest.json");
    }
    for file in ["dream-trace-s0.csv", "dream-strengths.json"] {
        let left = fs::read(a.path().join(file)).unwrap();
        let right = fs::read(b.path().join(file)).unwrap();
        assert_eq!(left, right, "{file} differs between identical-seed runs");
    }
}

#[test]
fn dry_run_prints_parameters_without_writing() {
    let dir = tempdir().unwrap();
    let target = dir.path().join("results");
    let stdout = run_ok(hopnet().args([
        "capacity",
        "--t-grid",
        "0,1",
        "--dry-run",
        "--out-dir",
        target.to_str().unwrap(),
    ]));
    assert!(stdout.contains("t-grid = 0,1"));
    assert!(stdout.contains("seed = 42"));
    assert!(!target.exists(), "dry-run must not create output files");
}

#[test]
fn config_file_fills_defaults_and_flags_win() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(&config, "# sweep setup\nn = 32\np = 4\nseed = 9\n").unwrap();
    let stdout = run_ok(hopnet().args([
        "dream",
        "--config",
        config.to_str().unwrap(),
        "--p",
        "6",
        "--dry-run",
    ]));
    assert!(stdout.contains("n = 32"), "config value ignored:\n{stdout}");
    assert!(stdout.contains("p = 6"), "flag must beat config:\n{stdout}");
    assert!(stdout.contains("seed = 9"), "config seed ignored:\n{stdout}");
}

#[test]
fn uncorrupted_starts_always_return() {
    let dir = tempdir().unwrap();
    run_ok(hopnet().args([
        "basins",
        "--n",
        "120",
        "--p",
        "6",
        "--t-list",
        "0",
        "--flip-grid",
        "0",
        "--realizations",
        "2",
        "--evolutions",
        "3",
        "--seed",
        "5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    let csv = fs::read_to_string(dir.path().join("basins.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("p_flip,t,freq,stderr"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "0");
    assert_eq!(row[2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn capacity_single_point_emits_one_row() {
    let dir = tempdir().unwrap();
    run_ok(hopnet().args([
        "capacity",
        "--t-grid",
        "0",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    let csv = fs::read_to_string(dir.path().join("capacity.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "expected header plus one row:\n{csv}");
    let alpha_c: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((alpha_c - 0.138).abs() < 0.005);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("capacity-fit.json")).unwrap())
            .unwrap();
    assert!(fit["fit_a"].is_null(), "one point cannot pin the fit");
    verify_manifest(dir.path(), "capacity-manifest.json");
}
