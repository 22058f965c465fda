use std::path::Path;
use std::process::{Command, Output};

fn xsampler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xsampler"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn successful_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "seed = 2\ntrials = 2\n[quant]\nbits = [6]\n");
    let out = dir.path().join("out");
    let o = xsampler(&["quant", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for file in ["quant.csv", "quant.svg", "report.json"] {
        assert!(out.join(file).is_file(), "{file}");
    }
    let csv = std::fs::read_to_string(out.join("quant.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().last().unwrap().starts_with("none,"));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"experiment\": \"quant\""));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = xsampler(&["table2", "--config", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    let bad_syntax = write(dir.path(), "a.toml", "trials = [");
    assert_eq!(
        xsampler(&["table2", "--config", &bad_syntax, "--out", out])
            .status
            .code(),
        Some(2)
    );
    let bad_value = write(dir.path(), "b.toml", "[model]\nwidth = -1.0\n");
    assert_eq!(
        xsampler(&["demo", "--config", &bad_value, "--out", out]).status.code(),
        Some(2)
    );
    let unknown = write(dir.path(), "c.toml", "[noise]\nframe = \"gauss\"\n");
    assert_eq!(
        xsampler(&["noise", "--config", &unknown, "--out", out]).status.code(),
        Some(2)
    );
    // Usage errors come from the argument parser, which also exits with 2.
    assert_eq!(
        xsampler(&["table3", "--config", &unknown, "--out", out]).status.code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    // A grid this coarse cannot resolve the modulations of the lattice.
    let cfg = write(dir.path(), "coarse.toml", "trials = 1\n[grid]\ndt = 0.02\n");
    let out = dir.path().join("out");
    let o = xsampler(&["demo", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("demo, seed"));
}

#[test]
fn seed_flag_changes_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.toml", "seed = 3\n");
    let run = |seed: &str| {
        let out = dir.path().join(seed);
        let o = xsampler(&["demo", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        std::fs::read(out.join("demo.csv")).unwrap()
    };
    assert_ne!(run("3"), run("4"));
}
