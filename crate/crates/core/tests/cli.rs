use std::path::Path;
use std::process::{Command, Output};

use wpbayes::io::{read_signal, write_signal, SignalFormat};
use wpbayes::Signal2D;

fn wpbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpbayes")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = wpbayes(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ramp(d_max: u32) -> Signal2D {
    Signal2D::from_fn(d_max, |r, c| (r as f64 * 1.5 - c as f64 * 0.25).sin() * 40.0).unwrap()
}

#[test]
fn denoise_without_noise_reproduces_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    let output = dir.path().join("d.csv");
    let y = ramp(3);
    write_signal(&input, &y, SignalFormat::Csv).unwrap();
    ok(&["denoise", "--input", s(&input), "--output", s(&output), "--noise-sigma2", "0", "--mu", "synthetic"]);
    assert_eq!(read_signal(&output, SignalFormat::Csv).unwrap(), y);
}

#[test]
fn denoise_pgm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.pgm");
    let output = dir.path().join("d.pgm");
    let y = Signal2D::from_fn(4, |r, c| ((r * 16 + c) % 256) as f64).unwrap();
    write_signal(&input, &y, SignalFormat::Pgm).unwrap();
    ok(&["denoise", "--input", s(&input), "--output", s(&output), "--noise-sigma2", "0"]);
    assert_eq!(read_signal(&output, SignalFormat::Pgm).unwrap(), y);
}

#[test]
fn posterior_over_small_trees_sums_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("y.csv");
    let out = dir.path().join("post.csv");
    write_signal(&input, &ramp(2), SignalFormat::Csv).unwrap();
    ok(&["posterior", "--input", s(&input), "--out", s(&out), "--mu", "synthetic"]);
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let probs: Vec<f64> = reader.records().map(|r| r.unwrap()[2].parse().unwrap()).collect();
    assert_eq!(probs.len(), 17);
    assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
}

#[test]
fn transform_then_inverse_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    let coeffs = dir.path().join("c.csv");
    let back = dir.path().join("b.csv");
    let x = ramp(4);
    write_signal(&input, &x, SignalFormat::Csv).unwrap();
    for tree in [None, Some("0"), Some("10000"), Some("1100000010000")] {
        let mut args = vec!["transform", "--input", s(&input), "--output", s(&coeffs)];
        let mut inv = vec!["transform", "--inverse", "--input", s(&coeffs), "--output", s(&back)];
        if let Some(t) = tree {
            args.extend(["--tree", t]);
            inv.extend(["--tree", t]);
        }
        ok(&args);
        ok(&inv);
        let y = read_signal(&back, SignalFormat::Csv).unwrap();
        assert!(y.max_abs_diff(&x) <= 1e-10, "tree {tree:?}");
    }
}

#[test]
fn sample_is_deterministic_under_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let clean = dir.path().join(format!("x{tag}.csv"));
        let noisy = dir.path().join(format!("y{tag}.csv"));
        let out = ok(&["sample", "--dmax", "3", "--seed", "9", "--clean", s(&clean), "--noisy", s(&noisy), "--g", "0.4"]);
        (out.stdout, std::fs::read(clean).unwrap(), std::fs::read(noisy).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn experiments_are_deterministic_under_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(tag);
        ok(&["experiment2", "--seed", "3", "--out", s(&out), "--dmax", "3", "--g", "0.2,0.7", "--trees", "3", "--signals", "2", "--noise-draws", "2"]);
        ok(&["experiment1", "--seed", "3", "--out", s(&out), "--signals", "3", "--noise-draws", "3"]);
        ["experiment2_risk.csv", "experiment2_depth.csv", "experiment1_posterior.csv"].map(|f| std::fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(wpbayes(&["denoise"]).status.code(), Some(2));
    assert_eq!(wpbayes(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(wpbayes(&["experiment2", "--out", "/tmp/x"]).status.code(), Some(2), "missing seed");
    assert_eq!(wpbayes(&["experiment2", "--seed", "1", "--g", "1.5"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,x\n").unwrap();
    let out = wpbayes(&["denoise", "--input", s(&bad), "--output", s(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.csv:2:2"), "{msg}");
}
