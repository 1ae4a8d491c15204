//! Black-box checks of the `stokes` binary: exit codes, report files, and
//! byte-level determinism of the sweep outputs.

use std::path::Path;
use std::process::{Command, Output};

fn stokes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stokes"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Small sweep settings shared by the determinism test: three moduli, two
/// angles, all three domains, on grids small enough to finish in well under a
/// second.
const SWEEP_ARGS: &[&str] = &[
    "sweep",
    "--set", "n = 16",
    "--set", "n_vertical = 17",
    "--set", "height = 4",
    "--set", "n_lambda = 3",
    "--set", "lambda_abs_min = 0.5",
    "--set", "lambda_abs_max = 2",
    "--set", "qs = 2",
    "--set", "fracs = 0, 0.5",
    "--set", "domains = whole, half, graph",
];

#[test]
fn sweep_writes_reports_and_is_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let out = stokes(&[SWEEP_ARGS, &["--out", dir.to_str().unwrap()]].concat());
        assert!(
            out.status.success(),
            "sweep failed:\n{}\n{}",
            stdout(&out),
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(dir.join("sweep.json").exists());
        assert!(dir.join("sweep.csv").exists());
    }
    let read = |dir: &Path, name: &str| std::fs::read(dir.join(name)).unwrap();
    assert_eq!(
        read(dir_a.path(), "sweep.json"),
        read(dir_b.path(), "sweep.json"),
        "JSON reports differ between identical runs"
    );
    assert_eq!(read(dir_a.path(), "sweep.csv"), read(dir_b.path(), "sweep.csv"));

    let json = String::from_utf8(read(dir_a.path(), "sweep.json")).unwrap();
    assert!(json.contains("\"schema\": 1"));
    let csv = String::from_utf8(read(dir_a.path(), "sweep.csv")).unwrap();
    // 3 moduli x 2 fracs x 1 q x 3 domains plus the header line.
    assert_eq!(csv.lines().count(), 19);
}

#[test]
fn thread_count_does_not_change_the_report() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let out = stokes(&[SWEEP_ARGS, &["--out", dir_a.path().to_str().unwrap(), "--threads", "1"]].concat());
    assert!(out.status.success());
    let out = stokes(&[SWEEP_ARGS, &["--out", dir_b.path().to_str().unwrap(), "--threads", "4"]].concat());
    assert!(out.status.success());
    assert_eq!(
        std::fs::read(dir_a.path().join("sweep.json")).unwrap(),
        std::fs::read(dir_b.path().join("sweep.json")).unwrap(),
        "report depends on the worker count"
    );
}

#[test]
fn solve_passes_on_each_domain_and_dumps_fields() {
    for domain in ["whole", "half", "graph"] {
        let out = stokes(&[
            "solve", "--domain", domain, "--n", "16", "--n-vertical", "17", "--height", "4",
            "--lambda-abs", "1.5", "--lambda-frac", "0.5", "--seed", "3",
        ]);
        assert!(out.status.success(), "{domain} solve failed:\n{}", stdout(&out));
        assert!(stdout(&out).contains("PASS"));
    }

    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fields");
    let out = stokes(&[
        "solve", "--domain", "whole", "--n", "16", "--out", prefix.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
    for name in ["u.json", "u.bin", "p.json", "p.bin"] {
        assert!(prefix.join(name).exists(), "missing dump file {name}");
    }
}

#[test]
fn duality_and_semigroup_subcommands_pass() {
    let out = stokes(&["duality", "--n", "16", "--seeds", "2", "--lambda-frac", "0.7"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("duality pairing: PASS"));

    let out = stokes(&["semigroup", "--n", "16", "--t", "0.5"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let text = stdout(&out);
    for line in ["single-mode decay: PASS", "semigroup property: PASS", "resolvent identity: PASS"] {
        assert!(text.contains(line), "missing {line:?} in:\n{text}");
    }
}

#[test]
fn probe_subcommands_run() {
    let out = stokes(&["probe-kernel", "--dim", "2", "--lambda-frac", "0.9"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("kernel decay probe: PASS"));

    let out = stokes(&[
        "probe-contraction", "--n", "16", "--n-vertical", "17", "--height", "4",
        "--probes", "1", "--steps", "2",
    ]);
    assert!(out.status.success(), "{}", stdout(&out));
}

#[test]
fn bad_input_fails_with_a_diagnostic() {
    let out = stokes(&["solve", "--domain", "moon", "--n", "16"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown domain"));

    let out = stokes(&["sweep", "--set", "bogus = 1", "--out", "/tmp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}
