//! Acceptance criterion 10: thread count must not leak into any output byte.

use std::path::Path;
use std::process::{Command, Output};

fn run_verify(dir: &Path, threads: &str) -> (Output, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_flatstats"))
        .current_dir(dir)
        .args([
            "--threads", threads, "verify", "--n", "4", "--d", "2", "--report",
            "report.json",
        ])
        .output()
        .expect("binary runs");
    let report = std::fs::read(dir.join("report.json")).expect("report written");
    (out, report)
}

#[test]
fn acceptance_criterion_10() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir8 = tempfile::tempdir().unwrap();
    let (out1, report1) = run_verify(dir1.path(), "1");
    let (out8, report8) = run_verify(dir8.path(), "8");

    let mut failures = Vec::new();
    if !out1.status.success() || !out8.status.success() {
        failures.push(format!(
            "verify exited nonzero: {:?} vs {:?}",
            out1.status, out8.status
        ));
    }
    if out1.stdout != out8.stdout {
        failures.push("stdout differs between --threads 1 and --threads 8".into());
    }
    if report1 != report8 {
        failures.push("report file differs between --threads 1 and --threads 8".into());
    }
    if report1 != out1.stdout {
        failures.push("report file does not mirror stdout".into());
    }

    if failures.is_empty() {
        println!(
            "criterion 10: PASS - verify --n 4 --d 2 is byte-identical across --threads 1 and --threads 8 ({} bytes)",
            report1.len()
        );
    } else {
        for f in &failures {
            println!("criterion 10: FAIL - {f}");
        }
    }
    assert!(failures.is_empty());
}
