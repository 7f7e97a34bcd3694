// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

fn cmcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmcs")).current_dir(dir).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn small_edge_list(dir: &Path) {
    let mut text = String::from("# ring with chords\n");
    for i in 0..40 {
        text += &format!("{} {}\n", i, (i + 1) % 40);
        text += &format!("{} {}\n", i, (i + 7) % 40);
    }
    std::fs::write(dir.join("g.txt"), text).unwrap();
}

#[test]
fn help_and_version_succeed() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["recruit", "--help"], &["bench", "--help"], &["cluster", "--help"]] {
        assert_eq!(code(&cmcs(dir.path(), args)), 0, "{args:?}");
    }
}

#[test]
fn recruit_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmcs(dir.path(), &["recruit", "--method", "exact", "--strategy", "platform", "--skills", "3", "--pool", "10", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "skill,worker_id,perceived_skill,cost,uncertainty");
    assert_eq!(lines.len(), 6);
    assert!(lines[5].starts_with("platform,,"));
    assert!(lines[5].ends_with(','));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["recruit", "--bogus"][..],
        &["recruit", "--method", "ga", "--strategy", "leader"],
        &["recruit", "--eta", "0.5,0.5"],
        &["recruit", "--eta", "0.1,0.1,0.1,0.1"],
        &["frobnicate"],
    ] {
        let out = cmcs(dir.path(), args);
        assert_eq!(code(&out), 1, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    std::fs::write(dir.path().join("bad.spec"), "kind = quality_vs_oracle\ncolour = red\n").unwrap();
    assert_eq!(code(&cmcs(dir.path(), &["bench", "--spec", "bad.spec"])), 1);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    small_edge_list(dir.path());
    std::fs::write(dir.path().join("broken.txt"), "1 2\n3 x\n").unwrap();
    for args in [
        &["recruit", "--edges", "missing.txt"][..],
        &["ingest", "--edges", "missing.txt"],
        &["ingest", "--edges", "broken.txt"],
        &["ingest", "--edges", "g.txt", "--ego-facebook"],
        &["bench", "--spec", "missing.spec"],
        &["cluster", "--embedding", "missing.csv", "--k", "3"],
        &["embed", "--edges", "g.txt", "--workers", "missing.csv"],
    ] {
        let out = cmcs(dir.path(), args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn infeasible_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = cmcs(dir.path(), &["recruit", "--skills", "5", "--pool", "3"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("infeasible"));
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    small_edge_list(dir.path());
    let out = cmcs(dir.path(), &["ingest", "--edges", "g.txt"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..2], &["40", "80"]);
    assert_eq!(row[3].len(), 64);
}

#[test]
fn pipeline_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_edge_list(d);
    let steps: [&[&str]; 5] = [
        &["synth", "--edges", "g.txt", "--out", "w.csv"],
        &["embed", "--edges", "g.txt", "--workers", "w.csv", "--method", "edge-attribute", "--epochs", "1", "--out", "e.csv"],
        &["cluster", "--embedding", "e.csv", "--k", "4", "--reduce", "pca", "--edges", "g.txt", "--out", "c.csv"],
        &["recruit", "--edges", "g.txt", "--workers", "w.csv", "--clusters", "c.csv", "--method", "ga", "--skills", "3",
          "--pool", "40", "--population", "30", "--iterations", "10", "--timing"],
        &["recruit", "--edges", "g.txt", "--method", "pso", "--skills", "2", "--pool", "12", "--population", "20", "--iterations", "5"],
    ];
    for args in steps {
        let out = cmcs(d, args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let cluster = cmcs(d, &["cluster", "--embedding", "e.csv", "--k", "4", "--reduce", "pca", "--edges", "g.txt"]);
    assert!(String::from_utf8_lossy(&cluster.stderr).starts_with("modularity "));
    let timed = cmcs(d, steps[3]);
    let last = String::from_utf8(timed.stdout).unwrap().lines().last().unwrap().to_string();
    assert!(last.rsplit(',').next().unwrap().parse::<u128>().is_ok(), "{last}");
}

#[test]
fn bench_csv_has_header_and_config_hash() {
    let dir = tempfile::tempdir().unwrap();
    small_edge_list(dir.path());
    std::fs::write(
        dir.path().join("t.spec"),
        "kind = strategy_tradeoff\nrealizations = 3\nworkers = 8\nskills = 2\ndensities = 0.5, 1\noutput = t.csv\n",
    )
    .unwrap();
    let out = cmcs(dir.path(), &["bench", "--spec", "t.spec", "--edges", "g.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("workers,density,strategy,"));
    assert_eq!(lines.len(), 1 + 4 + 1);
    let hash = lines.last().unwrap().strip_prefix("# config_hash=").unwrap();
    assert_eq!(hash.len(), 64);
    assert!(hash.chars().all(|c| c.is_ascii_hexdigit()));
}

#[test]
fn recruit_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["recruit", "--method", "exact", "--strategy", "leader", "--skills", "3", "--pool", "9", "--seed", "4"];
    let a = cmcs(dir.path(), &args);
    let b = cmcs(dir.path(), &args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let other = cmcs(dir.path(), &["recruit", "--method", "exact", "--strategy", "leader", "--skills", "3", "--pool", "9", "--seed", "5"]);
    assert_ne!(a.stdout, other.stdout);
}
