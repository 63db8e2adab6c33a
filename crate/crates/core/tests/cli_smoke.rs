//! Drives the built binary the way a user would.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn streamprep(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamprep"))
        .current_dir(dir)
        .env_remove("STREAMPREP_WORKERS")
        .args(args)
        .output()
        .expect("binary runs")
}

fn generate(dir: &Path) {
    let out = streamprep(
        dir,
        &[
            "generate",
            "--lexicon-dir",
            "lex",
            "--corpus-dir",
            "corpus",
            "--tweets-per-class",
            "200",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn manifest_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{}=", key)))
        .unwrap_or_else(|| panic!("no {} in manifest", key))
        .to_string()
}

#[test]
fn run_with_config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    fs::write(
        dir.path().join("run.conf"),
        "lexicon-dir=lex\ncorpus-dir=corpus\nthreshold=5\nworkers=3\nout=out\n",
    )
    .unwrap();
    let out = streamprep(dir.path(), &["run", "--config", "run.conf", "--seed", "4", "--arff"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.txt")).unwrap();
    assert_eq!(manifest_value(&manifest, "config.workers"), "3");
    assert_eq!(manifest_value(&manifest, "config.seed"), "4");
    assert_eq!(manifest_value(&manifest, "stage.read.input"), "1000");
    assert!(dir.path().join("out/dataset.arff").is_file());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), manifest);
}

#[test]
fn env_workers_apply_without_flag() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_streamprep"))
        .current_dir(dir.path())
        .env("STREAMPREP_WORKERS", "5")
        .args([
            "run",
            "--lexicon-dir",
            "lex",
            "--corpus-dir",
            "corpus",
            "--threshold",
            "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(manifest_value(&stdout, "config.workers"), "5");
}

#[test]
fn step_commands_match_run() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let common = ["--lexicon-dir", "lex", "--corpus-dir", "corpus", "--threshold", "5"];
    let with_out = |cmd: &str, out: &str| {
        let mut args = vec![cmd];
        args.extend_from_slice(&common);
        args.extend_from_slice(&["--out", out]);
        let o = streamprep(dir.path(), &args);
        assert!(o.status.success(), "{}: {}", cmd, String::from_utf8_lossy(&o.stderr));
        String::from_utf8(o.stdout).unwrap()
    };
    with_out("run", "all");
    for cmd in ["build-index", "preprocess", "dedup", "train"] {
        with_out(cmd, "steps");
    }
    let report = with_out("evaluate", "steps");
    assert!(report.contains("== random_forest =="));
    for f in [
        "schema.tsv",
        "dataset.csv",
        "forest.model",
        "nb.model",
        "evaluation.txt",
    ] {
        assert_eq!(
            fs::read(dir.path().join("all").join(f)).unwrap(),
            fs::read(dir.path().join("steps").join(f)).unwrap(),
            "{}",
            f
        );
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(streamprep(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        streamprep(dir.path(), &["run", "--workers", "x"]).status.code(),
        Some(1)
    );
    assert_eq!(streamprep(dir.path(), &["--version"]).status.code(), Some(0));
    let missing = streamprep(dir.path(), &["run", "--lexicon-dir", "nope"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope"));
    fs::create_dir(dir.path().join("lex")).unwrap();
    fs::create_dir(dir.path().join("corpus")).unwrap();
    fs::write(dir.path().join("lex/noun.bad"), "{ unterminated, ").unwrap();
    fs::write(dir.path().join("corpus/art.txt"), "hello\n").unwrap();
    let bad = streamprep(dir.path(), &["run", "--lexicon-dir", "lex", "--corpus-dir", "corpus"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("build_database"));
}

#[test]
fn bench_prints_reference_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = streamprep(
        dir.path(),
        &["bench", "--sizes", "2000", "--worker-counts", "1,2", "--classes", "4"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("38.48% less time"), "{}", text);
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("2000")).count(), 2);
}
