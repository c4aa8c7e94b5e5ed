use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic/run.toml")
}

fn discourse(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_discourse"));
    cmd.arg("-c")
        .arg(fixture_config())
        .args(args)
        .env_remove("DISCOURSE_OUT_DIR");
    cmd
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn discourse")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn reversed_window_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(
        discourse(&["--begin", "2021-04-01", "--end", "2021-01-01", "--out-dir"])
            .arg(&out)
            .arg("run-all"),
    );
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn bad_flags_are_validation_errors() {
    assert_eq!(code(&run(&mut discourse(&["--begin", "yesterday", "expand"]))), 1);
    assert_eq!(code(&run(&mut discourse(&["no-such-stage"]))), 1);
    assert_eq!(code(&run(&mut discourse(&["--alpha", "1.5", "expand"]))), 1);
}

#[test]
fn missing_cache_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(discourse(&["--out-dir"]).arg(dir.path()).arg("filter"));
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let missing = run(Command::new(env!("CARGO_BIN_EXE_discourse"))
        .args(["-c", "/nonexistent/run.toml", "expand"])
        .env_remove("DISCOURSE_OUT_DIR"));
    assert_eq!(code(&missing), 3);
}

#[test]
fn corrupt_cache_is_a_stage_failure() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(discourse(&["--out-dir"]).arg(dir.path()).arg("run-all"))),
        0
    );
    std::fs::write(dir.path().join("analytics.json"), "{ not json").unwrap();
    let o = run(discourse(&["--out-dir"]).arg(dir.path()).arg("report"));
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let from_env = dir.path().join("env");
    let o = run(discourse(&["expand"]).env("DISCOURSE_OUT_DIR", &from_env));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(from_env.join("seeds.tsv").is_file());

    let from_flag = dir.path().join("flag");
    let o = run(discourse(&["--out-dir"])
        .arg(&from_flag)
        .arg("expand")
        .env("DISCOURSE_OUT_DIR", dir.path().join("ignored")));
    assert_eq!(code(&o), 0);
    assert!(from_flag.join("seeds.tsv").is_file());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn subcommands_chain_and_log_key_values() {
    let dir = tempfile::tempdir().unwrap();
    for stage in ["expand", "filter", "sentiment", "topics", "analyze", "report"] {
        let o = run(discourse(&["--out-dir"])
            .arg(dir.path())
            .arg(stage)
            .env("RUST_LOG", "info"));
        assert_eq!(code(&o), 0, "{stage}: {}", String::from_utf8_lossy(&o.stderr));
        let log = String::from_utf8(o.stderr).unwrap();
        let done = log
            .lines()
            .find(|l| l.contains(&format!("[{stage}] INFO done ")))
            .unwrap_or_else(|| panic!("no done line for {stage} in\n{log}"));
        let (ts, rest) = done.split_once(' ').unwrap();
        assert!(chrono::DateTime::parse_from_rfc3339(ts).is_ok(), "timestamp {ts}");
        assert!(
            rest.rsplit(' ').next().unwrap().starts_with("elapsed_ms="),
            "{done}"
        );
    }
    let o = run(discourse(&["--out-dir"])
        .arg(dir.path())
        .args(["emit", "--section", "seeds"]));
    assert_eq!(code(&o), 0);
    let printed = String::from_utf8(o.stdout).unwrap();
    assert!(printed.trim().ends_with("seeds.csv"));
    let o = run(discourse(&["--out-dir"])
        .arg(dir.path())
        .args(["emit", "--section", "nope"]));
    assert_eq!(code(&o), 1);
}

#[test]
fn generate_fixture_matches_committed_copy() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(Command::new(env!("CARGO_BIN_EXE_discourse"))
        .arg("generate-fixture")
        .arg(dir.path())
        .args(["--data-dir", "../../data"]));
    assert_eq!(code(&o), 0);
    let committed = fixture_config();
    let committed = committed.parent().unwrap();
    for name in ["corpus.jsonl", "docs.vec", "words.vec", "run.toml"] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(committed.join(name)).unwrap(),
            "{name}"
        );
    }
}
