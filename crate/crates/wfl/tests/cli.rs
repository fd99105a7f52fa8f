//! End-to-end tests of the command-line interface: exit codes, file formats,
//! and the seed environment fallback.

use std::path::Path;
use std::process::{Command, Output};

use wfl::generators::gen_dft;
use wfl::io as fio;

fn wfl() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wfl"));
    cmd.env_remove("WFL_SEED");
    cmd
}

fn run(args: &[&str], dir: &Path) -> Output {
    wfl().args(args).current_dir(dir).output().expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn gen_writes_reloadable_frame_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--kind", "dft", "--dim", "2", "--count", "4", "-o", "f.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let reloaded = fio::read_frame(&dir.path().join("f.json")).unwrap();
    assert_eq!(reloaded, gen_dft(2, 4).unwrap());
}

#[test]
fn gen_rejects_bad_shapes_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--kind", "dft", "--dim", "0", "--count", "4", "-o", "f.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
    let out = run(&["gen", "--kind", "random", "--dim", "3", "--count", "2", "-o", "f.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn gen_mercedes_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--kind", "mercedes", "-o", "mb.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let f = fio::read_frame(&dir.path().join("mb.json")).unwrap();
    assert_eq!((f.dim(), f.len()), (2, 3));
}

#[test]
fn gen_accepts_spec_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("spec.json"),
        r#"{"kind": "woven_pair", "dim": 2, "count": 4, "seed": 3, "epsilon": 0.05}"#,
    )
    .unwrap();
    let out = run(&["gen", "--spec", "spec.json", "-o", "pair.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let (phi, psi, cert) = fio::read_pair(&dir.path().join("pair.json")).unwrap();
    assert_eq!(phi.len(), 4);
    assert_eq!(psi.len(), 4);
    assert!(cert.universal_lower > 0.0);
    assert_eq!(cert.checked, 16);
}

#[test]
fn inspect_reports_frame_summary() {
    let dir = tempfile::tempdir().unwrap();
    run(&["gen", "--kind", "dft", "--dim", "3", "--count", "7", "-o", "f.json"], dir.path());
    let out = run(&["inspect", "f.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["dim"], 3);
    assert_eq!(v["count"], 7);
    assert_eq!(v["frame"], true);
    assert_eq!(v["parseval"], true);

    let missing = run(&["inspect", "nope.json"], dir.path());
    assert_eq!(exit_code(&missing), 2);
}

fn write_scaled_onb(dir: &Path, name: &str, scale: f64) {
    let onb = wfl::generators::gen_onb(2).scaled(scale);
    fio::write_frame(&dir.join(name), &onb).unwrap();
}

#[test]
fn woven_check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write_scaled_onb(dir.path(), "a.json", 1.0);
    write_scaled_onb(dir.path(), "b.json", 2.0);
    let out = run(&["woven-check", "a.json", "b.json"], dir.path());
    assert_eq!(exit_code(&out), 0);
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["A"], 1.0);
    assert_eq!(cert["B"], 4.0);
    assert_eq!(cert["checked"], 4);

    // Swapped basis: not woven, witness sigma = {0}.
    std::fs::write(
        dir.path().join("swapped.json"),
        r#"{"dim": 2, "vectors": [[[0.0,0.0],[1.0,0.0]], [[1.0,0.0],[0.0,0.0]]]}"#,
    )
    .unwrap();
    let out = run(&["woven-check", "a.json", "swapped.json"], dir.path());
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("10"));

    // Too large for the exhaustive sweep.
    let big = wfl::generators::gen_dft(2, 20).unwrap();
    fio::write_frame(&dir.path().join("big.json"), &big).unwrap();
    let out = run(&["woven-check", "big.json", "big.json", "--max-n", "14"], dir.path());
    assert_eq!(exit_code(&out), 2);

    let out = run(&["woven-check", "a.json", "missing.json"], dir.path());
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verify_pass_fail_and_precondition_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(
        &["verify", "--kind", "dft", "--dim", "2", "--count", "4", "--trials", "5", "--seed", "1"],
        dir.path(),
    );
    assert_eq!(exit_code(&ok), 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("overall: PASS"));

    // Record failures exit 1 (corrupted dual negative control).
    let bad = run(
        &[
            "verify", "--kind", "dft", "--dim", "2", "--count", "4", "--trials", "5", "--seed",
            "1", "--debug-corrupt-dual",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("FAIL"));

    // Config precondition: empty lambda grid.
    let cfg = run(
        &[
            "verify", "--kind", "dft", "--dim", "2", "--count", "4", "--lambdas", "",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&cfg), 2);

    // Unwoven inputs exit 2 before any records run.
    write_scaled_onb(dir.path(), "a.json", 1.0);
    std::fs::write(
        dir.path().join("swapped.json"),
        r#"{"dim": 2, "vectors": [[[0.0,0.0],[1.0,0.0]], [[1.0,0.0],[0.0,0.0]]]}"#,
    )
    .unwrap();
    let unwoven = run(&["verify", "--phi", "a.json", "--psi", "swapped.json"], dir.path());
    assert_eq!(exit_code(&unwoven), 2);
}

#[test]
fn verify_accepts_pair_files() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "gen", "--kind", "woven-pair", "--dim", "2", "--count", "4", "--epsilon", "0.05",
            "--seed", "3", "-o", "pair.json",
        ],
        dir.path(),
    );
    let out = run(&["verify", "--pair", "pair.json", "--trials", "3"], dir.path());
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn sweep_lambda_emits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "sweep-lambda", "--kind", "mercedes", "--trials", "4", "--lambdas", "1",
            "-o", "sweep.csv",
        ],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "lambda,theorem,min_slack,max_residual,trials");
    // Single-lambda grid: exactly one row per evaluated theorem.
    let mut seen = std::collections::BTreeSet::new();
    for line in lines {
        let theorem = line.split(',').nth(1).unwrap().to_string();
        assert!(seen.insert(theorem), "duplicate theorem row in {line}");
    }
    assert!(seen.contains("general_weaving"));
    assert!(seen.contains("lemma_quadratic_bound"));

    // Without -o the CSV goes to stdout; negative lambdas parse.
    let out = run(
        &["sweep-lambda", "--kind", "onb", "--dim", "2", "--trials", "2", "--lambdas", "-1,2"],
        dir.path(),
    );
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("lambda,theorem,"));
    assert!(text.contains("\n-1,general_weaving,"));
}

#[test]
fn seed_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["s1.json", "s2.json"] {
        let out = wfl()
            .args(["gen", "--kind", "random", "--dim", "2", "--count", "3", "-o", name])
            .env("WFL_SEED", "42")
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(exit_code(&out), 0);
    }
    let a = std::fs::read_to_string(dir.path().join("s1.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("s2.json")).unwrap();
    assert_eq!(a, b, "same env seed, same bytes");

    // An explicit flag wins over the environment.
    let out = wfl()
        .args(["gen", "--kind", "random", "--dim", "2", "--count", "3", "--seed", "7", "-o", "s3.json"])
        .env("WFL_SEED", "42")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0);
    let c = std::fs::read_to_string(dir.path().join("s3.json")).unwrap();
    assert_ne!(a, c);
}
