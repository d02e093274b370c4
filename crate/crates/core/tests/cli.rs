//! End-to-end checks of the command-line surface: determinism of emitted
//! files, row-count contracts, config/flag/environment seed precedence, and
//! exit codes.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmt-lab"))
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "rmt-lab-cli-{tag}-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sample_reruns_are_byte_identical() {
    let dir = tempdir("sample");
    let run = || {
        let out = bin()
            .args([
                "sample",
                "--model",
                "multiplicative",
                "--n",
                "24",
                "--t",
                "0.4",
                "--trials",
                "3",
                "--seed",
                "2024",
                "--out",
            ])
            .arg(&dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(dir.join("spectra.csv")).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 1 + 24 * 3);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn trajectory_row_count_and_svg() {
    let dir = tempdir("traj");
    let out = bin()
        .args([
            "trajectories",
            "--model",
            "additive",
            "--n",
            "6",
            "--t-range",
            "-3:3:12",
            "--trials",
            "2",
            "--seed",
            "5",
            "--w",
            "same",
            "--svg",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("trajectories.csv")).unwrap();
    // paths x grid x trials rows plus the header.
    assert_eq!(text.lines().count(), 1 + 6 * 13 * 2);
    assert!(text.starts_with("model,trial,t,path_index,re,im\n"));
    let svg = std::fs::read_to_string(dir.join("trajectories.svg")).unwrap();
    assert!(svg.contains("<line"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_env_var_changes_output() {
    let dir_a = tempdir("env-a");
    let dir_b = tempdir("env-b");
    let run = |dir: &PathBuf, env_seed: &str| {
        let out = bin()
            .args(["sample", "--model", "ginibre", "--n", "8", "--trials", "1", "--out"])
            .arg(dir)
            .env("RMT_LAB_SEED", env_seed)
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read(dir.join("spectra.csv")).unwrap()
    };
    let a = run(&dir_a, "1");
    let b = run(&dir_b, "2");
    assert_ne!(a, b);
    // An explicit flag wins over the environment.
    let out = bin()
        .args([
            "sample", "--model", "ginibre", "--n", "8", "--trials", "1", "--seed", "1", "--out",
        ])
        .arg(&dir_b)
        .env("RMT_LAB_SEED", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let c = std::fs::read(dir_b.join("spectra.csv")).unwrap();
    assert_eq!(a, c);
    std::fs::remove_dir_all(&dir_a).ok();
    std::fs::remove_dir_all(&dir_b).ok();
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir("config");
    let config_path = dir.join("lab.toml");
    std::fs::write(
        &config_path,
        "model = \"gue\"\nn = 10\ntrials = 2\nseed = 77\nout = \"unused\"\n",
    )
    .unwrap();
    let out = bin()
        .arg("sample")
        .arg("--config")
        .arg(&config_path)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("spectra.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 10 * 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_identities_exits_zero_and_reports() {
    let dir = tempdir("verify");
    let out = bin()
        .args(["verify", "identities", "--out"])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
    assert!(stdout.contains("identities/sylvester"));
    let jsonl = std::fs::read_to_string(dir.join("verify.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
    assert_eq!(first["name"], "identities/sylvester");
    assert_eq!(first["pass"], true);
    assert!(first["statistic"].is_f64() && first["threshold"].is_f64());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn usage_errors_exit_two() {
    // Unknown suite name.
    let out = bin().args(["verify", "no-such-suite"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // Unknown model.
    let out = bin().args(["sample", "--model", "wishart"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Missing required coupling.
    let out = bin().args(["sample", "--model", "additive", "--n", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Unknown flag (clap-level usage error).
    let out = bin().args(["sample", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_one() {
    // Output path collides with an existing file.
    let dir = tempdir("io-fail");
    let blocker = dir.join("blocker");
    std::fs::write(&blocker, "occupied").unwrap();
    let out = bin()
        .args(["sample", "--model", "ginibre", "--n", "4", "--out"])
        .arg(blocker.join("nested"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_list_prints_suites() {
    let out = bin().args(["verify", "--list"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for suite in rmt_lab::verify::SUITES {
        assert!(stdout.contains(suite), "missing {suite}");
    }
}
