//! End-to-end checks of the command-line front end: subcommands, output-dir
//! resolution, config/LUT loading, exit codes, and byte-level determinism.
//! Every run here is cut to a few dozen agent steps so the whole file stays
//! fast; full-scale behavior is covered by the acceptance suite.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_slicesim"));
    // Isolate from any ambient output-dir override.
    cmd.env_remove("SLICESIM_OUT");
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn slicesim");
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn assert_exit(cmd: &mut Command, code: i32, stderr_needle: &str) {
    let out = cmd.output().expect("spawn slicesim");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}\nstderr: {stderr}"
    );
    assert!(
        stderr.contains(stderr_needle),
        "stderr missing {stderr_needle:?}: {stderr}"
    );
}

/// Files every single-run invocation must leave behind.
const ARTIFACTS: [&str; 10] = [
    "config.toml",
    "reward_trace.csv",
    "kpi.csv",
    "kpi_report.csv",
    "assoc_trace.csv",
    "eccdf_delay_embb.csv",
    "eccdf_delay_urllc.csv",
    "eccdf_throughput_embb.csv",
    "eccdf_throughput_urllc.csv",
    "summary.toml",
];

fn assert_artifacts(dir: &Path) {
    for name in ARTIFACTS {
        assert!(dir.join(name).is_file(), "missing artifact {name} in {dir:?}");
    }
}

#[test]
fn train_writes_full_artifact_set_and_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let out = run_ok(bin().args([
        "train",
        "--algo",
        "iqra",
        "--seed",
        "3",
        "--iterations",
        "40",
        "--out",
        dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("iqra train seed 3"), "stdout: {stdout}");
    assert_artifacts(&dir);
    assert!(dir.join("checkpoint_embb.json").is_file());
    assert!(dir.join("checkpoint_urllc.json").is_file());
}

#[test]
fn baseline_runs_and_writes_no_checkpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("base");
    let out = run_ok(bin().args([
        "baseline",
        "--seed",
        "3",
        "--iterations",
        "40",
        "--out",
        dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("maxsnr baseline seed 3"), "stdout: {stdout}");
    assert_artifacts(&dir);
    assert!(
        !dir.join("checkpoint_embb.json").exists(),
        "baseline must not write checkpoints"
    );
}

#[test]
fn eval_replays_from_checkpoints_greedily() {
    let tmp = tempfile::tempdir().unwrap();
    let train_dir = tmp.path().join("train");
    run_ok(bin().args([
        "train",
        "--algo",
        "liqra",
        "--seed",
        "5",
        "--iterations",
        "40",
        "--out",
        train_dir.to_str().unwrap(),
    ]));
    let eval_dir = tmp.path().join("eval");
    let out = run_ok(bin().args([
        "eval",
        "--algo",
        "liqra",
        "--seed",
        "5",
        "--iterations",
        "40",
        "--checkpoint",
        train_dir.to_str().unwrap(),
        "--out",
        eval_dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("liqra eval seed 5"), "stdout: {stdout}");
    assert_artifacts(&eval_dir);
    // Greedy replay: the exploration column is pinned to zero on every row.
    let trace = std::fs::read_to_string(eval_dir.join("reward_trace.csv")).unwrap();
    for line in trace.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let eps = line.split(',').nth(2).unwrap();
        assert_eq!(eps, "0", "non-greedy row in eval trace: {line}");
    }
}

#[test]
fn compare_emits_joint_artifacts_and_verifies_crn() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cmp");
    let out = run_ok(bin().args([
        "compare",
        "--seed",
        "9",
        "--iterations",
        "30",
        "--out",
        dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("common random numbers verified"),
        "stdout: {stdout}"
    );
    for sub in ["iqra", "liqra", "maxsnr"] {
        assert_artifacts(&dir.join(sub));
    }
    for name in [
        "compare_eccdf_delay_embb.csv",
        "compare_eccdf_delay_urllc.csv",
        "compare_eccdf_throughput_embb.csv",
        "compare_eccdf_throughput_urllc.csv",
        "compare_summary.toml",
    ] {
        assert!(dir.join(name).is_file(), "missing {name}");
    }
}

#[test]
fn repeated_cli_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        run_ok(bin().args([
            "train",
            "--algo",
            "iqra",
            "--seed",
            "11",
            "--iterations",
            "40",
            "--out",
            dir.to_str().unwrap(),
        ]));
    }
    for name in ["reward_trace.csv", "kpi.csv", "summary.toml"] {
        let first = std::fs::read(a.join(name)).unwrap();
        let second = std::fs::read(b.join(name)).unwrap();
        assert_eq!(first, second, "{name} differs between identical runs");
    }
}

#[test]
fn out_dir_precedence_flag_env_default() {
    let tmp = tempfile::tempdir().unwrap();

    // Default: out/<label>-seed<seed> under the working directory.
    run_ok(
        bin()
            .args(["baseline", "--seed", "2", "--iterations", "30"])
            .current_dir(tmp.path()),
    );
    assert_artifacts(&tmp.path().join("out").join("baseline-maxsnr-seed2"));

    // Environment override is used as the directory itself.
    let env_dir = tmp.path().join("from-env");
    run_ok(
        bin()
            .args(["baseline", "--seed", "2", "--iterations", "30"])
            .env("SLICESIM_OUT", env_dir.to_str().unwrap()),
    );
    assert_artifacts(&env_dir);

    // The flag wins over the environment.
    let flag_dir = tmp.path().join("from-flag");
    let unused = tmp.path().join("unused-env");
    run_ok(
        bin()
            .args([
                "baseline",
                "--seed",
                "2",
                "--iterations",
                "30",
                "--out",
                flag_dir.to_str().unwrap(),
            ])
            .env("SLICESIM_OUT", unused.to_str().unwrap()),
    );
    assert_artifacts(&flag_dir);
    assert!(!unused.exists(), "env dir must be ignored when --out is given");
}

#[test]
fn custom_config_and_lut_files_load() {
    let tmp = tempfile::tempdir().unwrap();
    // Minimal scenario file: only overrides, everything else defaulted.
    let cfg_path = tmp.path().join("scenario.toml");
    std::fs::write(
        &cfg_path,
        "[run]\niterations = 25\nttis_per_step = 10\nreport_window_ttis = 50\ncheckpoint_interval_steps = 10\n",
    )
    .unwrap();
    let lut_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mcs_lut.csv");

    let with_cfg = tmp.path().join("with-cfg");
    run_ok(bin().args([
        "train",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "4",
        "--out",
        with_cfg.to_str().unwrap(),
    ]));
    assert_artifacts(&with_cfg);
    // 25 steps x 2 slices of data rows plus provenance comments and header.
    let trace = std::fs::read_to_string(with_cfg.join("reward_trace.csv")).unwrap();
    let rows = trace
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("step"))
        .count();
    assert_eq!(rows, 50, "expected 25 steps x 2 slices of reward rows");

    // The bundled table matches the built-in one, so KPI output is unchanged.
    let builtin = tmp.path().join("builtin");
    let from_file = tmp.path().join("from-file");
    run_ok(bin().args([
        "baseline",
        "--seed",
        "4",
        "--iterations",
        "30",
        "--out",
        builtin.to_str().unwrap(),
    ]));
    run_ok(bin().args([
        "baseline",
        "--seed",
        "4",
        "--iterations",
        "30",
        "--lut",
        lut_path.to_str().unwrap(),
        "--out",
        from_file.to_str().unwrap(),
    ]));
    // The provenance header differs (the config now names a LUT file, which
    // changes its hash), so compare the data rows only.
    let data_rows = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    };
    assert_eq!(
        data_rows(&builtin.join("kpi.csv")),
        data_rows(&from_file.join("kpi.csv")),
        "bundled LUT must reproduce built-in KPI output"
    );
}

#[test]
fn unknown_algo_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_exit(
        bin()
            .args(["train", "--algo", "nope", "--iterations", "5"])
            .current_dir(tmp.path()),
        1,
        "--algo",
    );
}

#[test]
fn missing_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_exit(
        bin()
            .args(["train", "--config", "/definitely/not/here.toml"])
            .current_dir(tmp.path()),
        1,
        "here.toml",
    );
}

#[test]
fn eval_without_checkpoints_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    assert_exit(
        bin()
            .args([
                "eval",
                "--iterations",
                "5",
                "--checkpoint",
                empty.to_str().unwrap(),
                "--out",
                tmp.path().join("eval-out").to_str().unwrap(),
            ])
            .current_dir(tmp.path()),
        2,
        "checkpoint",
    );
}
