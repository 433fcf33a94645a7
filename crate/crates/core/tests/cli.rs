use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levy_memory::harness::{run, ExperimentConfig, Subcommand};
use levy_memory::Error;

const BIN: &str = env!("CARGO_BIN_EXE_levy-memory");

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn invoke(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_config(sub: &str, cfg: &Path, out: &Path) -> Output {
    invoke(&[sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn every_shipped_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (file, sub, expected) in [
        ("elliptic.toml", "solve-elliptic", "solution.csv"),
        ("parabolic.toml", "solve-parabolic", "ledger.csv"),
        ("memory.toml", "solve-memory", "fields.csv"),
        ("fracpoisson.toml", "study-fracpoisson", "fracpoisson.csv"),
        ("kernel_limit.toml", "study-kernel-limit", "kernel_limit.csv"),
        ("threshold.toml", "study-threshold", "threshold.csv"),
    ] {
        let out = dir.path().join(sub);
        let o = run_config(sub, &configs_dir().join(file), &out);
        assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join(expected).is_file(), "{sub} did not write {expected}");
    }
}

#[test]
fn memory_run_writes_four_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("minimal.toml");
    fs::write(
        &cfg,
        "[domain]\nn = 128\n[time]\nT = 0.5\nsteps = 64\n[kernel]\ns = 0.5\n[potential]\nprofile = \"quadratic\"\n",
    )
    .unwrap();
    let out = dir.path().join("m");
    let o = run_config("solve-memory", &cfg, &out);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["fields.csv", "report.txt", "residuals.csv", "trajectory.csv"]);
    let fields = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert_eq!(fields.lines().next(), Some("x,u0,v,u_T"));
    assert_eq!(fields.lines().count(), 129);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("converged = true"));
    assert!(report.contains("[manifest]"));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for (file, sub) in [
        ("memory.toml", "solve-memory"),
        ("fracpoisson.toml", "study-fracpoisson"),
    ] {
        let a = dir.path().join(format!("{sub}-a"));
        let b = dir.path().join(format!("{sub}-b"));
        assert!(run_config(sub, &configs_dir().join(file), &a).status.success());
        assert!(run_config(sub, &configs_dir().join(file), &b).status.success());
        for entry in fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            if Path::new(&name).extension().is_some_and(|e| e == "csv") {
                assert_eq!(
                    fs::read(a.join(&name)).unwrap(),
                    fs::read(b.join(&name)).unwrap(),
                    "{name:?}"
                );
            }
        }
    }
}

#[test]
fn out_of_range_order_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[kernel]\ns = 1.5\n").unwrap();
    let o = run_config("solve-elliptic", &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("kernel.s"), "{stderr}");
    assert!(!dir.path().join("out").exists());

    let text = fs::read_to_string(&cfg).unwrap();
    let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
    assert!(
        matches!(err, Error::Config { ref key, .. } if key == "kernel.s"),
        "{err}"
    );
}

#[test]
fn unknown_keys_and_syntax_errors_are_rejected() {
    assert!(matches!(
        ExperimentConfig::from_toml_str("[domain]\nnodes = 4\n"),
        Err(Error::Config { .. })
    ));
    let err = ExperimentConfig::from_toml_str("[domain]\nn = \n").unwrap_err();
    assert!(err.to_string().contains("line 2"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke(&[]).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        run_config("solve-elliptic", &missing, &dir.path().join("o"))
            .status
            .code(),
        Some(2)
    );
    // output directory below a regular file cannot be created
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = run_config(
        "solve-elliptic",
        &configs_dir().join("elliptic.toml"),
        &blocker.join("sub"),
    );
    assert_eq!(o.status.code(), Some(1));
    // Picard cannot reach 1e-15 in one step: a solver failure
    let cfg = dir.path().join("short.toml");
    fs::write(
        &cfg,
        "[domain]\nn = 31\n[time]\nsteps = 8\n[potential]\nprofile = \"quadratic\"\n[solver]\npicard_tol = 1e-15\npicard_max_iters = 1\n",
    )
    .unwrap();
    let out = dir.path().join("short");
    let o = run_config("solve-memory", &cfg, &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(out.join("residuals.csv").is_file() && out.join("report.txt").is_file());
    assert!(fs::read_to_string(out.join("report.txt"))
        .unwrap()
        .contains("converged = false"));
}

#[test]
fn check_flag_passes() {
    let o = invoke(&["--check"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
}

#[test]
fn zero_potential_memory_matches_parabolic_in_process() {
    let mut cfg = ExperimentConfig::default();
    cfg.domain.n = 40;
    cfg.time.steps = 10;
    cfg.potential.profile = "zero".into();
    let m = run(Subcommand::SolveMemory, &cfg).unwrap();
    let p = run(Subcommand::SolveParabolic, &cfg).unwrap();
    assert_eq!(m.file("trajectory.csv"), p.file("trajectory.csv"));
}
