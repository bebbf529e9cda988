use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fusetrack"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn run_writes_csv_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, "trajectory.duration = 3\n").unwrap();
    let out = bin().args(["run", "--filter", "fused", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("orient_rmse_deg = "));
    assert!(dir.path().join("fused.csv").exists());
    assert!(dir.path().join("fused_metrics.txt").exists());

    let m = bin().arg("metrics").arg(dir.path().join("fused.csv")).output().unwrap();
    assert!(m.status.success());
    assert_eq!(String::from_utf8(m.stdout).unwrap(), stdout);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "ekf.tau = 0.5\nekf.bogus = 1\n").unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ekf.bogus"));

    let out = bin().args(["run", "--filter", "kalman"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn divergence_exits_with_two_and_keeps_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("diverge.cfg");
    // With every variance at 1e-300 the innovation covariance underflows and
    // cannot be factored.
    std::fs::write(&cfg, "trajectory.duration = 2\nekf.var_q_vision = 1e-300\nekf.var_t_vision = 1e-300\nekf.var_q = 1e-300\nekf.var_gyro = 1e-300\nekf.q_p = 1e-300\nekf.D = 1e-300\nekf.K = 0\n").unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fused.csv")).unwrap();
    assert!(csv.lines().count() >= 1);
}

#[test]
fn dump_config_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin().arg("dump-config").arg("--config").arg(scenario("occlusion.cfg")).output().unwrap();
    assert!(first.status.success());
    let dumped = dir.path().join("dumped.cfg");
    std::fs::write(&dumped, &first.stdout).unwrap();
    let second = bin().arg("dump-config").arg("--config").arg(&dumped).output().unwrap();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn simulate_then_run_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, "trajectory.duration = 2\n").unwrap();
    let sim = bin().arg("simulate").arg("--config").arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(sim.status.success());
    let log = dir.path().join("sensor_log.csv");
    let run = bin().arg("run").arg("--config").arg(&cfg).arg("--log").arg(&log).arg("--out").arg(dir.path()).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    // No ground truth in a log: metrics refuse the file.
    let m = bin().arg("metrics").arg(dir.path().join("fused.csv")).output().unwrap();
    assert_eq!(m.status.code(), Some(1));
}

#[test]
fn monte_carlo_runs_write_one_csv_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.cfg");
    std::fs::write(&cfg, "trajectory.duration = 1\nseed = 10\n").unwrap();
    let out = bin().args(["run", "--runs", "3", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    for s in 10..13 {
        assert!(dir.path().join(format!("fused_seed{s}.csv")).exists());
    }
}
