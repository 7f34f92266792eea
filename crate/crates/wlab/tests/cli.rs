//! End-to-end checks of the binary: exit codes, artifact layout, and
//! environment handling, all through real process spawns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wlab::config::scenario_to_text;
use wlab::gallery;
use wlab::model::Scenario;

fn wlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_wlab"));
    c.env_remove("WLAB_THREADS");
    c
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process was not signal-killed")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_scenario(dir: &Path, s: &Scenario) -> PathBuf {
    let path = dir.join("scenario.ini");
    std::fs::write(&path, scenario_to_text(s)).unwrap();
    path
}

fn gallery_scenario(name: &str) -> Scenario {
    (gallery::lookup(name).expect("known gallery entry").build)()
}

#[cfg(unix)]
#[test]
fn closed_stdout_pipe_ends_the_process_quietly() {
    use std::process::Stdio;
    let mut child = wlab()
        .args(["gallery", "--list"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let out = child.wait_with_output().unwrap();
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(!err.contains("panicked"), "{err}");
    if let Some(c) = out.status.code() {
        assert_eq!(c, 0, "{err}");
    } else {
        use std::os::unix::process::ExitStatusExt;
        assert_eq!(out.status.signal(), Some(libc::SIGPIPE));
    }
}

#[test]
fn simulate_missing_file_is_an_io_error() {
    let out = wlab().args(["simulate", "/nonexistent/scenario.ini"]).output().unwrap();
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn simulate_unparseable_file_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("broken.ini");
    std::fs::write(&path, "not a scenario at all\n= = =\n").unwrap();
    let out = wlab().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn simulate_rejects_an_invalid_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = gallery_scenario("linear-1d");
    s.grid_n = 2;
    let path = write_scenario(tmp.path(), &s);
    let out = wlab().arg("simulate").arg(&path).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("invalid scenario"), "{}", stderr(&out));
}

#[test]
fn simulate_writes_the_full_artifact_set() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), &gallery_scenario("linear-1d"));
    let run = tmp.path().join("run");
    let out = wlab().arg("simulate").arg(&path).arg("--out").arg(&run).output().unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for file in ["scenario.ini", "monitors.csv", "energy.csv", "manifest.txt", "u_000000.csv", "v_000000.csv"] {
        assert!(run.join(file).exists(), "missing artifact {file}");
    }
    let manifest = std::fs::read_to_string(run.join("manifest.txt")).unwrap();
    assert!(manifest.contains("failure=none"), "{manifest}");
    // The canonical scenario echo reparses to the same run configuration.
    let echoed = std::fs::read_to_string(run.join("scenario.ini")).unwrap();
    assert_eq!(echoed, scenario_to_text(&gallery_scenario("linear-1d")));
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), &gallery_scenario("nonlinear-1d"));
    let mut artifacts = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = wlab().arg("simulate").arg(&path).arg("--out").arg(&dir).output().unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let read = |f: &str| std::fs::read(dir.join(f)).unwrap();
        artifacts.push((read("monitors.csv"), read("energy.csv"), read("manifest.txt")));
    }
    assert_eq!(artifacts[0], artifacts[1]);
}

#[test]
fn thread_env_variable_matches_explicit_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), &gallery_scenario("coupled-1d-rho10"));
    let flag_dir = tmp.path().join("flag");
    let env_dir = tmp.path().join("env");
    let out = wlab()
        .arg("simulate")
        .arg(&path)
        .arg("--out")
        .arg(&flag_dir)
        .args(["--threads", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = wlab()
        .arg("simulate")
        .arg(&path)
        .arg("--out")
        .arg(&env_dir)
        .env("WLAB_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        std::fs::read(flag_dir.join("monitors.csv")).unwrap(),
        std::fs::read(env_dir.join("monitors.csv")).unwrap()
    );
}

#[test]
fn simulate_maps_degeneracy_to_exit_three_and_keeps_the_prefix() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_scenario(tmp.path(), &gallery_scenario("degenerate-blowup"));
    let run = tmp.path().join("run");
    let out = wlab().arg("simulate").arg(&path).arg("--out").arg(&run).output().unwrap();
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let monitors = std::fs::read_to_string(run.join("monitors.csv")).unwrap();
    assert!(monitors.lines().count() > 1, "completed steps should still be tabulated");
    let manifest = std::fs::read_to_string(run.join("manifest.txt")).unwrap();
    assert!(manifest.contains("failure=mass factor reached"), "{manifest}");
}

#[test]
fn simulate_flags_a_polluted_energy_ledger() {
    // A deliberately sloppy linear solve completes but cannot close the
    // energy ledger to one part in 1e8 of E(0); that is a diagnostic, not
    // a crash.
    let tmp = tempfile::tempdir().unwrap();
    let mut s = gallery_scenario("linear-1d");
    s.solver.linear_tol = 1e-3;
    let path = write_scenario(tmp.path(), &s);
    let out = wlab().arg("simulate").arg(&path).arg("--out").arg(tmp.path().join("run")).output().unwrap();
    assert_eq!(code(&out), 1, "{}\n{}", stdout(&out), stderr(&out));
}

#[test]
fn simulate_maps_linear_stall_to_exit_four() {
    // The Gaussian bump over jumped coefficients is far from an eigenvector
    // of the implicit operator, so a two-iteration budget cannot reach the
    // solve tolerance.
    let tmp = tempfile::tempdir().unwrap();
    let mut s = gallery_scenario("coupled-1d-rho10");
    s.solver.linear_max_iters = Some(2);
    let path = write_scenario(tmp.path(), &s);
    let out = wlab().arg("simulate").arg(&path).arg("--out").arg(tmp.path().join("run")).output().unwrap();
    assert_eq!(code(&out), 4, "{}\n{}", stdout(&out), stderr(&out));
}

#[test]
fn inequalities_usage_errors() {
    let out = wlab().args(["inequalities", "--samples", "0"]).output().unwrap();
    assert_eq!(code(&out), 2);
    let out = wlab().args(["inequalities", "--only", "no-such-id"]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn inequalities_reports_counterexamples_without_failing() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("battery.csv");
    let out = wlab()
        .args(["inequalities", "--only", "2.3-as-stated", "--samples", "2000", "--seed", "1"])
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("counterexamples found"), "{}", stdout(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("inequality_id,samples,violations,worst_margin"), "{text}");
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn inequalities_full_battery_holds_at_small_sample_counts() {
    let out = wlab().args(["inequalities", "--samples", "5000"]).output().unwrap();
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(!text.contains("VIOLATED (must hold)"), "{text}");
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn convergence_usage_errors() {
    let out = wlab().args(["convergence", "--solution", "no-such-mode"]).output().unwrap();
    assert_eq!(code(&out), 2);
    let out = wlab().args(["convergence", "--levels", "1"]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn convergence_writes_the_order_table() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("orders.csv");
    let out = wlab()
        .args(["convergence", "--levels", "2", "--t-end", "0.02"])
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}\n{}", stdout(&out), stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("level,n,h,dt,l2_error,linf_error,order"), "{text}");
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn regularity_requires_exactly_one_source() {
    let out = wlab().arg("regularity").output().unwrap();
    assert_eq!(code(&out), 2);
    let out = wlab()
        .args(["regularity", "--scenario", "x.ini", "--gallery", "coupled-1d-rho10"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let out = wlab().args(["regularity", "--gallery", "no-such-entry"]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn regularity_propagates_a_degenerate_run() {
    let out = wlab()
        .args(["regularity", "--gallery", "degenerate-blowup", "--levels", "1"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn regularity_writes_the_scan_table() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("scan.csv");
    let out = wlab()
        .args(["regularity", "--gallery", "coupled-1d-rho10", "--levels", "2"])
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("level,n,h,metric,window,shift,value"), "{text}");
    for metric in ["h2_sq", "flux_jump", "dq2_l2", "holder_alpha"] {
        assert!(text.contains(metric), "missing {metric} in {text}");
    }
}

#[test]
fn gallery_lists_every_entry() {
    let out = wlab().args(["gallery", "--list"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for e in gallery::ENTRIES {
        assert!(text.contains(e.name), "missing {} in {text}", e.name);
    }
    let out = wlab().args(["gallery", "--only", "no-such-entry"]).output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn gallery_runs_one_entry_into_its_own_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = wlab()
        .args(["gallery", "--only", "linear-1d"])
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(tmp.path().join("linear-1d/manifest.txt").exists());
    assert!(stdout(&out).contains("completed"), "{}", stdout(&out));
}
