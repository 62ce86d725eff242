//! End-to-end checks of the compiled binary: artifact layout, documented
//! exit codes, and manifest reproducibility through the process boundary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn temp_dir(tag: &str) -> PathBuf {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("tanksoe_cli_{}_{tag}_{n}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn tanksoe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanksoe"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

#[test]
fn steady_state_writes_artifacts_and_exits_zero() {
    let dir = temp_dir("ss");
    let out = tanksoe(&["steady-state", "--out", dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("steady_state.csv")).unwrap();
    assert!(csv.contains("share_Co_R,"));
    assert!(csv.contains("share_Co_H,"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("steady_state.csv"), "{stdout}");
    assert!(dir.join("manifest.txt").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_config_key_names_the_key_and_exits_2() {
    let dir = temp_dir("badkey");
    let config = dir.join("config.txt");
    fs::write(&config, "command = steady-state\nnot_a_key = 1\n").unwrap();
    let out = tanksoe(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not_a_key"), "{stderr}");
    assert_eq!(stderr.lines().count(), 1, "one-line diagnostic: {stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_command_exits_2() {
    let out = tanksoe(&[]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no command"), "{stderr}");
}

#[test]
fn steady_state_failure_exits_3() {
    let dir = temp_dir("ssfail");
    let config = dir.join("config.txt");
    // subsistence requirement above the commodity endowment: no admissible
    // allocation exists
    fs::write(&config, "command = steady-state\nphi_Co = 3.0\n").unwrap();
    let out = tanksoe(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        3,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn indeterminacy_exits_4() {
    let dir = temp_dir("bk");
    let config = dir.join("config.txt");
    // with no exchange-rate anchor the nominal level is indeterminate and
    // the eigenvalue count fails
    fs::write(&config, "command = irf\nshock = eps_R\nphi_s = 0\n").unwrap();
    let out = tanksoe(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&out),
        4,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Blanchard-Kahn"), "{stderr}");
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn irf_csv_reports_both_households_consumption() {
    let dir = temp_dir("irf");
    let out = tanksoe(&[
        "irf",
        "--shock",
        "eps_R",
        "--horizon",
        "6",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("irf_eps_R.csv")).unwrap();
    let header: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let c_r = header.iter().position(|h| *h == "c_R").unwrap();
    let c_h = header.iter().position(|h| *h == "c_H").unwrap();
    let impact: Vec<f64> = csv
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(impact[c_r] != 0.0 && impact[c_h] != 0.0);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn manifest_rerun_reproduces_csvs_bit_exactly_across_processes() {
    let dir_a = temp_dir("rerun_a");
    let dir_b = temp_dir("rerun_b");
    let config = dir_a.join("config.txt");
    fs::write(
        &config,
        "command = moments\nseed = 7\norder = 2\nsim_t_periods = 2500\nsim_burn_in = 100\n",
    )
    .unwrap();
    let first = tanksoe(&[
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir_a.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&first),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&first.stderr)
    );

    let manifest = dir_a.join("manifest.txt");
    let second = tanksoe(&[
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        dir_b.to_str().unwrap(),
    ]);
    assert_eq!(
        exit_code(&second),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&second.stderr)
    );

    let a = fs::read(dir_a.join("moments.csv")).unwrap();
    let b = fs::read(dir_b.join("moments.csv")).unwrap();
    assert_eq!(a, b, "manifest re-run must be bit-identical");
    fs::remove_dir_all(&dir_a).ok();
    fs::remove_dir_all(&dir_b).ok();
}
