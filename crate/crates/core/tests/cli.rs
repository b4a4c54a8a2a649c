use std::fs;
use std::process::{Command, Output};

fn qsg(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsg")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn default_run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsg(&["run", "--out", "r.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 401);
    assert_eq!(csv.lines().next().unwrap(), "round,team,defense,actions,team_score,cumulative");
    let summary = fs::read_to_string(dir.path().join("r.summary.txt")).unwrap();
    for label in ["2C", "3C", "2Q", "3Q"] {
        assert!(summary.contains(&format!("team {label} ")), "{summary}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "rounds = 50\nscenario = \"snm\"\nnoise_kind = \"bitflip\"\n").unwrap();
    let out = qsg(
        &["run", "--config", "run.toml", "--rounds", "7", "--noise", "amplitude", "--error-rate", "0.1", "--out", "x.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("x.csv")).unwrap().lines().count(), 1 + 7 * 4);
    let summary = fs::read_to_string(dir.path().join("x.summary.txt")).unwrap();
    assert!(summary.contains("noise: amplitude p=0.1"), "{summary}");
}

#[test]
fn hardware_profile_flag_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("p.toml"), qsg::channel::KYIV_LIKE_PROFILE).unwrap();
    let out = qsg(&["run", "--scenario", "hardware", "--profile", "p.toml", "--rounds", "5", "--seed", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(dir.path().join("results.summary.txt")).unwrap();
    assert!(summary.contains("noise: profile kyiv-like"));
    assert!(summary.contains("master_seed: 3"));
}

#[test]
fn invalid_config_fails_with_field_paths() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "scenario = \"hardware\"\nerror_rate = 1.5\n").unwrap();
    let out = qsg(&["run", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("error_rate:"), "{err}");
    assert!(err.contains("profile_path:"), "{err}");
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsg(&["run", "--config", "nope.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn unknown_flag_value_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = qsg(&["run", "--noise", "thermal"], dir.path());
    assert!(!out.status.success());
}
