use std::path::PathBuf;
use std::process::Command;

use spacesim::comms::find_windows;
use spacesim::runtime::LOG_HEADER;
use spacesim::scenarios::ScenarioConfig;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sim"))
}

fn config_path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "configs", name].iter().collect()
}

#[test]
fn run_writes_log_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("out.csv");
    let status = sim()
        .arg("run")
        .arg(config_path("constellation.json"))
        .args(["--duration-s", "120", "--log"])
        .arg(&log)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&log).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, LOG_HEADER.join(","));
    assert!(text.lines().count() > 1);
}

#[test]
fn windows_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("windows.csv");
    let out = sim()
        .arg("windows")
        .arg("--config")
        .arg(config_path("overhead.json"))
        .args(["--from", "sat1", "--to", "maspalomas", "--hours", "24", "--csv"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let config = ScenarioConfig::load(config_path("overhead.json")).unwrap();
    let actors = config.all_actors().unwrap();
    let sat = actors.iter().find(|a| a.id() == "sat1").unwrap();
    let gs = actors.iter().find(|a| a.id() == "maspalomas").unwrap();
    let t0 = config.start_epoch().unwrap();
    let expected = find_windows(sat, gs, t0, t0 + 86_400.0).unwrap();

    let mut rd = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<(f64, f64)> = rd
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), expected.len());
    for (row, w) in rows.iter().zip(&expected) {
        assert_eq!(row.0, w.start.j2000_seconds());
        assert_eq!(row.1, w.end.j2000_seconds());
    }
}

#[test]
fn missing_config_fails_and_names_path() {
    let out = sim().args(["run", "/no/such/config.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/config.json"));
}

#[test]
fn unwritable_log_fails() {
    let out = sim()
        .arg("run")
        .arg(config_path("constellation.json"))
        .args(["--duration-s", "10", "--log", "/no/such/dir/out.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dir/out.csv"));
}

#[test]
fn unknown_subcommand_fails() {
    let out = sim().arg("fly").output().unwrap();
    assert!(!out.status.success());
}
