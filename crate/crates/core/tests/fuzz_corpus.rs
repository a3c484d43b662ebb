//! Replays the checked-in fuzz seeds through the parsers.

use std::fs;
use std::path::PathBuf;

use zeno_cavity::config::parse_config;
use zeno_cavity::experiments::{emit_trajectory_csv, parse_sweep_csv, parse_trajectory_csv};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds() {
    for (name, data) in seeds("parse_config") {
        let ok = parse_config(&data).is_ok();
        let expect_ok = !matches!(name.as_str(), "unknown_key.json" | "conflict.json");
        assert_eq!(ok, expect_ok, "{name}");
    }
}

#[test]
fn trajectory_seeds() {
    for (name, data) in seeds("parse_trajectory_csv") {
        let text = String::from_utf8(data).unwrap();
        match parse_trajectory_csv(&text) {
            Ok(traj) => {
                let mut out = Vec::new();
                emit_trajectory_csv(&traj, &mut out).unwrap();
                let again = parse_trajectory_csv(std::str::from_utf8(&out).unwrap()).unwrap();
                assert_eq!(again, traj, "{name}");
            }
            Err(_) => assert!(matches!(name.as_str(), "missing_field.csv" | "mixed_sources.csv"), "{name}"),
        }
    }
}

#[test]
fn sweep_seeds() {
    for (name, data) in seeds("parse_sweep_csv") {
        let text = String::from_utf8(data).unwrap();
        assert_eq!(parse_sweep_csv(&text).is_ok(), name == "grid_4.csv", "{name}");
    }
}
