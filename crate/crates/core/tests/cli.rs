use std::path::Path;
use std::process::{Command, Output};

fn explore(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_explore"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn run_writes_result_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("room.map"), "6 5 0.05\n######\n#....#\n#....#\n#....#\n######\n").unwrap();
    let out = explore(
        &["run", "--map", "room.map", "--start", "1,1", "--budget", "50", "--out", "r.json", "--replay", "r.jsonl"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let result: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(result["coverage"], 1.0);
    let replay = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = replay.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len() as u64, result["steps"].as_u64().unwrap());
    for key in ["step", "pos", "heading", "action", "coverage", "chosen_frontier"] {
        assert!(lines.iter().all(|l| l.get(key).is_some()), "{key}");
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.map"), "3 2 0.05\n###\n#x#\n").unwrap();
    std::fs::write(dir.path().join("bad.toml"), "planners = [\"random\"]\n").unwrap();
    std::fs::write(dir.path().join("unknown.toml"), "colour = 3\n").unwrap();
    let cases: &[&[&str]] = &[
        &["run", "--gen-seed", "1", "--fov", "180"],
        &["run", "--gen-seed", "1", "--planner", "random"],
        &["run", "--gen-seed", "1", "--estimator", "oracle-noisy=-1"],
        &["run", "--gen-seed", "1", "--budget", "0"],
        &["run", "--gen-seed", "1", "--k", "0"],
        &["run", "--gen-seed", "1", "--ratio", "0"],
        &["run", "--map", "missing.map"],
        &["run", "--map", "bad.map"],
        &["run", "--gen-seed", "1", "--start", "0,0"],
        &["run"],
        &["bench", "--config", "bad.toml", "--out", "t.csv"],
        &["bench", "--config", "unknown.toml", "--out", "t.csv"],
        &["bench", "--config", "missing.toml", "--out", "t.csv"],
    ];
    for args in cases {
        let out = explore(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    // Nothing was written by the failed runs.
    assert!(!dir.path().join("t.csv").exists());
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bench.toml"),
        "parallelism = 2\nbudget = 60\nmap_count = 2\nstarts_per_map = 1\nfovs = [360]\n\
         estimators = [\"oracle\"]\n[generator]\nwidth = 40\nheight = 40\n",
    )
    .unwrap();
    let out = explore(&["bench", "--config", "bench.toml", "--out", "t.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("t.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(csv.starts_with("index,map,seed,planner,"));
    let table: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 6);
    assert!(!table["summary"].as_array().unwrap().is_empty());
}
