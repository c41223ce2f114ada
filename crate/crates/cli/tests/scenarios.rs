use std::path::{Path, PathBuf};
use std::process::Command;

use tsvf_cli::{load_config, render, run, Format};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    assert!(!files.is_empty());
    files
}

fn csv_data(path: &Path) -> String {
    let (cfg, _) = load_config(path).unwrap();
    render(&run(&cfg).unwrap(), Format::Csv).data
}

fn cells_match(a: &str, b: &str) -> bool {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())),
        _ => a == b,
    }
}

#[test]
fn scenarios_match_goldens() {
    for path in scenario_files() {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let golden = std::fs::read_to_string(root().join(format!("crates/cli/tests/golden/{name}.csv")))
            .unwrap_or_else(|_| panic!("missing golden for {name}"));
        let data = csv_data(&path);
        let (got, want): (Vec<&str>, Vec<&str>) = (data.lines().collect(), golden.lines().collect());
        assert_eq!(got.len(), want.len(), "{name}: line count");
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            let (gc, wc): (Vec<&str>, Vec<&str>) = (g.split(',').collect(), w.split(',').collect());
            assert!(
                gc.len() == wc.len() && gc.iter().zip(&wc).all(|(a, b)| cells_match(a, b)),
                "{name} line {}: {g} vs {w}",
                k + 1
            );
        }
    }
}

#[test]
fn replays_are_byte_identical() {
    for path in scenario_files() {
        assert_eq!(csv_data(&path), csv_data(&path), "{}", path.display());
    }
}

#[test]
fn thread_count_does_not_change_data() {
    for name in ["born_ensemble", "robustness_sweep"] {
        let path = root().join(format!("scenarios/{name}.toml"));
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| csv_data(&path));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| csv_data(&path));
        assert_eq!(one, four, "{name}");
    }
}

#[test]
fn echoed_config_replays_identically() {
    let path = root().join("scenarios/born_ensemble.toml");
    let (cfg, _) = load_config(&path).unwrap();
    let report = run(&cfg).unwrap();
    let again = tsvf_cli::parse_config(&report.config_echo).unwrap();
    assert_eq!(render(&run(&again).unwrap(), Format::Csv).data, render(&report, Format::Csv).data);
}

fn tsvf(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tsvf")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = root().join("scenarios/signaling.toml");
    let out = tsvf(&["run", good.to_str().unwrap(), "--format", "jsonl"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"table\":\"bob\""));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "kind = \"born_ensemble\"\n").unwrap();
    let out = tsvf(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = tsvf(&["run", bad.to_str().unwrap(), "--seed", "3", "--jobs", "2"]);
    assert_eq!(out.status.code(), Some(0));

    let unknown = dir.path().join("unknown.toml");
    std::fs::write(&unknown, "kind = \"teleport\"\n").unwrap();
    assert_eq!(tsvf(&["run", unknown.to_str().unwrap()]).status.code(), Some(1));

    let out = tsvf(&["list-scenarios"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 7);
}

#[test]
fn out_flag_writes_data_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let cfg = root().join("scenarios/abl_three_box.toml");
    let status = tsvf(&["run", cfg.to_str().unwrap(), "--format", "csv", "--out", out.to_str().unwrap()]).status;
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), csv_data(&cfg));
    assert!(std::fs::read_to_string(dir.path().join("run.csv.meta")).unwrap().contains("duration_ms"));
}
