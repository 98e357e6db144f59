//! End-to-end tests driving the compiled binary.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

static DIR_COUNTER: AtomicU32 = AtomicU32::new(0);

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "topotrack-test-{}-{}-{}",
        tag,
        std::process::id(),
        DIR_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn topotrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topotrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generate_reference_scenario() {
    let dir = temp_dir("gen");
    let out = dir.join("scenario.txt");
    let result = topotrack(&["generate", "--out", out.to_str().unwrap(), "--seed", "1"]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let stdout = stdout_of(&result);
    assert!(stdout.contains("change_times=200,400"), "{stdout}");
    assert!(stdout.contains("spd_ok=3/3"), "{stdout}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("topotrack-scenario v1"));
    assert!(text.contains("change_times 200 400"));
}

#[test]
fn generate_same_seed_is_byte_identical() {
    let dir = temp_dir("gen-det");
    let a = dir.join("a.txt");
    let b = dir.join("b.txt");
    for out in [&a, &b] {
        let result = topotrack(&["generate", "--out", out.to_str().unwrap(), "--seed", "9"]);
        assert!(result.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn generate_rejects_single_node() {
    let dir = temp_dir("gen-bad");
    let out = dir.join("scenario.txt");
    let result = topotrack(&[
        "generate",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "scenario.n=1",
    ]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("scenario.n"), "{stderr}");
}

#[test]
fn unknown_config_key_names_the_field() {
    let dir = temp_dir("badkey");
    let out = dir.join("scenario.txt");
    let result = topotrack(&[
        "generate",
        "--out",
        out.to_str().unwrap(),
        "--set",
        "solver.warp=9",
    ]);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("warp"));
}

#[test]
fn run_truth_only_emits_no_mle_columns() {
    let dir = temp_dir("truthonly");
    let result = topotrack(&[
        "run",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "2",
        "--set",
        "scenario.total_steps=40",
        "--set",
        "scenario.segment_length=20",
        "--set",
        "run.references=truth",
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("seed_2.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    // seed,t,<5 empty mle cells>,pc_truth,co_truth
    let cells: Vec<&str> = row.split(',').collect();
    assert_eq!(cells.len(), 9);
    for cell in &cells[2..7] {
        assert!(cell.is_empty(), "expected empty MLE cell, got {cell}");
    }
    assert!(!cells[7].is_empty() && !cells[8].is_empty());
    let stdout = stdout_of(&result);
    assert!(!stdout.contains("final_nmse_pc_bmle"), "{stdout}");
    assert!(stdout.contains("final_nmse_pc_truth"), "{stdout}");
}

#[test]
fn run_replays_exported_scenario() {
    let dir = temp_dir("replay");
    let scenario = dir.join("scenario.txt");
    let gen = topotrack(&[
        "generate",
        "--out",
        scenario.to_str().unwrap(),
        "--seed",
        "5",
        "--set",
        "scenario.total_steps=60",
        "--set",
        "scenario.segment_length=20",
    ]);
    assert!(gen.status.success());

    let out_a = temp_dir("replay-a");
    let run_a = topotrack(&[
        "run",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
        "--set",
        "scenario.total_steps=60",
        "--set",
        "scenario.segment_length=20",
    ]);
    assert!(
        run_a.status.success(),
        "{}",
        String::from_utf8_lossy(&run_a.stderr)
    );
    let csv = std::fs::read_to_string(out_a.join("seed_5.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61); // header + 60 rows

    // Replaying the file must equal running the generating seed directly.
    let out_b = temp_dir("replay-b");
    let run_b = topotrack(&[
        "run",
        "--seed",
        "5",
        "--out",
        out_b.to_str().unwrap(),
        "--set",
        "scenario.total_steps=60",
        "--set",
        "scenario.segment_length=20",
    ]);
    assert!(run_b.status.success());
    assert_eq!(
        std::fs::read(out_a.join("seed_5.csv")).unwrap(),
        std::fs::read(out_b.join("seed_5.csv")).unwrap()
    );
}

#[test]
fn run_divergence_exits_three_with_time_index() {
    let dir = temp_dir("diverge");
    let result = topotrack(&[
        "run",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "1",
        "--set",
        "scenario.total_steps=40",
        "--set",
        "scenario.segment_length=20",
        "--set",
        "solver.alpha=1e308",
    ]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("at time"), "{stderr}");
}

#[test]
fn degenerate_zero_iteration_run_keeps_estimate_constant() {
    let dir = temp_dir("degenerate");
    let result = topotrack(&[
        "run",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "1",
        "--set",
        "scenario.total_steps=30",
        "--set",
        "scenario.segment_length=10",
        "--set",
        "solver.prediction_steps=0",
        "--set",
        "solver.correction_steps=0",
        "--set",
        "run.references=truth",
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("seed_1.csv")).unwrap();
    // Within a segment the truth is constant, so a constant estimate gives a
    // constant NMSE trajectory.
    let mut rows = csv.lines().skip(1);
    let first = rows.next().unwrap().split(',').nth(7).unwrap().to_string();
    let ninth = csv
        .lines()
        .nth(9)
        .unwrap()
        .split(',')
        .nth(7)
        .unwrap()
        .to_string();
    assert_eq!(first, ninth);
}

#[test]
fn sweep_grid_rows_and_baseline_equivalence() {
    let dir = temp_dir("sweep");
    let spec = dir.join("sweep.toml");
    std::fs::write(
        &spec,
        "[grid]\nprediction_steps = [0, 1]\ncorrection_steps = [1]\n",
    )
    .unwrap();
    let result = topotrack(&[
        "sweep",
        "--sweep",
        spec.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--set",
        "scenario.total_steps=60",
        "--set",
        "scenario.segment_length=20",
        "--set",
        "run.seeds=1,2",
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 3); // header + 2 combinations
                               // The prediction_steps=0 row is the correction-only baseline: its P-C
                               // and C-O columns coincide.
    let p0: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(p0[0], "0");
    assert_eq!(p0[6], p0[7], "pc vs co steady-state means in the P=0 row");
    let p1: Vec<&str> = rows[2].split(',').collect();
    assert_eq!(p1[0], "1");
    assert_ne!(p1[6], p1[7]);
}

#[test]
fn sweep_empty_grid_gives_empty_output() {
    let dir = temp_dir("sweep-empty");
    let spec = dir.join("sweep.toml");
    std::fs::write(&spec, "[grid]\n").unwrap();
    let result = topotrack(&[
        "sweep",
        "--sweep",
        spec.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1); // header only
    assert!(stdout_of(&result).contains("cells=0"));
}

#[test]
fn effective_config_echo_reflects_overrides() {
    let dir = temp_dir("echo");
    let result = topotrack(&[
        "run",
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "1",
        "--set",
        "scenario.total_steps=20",
        "--set",
        "scenario.segment_length=10",
        "--set",
        "solver.gamma=0.9",
        "--set",
        "run.references=truth",
    ]);
    assert!(result.status.success());
    let echoed = std::fs::read_to_string(dir.join("effective-config.toml")).unwrap();
    assert!(echoed.contains("gamma = 0.9"), "{echoed}");
    assert!(echoed.contains("total_steps = 20"), "{echoed}");
}
