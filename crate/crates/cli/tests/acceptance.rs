//! Acceptance criterion 9: byte-identical outputs for identical runs.

use std::path::PathBuf;
use std::process::Command;

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("topotrack-acc-{}-{}", tag, std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn criterion_9_run_determinism() {
    let dirs = [temp_dir("det-a"), temp_dir("det-b")];
    for dir in &dirs {
        let result = Command::new(env!("CARGO_BIN_EXE_topotrack"))
            .args(["run", "--seed", "3", "--out", dir.to_str().unwrap()])
            .output()
            .expect("binary runs");
        assert!(
            result.status.success(),
            "criterion 9: FAIL — run errored: {}",
            String::from_utf8_lossy(&result.stderr)
        );
    }
    for file in ["seed_3.csv", "aggregate.csv", "effective-config.toml"] {
        let a = std::fs::read(dirs[0].join(file)).unwrap();
        let b = std::fs::read(dirs[1].join(file)).unwrap();
        assert_eq!(
            a, b,
            "criterion 9: FAIL — {file} differs between identical invocations"
        );
    }
    println!("criterion 9 (run determinism): PASS — per-seed CSV, aggregate CSV and config echo byte-identical");
}
