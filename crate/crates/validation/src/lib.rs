//! Fixtures shared by the acceptance suite: the example problem corpus, the
//! report schema and the locator for the `msumma` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn cli_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli")
}

/// The `.msp` files under `crates/cli/problems`, sorted.
pub fn corpus() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(cli_dir().join("problems"))
        .expect("problem corpus")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "msp"))
        .collect();
    v.sort();
    v
}

pub fn problem(name: &str) -> PathBuf {
    cli_dir().join("problems").join(name)
}

/// `(text, line, column)` for each seeded malformed input.
pub fn malformed() -> Vec<(String, usize, usize)> {
    let text = std::fs::read_to_string(cli_dir().join("problems/malformed.json")).expect("malformed cases");
    let cases: Vec<serde_json::Value> = serde_json::from_str(&text).expect("malformed.json");
    cases
        .iter()
        .filter_map(|c| {
            Some((
                c["text"].as_str()?.to_string(),
                c["line"].as_u64()? as usize,
                c["column"].as_u64()? as usize,
            ))
        })
        .collect()
}

pub fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(cli_dir().join("schemas/summability_report.v1.json")).expect("schema file");
    let schema: serde_json::Value = serde_json::from_str(&text).expect("schema json");
    jsonschema::validator_for(&schema).expect("schema compiles")
}

pub fn schema_errors(v: &jsonschema::Validator, instance: &serde_json::Value) -> Vec<String> {
    v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

/// The `msumma` binary in the target directory of the running test executable.
pub fn msumma_binary() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let mut dir = exe.parent()?;
    if dir.ends_with("deps") {
        dir = dir.parent()?;
    }
    let bin = dir.join(format!("msumma{}", std::env::consts::EXE_SUFFIX));
    bin.exists().then_some(bin)
}

pub fn run_msumma(bin: &Path, args: &[&str], dir: &Path) -> Output {
    Command::new(bin)
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("MSUMMA_SEED")
        .output()
        .expect("msumma runs")
}
