#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(root().join("problems"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "msp"))
        .collect();
    v.sort();
    v
}

pub fn problem(name: &str) -> PathBuf {
    root().join("problems").join(name)
}

pub fn msumma(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msumma"))
        .args(args)
        .current_dir(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("MSUMMA_SEED")
        .output()
        .expect("binary runs")
}

pub fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schemas/summability_report.v1.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

pub fn schema_errors(v: &jsonschema::Validator, instance: &serde_json::Value) -> Vec<String> {
    v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect()
}

/// Malformed problems with the position the diagnostic must point at.
pub fn malformed() -> Vec<(String, usize, usize)> {
    let text = std::fs::read_to_string(root().join("problems/malformed.json")).unwrap();
    let cases: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    cases
        .iter()
        .map(|c| {
            (
                c["text"].as_str().unwrap().to_string(),
                c["line"].as_u64().unwrap() as usize,
                c["column"].as_u64().unwrap() as usize,
            )
        })
        .collect()
}
