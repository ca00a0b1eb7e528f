#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use camo_core::RasterImage;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(name: &str) -> PathBuf {
    repo_root().join("fixtures").join(name)
}

pub fn load(name: &str) -> RasterImage {
    RasterImage::decode_png(&fs::read(fixture(name)).unwrap()).unwrap()
}

pub fn camo() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_camo"));
    cmd.env_remove("CAMO_EVAL_SEED");
    cmd
}

pub fn run(args: &[&str]) -> Output {
    camo().args(args).output().unwrap()
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "camo {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

pub fn sha256_file(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Panics with every violation if `instance` does not satisfy the named
/// schema from the repository's `schemas/` directory.
pub fn assert_schema(schema_file: &str, instance: &Value) {
    let schema = read_json(&repo_root().join("schemas").join(schema_file));
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_file}: {errors:#?}");
}
