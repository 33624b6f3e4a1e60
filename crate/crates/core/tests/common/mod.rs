#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use sha2::{Digest, Sha256};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn fixture_scenarios() -> PathBuf {
    repo_root().join("fixtures/scenarios")
}

pub fn golden_dir() -> PathBuf {
    repo_root().join("fixtures/golden")
}

/// Runs the CLI in-process; returns (exit code, stdout, stderr).
pub fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = rasaeco::cli::run(std::iter::once("rasaeco").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Runs the built binary with extra environment variables.
pub fn run_binary(args: &[&str], env: &[(&str, &str)]) -> (i32, String, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rasaeco"));
    cmd.args(args).env_remove("RASAECO_NO_PARALLEL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let output = cmd.output().expect("run rasaeco binary");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).unwrap(),
        String::from_utf8(output.stderr).unwrap(),
    )
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn copy_tree(from: &Path, to: &Path) {
    for entry in walkdir::WalkDir::new(from) {
        let entry = entry.unwrap();
        let rel = entry.path().strip_prefix(from).unwrap();
        let target = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&target).unwrap();
        } else {
            fs::copy(entry.path(), &target).unwrap();
        }
    }
}

/// Relative path (with `/`) to file contents for every file under `dir`.
pub fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.unwrap();
        if entry.file_type().is_file() {
            let rel = entry.path().strip_prefix(dir).unwrap();
            let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            files.insert(key, fs::read(entry.path()).unwrap());
        }
    }
    files
}

/// SHA-256 of every file, keyed by relative path.
pub fn hash_tree(dir: &Path) -> BTreeMap<String, String> {
    read_tree(dir)
        .into_iter()
        .map(|(k, v)| (k, hex::encode(Sha256::digest(&v))))
        .collect()
}

/// Writes one scenario file per (identifier, source) pair.
pub fn write_corpus(dir: &Path, files: &[(&str, String)]) {
    for (id, source) in files {
        fs::create_dir_all(dir.join(id)).unwrap();
        fs::write(dir.join(id).join("scenario.md"), source).unwrap();
    }
}

pub const CUBOID: &str = r#"{"aspect_from":"cost","aspect_to":"cost","phase_from":"planning","phase_to":"planning","level_from":"site","level_to":"site"}"#;

/// A scenario source with a single-cell volumetric.
pub fn scenario(title: &str, relations: &str, body: &str) -> String {
    format!("<rasaeco-meta>{{\"title\":\"{title}\",\"relations\":[{relations}],\"volumetric\":[{CUBOID}]}}</rasaeco-meta>\n{body}")
}

/// 1-based (line, column in chars) of the first occurrence of `needle`.
pub fn position_of(source: &str, needle: &str) -> (u32, u32) {
    let at = source.find(needle).unwrap_or_else(|| panic!("'{needle}' not in source"));
    let before = &source[..at];
    let line = before.matches('\n').count() as u32 + 1;
    let col = before.rsplit('\n').next().unwrap().chars().count() as u32 + 1;
    (line, col)
}
