#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

/// Small corpus and network: two 0.5 s training items, two test items.
pub const TINY: &str = r#"
seed = 3

[train]
max_epochs = 2
batch_size = 4

[cdae]
channels = [2, 2, 2, 2, 2, 2, 2]

[fnn]
hidden = 8
hidden_layers = 1

[synth]
train_items = 2
test_items = 2
duration_secs = 0.5
"#;

pub fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("run.toml");
    let text = format!(
        "manifest = \"corpus/manifest.toml\"\nmodels = \"models\"\nout = \"est\"\n{}{TINY}",
        extra
    );
    std::fs::write(&path, text).unwrap();
    path
}

pub fn cdaesep(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cdaesep")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

pub fn cdaesep_ok(args: &[&str]) {
    let (code, err) = cdaesep(args);
    assert_eq!(code, 0, "cdaesep {args:?} failed: {err}");
}
