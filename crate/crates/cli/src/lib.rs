//! Command-line pipeline: synthesize a corpus, train one network per
//! source, separate test mixtures and score the estimates.

mod args;
mod commands;
mod config;

pub use args::{run, run_cli, Cli, Command, Flags};
pub use commands::{
    cmd_evaluate, cmd_separate, cmd_synth, cmd_train, estimate_path, log_path, model_seed, snapshot_path,
    EVAL_FILE, PROVENANCE_FILE, SUMMARY_FILE,
};
pub use config::{CdaeSection, FnnSection, ModelKind, Provenance, RunConfig, SynthSection};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] cdaesep::Error),

    /// Some sources failed to train; the others were written.
    #[error("training failed for {}", .0.iter().map(|(s, e)| format!("{s} ({e})")).collect::<Vec<_>>().join(", "))]
    Sources(Vec<(String, cdaesep::Error)>),
}

fn core_exit_code(e: &cdaesep::Error) -> u8 {
    use cdaesep::Error::*;
    match e {
        Config(_) => 1,
        NonFinite(_) | TrainingDiverged { .. } => 3,
        Shape(_) | Signal(_) | Data(_) | Io { .. } | Wav { .. } | Snapshot(_) | Degenerate(_) => 2,
    }
}

impl CliError {
    /// 1 usage or configuration, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => core_exit_code(e),
            CliError::Sources(list) => list.iter().map(|(_, e)| core_exit_code(e)).max().unwrap_or(2),
        }
    }
}
