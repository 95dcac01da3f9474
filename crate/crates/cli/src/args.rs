use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{ModelKind, RunConfig};
use crate::{cmd_evaluate, cmd_separate, cmd_synth, cmd_train, CliError};

#[derive(Debug, Parser)]
#[command(name = "cdaesep", version, about = "Single-channel source separation with convolutional denoising autoencoders")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Train one network per source on the manifest's train split
    Train,
    /// Separate every test mixture into per-source WAV files under --out
    Separate,
    /// Score the estimates under --out against the test references
    Evaluate,
    /// Write a synthetic corpus and its manifest to --out
    Synth,
}

#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// TOML file with the same keys as these flags
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    /// Directory of per-source weight snapshots
    #[arg(long, global = true, value_name = "DIR")]
    pub models: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Comma-separated subset of the manifest's sources
    #[arg(long, global = true, value_name = "CSV", value_delimiter = ',')]
    pub sources: Option<Vec<String>>,
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

impl Flags {
    /// Config file (if any) with the flags laid over it.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { cfg.$f = Some(v.clone()); })* };
        }
        set!(manifest, models, out, sources, threads);
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<(), CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Train => cmd_train(cfg).map(drop),
        Command::Separate => cmd_separate(cfg).map(drop),
        Command::Evaluate => cmd_evaluate(cfg).map(drop),
        Command::Synth => cmd_synth(cfg).map(drop),
    })
}

/// Parses arguments and runs the command, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match cli.flags.resolve().and_then(|cfg| run(cli.command, &cfg)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cdaesep: {e}");
            e.exit_code()
        }
    }
}
