//! Run configuration: a TOML file mirroring the command-line flags.
//!
//! ```toml
//! manifest = "corpus/manifest.toml"
//! models = "models"
//! out = "estimates"
//! model = "cdae"
//! seed = 7
//! sources = ["vocals", "drums"]
//! threads = 4
//!
//! [stft]
//! hop = 512
//!
//! [train]
//! max_epochs = 30
//!
//! [cdae]
//! channels = [4, 6, 8, 10, 8, 6, 4]
//! ```
//!
//! Flags override the file. `seed` seeds everything, including training, so
//! `train.seed` is ignored.

use std::path::{Path, PathBuf};

use cdaesep::data::{SourceSpec, SyntheticSpec};
use cdaesep::dsp::StftConfig;
use cdaesep::models::{Architecture, CdaeConfig, FnnConfig, ModelGraph, CDAE_CHANNELS};
use cdaesep::optim::TrainConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Cdae,
    Fnn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdaeSection {
    pub channels: [usize; 7],
}

impl Default for CdaeSection {
    fn default() -> Self {
        CdaeSection { channels: CDAE_CHANNELS }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FnnSection {
    pub hidden: usize,
    pub hidden_layers: usize,
}

impl Default for FnnSection {
    fn default() -> Self {
        let d = FnnConfig::default();
        FnnSection { hidden: d.hidden, hidden_layers: d.hidden_layers }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub train_items: usize,
    pub test_items: usize,
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub sources: Vec<SourceSpec>,
}

impl Default for SynthSection {
    fn default() -> Self {
        let spec = SyntheticSpec::default();
        SynthSection {
            train_items: 20,
            test_items: 5,
            sample_rate: spec.sample_rate,
            duration_secs: spec.duration_secs,
            sources: spec.sources,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub model: ModelKind,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub stft: StftConfig,
    pub train: TrainConfig,
    pub cdae: CdaeSection,
    pub fnn: FnnSection,
    pub synth: SynthSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = RunConfig::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.manifest, &mut cfg.models, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.stft.validate()?;
        self.train_config().validate()?;
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be positive".into()));
        }
        ModelGraph::build(self.architecture(), "check").map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train }
    }

    pub fn architecture(&self) -> Architecture {
        let bins = self.stft.kept_bins;
        match self.model {
            ModelKind::Cdae => Architecture::Cdae(CdaeConfig { channels: self.cdae.channels, bins, ..Default::default() }),
            ModelKind::Fnn => {
                Architecture::Fnn(FnnConfig { bins, hidden: self.fnn.hidden, hidden_layers: self.fnn.hidden_layers })
            }
        }
    }

    pub fn synthetic_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            sample_rate: self.synth.sample_rate,
            duration_secs: self.synth.duration_secs,
            seed: self.seed,
            sources: self.synth.sources.clone(),
        }
    }

    /// SHA-256 of every setting that can change results. Paths and the
    /// thread count are left out.
    pub fn hash(&self) -> String {
        let canonical = RunConfig { manifest: None, models: None, out: None, threads: None, ..self.clone() };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn provenance(&self) -> Provenance {
        Provenance { version: env!("CARGO_PKG_VERSION"), config_hash: self.hash(), seed: self.seed }
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str, command: &str) -> Result<&'a Path, CliError> {
        path.as_deref().ok_or_else(|| CliError::Usage(format!("{command} needs --{flag}")))
    }
}

/// Header written at the top of every output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!("tool: cdaesep {}\nconfig_hash: {}\nseed: {}", self.version, self.config_hash, self.seed)
    }
}
