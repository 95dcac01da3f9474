//! Dataset manifests: TOML files listing items, their split and stem files.
//!
//! ```toml
//! sample_rate = 44100
//! sources = ["vocals", "bass", "drums", "other"]
//!
//! [[item]]
//! id = "song001"
//! split = "train"
//! mixture = "song001/mixture.wav"   # optional; defaults to the stem sum
//! [item.stems]
//! vocals = "song001/vocals.wav"
//! bass = "song001/bass.wav"
//! drums = "song001/drums.wav"
//! other = "song001/other.wav"
//! ```
//!
//! Relative paths resolve against the manifest's directory.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::wav::load_audio_mono;
use crate::dsp::AudioSignal;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestItem {
    pub id: String,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<PathBuf>,
    pub stems: BTreeMap<String, PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub sample_rate: u32,
    pub sources: Vec<String>,
    #[serde(rename = "item", default)]
    pub items: Vec<ManifestItem>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Mixture and stems of one item, stems in manifest source order.
#[derive(Clone, Debug)]
pub struct ItemAudio {
    pub id: String,
    pub mixture: AudioSignal,
    pub stems: Vec<AudioSignal>,
}

impl DatasetManifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<DatasetManifest> {
        let mut m: DatasetManifest = toml::from_str(text).map_err(|e| Error::Data(format!("manifest: {e}")))?;
        m.base_dir = base_dir.to_path_buf();
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::Data("manifest: sample_rate must be positive".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::Data("manifest: no sources declared".into()));
        }
        let mut ids = HashSet::new();
        for item in &self.items {
            if !ids.insert(&item.id) {
                return Err(Error::Data(format!("manifest: duplicate item id {}", item.id)));
            }
            for source in &self.sources {
                if !item.stems.contains_key(source) {
                    return Err(Error::Data(format!("manifest: item {} has no stem for {source}", item.id)));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Data(format!("manifest: {e}")))
    }

    pub fn items_in(&self, split: Split) -> impl Iterator<Item = &ManifestItem> {
        self.items.iter().filter(move |i| i.split == split)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    fn load_checked(&self, item: &ManifestItem, what: &str, path: &Path) -> Result<AudioSignal> {
        let full = self.resolve(path);
        if !full.exists() {
            return Err(Error::Data(format!("item {}: {what} file {} is missing", item.id, full.display())));
        }
        let audio = load_audio_mono(&full)?;
        if audio.sample_rate() != self.sample_rate {
            return Err(Error::Data(format!(
                "item {}: {what} is {} Hz, manifest says {} Hz",
                item.id,
                audio.sample_rate(),
                self.sample_rate
            )));
        }
        Ok(audio)
    }

    pub fn load_item(&self, item: &ManifestItem) -> Result<ItemAudio> {
        let stems = self
            .sources
            .iter()
            .map(|s| self.load_checked(item, &format!("stem {s}"), &item.stems[s]))
            .collect::<Result<Vec<_>>>()?;
        let len = stems[0].len();
        if stems.iter().any(|s| s.len() != len) {
            return Err(Error::Data(format!("item {}: stems differ in length", item.id)));
        }
        let mixture = match &item.mixture {
            Some(p) => {
                let m = self.load_checked(item, "mixture", p)?;
                if m.len() != len {
                    return Err(Error::Data(format!("item {}: mixture and stems differ in length", item.id)));
                }
                m
            }
            None => {
                let mut sum = vec![0.0; len];
                for s in &stems {
                    sum.iter_mut().zip(s.samples()).for_each(|(a, b)| *a += b);
                }
                AudioSignal::new(sum, self.sample_rate)?
            }
        };
        Ok(ItemAudio { id: item.id.clone(), mixture, stems })
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    DatasetManifest::parse(&text, base)
}

/// Loads the items of one split, in manifest order.
pub fn iterate_pairs(manifest: &DatasetManifest, split: Split) -> impl Iterator<Item = Result<ItemAudio>> + '_ {
    manifest.items_in(split).map(move |item| manifest.load_item(item))
}
