//! Audio files, dataset manifests and synthetic corpora.

mod manifest;
mod synth;
mod wav;

pub use manifest::{iterate_pairs, load_manifest, DatasetManifest, ItemAudio, ManifestItem, Split};
pub use synth::{generate_synthetic, write_corpus, Generator, SourceSpec, SyntheticItem, SyntheticSpec};
pub use wav::{load_audio, load_audio_channels, load_audio_mono, save_audio, to_mono, SampleFormat};

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path.file_name().ok_or_else(|| Error::Data(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
