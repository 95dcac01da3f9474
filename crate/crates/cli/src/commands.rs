use std::path::{Path, PathBuf};

use cdaesep::bsseval::{evaluate_item, normalize, EvalReport};
use cdaesep::data::{
    iterate_pairs, load_audio_mono, load_manifest, save_audio, write_atomic, write_corpus, DatasetManifest,
    ItemAudio, SampleFormat, Split,
};
use cdaesep::dsp::{segment, stft, AudioSignal, SegmentBatch};
use cdaesep::models::{init_weights, load_weights, ModelGraph, WeightSnapshot};
use cdaesep::optim::{train_source_model, TrainConfig};
use cdaesep::separation::separate;
use cdaesep::Error;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::CliError;

pub const EVAL_FILE: &str = "eval.csv";
pub const SUMMARY_FILE: &str = "eval_summary.csv";
pub const PROVENANCE_FILE: &str = "provenance.txt";

pub fn snapshot_path(models: &Path, source: &str) -> PathBuf {
    models.join(format!("{source}.snap"))
}

pub fn log_path(models: &Path, source: &str) -> PathBuf {
    models.join(format!("{source}.train.tsv"))
}

pub fn estimate_path(out: &Path, item_id: &str, source: &str) -> PathBuf {
    out.join(item_id).join(format!("{source}.wav"))
}

/// Per-source seed, so that adding or reordering sources leaves the
/// others unchanged.
pub fn model_seed(seed: u64, source: &str) -> u64 {
    source.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)) ^ seed
}

fn write_provenance(dir: &Path, cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    let text = format!("{}\ncommand: {command}\n\n{}", cfg.provenance().header(), cfg.to_toml());
    Ok(write_atomic(&dir.join(PROVENANCE_FILE), text.as_bytes())?)
}

/// Requested sources with their stem index in the manifest.
fn selected_sources(cfg: &RunConfig, manifest: &DatasetManifest) -> Result<Vec<(usize, String)>, CliError> {
    let names = cfg.sources.clone().unwrap_or_else(|| manifest.sources.clone());
    if names.is_empty() {
        return Err(CliError::Usage("no sources selected".into()));
    }
    names
        .into_iter()
        .map(|n| match manifest.sources.iter().position(|s| *s == n) {
            Some(i) => Ok((i, n)),
            None => Err(CliError::Usage(format!("source {n} is not declared in the manifest"))),
        })
        .collect()
}

fn load_split(manifest: &DatasetManifest, split: Split) -> Result<Vec<ItemAudio>, CliError> {
    let items: Vec<ItemAudio> = iterate_pairs(manifest, split).collect::<cdaesep::Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Data(format!("manifest has no {split:?} items").to_lowercase()).into());
    }
    Ok(items)
}

fn segments_of(
    items: &[ItemAudio],
    cfg: &RunConfig,
    frames: usize,
    pick: impl Fn(&ItemAudio) -> &AudioSignal + Sync,
) -> cdaesep::Result<SegmentBatch> {
    let batches = items
        .par_iter()
        .map(|item| segment(stft(pick(item), &cfg.stft)?.magnitude(), frames))
        .collect::<cdaesep::Result<Vec<_>>>()?;
    SegmentBatch::concat(&batches)
}

/// Trains one network per selected source and writes `<source>.snap` and
/// `<source>.train.tsv` under `--models`. Sources that diverge are
/// reported together after the others finish; their best weights so far go
/// to `<source>.lastgood.snap`.
pub fn cmd_train(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let manifest = load_manifest(cfg.require(&cfg.manifest, "manifest", "train")?)?;
    let models = cfg.require(&cfg.models, "models", "train")?;
    let sources = selected_sources(cfg, &manifest)?;
    let items = load_split(&manifest, Split::Train)?;
    let arch = cfg.architecture();
    let frames = arch.frames_per_example();
    let mixture = segments_of(&items, cfg, frames, |i| &i.mixture)?;
    let header = cfg.provenance().header();

    let mut written = Vec::new();
    let mut failures = Vec::new();
    for (index, name) in sources {
        let target = segments_of(&items, cfg, frames, |i| &i.stems[index])?;
        let seed = model_seed(cfg.seed, &name);
        let model = init_weights(ModelGraph::build(arch, name.clone())?, seed);
        let train = TrainConfig { seed, ..cfg.train_config() };
        let source_header = format!("{header}\nsource: {name}\nmodel: {}", arch.descriptor());
        match train_source_model(model, &mixture, &target, &train) {
            Ok(mut outcome) => {
                outcome.snapshot.provenance = source_header.clone();
                let path = snapshot_path(models, &name);
                outcome.snapshot.write(&path)?;
                outcome.log.write(&log_path(models, &name), &source_header)?;
                if let Some(best) = outcome.log.best() {
                    eprintln!(
                        "{name}: {} epochs, best validation loss {:.6e} at epoch {}",
                        outcome.log.epochs.len(),
                        best.val_loss,
                        best.epoch
                    );
                }
                written.push(path);
            }
            Err(e) if e.is_numerical() => {
                if let Error::TrainingDiverged { last_good: Some(snap), .. } = &e {
                    let mut snap = snap.clone();
                    snap.provenance = source_header;
                    snap.write(&models.join(format!("{name}.lastgood.snap")))?;
                }
                eprintln!("{name}: {e}");
                failures.push((name, e));
            }
            Err(e) => return Err(e.into()),
        }
    }
    if failures.is_empty() {
        write_provenance(models, cfg, "train")?;
        Ok(written)
    } else {
        Err(CliError::Sources(failures))
    }
}

fn load_models(cfg: &RunConfig, dir: &Path, sources: &[(usize, String)]) -> Result<Vec<ModelGraph>, CliError> {
    sources
        .iter()
        .map(|(_, name)| {
            let path = snapshot_path(dir, name);
            if !path.exists() {
                return Err(Error::Data(format!("missing snapshot for source {name}: {}", path.display())).into());
            }
            let mut model = load_weights(&WeightSnapshot::read(&path)?)?;
            if model.architecture().bins() != cfg.stft.kept_bins {
                return Err(Error::Data(format!(
                    "snapshot {} expects {} bins, STFT gives {}",
                    path.display(),
                    model.architecture().bins(),
                    cfg.stft.kept_bins
                ))
                .into());
            }
            model.name = name.clone();
            Ok(model)
        })
        .collect()
}

/// Separates every test item and writes `<out>/<item>/<source>.wav`.
pub fn cmd_separate(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let manifest = load_manifest(cfg.require(&cfg.manifest, "manifest", "separate")?)?;
    let models_dir = cfg.require(&cfg.models, "models", "separate")?;
    let out = cfg.require(&cfg.out, "out", "separate")?;
    let sources = selected_sources(cfg, &manifest)?;
    let models = load_models(cfg, models_dir, &sources)?;

    let mut written = Vec::new();
    for item in load_split(&manifest, Split::Test)? {
        let spec = stft(&item.mixture, &cfg.stft)?;
        let estimates = separate(&models, &spec)?.reconstruct_all()?;
        for ((_, name), signal) in sources.iter().zip(&estimates) {
            let path = estimate_path(out, &item.id, name);
            save_audio(signal, &path, SampleFormat::Float32)?;
            written.push(path);
        }
    }
    write_provenance(out, cfg, "separate")?;
    Ok(written)
}

/// Scores the estimates under `--out` and writes the per-item table and
/// the per-source quartile summary next to them.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvalReport, CliError> {
    let manifest = load_manifest(cfg.require(&cfg.manifest, "manifest", "evaluate")?)?;
    let out = cfg.require(&cfg.out, "out", "evaluate")?;
    let sources = selected_sources(cfg, &manifest)?;
    let names: Vec<String> = sources.iter().map(|(_, n)| n.clone()).collect();

    let mut report = EvalReport::default();
    let mut baseline = EvalReport::default();
    for item in load_split(&manifest, Split::Test)? {
        let references: Vec<&[f64]> = sources.iter().map(|(i, _)| item.stems[*i].samples()).collect();
        let estimates = names
            .iter()
            .map(|name| {
                let path = estimate_path(out, &item.id, name);
                let audio = load_audio_mono(&path)?;
                if audio.len() != item.mixture.len() {
                    return Err(Error::Data(format!(
                        "{}: {} samples, reference has {}",
                        path.display(),
                        audio.len(),
                        item.mixture.len()
                    )));
                }
                Ok(audio)
            })
            .collect::<cdaesep::Result<Vec<_>>>()?;
        let est: Vec<&[f64]> = estimates.iter().map(AudioSignal::samples).collect();
        report.rows.extend(evaluate_item(&item.id, &names, &est, &references)?);
        let mix = vec![item.mixture.samples(); names.len()];
        baseline.rows.extend(evaluate_item(&item.id, &names, &mix, &references)?);
    }
    let report = normalize(&report, &baseline)?;
    let header = cfg.provenance().header();
    write_atomic(&out.join(EVAL_FILE), report.to_csv(&header).as_bytes())?;
    write_atomic(&out.join(SUMMARY_FILE), report.summary_csv(&header).as_bytes())?;
    Ok(report)
}

/// Writes the synthetic corpus described by `[synth]` to `--out`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let out = cfg.require(&cfg.out, "out", "synth")?;
    let spec = cfg.synthetic_spec();
    spec.validate()?;
    let manifest = write_corpus(&spec, cfg.synth.train_items, cfg.synth.test_items, out)?;
    write_provenance(out, cfg, "synth")?;
    Ok(manifest)
}
