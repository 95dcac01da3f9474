use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::SegmentBatch;
use crate::models::{save_weights, ModelGraph, TrainingMeta, WeightSnapshot};
use crate::optim::{nadam_step, NadamConfig, OptimizerState, PlateauSchedule};
use crate::{Error, Result, Tensor};

/// Examples per gradient work item. Fixed so that the reduction order, and
/// therefore every float, is independent of the thread count.
const GRAD_CHUNK: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub validation_fraction: f64,
    pub seed: u64,
    pub nadam: NadamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 100,
            max_epochs: 100,
            learning_rate: 0.002,
            plateau_patience: 3,
            plateau_factor: 0.1,
            validation_fraction: 0.1,
            seed: 0,
            nadam: NadamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad("validation_fraction must lie in (0, 1)");
        }
        if self.plateau_patience == 0 {
            return bad("plateau_patience must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.plateau_factor > 0.0 && self.plateau_factor <= 1.0) {
            return bad("learning_rate must be positive and plateau_factor in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Learning rate used during this epoch.
    pub lr: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

impl TrainLog {
    /// Tab-separated `epoch train_loss val_loss lr`, one epoch per line.
    /// Wall-clock time is left out so reruns produce identical files.
    pub fn to_tsv(&self, header: &str) -> String {
        let mut out = String::new();
        for line in header.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str("epoch\ttrain_loss\tval_loss\tlr\n");
        for e in &self.epochs {
            let _ = writeln!(out, "{}\t{:e}\t{:e}\t{:e}", e.epoch, e.train_loss, e.val_loss, e.lr);
        }
        out
    }

    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        crate::data::write_atomic(path, self.to_tsv(header).as_bytes())
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().fold(None, |b: Option<&EpochRecord>, e| match b {
            Some(b) if b.val_loss <= e.val_loss => Some(b),
            _ => Some(e),
        })
    }
}

pub struct TrainOutcome {
    /// Weights of the epoch with the lowest validation loss.
    pub model: ModelGraph,
    pub snapshot: WeightSnapshot,
    pub log: TrainLog,
    pub train_indices: Vec<usize>,
    pub val_indices: Vec<usize>,
}

/// Seeded shuffle of `0..n` split into (train, validation). The validation
/// set gets `round(n * fraction)` examples, at least one, and never all.
pub fn split_indices(n: usize, fraction: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 training examples, got {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_val = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
    let train = idx.split_off(n_val);
    Ok((train, idx))
}

/// Shuffled mini-batches covering `train` once; the last batch may be short.
pub fn epoch_batches(train: &[usize], batch_size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut order = train.to_vec();
    order.shuffle(rng);
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

fn sum_grads(parts: Vec<(f64, Vec<Tensor>)>) -> Result<(f64, Vec<Tensor>)> {
    let mut iter = parts.into_iter();
    let (mut loss, mut grads) = iter.next().ok_or_else(|| Error::Data("empty batch".into()))?;
    for (l, g) in iter {
        loss += l;
        for (acc, part) in grads.iter_mut().zip(&g) {
            acc.add_assign(part)?;
        }
    }
    Ok((loss, grads))
}

fn batch_loss_grad(
    model: &ModelGraph,
    inputs: &Tensor,
    targets: &Tensor,
    batch: &[usize],
) -> Result<(f64, Vec<Tensor>)> {
    let examples = batch.len() as f64;
    let parts = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| model.loss_and_grad(&inputs.gather(chunk)?, &targets.gather(chunk)?, examples))
        .collect::<Result<Vec<_>>>()?;
    sum_grads(parts)
}

/// Mean per-example loss of `model` over the selected examples.
pub fn evaluate_loss(model: &ModelGraph, inputs: &Tensor, targets: &Tensor, indices: &[usize]) -> Result<f64> {
    let parts = indices
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let out = model.forward(&inputs.gather(chunk)?)?;
            let tgt = targets.gather(chunk)?;
            out.check_same_shape(&tgt)?;
            Ok(out.data().iter().zip(tgt.data()).map(|(z, s)| (z - s) * (z - s)).sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(parts.into_iter().sum::<f64>() / indices.len() as f64)
}

/// Trains one source network to map mixture segments to target segments.
///
/// Runs on the current rayon pool; results do not depend on its size.
pub fn train_source_model(
    mut model: ModelGraph,
    mixture: &SegmentBatch,
    target: &SegmentBatch,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if mixture.segments.shape() != target.segments.shape() {
        return Err(Error::Shape(format!(
            "mixture segments {:?} vs target segments {:?}",
            mixture.segments.shape(),
            target.segments.shape()
        )));
    }
    if mixture.is_empty() {
        return Err(Error::Data("empty training set".into()));
    }
    let inputs = model.examples_from_segments(&mixture.segments)?;
    let targets = model.examples_from_segments(&target.segments)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (train_idx, val_idx) = split_indices(mixture.len(), config.validation_fraction, &mut rng)?;

    let mut state = OptimizerState::new(model.params(), config.learning_rate, config.nadam);
    let mut schedule = PlateauSchedule::new(config.plateau_patience, config.plateau_factor);
    let mut log = TrainLog::default();
    let mut best: Option<(f64, Vec<Tensor>)> = None;

    let diverged = |epoch, what, best: &Option<(f64, Vec<Tensor>)>, model: &ModelGraph| {
        let last_good = best.as_ref().map(|(loss, params)| {
            let mut m = model.clone();
            for (dst, src) in m.params_mut().into_iter().zip(params) {
                *dst = src.clone();
            }
            let mut snap = save_weights(&m);
            snap.meta = TrainingMeta { epochs_run: epoch - 1, final_val_loss: Some(*loss) };
            Box::new(snap)
        });
        Error::TrainingDiverged { epoch, what, last_good }
    };

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        let lr = state.learning_rate;
        let mut loss_sum = 0.0;
        for batch in epoch_batches(&train_idx, config.batch_size, &mut rng) {
            let (loss, grads) = batch_loss_grad(&model, &inputs, &targets, &batch)?;
            if !loss.is_finite() {
                return Err(diverged(epoch, "training loss", &best, &model));
            }
            match nadam_step(&mut model.params_mut(), &grads, &mut state) {
                Err(e) if e.is_numerical() => return Err(diverged(epoch, "gradient", &best, &model)),
                r => r?,
            }
            loss_sum += loss * batch.len() as f64;
        }
        let val_loss = evaluate_loss(&model, &inputs, &targets, &val_idx)?;
        if !val_loss.is_finite() {
            return Err(diverged(epoch, "validation loss", &best, &model));
        }
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train_idx.len() as f64,
            val_loss,
            lr,
            seconds: started.elapsed().as_secs_f64(),
        });
        if best.as_ref().is_none_or(|(b, _)| val_loss < *b) {
            best = Some((val_loss, model.params().into_iter().cloned().collect()));
        }
        state.learning_rate = schedule.observe(val_loss, lr);
    }

    let best_loss = best.as_ref().map(|(l, _)| *l);
    if let Some((_, params)) = best {
        for (dst, src) in model.params_mut().into_iter().zip(params) {
            *dst = src;
        }
    }
    let mut snapshot = save_weights(&model);
    snapshot.seed = config.seed;
    snapshot.meta = TrainingMeta { epochs_run: log.epochs.len(), final_val_loss: best_loss };
    Ok(TrainOutcome { model, snapshot, log, train_indices: train_idx, val_indices: val_idx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #[test]
        fn split_is_a_disjoint_cover(n in 2usize..400, frac in 0.01f64..0.99, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (train, val) = split_indices(n, frac, &mut rng).unwrap();
            let t: BTreeSet<_> = train.iter().copied().collect();
            let v: BTreeSet<_> = val.iter().copied().collect();
            prop_assert!(t.is_disjoint(&v));
            prop_assert_eq!(t.len() + v.len(), n);
            prop_assert!(!t.is_empty() && !v.is_empty());
            for batch in epoch_batches(&train, 7, &mut rng) {
                prop_assert!(batch.iter().all(|i| t.contains(i)));
            }
        }
    }

    #[test]
    fn batches_cover_training_set_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let train: Vec<usize> = (0..250).collect();
        let batches = epoch_batches(&train, 100, &mut rng);
        assert_eq!(batches.iter().map(Vec::len).collect::<Vec<_>>(), vec![100, 100, 50]);
        let mut all: Vec<usize> = batches.concat();
        all.sort();
        assert_eq!(all, train);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { validation_fraction: 1.0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { plateau_patience: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn log_file_has_one_line_per_epoch() {
        let log = TrainLog {
            epochs: (1..=3)
                .map(|e| EpochRecord { epoch: e, train_loss: 1.0, val_loss: 2.0, lr: 0.002, seconds: 0.1 })
                .collect(),
        };
        let text = log.to_tsv("seed=1");
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# seed=1");
        assert_eq!(lines[1], "epoch\ttrain_loss\tval_loss\tlr");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1\t1e0\t2e0\t2e-3");
    }
}
