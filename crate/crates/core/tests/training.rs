use cdaesep::dsp::SegmentBatch;
use cdaesep::models::{init_weights, Architecture, CdaeConfig, FnnConfig, ModelGraph};
use cdaesep::optim::{evaluate_loss, train_source_model, TrainConfig};
use cdaesep::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn batch_of(segments: Tensor) -> SegmentBatch {
    let n = segments.shape()[0];
    SegmentBatch { segments, origin: (0..n).map(|i| i * 15).collect(), pad_frames: 0 }
}

fn tiny_cdae(seed: u64) -> ModelGraph {
    let arch = Architecture::Cdae(CdaeConfig { channels: [4, 4, 4, 4, 4, 4, 4], frames: 15, bins: 25 });
    init_weights(ModelGraph::build(arch, "tiny").unwrap(), seed)
}

fn tiny_fnn(seed: u64) -> ModelGraph {
    let arch = Architecture::Fnn(FnnConfig { bins: 10, hidden: 16, hidden_layers: 2 });
    init_weights(ModelGraph::build(arch, "tiny").unwrap(), seed)
}

/// Smooth nonnegative planes that a bottlenecked network can represent.
fn smooth_segments(n: usize, seed: u64) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * 15 * 25);
    for _ in 0..n {
        let (a, b, c) = (rng.gen_range(0.2..1.0), rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0));
        for t in 0..15 {
            for f in 0..25 {
                data.push(a * (1.0 + (b + 0.2 * t as f64).sin() * (c + 0.1 * f as f64).cos()));
            }
        }
    }
    Tensor::from_vec(&[n, 15, 25], data).unwrap()
}

fn config(epochs: usize) -> TrainConfig {
    TrainConfig { batch_size: 8, max_epochs: epochs, seed: 3, ..Default::default() }
}

#[test]
fn identity_task_loss_falls() {
    let x = batch_of(smooth_segments(40, 1));
    let out = train_source_model(tiny_cdae(2), &x, &x, &config(30)).unwrap();
    let first = out.log.epochs[0].val_loss;
    let best = out.log.best().unwrap().val_loss;
    assert!(best < 0.2 * first, "first {first} best {best}");
}

#[test]
fn fnn_memorizes_two_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let seg = Tensor::from_fn(&[2, 1, 10], |_| rng.gen_range(0.0..1.0));
    let target = Tensor::from_fn(&[2, 1, 10], |_| rng.gen_range(0.0..1.0));
    let cfg = TrainConfig { batch_size: 2, max_epochs: 400, seed: 1, plateau_patience: 50, ..Default::default() };
    let m = SegmentBatch { segments: seg, origin: vec![0, 1], pad_frames: 0 };
    let t = SegmentBatch { segments: target, origin: vec![0, 1], pad_frames: 0 };
    // start every output unit active; a unit that is dead at init never learns
    let mut model = tiny_fnn(5);
    for p in model.params_mut().into_iter().filter(|p| p.shape().len() == 1) {
        p.data_mut().fill(0.5);
    }
    let out = train_source_model(model, &m, &t, &cfg).unwrap();
    let last = out.log.epochs.last().unwrap();
    assert!(last.train_loss < 1e-3, "train loss {}", last.train_loss);
}

#[test]
fn recorded_validation_loss_matches_recomputation() {
    let x = batch_of(smooth_segments(20, 5));
    let y = batch_of(smooth_segments(20, 6));
    let out = train_source_model(tiny_cdae(7), &x, &y, &config(4)).unwrap();
    let inputs = out.model.examples_from_segments(&x.segments).unwrap();
    let targets = out.model.examples_from_segments(&y.segments).unwrap();
    let again = evaluate_loss(&out.model, &inputs, &targets, &out.val_indices).unwrap();
    assert_eq!(again, out.log.best().unwrap().val_loss);
    assert_eq!(out.snapshot.meta.final_val_loss, Some(again));
}

#[test]
fn result_is_independent_of_thread_count() {
    let x = batch_of(smooth_segments(24, 8));
    let y = batch_of(smooth_segments(24, 9));
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| train_source_model(tiny_cdae(10), &x, &y, &config(3)).unwrap())
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.snapshot.to_bytes(), b.snapshot.to_bytes());
    assert_eq!(a.log.to_tsv(""), b.log.to_tsv(""));
}

#[test]
fn validation_targets_never_touch_training() {
    let x = batch_of(smooth_segments(20, 11));
    let y = smooth_segments(20, 12);
    // patience beyond the run keeps the learning rate independent of validation
    let cfg = TrainConfig { plateau_patience: 100, ..config(5) };
    let a = train_source_model(tiny_cdae(13), &x, &batch_of(y.clone()), &cfg).unwrap();

    let mut poisoned = y.clone();
    let per = 15 * 25;
    for &v in &a.val_indices {
        poisoned.data_mut()[v * per..(v + 1) * per].iter_mut().for_each(|s| *s = 1e3);
    }
    let b = train_source_model(tiny_cdae(13), &x, &batch_of(poisoned), &cfg).unwrap();
    assert_eq!(a.val_indices, b.val_indices);
    let train_a: Vec<f64> = a.log.epochs.iter().map(|e| e.train_loss).collect();
    let train_b: Vec<f64> = b.log.epochs.iter().map(|e| e.train_loss).collect();
    assert_eq!(train_a, train_b);
    assert!(b.log.epochs[0].val_loss > 100.0 * a.log.epochs[0].val_loss);
}

#[test]
fn learning_rate_column_follows_the_plateau_rule() {
    let x = batch_of(smooth_segments(20, 14));
    let y = batch_of(smooth_segments(20, 15));
    let cfg = TrainConfig { plateau_patience: 1, ..config(8) };
    let out = train_source_model(tiny_cdae(16), &x, &y, &cfg).unwrap();
    let losses: Vec<f64> = out.log.epochs.iter().map(|e| e.val_loss).collect();
    let expected = cdaesep::optim::plateau_schedule(&losses, cfg.learning_rate, 1, cfg.plateau_factor);
    for (i, e) in out.log.epochs.iter().enumerate().skip(1) {
        assert_eq!(e.lr, expected[i - 1]);
    }
    assert_eq!(out.log.epochs[0].lr, cfg.learning_rate);
}

#[test]
fn too_few_examples_is_a_data_error() {
    let x = batch_of(smooth_segments(1, 0));
    let err = train_source_model(tiny_cdae(0), &x, &x, &config(1)).err().unwrap();
    assert!(matches!(err, cdaesep::Error::Data(_)));
}
