use cdaesep::models::{init_weights, Architecture, CdaeConfig, FnnConfig, ModelGraph};
use cdaesep::nn::gradcheck::{check_kind, check_model, CHECKED_KINDS};
use cdaesep::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn layer_gradients_match_finite_differences() {
    for (i, kind) in CHECKED_KINDS.iter().enumerate() {
        let report = check_kind(kind, 20, 100 + i as u64).unwrap();
        assert_eq!(report.instances, 20);
        assert!(report.worst < 1e-4, "{kind}: worst relative error {:e}", report.worst);
    }
}

fn batch(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| rng.gen_range(0.0..1.0))
}

#[test]
fn small_cdae_gradient() {
    let arch = Architecture::Cdae(CdaeConfig { channels: [2, 3, 2, 2, 2, 3, 2], frames: 15, bins: 25 });
    let mut model = init_weights(ModelGraph::build(arch, "g").unwrap(), 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // positive biases keep units off the ReLU kink, where pooling would see ties
    for p in model.params_mut() {
        if p.shape().len() == 1 {
            p.data_mut().iter_mut().for_each(|b| *b = rng.gen_range(0.1..0.5));
        }
    }
    let x = batch(&mut rng, &[2, 1, 15, 25]);
    let t = batch(&mut rng, &[2, 1, 15, 25]);
    let err = check_model(&model, &x, &t).unwrap();
    assert!(err < 1e-4, "{err:e}");
}

#[test]
fn small_fnn_gradient() {
    let arch = Architecture::Fnn(FnnConfig { bins: 9, hidden: 7, hidden_layers: 3 });
    let model = init_weights(ModelGraph::build(arch, "g").unwrap(), 7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = batch(&mut rng, &[3, 9]);
    let t = batch(&mut rng, &[3, 9]);
    let err = check_model(&model, &x, &t).unwrap();
    assert!(err < 1e-4, "{err:e}");
}
