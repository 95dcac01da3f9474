//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cdaesep::bsseval::{decompose, sdr_sir_sar, DB_CAP};
use cdaesep::dsp::{istft, stft, AudioSignal, StftConfig};
use cdaesep::models::{build_cdae, build_fnn};
use cdaesep::nn::gradcheck::{check_kind, CHECKED_KINDS};
use cdaesep::optim::plateau_schedule;
use cdaesep::separation::{apply_masks, build_masks, MASK_FLOOR};
use cdaesep_cli::{run, Command, ModelKind, RunConfig, EVAL_FILE, SUMMARY_FILE};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn parameter_counts() -> Outcome {
    // every conv is 3x3 with a bias; every dense layer has a bias
    let chain = [1, 12, 20, 30, 40, 30, 20, 12, 1];
    let cdae_oracle: usize = chain.windows(2).map(|w| 9 * w[0] * w[1] + w[1]).sum();
    let fnn_oracle = 4 * (1025 * 1025 + 1025);
    let (cdae, fnn) = (build_cdae().parameter_count(), build_fnn().parameter_count());
    ensure(cdae == 37_101 && cdae_oracle == 37_101, || format!("cdae {cdae}, oracle {cdae_oracle}"))?;
    ensure(fnn == 4_206_600 && fnn_oracle == 4_206_600, || format!("fnn {fnn}, oracle {fnn_oracle}"))?;
    Ok(format!("cdae {cdae}, fnn {fnn}"))
}

fn shape_chain() -> Outcome {
    let table: [(&str, usize, usize, usize); 12] = [
        ("conv2d", 12, 15, 1025),
        ("maxpool2d", 12, 5, 205),
        ("conv2d", 20, 5, 205),
        ("maxpool2d", 20, 5, 41),
        ("conv2d", 30, 5, 41),
        ("conv2d", 40, 5, 41),
        ("conv2d", 30, 5, 41),
        ("conv2d", 20, 5, 41),
        ("upsample2d", 20, 5, 205),
        ("conv2d", 12, 5, 205),
        ("upsample2d", 12, 15, 1025),
        ("conv2d", 1, 15, 1025),
    ];
    let model = build_cdae();
    ensure(model.input_shape() == [1, 15, 1025], || format!("input {:?}", model.input_shape()))?;
    let got: Vec<(&str, Vec<usize>)> = model.shape_chain().into_iter().filter(|(k, _)| *k != "relu").collect();
    ensure(got.len() == table.len(), || format!("{} shape-changing layers, table has 12", got.len()))?;
    for (i, ((kind, shape), (want_kind, c, h, w))) in got.iter().zip(table).enumerate() {
        ensure(*kind == want_kind && shape[..] == [c, h, w], || {
            format!("row {}: {kind} {shape:?}, expected {want_kind} [{c}, {h}, {w}]", i + 1)
        })?;
    }
    // a ReLU follows every convolution, the output layer included
    let layers = model.layers();
    let ok = layers.iter().enumerate().all(|(i, l)| l.kind() != "conv2d" || layers.get(i + 1).map(|n| n.kind()) == Some("relu"));
    ensure(ok, || "convolution without a following ReLU".into())?;
    Ok("(15,1025)->(5,205)->(5,205)->(5,41)x5->(5,205)->(5,205)->(15,1025)->(15,1025)".into())
}

fn gradient_suite() -> Outcome {
    let started = Instant::now();
    let mut parts = Vec::new();
    for (i, kind) in CHECKED_KINDS.iter().enumerate() {
        let r = check_kind(kind, 20, 1000 + i as u64).map_err(|e| e.to_string())?;
        ensure(r.instances >= 20 && r.worst < 1e-4, || format!("{kind}: worst relative error {:e}", r.worst))?;
        parts.push(format!("{kind} {:.1e}", r.worst));
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("20 instances each, worst: {} ({:.1?})", parts.join(", "), elapsed))
}

fn stft_round_trip() -> Outcome {
    let started = Instant::now();
    let cfg = StftConfig::default();
    ensure(cfg.window_length == 2048 && cfg.hop == 512, || "unexpected defaults".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.gen_range(2048..=50_000);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = istft(&stft(&AudioSignal::new(x.clone(), 44_100).unwrap(), &cfg).unwrap()).unwrap();
        ensure(y.len() >= n, || format!("length {n} came back as {}", y.len()))?;
        let err: f64 = x.iter().zip(y.samples()).map(|(a, b)| (a - b).powi(2)).sum();
        let sig: f64 = x.iter().map(|a| a * a).sum();
        worst = worst.min(10.0 * (sig / err).log10());
    }
    let elapsed = started.elapsed();
    ensure(worst > 60.0, || format!("worst SNR {worst:.1} dB"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("worst SNR {worst:.1} dB over 50 signals ({elapsed:.1?})"))
}

fn mask_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for sources in 2..=4 {
        for _ in 0..25 {
            let dim = (rng.gen_range(1..40), rng.gen_range(1..60));
            let estimates: Vec<Array2<f64>> = (0..sources)
                .map(|_| {
                    Array2::from_shape_fn(dim, |_| {
                        // occasional all-zero bins exercise the floor
                        if rng.gen_bool(0.05) {
                            0.0
                        } else {
                            rng.gen_range(0.0..10.0f64).powi(3)
                        }
                    })
                })
                .collect();
            let mixture = Array2::from_shape_fn(dim, |_| rng.gen_range(0.0..100.0));
            let masks = build_masks(&estimates).map_err(|e| e.to_string())?;
            let masked = apply_masks(&masks, &mixture).map_err(|e| e.to_string())?;
            for ((t, f), &y) in mixture.indexed_iter() {
                let total: f64 = estimates.iter().map(|e| e[[t, f]]).sum();
                let m: Vec<f64> = masks.iter().map(|m| m[[t, f]]).collect();
                ensure(m.iter().all(|v| (0.0..=1.0).contains(v)), || format!("mask outside [0,1]: {m:?}"))?;
                if total >= MASK_FLOOR {
                    let s: f64 = m.iter().sum();
                    ensure((s - 1.0).abs() <= 1e-6, || format!("masks sum to {s}"))?;
                }
                let recon: f64 = masked.iter().map(|s| s[[t, f]]).sum();
                ensure((recon - y).abs() <= 1e-6 * y.abs().max(f64::MIN_POSITIVE), || {
                    format!("masked sum {recon} vs mixture {y}")
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} bins over 75 estimate sets, I in 2..=4"))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn bss_oracles() -> Outcome {
    let n = 4096;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let noise = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let (a, b) = (noise(&mut rng), noise(&mut rng));

    let perfect = sdr_sir_sar(&decompose(&a, 0, &[&a, &b]).map_err(|e| e.to_string())?);
    ensure([perfect.sdr, perfect.sir, perfect.sar] == [DB_CAP; 3], || format!("perfect estimate gave {perfect:?}"))?;

    // a sine and a cosine over whole periods: orthogonal with equal energy
    let w = 2.0 * std::f64::consts::PI * 16.0 / n as f64;
    let s1: Vec<f64> = (0..n).map(|i| (w * i as f64).sin()).collect();
    let s2: Vec<f64> = (0..n).map(|i| (w * i as f64).cos()).collect();
    ensure(dot(&s1, &s2).abs() < 1e-9 * dot(&s1, &s1), || "test signals not orthogonal".into())?;
    let est: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| x + 0.1 * y).collect();
    let sir = sdr_sir_sar(&decompose(&est, 0, &[&s1, &s2]).map_err(|e| e.to_string())?).sir;
    ensure((sir - 20.0).abs() < 1e-6, || format!("SIR {sir:.9} dB"))?;

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let refs: Vec<Vec<f64>> = (0..3).map(|_| noise(&mut rng)).collect();
        let est: Vec<f64> = (0..n).map(|i| 0.8 * refs[0][i] + 0.3 * refs[2][i] + 0.2 * rng.gen_range(-1.0..1.0)).collect();
        let r: Vec<&[f64]> = refs.iter().map(Vec::as_slice).collect();
        let d = decompose(&est, 0, &r).map_err(|e| e.to_string())?;
        let energy = dot(&est, &est);
        let residual: f64 = (0..n)
            .map(|i| (est[i] - d.target[i] - d.interference[i] - d.artifacts[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(residual / energy.sqrt());
        for (x, y) in [(&d.target, &d.interference), (&d.target, &d.artifacts), (&d.interference, &d.artifacts)] {
            worst = worst.max(dot(x, y).abs() / energy);
        }
        for rf in &refs {
            worst = worst.max(dot(&d.artifacts, rf).abs() / (energy * dot(rf, rf)).sqrt());
        }
    }
    ensure(worst < 1e-9, || format!("decomposition residual {worst:e}"))?;
    Ok(format!("capped at {DB_CAP} dB, SIR {sir:.9} dB, residuals <= {worst:.1e}"))
}

/// Windowed restatement of the plateau rule: an epoch improves if it is the
/// first after the last reduction or beats everything since then; a
/// reduction happens at the third consecutive non-improving epoch.
fn plateau_oracle(losses: &[f64], lr0: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(losses.len());
    let mut lr = lr0;
    let mut start = 0;
    for e in 0..losses.len() {
        let improves = |j: usize| j == start || losses[start..j].iter().all(|&p| losses[j] < p);
        if e >= start + 3 && (e - 2..=e).all(|j| !improves(j)) {
            lr *= 0.1;
            start = e + 1;
        }
        out.push(lr);
    }
    out
}

fn scheduler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut reductions = 0;
    for k in 0..1000 {
        let len = rng.gen_range(1..80);
        let losses: Vec<f64> = if k % 2 == 0 {
            // few distinct values, so equal losses (no improvement) are common
            (0..len).map(|_| rng.gen_range(0..6) as f64).collect()
        } else {
            let mut v = 10.0;
            (0..len)
                .map(|_| {
                    v += rng.gen_range(-1.0..0.8);
                    v
                })
                .collect()
        };
        let got = plateau_schedule(&losses, 0.002, 3, 0.1);
        let want = plateau_oracle(&losses, 0.002);
        ensure(got == want, || format!("sequence {losses:?}: got {got:?}, oracle {want:?}"))?;
        reductions += want.windows(2).filter(|w| w[1] < w[0]).count() + usize::from(want[0] < 0.002);
    }
    Ok(format!("1000 sequences agree, {reductions} reductions"))
}

struct PipelineRun {
    cdae_time: Duration,
    cdae_out: PathBuf,
    fnn_out: PathBuf,
}

fn pipeline_config(dir: &Path, model: ModelKind) -> RunConfig {
    let mut cfg = RunConfig {
        manifest: Some(dir.join("corpus/manifest.toml")),
        model,
        seed: 2017,
        threads: Some(1),
        ..RunConfig::default()
    };
    cfg.train.max_epochs = 30;
    cfg.cdae.channels = [8, 12, 16, 16, 16, 12, 8];
    cfg.fnn.hidden = 128;
    let tag = match model {
        ModelKind::Cdae => "cdae",
        ModelKind::Fnn => "fnn",
    };
    cfg.models = Some(dir.join(format!("models_{tag}")));
    cfg.out = Some(dir.join(format!("est_{tag}")));
    cfg
}

fn run_pipeline(dir: &Path) -> Result<PipelineRun, String> {
    let step = |command, cfg: &RunConfig| run(command, cfg).map_err(|e| format!("{command:?}: {e}"));
    let mut synth = pipeline_config(dir, ModelKind::Cdae);
    synth.out = Some(dir.join("corpus"));
    step(Command::Synth, &synth)?;

    let cdae = pipeline_config(dir, ModelKind::Cdae);
    let started = Instant::now();
    for command in [Command::Train, Command::Separate, Command::Evaluate] {
        step(command, &cdae)?;
    }
    let cdae_time = started.elapsed();

    let fnn = pipeline_config(dir, ModelKind::Fnn);
    for command in [Command::Train, Command::Separate, Command::Evaluate] {
        step(command, &fnn)?;
    }
    Ok(PipelineRun { cdae_time, cdae_out: cdae.out.unwrap(), fnn_out: fnn.out.unwrap() })
}

/// (source, nsdr) from the per-item table.
fn nsdr_rows(path: &Path) -> Result<Vec<(String, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    ensure(lines.next() == Some("item_id,source_name,sdr,sir,sar,nsdr,nsir"), || "bad CSV header".into())?;
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let all_finite = f[2..].iter().all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
            ensure(f.len() == 7 && all_finite, || format!("bad row {l}"))?;
            Ok((f[1].to_string(), f[5].parse().unwrap()))
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn end_to_end(run: &PipelineRun) -> Outcome {
    let rows = nsdr_rows(&run.cdae_out.join(EVAL_FILE))?;
    let mut parts = Vec::new();
    for source in ["tonal", "noise"] {
        let v: Vec<f64> = rows.iter().filter(|(s, _)| s == source).map(|(_, x)| *x).collect();
        ensure(v.len() == 5, || format!("{source}: {} test rows", v.len()))?;
        let m = median(v);
        ensure(m > 5.0, || format!("{source}: median nSDR {m:.2} dB"))?;
        parts.push(format!("{source} {m:.2} dB"));
    }
    ensure(run.cdae_time < Duration::from_secs(15 * 60), || format!("CDAE run took {:?}", run.cdae_time))?;
    let fnn = nsdr_rows(&run.fnn_out.join(EVAL_FILE))?;
    ensure(fnn.len() == 10, || format!("FNN table has {} rows", fnn.len()))?;
    let fnn_median = |s: &str| median(fnn.iter().filter(|(n, _)| n == s).map(|(_, x)| *x).collect());
    Ok(format!(
        "CDAE median nSDR {} in {:.0?}; FNN baseline finite (tonal {:.2} dB, noise {:.2} dB)",
        parts.join(", "),
        run.cdae_time,
        fnn_median("tonal"),
        fnn_median("noise")
    ))
}

fn determinism(first: &PipelineRun, second: &PipelineRun) -> Outcome {
    let mut compared = 0;
    for (a, b) in [(&first.cdae_out, &second.cdae_out), (&first.fnn_out, &second.fnn_out)] {
        for file in [EVAL_FILE, SUMMARY_FILE] {
            let x = std::fs::read(a.join(file)).map_err(|e| e.to_string())?;
            let y = std::fs::read(b.join(file)).map_err(|e| e.to_string())?;
            ensure(x == y, || format!("{} differs between runs", b.join(file).display()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} metric files byte-identical across two single-threaded runs"))
}

fn report(number: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    match &outcome {
        Ok(detail) => println!("criterion {number} [{name}]: PASS - {detail}"),
        Err(detail) => println!("criterion {number} [{name}]: FAIL - {detail}"),
    }
    outcome.is_ok()
}

fn main() {
    let mut ok = true;
    ok &= report(1, "parameter counts", parameter_counts);
    ok &= report(2, "shape chain", shape_chain);
    ok &= report(3, "gradient suite", gradient_suite);
    ok &= report(4, "STFT round trip", stft_round_trip);
    ok &= report(5, "mask laws", mask_laws);
    ok &= report(6, "BSS-eval oracles", bss_oracles);
    ok &= report(7, "plateau scheduler", scheduler);

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let first = run_pipeline(dirs[0].path());
    ok &= report(8, "end-to-end synthetic separation", || end_to_end(first.as_ref().map_err(Clone::clone)?));
    let second = first.as_ref().map_err(Clone::clone).and_then(|_| run_pipeline(dirs[1].path()));
    ok &= report(9, "determinism", || {
        determinism(first.as_ref().map_err(Clone::clone)?, second.as_ref().map_err(Clone::clone)?)
    });

    if !ok {
        std::process::exit(1);
    }
}
