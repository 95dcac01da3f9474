//! Source-separation quality metrics from an orthogonal projection
//! decomposition of each estimate onto the reference signals.
//!
//! This is the time-invariant *gain* variant: distortions are projections
//! onto the references themselves, not onto delayed copies, so the numbers
//! are not directly comparable to toolboxes using multi-tap filters.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// dB value reported instead of +/- infinity.
pub const DB_CAP: f64 = 200.0;
const ENERGY_FLOOR: f64 = 1e-30;
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub target: Vec<f64>,
    pub interference: Vec<f64>,
    pub artifacts: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub sdr: f64,
    pub sir: f64,
    pub sar: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn energy(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Splits `estimate` into the part explained by reference `target_index`
/// alone, the part explained only by the other references, and the rest.
pub fn decompose(estimate: &[f64], target_index: usize, references: &[&[f64]]) -> Result<Decomposition> {
    let n = estimate.len();
    let target = references
        .get(target_index)
        .ok_or_else(|| Error::Shape(format!("target index {target_index} with {} references", references.len())))?;
    for (i, r) in references.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Shape(format!("reference {i} has {} samples, estimate has {n}", r.len())));
        }
        if energy(r) < ENERGY_FLOOR {
            return Err(Error::Degenerate(format!("reference {i} has zero energy")));
        }
    }

    let k = references.len();
    let norms: Vec<f64> = references.iter().map(|r| energy(r).sqrt()).collect();
    // Normalized Gram matrix: unit diagonal, so the rank test is scale-free.
    let gram = DMatrix::from_fn(k, k, |i, j| dot(references[i], references[j]) / (norms[i] * norms[j]));
    let chol = gram
        .cholesky()
        .filter(|c| c.l().diagonal().iter().all(|&d| d * d > RANK_TOLERANCE))
        .ok_or_else(|| Error::Degenerate("references are linearly dependent".into()))?;
    let rhs = DVector::from_fn(k, |i, _| dot(references[i], estimate) / norms[i]);
    let coef = chol.solve(&rhs);

    let mut span = vec![0.0; n];
    for (i, r) in references.iter().enumerate() {
        let c = coef[i] / norms[i];
        span.iter_mut().zip(r.iter()).for_each(|(s, v)| *s += c * v);
    }
    let gain = dot(estimate, target) / (norms[target_index] * norms[target_index]);
    let target_part: Vec<f64> = target.iter().map(|v| gain * v).collect();
    let interference = span.iter().zip(&target_part).map(|(s, t)| s - t).collect();
    let artifacts = estimate.iter().zip(&span).map(|(e, s)| e - s).collect();
    Ok(Decomposition { target: target_part, interference, artifacts })
}

fn ratio_db(num: f64, den: f64) -> f64 {
    if num < ENERGY_FLOOR {
        -DB_CAP
    } else if den < ENERGY_FLOOR {
        DB_CAP
    } else {
        (10.0 * (num / den).log10()).clamp(-DB_CAP, DB_CAP)
    }
}

pub fn sdr_sir_sar(d: &Decomposition) -> Metrics {
    let st = &d.target;
    let ei = &d.interference;
    let ea = &d.artifacts;
    let noise: Vec<f64> = ei.iter().zip(ea).map(|(a, b)| a + b).collect();
    let signal: Vec<f64> = st.iter().zip(ei).map(|(a, b)| a + b).collect();
    let target_energy = energy(st);
    Metrics {
        sdr: ratio_db(target_energy, energy(&noise)),
        sir: ratio_db(target_energy, energy(ei)),
        sar: ratio_db(energy(&signal), energy(ea)),
    }
}

/// One (item, source) row of an evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceScores {
    pub item_id: String,
    pub source: String,
    pub metrics: Metrics,
    pub nsdr: Option<f64>,
    pub nsir: Option<f64>,
}

/// Scores every estimate against the references. Sources are matched by
/// position.
pub fn evaluate_item(
    item_id: &str,
    source_names: &[String],
    estimates: &[&[f64]],
    references: &[&[f64]],
) -> Result<Vec<SourceScores>> {
    if estimates.len() != references.len() || source_names.len() != references.len() {
        return Err(Error::Shape(format!(
            "{} names, {} estimates, {} references",
            source_names.len(),
            estimates.len(),
            references.len()
        )));
    }
    estimates
        .iter()
        .enumerate()
        .map(|(i, est)| {
            Ok(SourceScores {
                item_id: item_id.to_string(),
                source: source_names[i].clone(),
                metrics: sdr_sir_sar(&decompose(est, i, references)?),
                nsdr: None,
                nsir: None,
            })
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<SourceScores>,
}

/// Subtracts the mixture-as-estimate SDR/SIR from each matching row. SAR is
/// left as is.
pub fn normalize(report: &EvalReport, mixture_report: &EvalReport) -> Result<EvalReport> {
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let mix = mixture_report
                .rows
                .iter()
                .find(|m| m.item_id == r.item_id && m.source == r.source)
                .ok_or_else(|| {
                    Error::Data(format!("no mixture scores for item {} source {}", r.item_id, r.source))
                })?;
            Ok(SourceScores {
                nsdr: Some(r.metrics.sdr - mix.metrics.sdr),
                nsir: Some(r.metrics.sir - mix.metrics.sir),
                ..r.clone()
            })
        })
        .collect::<Result<_>>()?;
    Ok(EvalReport { rows })
}

/// Median and quartiles of one metric for one source.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub source: String,
    pub metric: &'static str,
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl EvalReport {
    pub fn sources(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.source) {
                names.push(r.source.clone());
            }
        }
        names
    }

    pub fn values(&self, source: &str, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.source == source)
            .filter_map(|r| match metric {
                "sdr" => Some(r.metrics.sdr),
                "sir" => Some(r.metrics.sir),
                "sar" => Some(r.metrics.sar),
                "nsdr" => r.nsdr,
                "nsir" => r.nsir,
                _ => None,
            })
            .collect()
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out = Vec::new();
        for source in self.sources() {
            for metric in ["sdr", "sir", "sar", "nsdr", "nsir"] {
                let mut v = self.values(&source, metric);
                if v.is_empty() {
                    continue;
                }
                v.sort_by(f64::total_cmp);
                out.push(SummaryRow {
                    source: source.clone(),
                    metric,
                    count: v.len(),
                    q1: quantile(&v, 0.25),
                    median: quantile(&v, 0.5),
                    q3: quantile(&v, 0.75),
                });
            }
        }
        out
    }

    /// `item_id,source_name,sdr,sir,sar,nsdr,nsir`, one row per (item, source).
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = comment_block(header);
        out.push_str("item_id,source_name,sdr,sir,sar,nsdr,nsir\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for r in &self.rows {
            let m = r.metrics;
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{},{}",
                r.item_id,
                r.source,
                m.sdr,
                m.sir,
                m.sar,
                opt(r.nsdr),
                opt(r.nsir)
            );
        }
        out
    }

    pub fn summary_csv(&self, header: &str) -> String {
        let mut out = comment_block(header);
        out.push_str("source_name,metric,count,q1,median,q3\n");
        for s in self.summary() {
            let _ = writeln!(out, "{},{},{},{:.6},{:.6},{:.6}", s.source, s.metric, s.count, s.q1, s.median, s.q3);
        }
        out
    }
}

fn comment_block(header: &str) -> String {
    header.lines().map(|l| format!("# {l}\n")).collect()
}
