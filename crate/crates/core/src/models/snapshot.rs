//! Weight snapshots and their binary file format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes   "CDAESNAP"
//! version      u16       1
//! fingerprint  u64       FNV-1a 64 of the architecture descriptor
//! descriptor   u32 len + UTF-8, e.g. "cdae frames=15 bins=1025 channels=12,20,..."
//! name         u32 len + UTF-8
//! provenance   u32 len + UTF-8, free text (tool version, config hash)
//! seed         u64
//! epochs_run   u32
//! val_loss     f64       NaN when unknown
//! tensors      u32 count
//! table        per tensor: u32 len + UTF-8 name, u32 rank, rank x u32 dims
//! payload      per tensor, in table order: f32 values
//! ```

use std::path::Path;

use crate::models::{Architecture, ModelGraph};
use crate::{Error, Result, Tensor};

const MAGIC: &[u8; 8] = b"CDAESNAP";
const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_val_loss: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightSnapshot {
    pub name: String,
    pub architecture: Architecture,
    pub tensors: Vec<NamedTensor>,
    pub seed: u64,
    pub meta: TrainingMeta,
    pub provenance: String,
}

pub fn save_weights(model: &ModelGraph) -> WeightSnapshot {
    let tensors = model
        .param_names()
        .into_iter()
        .zip(model.params())
        .map(|(name, t)| NamedTensor { name, tensor: t.clone() })
        .collect();
    WeightSnapshot {
        name: model.name.clone(),
        architecture: *model.architecture(),
        tensors,
        seed: model.seed,
        meta: TrainingMeta::default(),
        provenance: String::new(),
    }
}

pub fn load_weights(snapshot: &WeightSnapshot) -> Result<ModelGraph> {
    let mut model = ModelGraph::build(snapshot.architecture, snapshot.name.clone())?;
    load_into(&mut model, snapshot)?;
    Ok(model)
}

pub(super) fn load_into(model: &mut ModelGraph, snapshot: &WeightSnapshot) -> Result<()> {
    if snapshot.architecture != *model.architecture() {
        return Err(Error::Snapshot(format!(
            "snapshot is `{}`, model is `{}`",
            snapshot.architecture.descriptor(),
            model.architecture().descriptor()
        )));
    }
    check_table(model, snapshot.tensors.iter().map(|t| (t.name.as_str(), t.tensor.shape())))?;
    for (dst, src) in model.params_mut().into_iter().zip(&snapshot.tensors) {
        if !src.tensor.is_finite() {
            return Err(Error::Snapshot(format!("{} holds non-finite values", src.name)));
        }
        dst.data_mut().copy_from_slice(src.tensor.data());
    }
    model.seed = snapshot.seed;
    Ok(())
}

fn check_table<'a>(
    model: &ModelGraph,
    table: impl ExactSizeIterator<Item = (&'a str, &'a [usize])>,
) -> Result<()> {
    let names = model.param_names();
    let params = model.params();
    if table.len() != params.len() {
        return Err(Error::Snapshot(format!("expected {} tensors, found {}", params.len(), table.len())));
    }
    for ((name, shape), (want_name, want)) in table.zip(names.iter().zip(params)) {
        if name != want_name || shape != want.shape() {
            return Err(Error::Snapshot(format!(
                "tensor {name} {shape:?} does not match {want_name} {:?}",
                want.shape()
            )));
        }
    }
    Ok(())
}

impl WeightSnapshot {
    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.tensor.len()).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let descriptor = self.architecture.descriptor();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.architecture.fingerprint().to_le_bytes());
        put_str(&mut out, &descriptor);
        put_str(&mut out, &self.name);
        put_str(&mut out, &self.provenance);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.meta.epochs_run as u32).to_le_bytes());
        out.extend_from_slice(&self.meta.final_val_loss.unwrap_or(f64::NAN).to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for t in &self.tensors {
            put_str(&mut out, &t.name);
            out.extend_from_slice(&(t.tensor.shape().len() as u32).to_le_bytes());
            for &d in t.tensor.shape() {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
        }
        for t in &self.tensors {
            for &v in t.tensor.data() {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<WeightSnapshot> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Snapshot("bad magic bytes".into()));
        }
        let version = u16::from_le_bytes(r.array()?);
        if version != VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let fingerprint = r.u64()?;
        let descriptor = r.string()?;
        let architecture = Architecture::parse_descriptor(&descriptor)?;
        if architecture.fingerprint() != fingerprint {
            return Err(Error::Snapshot("architecture fingerprint does not match descriptor".into()));
        }
        let name = r.string()?;
        let provenance = r.string()?;
        let seed = r.u64()?;
        let epochs_run = r.u32()? as usize;
        let val = f64::from_le_bytes(r.array()?);
        let count = r.u32()? as usize;
        let mut table = Vec::with_capacity(count.min(1024));
        for _ in 0..count {
            let tname = r.string()?;
            let rank = r.u32()? as usize;
            if rank > 8 {
                return Err(Error::Snapshot(format!("tensor {tname} has rank {rank}")));
            }
            let shape = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            table.push((tname, shape));
        }
        let reference = ModelGraph::build(architecture, name.clone())?;
        check_table(&reference, table.iter().map(|(n, s)| (n.as_str(), s.as_slice())))?;
        let mut tensors = Vec::with_capacity(count);
        for (tname, shape) in table {
            let n: usize = shape.iter().product();
            let raw = r.take(n * 4)?;
            let values = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                .collect();
            tensors.push(NamedTensor { name: tname, tensor: Tensor::from_vec(&shape, values)? });
        }
        if r.pos != bytes.len() {
            return Err(Error::Snapshot(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(WeightSnapshot {
            name,
            architecture,
            tensors,
            seed,
            meta: TrainingMeta { epochs_run, final_val_loss: (!val.is_nan()).then_some(val) },
            provenance,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::data::write_atomic(path, &self.to_bytes())
    }

    pub fn read(path: &Path) -> Result<WeightSnapshot> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        WeightSnapshot::from_bytes(&bytes)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Snapshot("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Snapshot("invalid UTF-8".into()))
    }
}
