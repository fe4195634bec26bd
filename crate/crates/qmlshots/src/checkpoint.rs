//! Binary training checkpoints.
//!
//! Layout (little-endian): magic `QMLSCKPT`, format version `u32`, completed
//! epochs `u64`, Adam step `u64`, Adam hyperparameters (4 × `f64`, batch size
//! `u64`), parameter count `u64`, then parameters, first moments and second
//! moments (`f64` each), then the ledger as a `u64` entry count followed by
//! `(epoch, shots_per_evaluation, evaluations, consumed, category)` records.

use std::path::Path;

use qmlshots_core::hybrid::{HybridModel, TrainState};
use qmlshots_core::optim::{Adam, OptimizerConfig};
use qmlshots_core::schedule::{LedgerEntry, ShotCategory, ShotLedger};

use crate::error::{HarnessError, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 8] = b"QMLSCKPT";
pub const VERSION: u32 = 1;

fn category_code(c: ShotCategory) -> u8 {
    match c {
        ShotCategory::Forward => 0,
        ShotCategory::Gradient => 1,
        ShotCategory::Evaluation => 2,
    }
}

pub fn encode(state: &TrainState) -> Vec<u8> {
    let mut out = Vec::new();
    let u64s = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
    let f64s = |out: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    u64s(&mut out, state.epoch);
    u64s(&mut out, state.optimizer.steps());
    let c = state.optimizer.config();
    f64s(&mut out, &[c.learning_rate, c.beta1, c.beta2, c.eps]);
    u64s(&mut out, c.batch_size as u64);
    let params = state.model.params();
    let (m, v) = state.optimizer.moments();
    u64s(&mut out, params.len() as u64);
    f64s(&mut out, params);
    f64s(&mut out, m);
    f64s(&mut out, v);
    let entries = state.ledger.entries();
    u64s(&mut out, entries.len() as u64);
    for e in entries {
        for x in [e.epoch, e.shots_per_evaluation, e.evaluations, e.consumed] {
            u64s(&mut out, x);
        }
        out.push(category_code(e.category));
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Option<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<TrainState> {
    let bad = |message: &str| HarnessError::Format { path: path.into(), message: message.into() };
    if bytes.get(..8) != Some(MAGIC.as_slice()) {
        return Err(bad("not a checkpoint file"));
    }
    let version = bytes.get(8..12).map(|b| u32::from_le_bytes(b.try_into().expect("4 bytes")));
    if version != Some(VERSION) {
        return Err(bad(&format!("unsupported checkpoint version {version:?}")));
    }
    let mut r = Reader { bytes, pos: 12 };
    let parse = |r: &mut Reader| -> Option<(u64, u64, OptimizerConfig, Vec<f64>, Vec<f64>, Vec<f64>, ShotLedger)> {
        let epoch = r.u64()?;
        let steps = r.u64()?;
        let config = OptimizerConfig {
            learning_rate: r.f64()?,
            beta1: r.f64()?,
            beta2: r.f64()?,
            eps: r.f64()?,
            batch_size: r.u64()? as usize,
        };
        let n = r.u64()? as usize;
        if n > bytes.len() / 8 {
            return None;
        }
        let params = r.f64s(n)?;
        let m = r.f64s(n)?;
        let v = r.f64s(n)?;
        let count = r.u64()?;
        let mut ledger = ShotLedger::new();
        for _ in 0..count {
            let (epoch, shots_per_evaluation, evaluations, consumed) = (r.u64()?, r.u64()?, r.u64()?, r.u64()?);
            let category = match r.take(1)?[0] {
                0 => ShotCategory::Forward,
                1 => ShotCategory::Gradient,
                2 => ShotCategory::Evaluation,
                _ => return None,
            };
            ledger.push(LedgerEntry { epoch, shots_per_evaluation, evaluations, consumed, category });
        }
        Some((epoch, steps, config, params, m, v, ledger))
    };
    let (epoch, steps, config, params, m, v, ledger) = parse(&mut r).ok_or_else(|| bad("truncated or corrupt checkpoint"))?;
    if r.pos != bytes.len() {
        return Err(bad("trailing bytes after checkpoint"));
    }
    let ctx = path.display().to_string();
    let model = HybridModel::from_params(params).map_err(HarnessError::core(ctx.clone()))?;
    let optimizer = Adam::from_parts(config, m, v, steps).map_err(HarnessError::core(ctx))?;
    Ok(TrainState { model, optimizer, epoch, ledger })
}

pub fn save(path: &Path, state: &TrainState) -> Result<()> {
    write_atomic(path, &encode(state))
}

pub fn load(path: &Path) -> Result<TrainState> {
    let bytes = std::fs::read(path).map_err(HarnessError::io(path))?;
    decode(&bytes, path)
}
