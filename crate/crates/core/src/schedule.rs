//! Shot schedules and shot accounting.
//!
//! A schedule maps a 1-based epoch (or iteration) index `t` to the number of
//! shots `s_t` each item is measured with:
//!
//! - constant: `s_t = s`
//! - linear: `s_t = max(floor, s_start − slope·t)`
//! - step: `s_t = max(floor, s_start − delta·⌊t / period⌋)`
//!
//! The floor also applies to the step schedule so that no epoch ever asks for
//! zero shots.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Default lower bound on shots per item.
pub const DEFAULT_FLOOR: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShotSchedule {
    Constant { shots: u64 },
    Linear { start: u64, slope: u64, floor: u64 },
    Step { start: u64, delta: u64, period: u64, floor: u64 },
}

impl ShotSchedule {
    pub fn constant(shots: u64) -> Self {
        ShotSchedule::Constant { shots }
    }

    /// Linear decay with the default floor of 20.
    pub fn linear(start: u64, slope: u64) -> Self {
        ShotSchedule::Linear { start, slope, floor: DEFAULT_FLOOR }
    }

    /// 1000 shots, minus 100 every 10 epochs, floor 20.
    pub fn step_default() -> Self {
        ShotSchedule::Step { start: 1000, delta: 100, period: 10, floor: DEFAULT_FLOOR }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ShotSchedule::Constant { shots } if shots == 0 => Err(Error::Schedule("shots must be >= 1")),
            ShotSchedule::Linear { start, floor, .. } | ShotSchedule::Step { start, floor, .. }
                if start == 0 || floor == 0 =>
            {
                Err(Error::Schedule("start and floor must be >= 1"))
            }
            ShotSchedule::Step { period: 0, .. } => Err(Error::Schedule("period must be >= 1")),
            _ => Ok(()),
        }
    }

    /// Shots per item at 1-based epoch `t`.
    pub fn shots_at(&self, t: u64) -> Result<u64> {
        if t == 0 {
            return Err(Error::EpochIndex);
        }
        self.validate()?;
        Ok(match *self {
            ShotSchedule::Constant { shots } => shots,
            ShotSchedule::Linear { start, slope, floor } => {
                start.saturating_sub(slope.saturating_mul(t)).max(floor)
            }
            ShotSchedule::Step { start, delta, period, floor } => {
                start.saturating_sub(delta.saturating_mul(t / period)).max(floor)
            }
        })
    }

    /// `Σ_{t=1..epochs} s_t`.
    pub fn cumulative_shots(&self, epochs: u64) -> Result<u64> {
        (1..=epochs).map(|t| self.shots_at(t)).sum()
    }

    /// `dataset_size · evals_per_item · Σ_{t=1..epochs} s_t`.
    pub fn total_training_shots(&self, epochs: u64, dataset_size: u64, evals_per_item: u64) -> Result<u64> {
        Ok(dataset_size * evals_per_item * self.cumulative_shots(epochs)?)
    }

    /// Short identifier, e.g. `linear-1000-10` or `step-1000-100-10`.
    pub fn label(&self) -> alloc::string::String {
        use alloc::format;
        match *self {
            ShotSchedule::Constant { shots } => format!("constant-{shots}"),
            ShotSchedule::Linear { start, slope, floor } if floor == DEFAULT_FLOOR => {
                format!("linear-{start}-{slope}")
            }
            ShotSchedule::Linear { start, slope, floor } => format!("linear-{start}-{slope}-f{floor}"),
            ShotSchedule::Step { start, delta, period, floor } if floor == DEFAULT_FLOOR => {
                format!("step-{start}-{delta}-{period}")
            }
            ShotSchedule::Step { start, delta, period, floor } => {
                format!("step-{start}-{delta}-{period}-f{floor}")
            }
        }
    }
}

/// What a block of shots was spent on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShotCategory {
    /// Forward executions on training items (objective evaluations for VQE).
    /// This is the total comparable to published per-item budgets.
    Forward,
    /// Shifted-circuit executions for parameter-shift gradients.
    Gradient,
    /// Train/test metric evaluation.
    Evaluation,
}

impl ShotCategory {
    fn index(self) -> usize {
        match self {
            ShotCategory::Forward => 0,
            ShotCategory::Gradient => 1,
            ShotCategory::Evaluation => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LedgerEntry {
    pub epoch: u64,
    pub shots_per_evaluation: u64,
    pub evaluations: u64,
    pub consumed: u64,
    pub category: ShotCategory,
}

/// Append-only record of shot consumption.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShotLedger {
    entries: Vec<LedgerEntry>,
    cumulative: u64,
    by_category: [u64; 3],
}

impl ShotLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `evaluations` forward executions of `shots` shots each at epoch `t`.
    pub fn record(&mut self, t: u64, shots: u64, evaluations: u64) -> &mut Self {
        self.record_in(ShotCategory::Forward, t, shots, evaluations)
    }

    pub fn record_in(&mut self, category: ShotCategory, t: u64, shots: u64, evaluations: u64) -> &mut Self {
        let consumed = shots * evaluations;
        self.entries.push(LedgerEntry { epoch: t, shots_per_evaluation: shots, evaluations, consumed, category });
        self.cumulative += consumed;
        self.by_category[category.index()] += consumed;
        self
    }

    /// Records a lump of shots whose per-evaluation split is irregular.
    pub fn record_total(&mut self, category: ShotCategory, t: u64, consumed: u64) -> &mut Self {
        self.entries.push(LedgerEntry { epoch: t, shots_per_evaluation: consumed, evaluations: 1, consumed, category });
        self.cumulative += consumed;
        self.by_category[category.index()] += consumed;
        self
    }

    /// Appends an entry as-is (used when restoring a saved ledger).
    pub fn push(&mut self, entry: LedgerEntry) -> &mut Self {
        self.cumulative += entry.consumed;
        self.by_category[entry.category.index()] += entry.consumed;
        self.entries.push(entry);
        self
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// All shots across categories.
    pub fn cumulative(&self) -> u64 {
        self.cumulative
    }

    pub fn total(&self, category: ShotCategory) -> u64 {
        self.by_category[category.index()]
    }

    /// Forward shots only: the figure comparable to published training budgets.
    pub fn forward_total(&self) -> u64 {
        self.total(ShotCategory::Forward)
    }

    /// Shots consumed at epoch `t` in `category`.
    pub fn epoch_total(&self, t: u64, category: ShotCategory) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.epoch == t && e.category == category)
            .map(|e| e.consumed)
            .sum()
    }
}
