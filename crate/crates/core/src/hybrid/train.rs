use alloc::vec;
use alloc::vec::Vec;

use super::model::{HybridModel, NUM_PARAMS};
use super::net::{HybridNet, ItemGradient, Mode};
use crate::dataio::LabeledImageSet;
use crate::optim::{Adam, OptimizerConfig};
use crate::par::map_indexed;
use crate::rng::{Purpose, Stream};
use crate::schedule::{ShotCategory, ShotLedger, ShotSchedule};
use crate::{Error, Result};

/// One row of the per-epoch metrics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub epoch: u64,
    pub train_loss: f64,
    pub test_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Forward shots charged to training items this epoch.
    pub shots_epoch: u64,
    /// Forward shots charged so far.
    pub shots_cumulative: u64,
    /// Parameter-shift shots spent so far.
    pub shots_grad_cumulative: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub schedule: ShotSchedule,
    pub epochs: u64,
    pub optimizer: OptimizerConfig,
    /// Exact expectations and adjoint gradients when false; otherwise every
    /// circuit execution samples `s_t` shots.
    pub sampled: bool,
    /// Root seed for shuffling and per-item sampling streams.
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        self.schedule.validate()?;
        self.optimizer.validate()
    }

    fn mode(&self, shots: u64) -> Mode {
        if self.sampled {
            Mode::Sampled { shots }
        } else {
            Mode::Exact
        }
    }
}

/// Everything needed to resume training after a completed epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: HybridModel,
    pub optimizer: Adam,
    /// Completed epochs.
    pub epoch: u64,
    pub ledger: ShotLedger,
}

impl TrainState {
    pub fn new(model: HybridModel, optimizer: OptimizerConfig) -> Self {
        Self { model, optimizer: Adam::new(optimizer, NUM_PARAMS), epoch: 0, ledger: ShotLedger::new() }
    }

    /// Runs epoch `self.epoch + 1`: shuffled mini-batch Adam updates, then
    /// train and test evaluation at the same shot count.
    ///
    /// Every training image is charged `s_t` forward shots (one execution of
    /// both PQCs), whether or not sampling is simulated.
    pub fn run_epoch(
        &mut self,
        net: &HybridNet,
        train: &LabeledImageSet,
        test: &LabeledImageSet,
        config: &TrainConfig,
    ) -> Result<MetricsRecord> {
        if train.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        let t = self.epoch + 1;
        let shots = config.schedule.shots_at(t)?;
        let mode = config.mode(shots);

        let mut order: Vec<usize> = (0..train.len()).collect();
        Stream::derive(config.seed, Purpose::Shuffle, t, 0).shuffle(&mut order);

        let mut grad_shots = 0;
        for batch in order.chunks(config.optimizer.batch_size) {
            let model = &self.model;
            let items: Vec<Result<ItemGradient>> = map_indexed(batch.len(), |k| {
                let i = batch[k];
                let mut rng = Stream::derive(config.seed, Purpose::TrainItem, t, i as u64);
                net.backward(model, &train.image(i), train.label(i) as usize, mode, &mut rng)
            });
            let mut sum = vec![0.0; NUM_PARAMS];
            for item in items {
                let item = item?;
                grad_shots += item.gradient_shots;
                for (s, g) in sum.iter_mut().zip(&item.grad) {
                    *s += g;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            sum.iter_mut().for_each(|g| *g *= scale);
            self.optimizer.step(self.model.params_mut(), &sum)?;
        }
        self.ledger.record(t, shots, train.len() as u64);
        self.ledger.record_total(ShotCategory::Gradient, t, grad_shots);

        let (train_loss, train_accuracy) = self.evaluate(net, train, mode, config.seed, Purpose::EvalTrain, t)?;
        let (test_loss, test_accuracy) = self.evaluate(net, test, mode, config.seed, Purpose::EvalTest, t)?;
        if config.sampled {
            self.ledger.record_in(ShotCategory::Evaluation, t, shots, (train.len() + test.len()) as u64);
        }
        self.epoch = t;
        Ok(MetricsRecord {
            epoch: t,
            train_loss,
            test_loss,
            train_accuracy,
            test_accuracy,
            shots_epoch: self.ledger.epoch_total(t, ShotCategory::Forward),
            shots_cumulative: self.ledger.forward_total(),
            shots_grad_cumulative: self.ledger.total(ShotCategory::Gradient),
        })
    }

    /// Mean loss and accuracy over `set`. Empty sets report zeros.
    fn evaluate(
        &self,
        net: &HybridNet,
        set: &LabeledImageSet,
        mode: Mode,
        seed: u64,
        purpose: Purpose,
        t: u64,
    ) -> Result<(f64, f64)> {
        if set.is_empty() {
            return Ok((0.0, 0.0));
        }
        let model = &self.model;
        let results: Vec<Result<(f64, bool)>> = map_indexed(set.len(), |i| {
            let mut rng = Stream::derive(seed, purpose, t, i as u64);
            let logits = net.logits(model, &set.image(i), mode, &mut rng)?;
            Ok(super::net::loss_and_accuracy(&logits, set.label(i) as usize))
        });
        let mut loss = 0.0;
        let mut correct = 0usize;
        for r in results {
            let (l, c) = r?;
            loss += l;
            correct += c as usize;
        }
        if !loss.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        let n = set.len() as f64;
        Ok((loss / n, correct as f64 / n))
    }
}

/// Trains for `config.epochs` epochs from `model`.
pub fn train(
    net: &HybridNet,
    model: HybridModel,
    train_set: &LabeledImageSet,
    test_set: &LabeledImageSet,
    config: &TrainConfig,
) -> Result<(Vec<MetricsRecord>, TrainState)> {
    config.validate()?;
    let mut state = TrainState::new(model, config.optimizer);
    let mut metrics = Vec::with_capacity(config.epochs as usize);
    for _ in 0..config.epochs {
        metrics.push(state.run_epoch(net, train_set, test_set, config)?);
    }
    Ok((metrics, state))
}
