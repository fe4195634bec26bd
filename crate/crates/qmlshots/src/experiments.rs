//! Experiment drivers. Every run writes into its own directory under the
//! configured output directory; grid experiments add a `summary.csv`.

use std::path::{Path, PathBuf};

use qmlshots_core::dataio::{stratified_subset, LabeledImageSet, SplitSpec};
use qmlshots_core::hybrid::{HybridModel, HybridNet, MetricsRecord, TrainConfig, TrainState};
use qmlshots_core::optim::OptimizerConfig;
use qmlshots_core::schedule::{ShotCategory, ShotSchedule};
use qmlshots_core::vqe::{tail_std, vqe_optimize, PauliHamiltonian, VqeConfig, VqeRun};

use crate::checkpoint;
use crate::config::{Experiment, GradientMode, RunConfig, ScheduleConfig, Variant};
use crate::error::{HarnessError, Result};
use crate::io::{csv_bytes, load_hamiltonian, load_split_pair, read_metrics, write_atomic, write_metrics, write_trajectory};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue a `train` run from its checkpoint when one exists.
    pub resume: bool,
    /// Print one progress line per epoch to stderr.
    pub progress: bool,
}

/// Final figures of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: String,
    pub schedule: ScheduleConfig,
    pub seed: u64,
    pub final_metrics: MetricsRecord,
    /// Forward shots from the ledger.
    pub total_shots: u64,
    /// Same quantity from the schedule formula.
    pub analytic_total_shots: u64,
    pub gradient_shots: u64,
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "run",
    "schedule",
    "seed",
    "epochs",
    "final_train_loss",
    "final_test_loss",
    "final_train_acc",
    "final_test_acc",
    "total_shots",
    "analytic_total_shots",
    "gradient_shots",
];

fn summary_rows(runs: &[RunSummary]) -> Vec<Vec<String>> {
    runs.iter()
        .map(|r| {
            let m = &r.final_metrics;
            vec![
                r.run.clone(),
                r.schedule.to_string(),
                r.seed.to_string(),
                m.epoch.to_string(),
                m.train_loss.to_string(),
                m.test_loss.to_string(),
                m.train_accuracy.to_string(),
                m.test_accuracy.to_string(),
                r.total_shots.to_string(),
                r.analytic_total_shots.to_string(),
                r.gradient_shots.to_string(),
            ]
        })
        .collect()
}

/// Loads the configured dataset and applies the short/full split.
pub fn load_datasets(config: &RunConfig) -> Result<(LabeledImageSet, LabeledImageSet)> {
    let d = &config.dataset;
    let (train, test) = load_split_pair(&config.dataset_dir(), d.name.dir_name())?;
    match d.variant {
        Variant::Short => {
            let spec = SplitSpec::new(d.per_class_train, d.per_class_test, d.split_seed).with_classes(d.classes.clone());
            stratified_subset(&train, &test, &spec).map_err(HarnessError::core("stratified subset"))
        }
        Variant::Full => {
            let keep = |set: &LabeledImageSet| {
                let idx: Vec<usize> = (0..set.len()).filter(|&i| d.classes.contains(&set.label(i))).collect();
                set.select(set.name(), &idx)
            };
            Ok((keep(&train), keep(&test)))
        }
    }
}

/// One training run into `dir`: `metrics.csv` and `checkpoint.bin`, both
/// rewritten after every epoch.
pub fn train_run(
    config: &RunConfig,
    data: &(LabeledImageSet, LabeledImageSet),
    schedule: ScheduleConfig,
    seed: u64,
    dir: &Path,
    options: RunOptions,
) -> Result<RunSummary> {
    let (train, test) = data;
    let net = HybridNet::new(config.training.relu_after_fc2);
    let train_config = TrainConfig {
        schedule: schedule.into(),
        epochs: config.training.epochs,
        optimizer: OptimizerConfig::from(&config.optimizer),
        sampled: config.training.gradient_mode == GradientMode::Sampled,
        seed,
    };
    train_config.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    let metrics_path = dir.join("metrics.csv");
    let ckpt_path = dir.join("checkpoint.bin");

    let (mut state, mut metrics) = if options.resume && ckpt_path.exists() {
        let state = checkpoint::load(&ckpt_path)?;
        let mut metrics = read_metrics(&metrics_path)?;
        metrics.truncate(state.epoch as usize);
        if metrics.len() as u64 != state.epoch {
            return Err(HarnessError::Format {
                path: metrics_path,
                message: format!("checkpoint is at epoch {} but metrics has {} rows", state.epoch, metrics.len()),
            });
        }
        (state, metrics)
    } else {
        (TrainState::new(HybridModel::init(seed), train_config.optimizer), Vec::new())
    };

    let run = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    while state.epoch < train_config.epochs {
        let record = state
            .run_epoch(&net, train, test, &train_config)
            .map_err(HarnessError::core(format!("run {run}, epoch {}", state.epoch + 1)))?;
        if options.progress {
            eprintln!(
                "[{run}] epoch {}/{} train_loss={:.4} train_acc={:.3} test_acc={:.3} shots={}",
                record.epoch,
                train_config.epochs,
                record.train_loss,
                record.train_accuracy,
                record.test_accuracy,
                record.shots_cumulative
            );
        }
        metrics.push(record);
        write_metrics(&metrics_path, &metrics)?;
        checkpoint::save(&ckpt_path, &state)?;
    }

    let analytic = ShotSchedule::from(schedule)
        .total_training_shots(train_config.epochs, train.len() as u64, 1)
        .map_err(HarnessError::core("analytic shot total"))?;
    let final_metrics = *metrics.last().expect("epochs >= 1");
    Ok(RunSummary {
        run,
        schedule,
        seed,
        final_metrics,
        total_shots: state.ledger.forward_total(),
        analytic_total_shots: analytic,
        gradient_shots: state.ledger.total(ShotCategory::Gradient),
    })
}

fn write_resolved(config: &RunConfig) -> Result<()> {
    write_atomic(&config.resolved_path(), config.to_toml().as_bytes())
}

fn write_summary(config: &RunConfig, runs: &[RunSummary]) -> Result<()> {
    write_atomic(&config.output_dir.join("summary.csv"), &csv_bytes(&SUMMARY_HEADER, &summary_rows(runs)))
}

fn runs_dir(config: &RunConfig, id: &str) -> PathBuf {
    config.output_dir.join("runs").join(id)
}

/// Single training run with the configured schedule.
pub fn run_train(config: &RunConfig, options: RunOptions) -> Result<RunSummary> {
    write_resolved(config)?;
    let data = load_datasets(config)?;
    let mut s = train_run(config, &data, config.training.schedule, config.training.seed, &config.output_dir, options)?;
    s.run = "train".to_string();
    write_summary(config, std::slice::from_ref(&s))?;
    Ok(s)
}

/// One constant-schedule run per entry of `sweep.shots`.
pub fn run_sweep(config: &RunConfig, options: RunOptions) -> Result<Vec<RunSummary>> {
    write_resolved(config)?;
    let data = load_datasets(config)?;
    let mut out = Vec::new();
    for &shots in &config.sweep.shots {
        let schedule = ScheduleConfig::Constant { shots };
        let dir = runs_dir(config, &format!("shots-{shots}"));
        out.push(train_run(config, &data, schedule, config.training.seed, &dir, options)?);
    }
    write_summary(config, &out)?;
    Ok(out)
}

/// One run per point of the schedule grid.
pub fn run_schedule_experiment(config: &RunConfig, options: RunOptions) -> Result<Vec<RunSummary>> {
    write_resolved(config)?;
    let data = load_datasets(config)?;
    let mut out = Vec::new();
    for (name, schedule) in config.grid.schedules() {
        let dir = runs_dir(config, &name);
        out.push(train_run(config, &data, schedule, config.training.seed, &dir, options)?);
    }
    write_summary(config, &out)?;
    Ok(out)
}

pub const SPREAD_HEADER: [&str; 6] = ["epoch", "metric", "min", "max", "mean", "std"];

/// Per-epoch statistics across runs; `std` is the sample standard deviation.
pub fn spread_rows(runs: &[Vec<MetricsRecord>]) -> Vec<Vec<String>> {
    let epochs = runs.iter().map(Vec::len).min().unwrap_or(0);
    let metrics: [(&str, fn(&MetricsRecord) -> f64); 4] = [
        ("train_loss", |m| m.train_loss),
        ("test_loss", |m| m.test_loss),
        ("train_acc", |m| m.train_accuracy),
        ("test_acc", |m| m.test_accuracy),
    ];
    let mut rows = Vec::new();
    for e in 0..epochs {
        for (name, get) in metrics {
            let xs: Vec<f64> = runs.iter().map(|r| get(&r[e])).collect();
            let (mean, std) = mean_std(&xs);
            let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            rows.push(vec![
                runs[0][e].epoch.to_string(),
                name.to_string(),
                min.to_string(),
                max.to_string(),
                mean.to_string(),
                std.to_string(),
            ]);
        }
    }
    rows
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

/// Same configuration from `init_spread.seeds` different initialisations.
pub fn run_init_spread(config: &RunConfig, options: RunOptions) -> Result<(Vec<RunSummary>, Vec<Vec<MetricsRecord>>)> {
    write_resolved(config)?;
    let data = load_datasets(config)?;
    let mut summaries = Vec::new();
    let mut all = Vec::new();
    for k in 0..config.init_spread.seeds {
        let seed = config.training.seed + k;
        let dir = runs_dir(config, &format!("seed-{seed}"));
        summaries.push(train_run(config, &data, config.training.schedule, seed, &dir, options)?);
        all.push(read_metrics(&dir.join("metrics.csv"))?);
    }
    write_summary(config, &summaries)?;
    write_atomic(&config.output_dir.join("spread.csv"), &csv_bytes(&SPREAD_HEADER, &spread_rows(&all)))?;
    Ok((summaries, all))
}

pub const VQE_SUMMARY_HEADER: [&str; 10] = [
    "run",
    "schedule",
    "seed",
    "final_energy",
    "tail_mean",
    "reference_energy",
    "delta_e",
    "tail_std_20",
    "total_shots",
    "gradient_shots",
];

pub fn vqe_config(config: &RunConfig, seed: u64) -> VqeConfig {
    let v = &config.vqe;
    VqeConfig {
        layers: v.layers,
        schedule: v.schedule.into(),
        iterations: v.iterations,
        optimizer: OptimizerConfig { learning_rate: v.learning_rate, ..OptimizerConfig::default() },
        seed,
        sampled: v.gradient_mode == GradientMode::Sampled,
        reference_energy: v.reference_energy,
        init_scale: v.init_scale,
    }
}

/// VQE runs for seeds `vqe.seed ..`, one trajectory per run.
pub fn run_vqe(config: &RunConfig, options: RunOptions) -> Result<Vec<VqeRun>> {
    write_resolved(config)?;
    let h: PauliHamiltonian = load_hamiltonian(&config.vqe.hamiltonian)?;
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for k in 0..config.vqe.seeds {
        let seed = config.vqe.seed + k;
        let id = format!("seed-{seed}");
        let run = vqe_optimize(&h, &vqe_config(config, seed)).map_err(HarnessError::core(format!("vqe {id}")))?;
        write_trajectory(&runs_dir(config, &id).join("trajectory.csv"), &run.trajectory)?;
        if options.progress {
            eprintln!("[{id}] final_energy={:.6} delta_e={:.6}", run.final_energy, run.delta_e);
        }
        rows.push(vec![
            id,
            config.vqe.schedule.to_string(),
            seed.to_string(),
            run.final_energy.to_string(),
            run.tail_mean.to_string(),
            run.reference_energy.to_string(),
            run.delta_e.to_string(),
            tail_std(&run, 20).to_string(),
            run.ledger.forward_total().to_string(),
            run.ledger.total(ShotCategory::Gradient).to_string(),
        ]);
        runs.push(run);
    }
    write_atomic(&config.output_dir.join("summary.csv"), &csv_bytes(&VQE_SUMMARY_HEADER, &rows))?;
    Ok(runs)
}

/// Runs whatever `config.experiment` names on a pool of `config.threads` workers.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match config.experiment {
        Experiment::Train => run_train(config, options).map(drop),
        Experiment::Sweep => run_sweep(config, options).map(drop),
        Experiment::Schedule => run_schedule_experiment(config, options).map(drop),
        Experiment::InitSpread => run_init_spread(config, options).map(drop),
        Experiment::Vqe => run_vqe(config, options).map(drop),
    })
}

