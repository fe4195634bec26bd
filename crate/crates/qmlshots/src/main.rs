use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qmlshots::config::{
    resolve, set_path, ConfigSources, DatasetName, Experiment, GradientMode, RunConfig, ScheduleConfig, Variant,
};
use qmlshots::experiments::{run, RunOptions};
use qmlshots::plot::emit_plot_data;
use qmlshots_core::schedule::DEFAULT_FLOOR;
use qmlshots::HarnessError;
use toml::{Table, Value};

/// Shot-scheduled hybrid quantum-classical training and VQE experiments.
#[derive(Debug, Parser)]
#[command(name = "qmlshots", version)]
struct Cli {
    /// TOML config file layered over the preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// smoke, short or full.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Worker threads (0 = one per core). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress per-epoch progress on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long, value_enum)]
    dataset: Option<DatasetName>,
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    /// Directory with mnist/ and fmnist/ IDX files (also QMLSHOTS_DATA_DIR).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    split_seed: Option<u64>,
    #[arg(long)]
    per_class_train: Option<usize>,
    #[arg(long)]
    per_class_test: Option<usize>,
}

/// `--schedule` takes a kind (filled in from the flags below and the usual
/// defaults) or a complete `kind:...` string.
#[derive(Debug, Args)]
struct ScheduleArgs {
    /// constant, linear or step; or constant:S, linear:START:SLOPE[:FLOOR], step:START:DELTA:PERIOD[:FLOOR].
    #[arg(long)]
    schedule: Option<String>,
    /// Shots per evaluation for the constant schedule.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    s_start: Option<u64>,
    #[arg(long)]
    slope: Option<u64>,
    #[arg(long)]
    delta: Option<u64>,
    #[arg(long)]
    period: Option<u64>,
    #[arg(long)]
    floor: Option<u64>,
}

impl ScheduleArgs {
    fn build(&self) -> Result<Option<ScheduleConfig>, HarnessError> {
        let parts = [self.shots, self.s_start, self.slope, self.delta, self.period, self.floor];
        let Some(kind) = &self.schedule else {
            if parts.iter().any(Option::is_some) {
                return Err(HarnessError::Config("schedule parameters need --schedule constant|linear|step".into()));
            }
            return Ok(None);
        };
        if kind.contains(':') {
            if parts.iter().any(Option::is_some) {
                return Err(HarnessError::Config(format!("--schedule {kind} already fixes every parameter")));
            }
            return kind.parse().map(Some).map_err(HarnessError::Config);
        }
        let floor = self.floor.unwrap_or(DEFAULT_FLOOR);
        let start = self.s_start.unwrap_or(1000);
        let unused = |names: &[(&str, Option<u64>)]| -> Result<(), HarnessError> {
            match names.iter().find(|(_, v)| v.is_some()) {
                Some((n, _)) => Err(HarnessError::Config(format!("--{n} does not apply to a {kind} schedule"))),
                None => Ok(()),
            }
        };
        let s = match kind.as_str() {
            "constant" => {
                unused(&[("s-start", self.s_start), ("slope", self.slope), ("delta", self.delta), ("period", self.period), ("floor", self.floor)])?;
                ScheduleConfig::Constant { shots: self.shots.unwrap_or(1000) }
            }
            "linear" => {
                unused(&[("shots", self.shots), ("delta", self.delta), ("period", self.period)])?;
                ScheduleConfig::Linear { start, slope: self.slope.unwrap_or(10), floor }
            }
            "step" => {
                unused(&[("shots", self.shots), ("slope", self.slope)])?;
                ScheduleConfig::Step { start, delta: self.delta.unwrap_or(100), period: self.period.unwrap_or(10), floor }
            }
            other => return Err(HarnessError::Config(format!("unknown schedule kind {other:?}"))),
        };
        Ok(Some(s))
    }
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    epochs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    gradient_mode: Option<GradientMode>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    relu_after_fc2: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model.
    Train {
        #[command(flatten)]
        args: TrainArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// One constant-schedule run per shot value.
    Sweep {
        #[command(flatten)]
        args: TrainArgs,
        /// Comma-separated shot values.
        #[arg(long, value_delimiter = ',')]
        shots: Option<Vec<u64>>,
    },
    /// One run per point of the linear/step schedule grid.
    Schedule {
        #[command(flatten)]
        args: TrainArgs,
    },
    /// Repeat a run across initialisation seeds and summarise the spread.
    InitSpread {
        #[command(flatten)]
        args: TrainArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Number of seeds (at least 2).
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Variational ground-state search on a Pauli Hamiltonian.
    Vqe {
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long)]
        iterations: Option<u64>,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Independent runs with consecutive seeds.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_enum)]
        gradient_mode: Option<GradientMode>,
        #[arg(long)]
        lr: Option<f64>,
        /// Reference energy for ΔE instead of exact diagonalisation.
        #[arg(long)]
        reference_energy: Option<f64>,
    },
    /// Re-run the experiment named in a config file (e.g. config.resolved.toml).
    Run,
    /// Turn metrics/trajectory CSVs (or run directories) into plot data.
    Plot {
        /// Files or output directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also write SVG charts.
        #[arg(long)]
        svg: bool,
    },
}

fn set<T: Into<Value>>(table: &mut Table, path: &str, value: Option<T>) {
    if let Some(v) = value {
        set_path(table, path, v.into());
    }
}

fn int(v: Option<u64>) -> Option<Value> {
    v.map(|x| Value::Integer(x as i64))
}

fn enum_value<T: serde::Serialize>(v: Option<T>) -> Option<Value> {
    v.map(|x| Value::try_from(x).expect("enum serializes"))
}

fn path_value(v: Option<PathBuf>) -> Option<Value> {
    v.map(|p| Value::String(p.display().to_string()))
}

fn train_overrides(t: &mut Table, a: TrainArgs) {
    let d = a.data;
    set(t, "dataset.name", enum_value(d.dataset));
    set(t, "dataset.variant", enum_value(d.variant));
    set(t, "dataset.data_dir", path_value(d.data_dir));
    set(t, "dataset.split_seed", int(d.split_seed));
    set(t, "dataset.per_class_train", int(d.per_class_train.map(|x| x as u64)));
    set(t, "dataset.per_class_test", int(d.per_class_test.map(|x| x as u64)));
    set(t, "training.epochs", int(a.epochs));
    set(t, "training.seed", int(a.seed));
    set(t, "training.gradient_mode", enum_value(a.gradient_mode));
    set(t, "optimizer.learning_rate", a.lr);
    set(t, "optimizer.batch_size", int(a.batch_size.map(|x| x as u64)));
    if a.relu_after_fc2 {
        set(t, "training.relu_after_fc2", Some(true));
    }
}

fn experiment(t: &mut Table, e: Experiment) {
    set(t, "experiment", enum_value(Some(e)));
}

fn execute(cli: Cli) -> Result<String, HarnessError> {
    let mut overrides = Table::new();
    set(&mut overrides, "threads", int(cli.threads.map(|x| x as u64)));
    let mut options = RunOptions { resume: false, progress: !cli.quiet };

    match cli.command {
        Command::Plot { inputs, svg } => {
            let out = cli.out.ok_or_else(|| HarnessError::Config("plot requires --out".into()))?;
            let written = emit_plot_data(&inputs, &out, svg)?;
            return Ok(serde_json::json!({ "status": "ok", "files": written }).to_string());
        }
        Command::Train { args, schedule, resume } => {
            experiment(&mut overrides, Experiment::Train);
            train_overrides(&mut overrides, args);
            set(&mut overrides, "training.schedule", enum_value(schedule.build()?));
            options.resume = resume;
        }
        Command::Sweep { args, shots } => {
            experiment(&mut overrides, Experiment::Sweep);
            train_overrides(&mut overrides, args);
            set(
                &mut overrides,
                "sweep.shots",
                shots.map(|s| Value::Array(s.into_iter().map(|x| Value::Integer(x as i64)).collect())),
            );
        }
        Command::Schedule { args } => {
            experiment(&mut overrides, Experiment::Schedule);
            train_overrides(&mut overrides, args);
        }
        Command::InitSpread { args, schedule, seeds } => {
            experiment(&mut overrides, Experiment::InitSpread);
            train_overrides(&mut overrides, args);
            set(&mut overrides, "training.schedule", enum_value(schedule.build()?));
            set(&mut overrides, "init_spread.seeds", int(seeds));
        }
        Command::Vqe { hamiltonian, schedule, iterations, layers, seed, seeds, gradient_mode, lr, reference_energy } => {
            experiment(&mut overrides, Experiment::Vqe);
            set(&mut overrides, "vqe.hamiltonian", path_value(hamiltonian));
            set(&mut overrides, "vqe.schedule", enum_value(schedule.build()?));
            set(&mut overrides, "vqe.iterations", int(iterations));
            set(&mut overrides, "vqe.layers", int(layers.map(|x| x as u64)));
            set(&mut overrides, "vqe.seed", int(seed));
            set(&mut overrides, "vqe.seeds", int(seeds));
            set(&mut overrides, "vqe.gradient_mode", enum_value(gradient_mode));
            set(&mut overrides, "vqe.learning_rate", lr);
            set(&mut overrides, "vqe.reference_energy", reference_energy);
        }
        Command::Run => {
            if cli.config.is_none() {
                return Err(HarnessError::Config("run requires --config".into()));
            }
        }
    }
    set(&mut overrides, "output_dir", path_value(cli.out));

    let sources = ConfigSources { preset: cli.preset, file: cli.config, overrides, ..Default::default() }.with_env();
    let config: RunConfig = resolve(&sources)?;
    run(&config, options)?;
    Ok(serde_json::json!({
        "status": "ok",
        "experiment": config.experiment,
        "output_dir": config.output_dir,
    })
    .to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            eprintln!("{}", serde_json::json!({ "status": "error", "kind": "usage", "message": message.trim() }));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "status": "error", "kind": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
