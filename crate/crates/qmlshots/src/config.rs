//! Run configuration.
//!
//! Layers are merged in order: built-in defaults, preset, config file,
//! `QMLSHOTS_DATA_DIR`, command-line flags. The merged table must contain
//! only known keys; it is validated before any computation starts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qmlshots_core::optim::OptimizerConfig;
use qmlshots_core::schedule::{ShotSchedule, DEFAULT_FLOOR};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{HarnessError, Result};

pub const DATA_DIR_ENV: &str = "QMLSHOTS_DATA_DIR";

/// Directory holding the bundled three-class MNIST fixture and Hamiltonians.
pub fn bundled_data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/data"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Train,
    Sweep,
    Schedule,
    InitSpread,
    Vqe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Mnist,
    Fmnist,
}

impl DatasetName {
    pub fn dir_name(self) -> &'static str {
        match self {
            DatasetName::Mnist => "mnist",
            DatasetName::Fmnist => "fmnist",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Stratified per-class subset.
    Short,
    /// Entire train and test splits.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GradientMode {
    Exact,
    Sampled,
}

/// A shot schedule as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScheduleConfig {
    Constant {
        shots: u64,
    },
    Linear {
        start: u64,
        slope: u64,
        #[serde(default = "default_floor")]
        floor: u64,
    },
    Step {
        start: u64,
        delta: u64,
        period: u64,
        #[serde(default = "default_floor")]
        floor: u64,
    },
}

fn default_floor() -> u64 {
    DEFAULT_FLOOR
}

impl From<ScheduleConfig> for ShotSchedule {
    fn from(c: ScheduleConfig) -> Self {
        match c {
            ScheduleConfig::Constant { shots } => ShotSchedule::Constant { shots },
            ScheduleConfig::Linear { start, slope, floor } => ShotSchedule::Linear { start, slope, floor },
            ScheduleConfig::Step { start, delta, period, floor } => ShotSchedule::Step { start, delta, period, floor },
        }
    }
}

impl From<ShotSchedule> for ScheduleConfig {
    fn from(s: ShotSchedule) -> Self {
        match s {
            ShotSchedule::Constant { shots } => ScheduleConfig::Constant { shots },
            ShotSchedule::Linear { start, slope, floor } => ScheduleConfig::Linear { start, slope, floor },
            ShotSchedule::Step { start, delta, period, floor } => ScheduleConfig::Step { start, delta, period, floor },
        }
    }
}

/// `constant:S`, `linear:START:SLOPE[:FLOOR]` or `step:START:DELTA:PERIOD[:FLOOR]`.
impl FromStr for ScheduleConfig {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let nums = parts[1..]
            .iter()
            .map(|p| p.parse::<u64>().map_err(|_| format!("bad number {p:?} in schedule {s:?}")))
            .collect::<std::result::Result<Vec<u64>, String>>()?;
        match (parts[0], nums.as_slice()) {
            ("constant", &[shots]) => Ok(ScheduleConfig::Constant { shots }),
            ("linear", &[start, slope]) => Ok(ScheduleConfig::Linear { start, slope, floor: DEFAULT_FLOOR }),
            ("linear", &[start, slope, floor]) => Ok(ScheduleConfig::Linear { start, slope, floor }),
            ("step", &[start, delta, period]) => {
                Ok(ScheduleConfig::Step { start, delta, period, floor: DEFAULT_FLOOR })
            }
            ("step", &[start, delta, period, floor]) => Ok(ScheduleConfig::Step { start, delta, period, floor }),
            _ => Err(format!(
                "unrecognised schedule {s:?}; expected constant:S, linear:START:SLOPE[:FLOOR] or step:START:DELTA:PERIOD[:FLOOR]"
            )),
        }
    }
}

impl fmt::Display for ScheduleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ScheduleConfig::Constant { shots } => write!(f, "constant:{shots}"),
            ScheduleConfig::Linear { start, slope, floor } => write!(f, "linear:{start}:{slope}:{floor}"),
            ScheduleConfig::Step { start, delta, period, floor } => write!(f, "step:{start}:{delta}:{period}:{floor}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: DatasetName,
    pub variant: Variant,
    /// Holds `mnist/` and `fmnist/` subdirectories of IDX files.
    pub data_dir: PathBuf,
    pub split_seed: u64,
    pub per_class_train: usize,
    pub per_class_test: usize,
    pub classes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub epochs: u64,
    /// Model initialisation and training stream seed.
    pub seed: u64,
    pub gradient_mode: GradientMode,
    pub relu_after_fc2: bool,
    pub schedule: ScheduleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub batch_size: usize,
}

impl From<&OptimizerSettings> for OptimizerConfig {
    fn from(o: &OptimizerSettings) -> Self {
        OptimizerConfig {
            learning_rate: o.learning_rate,
            beta1: o.beta1,
            beta2: o.beta2,
            eps: o.eps,
            batch_size: o.batch_size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub shots: Vec<u64>,
}

/// Linear schedules over `starts` at slope `start_slope`, over `slopes` at
/// start `slope_start`, plus `step` when `include_step` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub starts: Vec<u64>,
    pub start_slope: u64,
    pub slopes: Vec<u64>,
    pub slope_start: u64,
    pub floor: u64,
    pub include_step: bool,
    pub step: ScheduleConfig,
}

impl GridConfig {
    /// Grid points in order, without duplicates.
    /// One point per axis value plus the step schedule. The point shared by both
    /// axes is kept twice, once under each axis name.
    pub fn schedules(&self) -> Vec<(String, ScheduleConfig)> {
        let mut out = Vec::new();
        for &start in &self.starts {
            let s = ScheduleConfig::Linear { start, slope: self.start_slope, floor: self.floor };
            out.push((format!("start-{start}"), s));
        }
        for &slope in &self.slopes {
            let s = ScheduleConfig::Linear { start: self.slope_start, slope, floor: self.floor };
            out.push((format!("slope-{slope}"), s));
        }
        if self.include_step {
            out.push(("step".to_string(), self.step));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSpreadConfig {
    /// Number of model seeds, counting up from `training.seed`.
    pub seeds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeSettings {
    pub hamiltonian: PathBuf,
    pub layers: usize,
    pub iterations: u64,
    pub seed: u64,
    /// Independent runs with seeds `seed, seed + 1, …`.
    pub seeds: u64,
    pub gradient_mode: GradientMode,
    pub learning_rate: f64,
    pub init_scale: f64,
    pub schedule: ScheduleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output_dir: PathBuf,
    /// Worker threads; 0 picks one per core. Outputs do not depend on it.
    pub threads: usize,
    pub dataset: DatasetConfig,
    pub training: TrainingConfig,
    pub optimizer: OptimizerSettings,
    pub sweep: SweepConfig,
    pub grid: GridConfig,
    pub init_spread: InitSpreadConfig,
    pub vqe: VqeSettings,
}

const DEFAULTS: &str = r#"
experiment = "train"
output_dir = "runs/latest"
threads = 0

[dataset]
name = "mnist"
variant = "short"
data_dir = "data"
split_seed = 7
per_class_train = 100
per_class_test = 25
classes = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]

[training]
epochs = 100
seed = 0
gradient_mode = "sampled"
relu_after_fc2 = false
schedule = { kind = "constant", shots = 1000 }

[optimizer]
learning_rate = 0.001
beta1 = 0.9
beta2 = 0.999
eps = 1e-8
batch_size = 32

[sweep]
shots = [1, 5, 10, 50, 100, 500, 1000]

[grid]
starts = [300, 400, 500, 600, 700, 800, 900, 1000]
start_slope = 10
slopes = [10, 20, 30, 40, 50, 60, 70, 80]
slope_start = 1000
floor = 20
include_step = true
step = { kind = "step", start = 1000, delta = 100, period = 10, floor = 20 }

[init_spread]
seeds = 15

[vqe]
hamiltonian = ""
layers = 3
iterations = 100
seed = 0
seeds = 1
gradient_mode = "sampled"
learning_rate = 0.05
init_scale = 0.1
schedule = { kind = "constant", shots = 1000 }
"#;

/// Named overlays on the defaults.
pub const PRESETS: [&str; 3] = ["smoke", "short", "full"];

fn preset_overlay(name: &str) -> Result<Table> {
    let text = match name {
        "short" => String::new(),
        "full" => "[dataset]\nvariant = \"full\"\n[training]\nepochs = 10\n".to_string(),
        "smoke" => format!(
            r#"
[dataset]
data_dir = {dir:?}
per_class_train = 20
per_class_test = 10
classes = [0, 1, 2]

[training]
epochs = 20
gradient_mode = "exact"

[optimizer]
learning_rate = 0.01
batch_size = 4

[sweep]
shots = [10, 100, 1000]

[init_spread]
seeds = 8

[vqe]
hamiltonian = {ham:?}
"#,
            dir = bundled_data_dir().join("smoke").display().to_string(),
            ham = bundled_data_dir().join("hamiltonians/h2.json").display().to_string(),
        ),
        other => {
            return Err(HarnessError::Config(format!("unknown preset {other:?}; expected one of {PRESETS:?}")))
        }
    };
    parse_table(&text, "preset")
}

fn parse_table(text: &str, origin: &str) -> Result<Table> {
    text.parse::<Table>().map_err(|e| HarnessError::Config(format!("{origin}: {e}")))
}

/// Recursively overlays `top` onto `base`. Tables merge, except tagged ones
/// (with a `kind` key, i.e. schedules) which replace; anything else replaces.
pub fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) if !t.contains_key("kind") => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Sets `a.b.c = value` in `table`, creating intermediate tables.
pub fn set_path(table: &mut Table, path: &str, value: Value) {
    let mut parts: Vec<&str> = path.split('.').collect();
    let last = parts.pop().expect("non-empty path");
    let mut cur = table;
    for p in parts {
        cur = cur
            .entry(p)
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("config sections are tables");
    }
    cur.insert(last.to_string(), value);
}

/// Everything that feeds into a resolved configuration.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources {
    pub preset: Option<String>,
    pub file: Option<PathBuf>,
    /// Value of the data-directory environment variable, if set.
    pub env_data_dir: Option<PathBuf>,
    /// Command-line overrides, applied last.
    pub overrides: Table,
}

impl ConfigSources {
    /// Reads the environment variable override from the process environment.
    pub fn with_env(mut self) -> Self {
        self.env_data_dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        self
    }
}

pub fn resolve(sources: &ConfigSources) -> Result<RunConfig> {
    let mut table = parse_table(DEFAULTS, "defaults")?;
    if let Some(p) = &sources.preset {
        merge(&mut table, preset_overlay(p)?);
    }
    if let Some(path) = &sources.file {
        let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
        merge(&mut table, parse_table(&text, &path.display().to_string())?);
    }
    if let Some(dir) = &sources.env_data_dir {
        set_path(&mut table, "dataset.data_dir", Value::String(dir.display().to_string()));
    }
    merge(&mut table, sources.overrides.clone());
    let config: RunConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| HarnessError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn check(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(HarnessError::Config(message.to_string()))
    }
}

fn check_schedule(s: ScheduleConfig, what: &str) -> Result<()> {
    ShotSchedule::from(s).validate().map_err(|e| HarnessError::Config(format!("{what}: {e}")))
}

impl RunConfig {
    /// Checks every field an experiment may use.
    pub fn validate(&self) -> Result<()> {
        let d = &self.dataset;
        check(!d.classes.is_empty(), "dataset.classes must not be empty")?;
        check(d.classes.iter().all(|&c| c < 10), "dataset.classes must lie in 0..=9")?;
        let mut sorted = d.classes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        check(sorted.len() == d.classes.len(), "dataset.classes has duplicates")?;
        check(d.per_class_train >= 1 && d.per_class_test >= 1, "per-class counts must be >= 1")?;
        check(self.training.epochs >= 1, "training.epochs must be >= 1")?;
        check_schedule(self.training.schedule, "training.schedule")?;
        OptimizerConfig::from(&self.optimizer)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        check(!self.sweep.shots.is_empty(), "sweep.shots must not be empty")?;
        check(self.sweep.shots.iter().all(|&s| s >= 1), "sweep.shots must be >= 1")?;
        check(self.grid.floor >= 1, "grid.floor must be >= 1")?;
        for (_, s) in self.grid.schedules() {
            check_schedule(s, "grid")?;
        }
        check(self.init_spread.seeds >= 2, "init_spread.seeds must be >= 2 (spread is undefined for one seed)")?;
        let v = &self.vqe;
        check(v.layers >= 1, "vqe.layers must be >= 1")?;
        check(v.iterations >= 1, "vqe.iterations must be >= 1")?;
        check(v.seeds >= 1, "vqe.seeds must be >= 1")?;
        check(v.learning_rate > 0.0 && v.learning_rate.is_finite(), "vqe.learning_rate must be positive")?;
        check(v.init_scale >= 0.0 && v.init_scale.is_finite(), "vqe.init_scale must be non-negative")?;
        check_schedule(v.schedule, "vqe.schedule")?;
        if let Some(e) = v.reference_energy {
            check(e.is_finite(), "vqe.reference_energy must be finite")?;
        }
        if self.experiment == Experiment::Vqe {
            check(!v.hamiltonian.as_os_str().is_empty(), "vqe.hamiltonian is required")?;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.dataset.data_dir.join(self.dataset.name.dir_name())
    }

    pub fn resolved_path(&self) -> PathBuf {
        self.output_dir.join("config.resolved.toml")
    }
}

/// Loads a previously written `config.resolved.toml` with nothing layered on top.
pub fn load_resolved(path: &Path) -> Result<RunConfig> {
    resolve(&ConfigSources { file: Some(path.into()), ..Default::default() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = resolve(&ConfigSources::default()).unwrap();
        assert_eq!(c.training.schedule, ScheduleConfig::Constant { shots: 1000 });
        assert_eq!(c.sweep.shots, vec![1, 5, 10, 50, 100, 500, 1000]);
        assert_eq!(c.grid.schedules().len(), 17);
        assert_eq!(c.optimizer.batch_size, 32);
    }

    #[test]
    fn tagged_tables_replace() {
        let mut base: Table = "[s]\nkind = \"constant\"\nshots = 5\n[t]\na = 1".parse().unwrap();
        let top: Table = "[s]\nkind = \"linear\"\nstart = 9\n[t]\nb = 2".parse().unwrap();
        merge(&mut base, top);
        assert_eq!(base["s"].as_table().unwrap().len(), 2);
        assert_eq!(base["t"].as_table().unwrap().len(), 2);
    }

    #[test]
    fn layering_order() {
        let mut overrides = Table::new();
        set_path(&mut overrides, "training.epochs", Value::Integer(3));
        let c = resolve(&ConfigSources {
            preset: Some("smoke".into()),
            env_data_dir: Some("/elsewhere".into()),
            overrides,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.training.epochs, 3);
        assert_eq!(c.dataset.data_dir, PathBuf::from("/elsewhere"));
        assert_eq!(c.dataset.classes, vec![0, 1, 2]);
        let full = resolve(&ConfigSources { preset: Some("full".into()), ..Default::default() }).unwrap();
        assert_eq!((full.dataset.variant, full.training.epochs), (Variant::Full, 10));
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        let mut o = Table::new();
        set_path(&mut o, "training.epoks", Value::Integer(3));
        assert!(resolve(&ConfigSources { overrides: o, ..Default::default() }).is_err());
        let mut o = Table::new();
        set_path(&mut o, "sweep.shots", Value::Array(vec![]));
        assert!(resolve(&ConfigSources { overrides: o, ..Default::default() }).is_err());
        let mut o = Table::new();
        set_path(&mut o, "init_spread.seeds", Value::Integer(1));
        assert!(resolve(&ConfigSources { overrides: o, ..Default::default() }).is_err());
        assert!(resolve(&ConfigSources { preset: Some("huge".into()), ..Default::default() }).is_err());
    }

    #[test]
    fn resolved_round_trip() {
        let c = resolve(&ConfigSources { preset: Some("smoke".into()), ..Default::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, c.to_toml()).unwrap();
        assert_eq!(load_resolved(&path).unwrap(), c);
    }

    #[test]
    fn schedule_strings() {
        assert_eq!("linear:1000:10".parse(), Ok(ScheduleConfig::Linear { start: 1000, slope: 10, floor: 20 }));
        assert_eq!(
            "step:1000:100:10".parse(),
            Ok(ScheduleConfig::Step { start: 1000, delta: 100, period: 10, floor: 20 })
        );
        assert_eq!("constant:5".parse(), Ok(ScheduleConfig::Constant { shots: 5 }));
        assert!("linear:1000".parse::<ScheduleConfig>().is_err());
        assert!("cubic:1".parse::<ScheduleConfig>().is_err());
        let s = ScheduleConfig::Step { start: 9, delta: 1, period: 2, floor: 3 };
        assert_eq!(s.to_string().parse(), Ok(s));
    }
}
