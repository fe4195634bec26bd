//! Dataset, Hamiltonian and CSV file formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use qmlshots_core::dataio::{parse_idx, LabeledImageSet};
use qmlshots_core::hybrid::MetricsRecord;
use qmlshots_core::simcore::PauliString;
use qmlshots_core::vqe::{PauliHamiltonian, TrajectoryPoint};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: [&str; 8] =
    ["epoch", "train_loss", "test_loss", "train_acc", "test_acc", "shots_epoch", "shots_cumulative", "shots_grad_cumulative"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["iteration", "energy", "shots_iter", "shots_cumulative"];

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(HarnessError::io(path))
}

/// Reads an IDX image/label file pair.
pub fn load_idx(images: &Path, labels: &Path, name: &str) -> Result<LabeledImageSet> {
    parse_idx(name, &read(images)?, &read(labels)?)
        .map_err(HarnessError::core(format!("{} + {}", images.display(), labels.display())))
}

/// `dir/{train,t10k}-images-idx3-ubyte` and matching label files.
pub fn load_split_pair(dir: &Path, name: &str) -> Result<(LabeledImageSet, LabeledImageSet)> {
    let file = |split: &str, kind: &str| dir.join(format!("{split}-{kind}-ubyte"));
    let train = load_idx(&file("train", "images-idx3"), &file("train", "labels-idx1"), &format!("{name}-train"))?;
    let test = load_idx(&file("t10k", "images-idx3"), &file("t10k", "labels-idx1"), &format!("{name}-test"))?;
    Ok((train, test))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianTerm {
    coeff: f64,
    pauli: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    num_qubits: usize,
    terms: Vec<HamiltonianTerm>,
}

/// Parses the JSON Hamiltonian format
/// `{"num_qubits": n, "terms": [{"coeff": c, "pauli": "XZ…"}, …]}`.
pub fn parse_hamiltonian(text: &str, path: &Path) -> Result<PauliHamiltonian> {
    let file: HamiltonianFile =
        serde_json::from_str(text).map_err(|source| HarnessError::Json { path: path.into(), source })?;
    let name = file
        .name
        .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let terms = file
        .terms
        .iter()
        .map(|t| t.pauli.parse::<PauliString>().map(|p| (t.coeff, p)))
        .collect::<qmlshots_core::Result<Vec<_>>>()
        .map_err(HarnessError::core(path.display().to_string()))?;
    PauliHamiltonian::new(name, file.num_qubits, terms).map_err(HarnessError::core(path.display().to_string()))
}

pub fn load_hamiltonian(path: &Path) -> Result<PauliHamiltonian> {
    let text = fs::read_to_string(path).map_err(HarnessError::io(path))?;
    parse_hamiltonian(&text, path)
}

pub fn hamiltonian_to_json(h: &PauliHamiltonian) -> String {
    let file = HamiltonianFile {
        name: Some(h.name().to_string()),
        num_qubits: h.num_qubits(),
        terms: h.terms().iter().map(|(c, p)| HamiltonianTerm { coeff: *c, pauli: p.to_string() }).collect(),
    };
    serde_json::to_string_pretty(&file).expect("plain data serializes")
}

pub(crate) fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    }
    Ok(())
}

/// Writes `contents` to `path` through a temporary file, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    create_parent(path)?;
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(HarnessError::io(&tmp))?;
    f.write_all(contents).map_err(HarnessError::io(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(HarnessError::io(path))
}

/// Renders rows as CSV text.
pub fn csv_bytes<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in rows {
        w.write_record(r.as_ref()).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

pub fn metrics_rows(records: &[MetricsRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            vec![
                r.epoch.to_string(),
                r.train_loss.to_string(),
                r.test_loss.to_string(),
                r.train_accuracy.to_string(),
                r.test_accuracy.to_string(),
                r.shots_epoch.to_string(),
                r.shots_cumulative.to_string(),
                r.shots_grad_cumulative.to_string(),
            ]
        })
        .collect()
}

pub fn write_metrics(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    write_atomic(path, &csv_bytes(&METRICS_HEADER, &metrics_rows(records)))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| HarnessError::Format {
        path: path.into(),
        message: format!("line {line}: bad value {value:?} for {field}"),
    })
}

/// Reads a metrics CSV written by [`write_metrics`].
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(HarnessError::csv(path))?;
    let header = r.headers().map_err(HarnessError::csv(path))?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(HarnessError::Format { path: path.into(), message: "not a metrics file".into() });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(HarnessError::csv(path))?;
        let f = |k: usize| &rec[k];
        let line = i + 2;
        out.push(MetricsRecord {
            epoch: parse_field(path, line, "epoch", f(0))?,
            train_loss: parse_field(path, line, "train_loss", f(1))?,
            test_loss: parse_field(path, line, "test_loss", f(2))?,
            train_accuracy: parse_field(path, line, "train_acc", f(3))?,
            test_accuracy: parse_field(path, line, "test_acc", f(4))?,
            shots_epoch: parse_field(path, line, "shots_epoch", f(5))?,
            shots_cumulative: parse_field(path, line, "shots_cumulative", f(6))?,
            shots_grad_cumulative: parse_field(path, line, "shots_grad_cumulative", f(7))?,
        });
    }
    Ok(out)
}

pub fn write_trajectory(path: &Path, points: &[TrajectoryPoint]) -> Result<()> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| {
            vec![p.iteration.to_string(), p.energy.to_string(), p.shots_iter.to_string(), p.shots_cumulative.to_string()]
        })
        .collect();
    write_atomic(path, &csv_bytes(&TRAJECTORY_HEADER, &rows))
}

/// Generic CSV table: header plus string cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).map_err(HarnessError::csv(path))?;
    let header = r.headers().map_err(HarnessError::csv(path))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()
        .map_err(HarnessError::csv(path))?;
    Ok(Table { header, rows })
}

/// Directory name used as a run identifier for `dir/metrics.csv`-style paths.
pub fn run_id(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    match (stem.as_str(), path.parent().and_then(Path::file_name)) {
        ("metrics" | "trajectory", Some(dir)) => dir.to_string_lossy().into_owned(),
        _ => stem,
    }
}
