//! Long-format plot data (`series,epoch,value`) and minimal SVG line charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::io::{csv_bytes, read_table, run_id, write_atomic, METRICS_HEADER, TRAJECTORY_HEADER};

pub const PLOT_HEADER: [&str; 3] = ["series", "epoch", "value"];

const METRIC_COLUMNS: [&str; 5] = ["train_loss", "test_loss", "train_acc", "test_acc", "shots_cumulative"];
const TRAJECTORY_COLUMNS: [&str; 2] = ["energy", "shots_cumulative"];

/// One series of one metric.
type Points = Vec<(f64, f64)>;

/// Expands directories into the metrics/trajectory files of their runs.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if !input.is_dir() {
            out.push(input.clone());
            continue;
        }
        let mut found = Vec::new();
        for name in ["metrics.csv", "trajectory.csv"] {
            if input.join(name).is_file() {
                found.push(input.join(name));
            }
        }
        let runs = input.join("runs");
        if runs.is_dir() {
            let mut dirs: Vec<PathBuf> = std::fs::read_dir(&runs)
                .map_err(HarnessError::io(&runs))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_dir())
                .collect();
            dirs.sort();
            for d in dirs {
                for name in ["metrics.csv", "trajectory.csv"] {
                    if d.join(name).is_file() {
                        found.push(d.join(name));
                    }
                }
            }
        }
        if found.is_empty() {
            return Err(HarnessError::Format { path: input.clone(), message: "no metrics or trajectory files".into() });
        }
        out.extend(found);
    }
    Ok(out)
}

fn number(path: &Path, s: &str) -> Result<f64> {
    s.parse().map_err(|_| HarnessError::Format { path: path.into(), message: format!("not a number: {s:?}") })
}

/// Parses every input, then writes `<metric>.csv` (and `<metric>.svg` when
/// `svg` is set) into `out_dir`. Nothing is written unless every input parses.
pub fn emit_plot_data(inputs: &[PathBuf], out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let files = collect_inputs(inputs)?;
    if files.is_empty() {
        return Err(HarnessError::Config("no input files".into()));
    }
    let mut data: BTreeMap<&str, Vec<(String, Points)>> = BTreeMap::new();
    let mut seen = Vec::new();
    for path in &files {
        let table = read_table(path)?;
        let columns: &[&str] = if table.header.iter().eq(METRICS_HEADER.iter()) {
            &METRIC_COLUMNS
        } else if table.header.iter().eq(TRAJECTORY_HEADER.iter()) {
            &TRAJECTORY_COLUMNS
        } else {
            return Err(HarnessError::Format { path: path.clone(), message: "unrecognised CSV header".into() });
        };
        if table.rows.is_empty() {
            return Err(HarnessError::Format { path: path.clone(), message: "no data rows".into() });
        }
        let series = run_id(path);
        if seen.contains(&series) {
            return Err(HarnessError::Format { path: path.clone(), message: format!("duplicate series name {series:?}") });
        }
        seen.push(series.clone());
        for &col in columns {
            let k = table.header.iter().position(|h| h == col).expect("known header");
            let points = table
                .rows
                .iter()
                .map(|r| Ok((number(path, &r[0])?, number(path, &r[k])?)))
                .collect::<Result<Points>>()?;
            data.entry(col).or_default().push((series.clone(), points));
        }
    }

    let mut written = Vec::new();
    for (metric, series) in &data {
        let rows: Vec<Vec<String>> = series
            .iter()
            .flat_map(|(name, pts)| pts.iter().map(move |(x, y)| vec![name.clone(), x.to_string(), y.to_string()]))
            .collect();
        let path = out_dir.join(format!("{metric}.csv"));
        write_atomic(&path, &csv_bytes(&PLOT_HEADER, &rows))?;
        written.push(path);
        if svg {
            let path = out_dir.join(format!("{metric}.svg"));
            write_atomic(&path, line_chart(metric, series).as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// A bare-bones line chart with one polyline per series.
pub fn line_chart(title: &str, series: &[(String, Points)]) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 440.0, 70.0, 170.0, 30.0, 40.0);
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="18" font-size="14">{title}</text>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{left},{top} V{} H{}" fill="none" stroke="black"/>"#,
        h - bottom,
        w - right
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.4}</text>"#, left - 6.0, top + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y0:.4}</text>"#, left - 6.0, h - bottom);
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="middle">{x0}</text>"#, h - bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x1}</text>"#, w - right, h - bottom + 16.0);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
        let ly = top + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            w - right + 10.0,
            ly + 4.0,
            name.replace('&', "&amp;").replace('<', "&lt;")
        );
    }
    s.push_str("</svg>\n");
    s
}
