//! File formats, configuration and experiment drivers around `qmlshots-core`.
//!
//! - [`io`]: IDX datasets, JSON Hamiltonians, metrics and trajectory CSVs
//! - [`config`]: layered TOML run configuration and presets
//! - [`checkpoint`]: binary training checkpoints
//! - [`experiments`]: train, sweep, schedule grid, init-spread and VQE drivers
//! - [`plot`]: long-format plot data and SVG charts

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod plot;

pub use error::{HarnessError, Result};
