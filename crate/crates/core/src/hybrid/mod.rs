//! Hybrid classifier: dense layers around two 4-qubit PQCs.
//!
//! ```text
//! 784 ─fc1─ 128 ─ReLU─ fc2 ─ 32 ─┬─ 16 → embed → PQC A → <Z₀..Z₃> ─┐
//!                                └─ 16 → embed → PQC B → <Z₀..Z₃> ─┴─ 8 ─fc3─ 10
//! ```

mod model;
mod net;
mod train;

pub use model::{HybridModel, Layout, NUM_PARAMS};
pub use net::{loss_and_accuracy, softmax, ForwardPass, HybridNet, ItemGradient, Mode};
pub use train::{train, MetricsRecord, TrainConfig, TrainState};
