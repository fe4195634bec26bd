//! Dense statevector simulation of up to 16 qubits.
//!
//! Conventions: qubit 0 is the most significant bit of a basis index;
//! `RY(θ) = [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`,
//! `RZ(θ) = diag(e^{-iθ/2}, e^{iθ/2})`, `RX(θ) = exp(-iθX/2)`, and
//! `Rot(α, β, γ)` applies RZ(α), RY(β), RZ(γ) in that circuit order.
//! Global phase carries no meaning.

mod gate;
mod measure;
mod pauli;
mod state;

pub use gate::{GateKind, GateOp, Mat2};
pub use measure::{
    estimate_commuting_sampled, expectation_sampled_z, sample_counts, ShotOutcome,
};
pub use pauli::{expectation_exact, Observable, Pauli, PauliString};
pub use state::{amplitude_embed, amplitude_embed_vjp, StateVector, MAX_QUBITS};

pub use num_complex::Complex64;
