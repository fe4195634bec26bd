//! Parametric circuit templates and their gradients.

mod gradient;
mod template;

pub use gradient::{
    adjoint_gradient, evaluate, gradient, parameter_shift, shift_evaluation_count, shift_rules,
    AdjointGradient, Gradient, GradientBackend, ShiftRule,
};
pub use template::{build_qcnn_pqc, build_vqe_ansatz, CircuitTemplate, QCNN_LAYERS, QCNN_PARAMS, QCNN_QUBITS};
