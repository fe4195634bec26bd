use alloc::vec;
use alloc::vec::Vec;

use crate::simcore::{GateOp, StateVector};
use crate::{Error, Result};

/// An ordered gate list whose rotation angles index into a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTemplate {
    num_qubits: usize,
    gates: Vec<GateOp>,
    num_params: usize,
}

impl CircuitTemplate {
    /// Validates every gate and requires slots to cover `0..num_params` without gaps.
    pub fn new(num_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        if !(1..=crate::simcore::MAX_QUBITS).contains(&num_qubits) {
            return Err(Error::QubitCount(num_qubits));
        }
        for g in &gates {
            g.validate(num_qubits)?;
        }
        let num_params = gates
            .iter()
            .flat_map(|g| g.slots.iter().copied())
            .max()
            .map_or(0, |m| m + 1);
        let mut used = vec![false; num_params];
        for g in &gates {
            for &s in &g.slots {
                used[s] = true;
            }
        }
        if let Some(slot) = used.iter().position(|u| !u) {
            return Err(Error::UnusedSlot(slot));
        }
        Ok(Self { num_qubits, gates, num_params })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub(crate) fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::ParameterCount { expected: self.num_params, got: params.len() });
        }
        Ok(())
    }

    /// Runs the circuit on a copy of `input`.
    pub fn prepare(&self, params: &[f64], input: &StateVector) -> Result<StateVector> {
        self.check_params(params)?;
        if input.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch { expected: self.num_qubits, got: input.num_qubits() });
        }
        let mut state = input.clone();
        for g in &self.gates {
            state.apply(g, params)?;
        }
        Ok(state)
    }
}

#[derive(Default)]
struct Slots(usize);

impl Slots {
    fn next(&mut self) -> usize {
        self.0 += 1;
        self.0 - 1
    }
}

pub const QCNN_QUBITS: usize = 4;
/// Conv/pool ring repetitions, followed by the same number of entangling layers.
pub const QCNN_LAYERS: usize = 3;
/// Trainable angles in [`build_qcnn_pqc`].
pub const QCNN_PARAMS: usize = 84;

/// The 4-qubit classifier circuit: three rounds of a convolution ring and a
/// pooling ring over the neighbour pairs (0,1), (1,2), (2,3), (3,0), then three
/// strongly entangling layers (Rot on every qubit, CNOT ring with range 1).
///
/// Convolution block on `(a, b)`: RY(a), RY(b), CNOT a→b.
/// Pooling block on `(a, b)`: CRZ(b→a), X(b), CRX(b→a). Pooling keeps all
/// qubits so every qubit is still read out.
/// 3·(8 + 8) + 3·12 = 84 parameters.
pub fn build_qcnn_pqc() -> CircuitTemplate {
    let n = QCNN_QUBITS;
    let pairs: Vec<(usize, usize)> = (0..n).map(|q| (q, (q + 1) % n)).collect();
    let mut slots = Slots::default();
    let mut gates = Vec::new();
    for _ in 0..QCNN_LAYERS {
        for &(a, b) in &pairs {
            gates.push(GateOp::ry(a, slots.next()));
            gates.push(GateOp::ry(b, slots.next()));
            gates.push(GateOp::cnot(a, b));
        }
        for &(a, b) in &pairs {
            gates.push(GateOp::crz(b, a, slots.next()));
            gates.push(GateOp::x(b));
            gates.push(GateOp::crx(b, a, slots.next()));
        }
    }
    for _ in 0..QCNN_LAYERS {
        for q in 0..n {
            gates.push(GateOp::rot(q, [slots.next(), slots.next(), slots.next()]));
        }
        for q in 0..n {
            gates.push(GateOp::cnot(q, (q + 1) % n));
        }
    }
    CircuitTemplate::new(n, gates).expect("fixed layout is valid")
}

/// Hardware-efficient ansatz: per layer RY then RZ on every qubit, then a CNOT
/// ring q → q+1 (mod n), omitted for a single qubit. `2 · n · layers` parameters.
pub fn build_vqe_ansatz(num_qubits: usize, layers: usize) -> Result<CircuitTemplate> {
    if !(1..=crate::simcore::MAX_QUBITS).contains(&num_qubits) {
        return Err(Error::QubitCount(num_qubits));
    }
    if layers == 0 {
        return Err(Error::Config("ansatz needs at least one layer".into()));
    }
    let mut slots = Slots::default();
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..num_qubits {
            gates.push(GateOp::ry(q, slots.next()));
            gates.push(GateOp::rz(q, slots.next()));
        }
        if num_qubits > 1 {
            for q in 0..num_qubits {
                gates.push(GateOp::cnot(q, (q + 1) % num_qubits));
            }
        }
    }
    CircuitTemplate::new(num_qubits, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{expectation_exact, GateKind, PauliString};

    #[test]
    fn qcnn_parameter_count_by_enumeration() {
        let t = build_qcnn_pqc();
        let counted: usize = t.gates().iter().map(|g| g.kind.arity()).sum();
        assert_eq!(counted, 84);
        assert_eq!(t.num_params(), 84);
        assert_eq!(t.num_qubits(), 4);
        let crz = t.gates().iter().filter(|g| g.kind == GateKind::Crz).count();
        let crx = t.gates().iter().filter(|g| g.kind == GateKind::Crx).count();
        assert_eq!((crz, crx), (12, 12));
    }

    #[test]
    fn entangling_layers_have_four_cnots_each() {
        let t = build_qcnn_pqc();
        let tail = &t.gates()[t.gates().len() - 3 * 8..];
        for layer in tail.chunks(8) {
            assert!(layer[..4].iter().all(|g| g.kind == GateKind::Rot));
            assert_eq!(layer[4..].iter().filter(|g| g.kind == GateKind::Cnot).count(), 4);
        }
    }

    #[test]
    fn vqe_ansatz_shapes() {
        assert_eq!(build_vqe_ansatz(4, 3).unwrap().num_params(), 24);
        let single = build_vqe_ansatz(1, 1).unwrap();
        let kinds: Vec<GateKind> = single.gates().iter().map(|g| g.kind).collect();
        assert_eq!(kinds, vec![GateKind::Ry, GateKind::Rz]);
        assert!(build_vqe_ansatz(0, 1).is_err());
        assert!(build_vqe_ansatz(17, 1).is_err());
        assert!(build_vqe_ansatz(2, 0).is_err());
    }

    #[test]
    fn vqe_zero_params_keep_the_zero_state() {
        let t = build_vqe_ansatz(3, 2).unwrap();
        let zero = StateVector::zero(3).unwrap();
        let out = t.prepare(&vec![0.0; t.num_params()], &zero).unwrap();
        assert!((out.amplitudes()[0].norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(expectation_exact(&out, &PauliString::z(3, 0)).unwrap(), 1.0);
    }

    #[test]
    fn slots_must_be_contiguous() {
        let gates = vec![GateOp::ry(0, 1)];
        assert_eq!(CircuitTemplate::new(1, gates), Err(Error::UnusedSlot(0)));
    }

    #[test]
    fn wrong_parameter_length() {
        let t = build_vqe_ansatz(2, 1).unwrap();
        let zero = StateVector::zero(2).unwrap();
        assert_eq!(
            t.prepare(&[0.0; 3], &zero),
            Err(Error::ParameterCount { expected: 4, got: 3 })
        );
    }
}
