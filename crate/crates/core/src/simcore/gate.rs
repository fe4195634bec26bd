use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Gate vocabulary of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx,
    Ry,
    Rz,
    /// RZ(α), RY(β), RZ(γ) in circuit order.
    Rot,
    Cnot,
    Crx,
    Crz,
}

impl GateKind {
    /// Number of parameter slots the gate consumes.
    pub fn arity(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Crx | GateKind::Crz => 1,
            GateKind::Rot => 3,
            _ => 0,
        }
    }

    pub fn is_controlled(self) -> bool {
        matches!(self, GateKind::Cnot | GateKind::Crx | GateKind::Crz)
    }
}

/// A 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
    pub const H: Mat2 = Mat2([
        [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
    ]);
    pub const X: Mat2 = Mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]]);
    pub const Y: Mat2 = Mat2([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]);
    pub const Z: Mat2 = Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);
    pub const S: Mat2 = Mat2([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]);
    pub const T: Mat2 = Mat2([
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)],
    ]);

    pub fn rx(theta: f64) -> Mat2 {
        let (s, co) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
        Mat2([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
    }

    pub fn ry(theta: f64) -> Mat2 {
        let (s, co) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
        Mat2([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
    }

    pub fn rz(theta: f64) -> Mat2 {
        let (s, co) = (libm::sin(theta / 2.0), libm::cos(theta / 2.0));
        Mat2([[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]])
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }
}

/// One gate of a circuit: a single target, an optional control, and indices
/// into the circuit's parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub slots: Vec<usize>,
}

impl GateOp {
    fn fixed(kind: GateKind, target: usize) -> Self {
        Self { kind, target, control: None, slots: Vec::new() }
    }

    pub fn h(q: usize) -> Self {
        Self::fixed(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::fixed(GateKind::X, q)
    }
    pub fn y(q: usize) -> Self {
        Self::fixed(GateKind::Y, q)
    }
    pub fn z(q: usize) -> Self {
        Self::fixed(GateKind::Z, q)
    }
    pub fn s(q: usize) -> Self {
        Self::fixed(GateKind::S, q)
    }
    pub fn t(q: usize) -> Self {
        Self::fixed(GateKind::T, q)
    }
    pub fn rx(q: usize, slot: usize) -> Self {
        Self { kind: GateKind::Rx, target: q, control: None, slots: vec![slot] }
    }
    pub fn ry(q: usize, slot: usize) -> Self {
        Self { kind: GateKind::Ry, target: q, control: None, slots: vec![slot] }
    }
    pub fn rz(q: usize, slot: usize) -> Self {
        Self { kind: GateKind::Rz, target: q, control: None, slots: vec![slot] }
    }
    pub fn rot(q: usize, slots: [usize; 3]) -> Self {
        Self { kind: GateKind::Rot, target: q, control: None, slots: slots.to_vec() }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::Cnot, target, control: Some(control), slots: Vec::new() }
    }
    pub fn crx(control: usize, target: usize, slot: usize) -> Self {
        Self { kind: GateKind::Crx, target, control: Some(control), slots: vec![slot] }
    }
    pub fn crz(control: usize, target: usize, slot: usize) -> Self {
        Self { kind: GateKind::Crz, target, control: Some(control), slots: vec![slot] }
    }

    /// Checks qubit indices and slot arity against a register size.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q < num_qubits {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange { index: q, num_qubits })
            }
        };
        in_range(self.target)?;
        match (self.kind.is_controlled(), self.control) {
            (true, Some(c)) => {
                in_range(c)?;
                if c == self.target {
                    return Err(Error::OverlappingQubits(c));
                }
            }
            (true, None) => return Err(Error::MissingControl(self.kind)),
            (false, Some(_)) => return Err(Error::UnexpectedControl(self.kind)),
            (false, None) => {}
        }
        if self.slots.len() != self.kind.arity() {
            return Err(Error::SlotArity {
                kind: self.kind,
                expected: self.kind.arity(),
                got: self.slots.len(),
            });
        }
        Ok(())
    }

    fn param(&self, i: usize, params: &[f64]) -> Result<f64> {
        let slot = self.slots[i];
        params
            .get(slot)
            .copied()
            .ok_or(Error::MissingParameter { slot, len: params.len() })
    }

    /// The matrix applied to the target (on the control-is-1 subspace for controlled gates).
    pub fn matrix(&self, params: &[f64]) -> Result<Mat2> {
        Ok(match self.kind {
            GateKind::H => Mat2::H,
            GateKind::X | GateKind::Cnot => Mat2::X,
            GateKind::Y => Mat2::Y,
            GateKind::Z => Mat2::Z,
            GateKind::S => Mat2::S,
            GateKind::T => Mat2::T,
            GateKind::Rx | GateKind::Crx => Mat2::rx(self.param(0, params)?),
            GateKind::Ry => Mat2::ry(self.param(0, params)?),
            GateKind::Rz | GateKind::Crz => Mat2::rz(self.param(0, params)?),
            GateKind::Rot => {
                let (a, b, g) = (self.param(0, params)?, self.param(1, params)?, self.param(2, params)?);
                Mat2::rz(g).mul(&Mat2::ry(b)).mul(&Mat2::rz(a))
            }
        })
    }
}
