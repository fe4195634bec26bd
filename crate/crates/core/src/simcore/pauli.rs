use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use super::StateVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(Error::InvalidPauli(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis; letter `k` acts on qubit `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    ops: Vec<Pauli>,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self { ops }
    }

    pub fn identity(num_qubits: usize) -> Self {
        Self { ops: vec![Pauli::I; num_qubits] }
    }

    /// `Z` on qubit `q`, identity elsewhere.
    pub fn z(num_qubits: usize, q: usize) -> Self {
        let mut ops = vec![Pauli::I; num_qubits];
        ops[q] = Pauli::Z;
        Self { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// True when the string only contains I and Z.
    pub fn is_diagonal(&self) -> bool {
        self.ops.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn count_y(&self) -> usize {
        self.ops.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Qubit-wise commutation: on every qubit the letters agree or one is I.
    pub fn qubit_wise_commutes(&self, other: &PauliString) -> bool {
        self.ops.len() == other.ops.len()
            && self
                .ops
                .iter()
                .zip(&other.ops)
                .all(|(&a, &b)| a == Pauli::I || b == Pauli::I || a == b)
    }

    /// `(flip mask, phase mask, number of Y)` so that
    /// `P|i> = i^{ny} (-1)^{popcount(i & phase)} |i ^ flip>`.
    pub(crate) fn masks(&self) -> (usize, usize, usize) {
        let n = self.ops.len();
        let mut flip = 0usize;
        let mut phase = 0usize;
        for (q, &p) in self.ops.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    phase |= bit;
                }
                Pauli::Z => phase |= bit,
            }
        }
        (flip, phase, self.count_y())
    }

    /// Bit mask of the qubits the string acts on non-trivially.
    pub(crate) fn support_mask(&self) -> usize {
        let (flip, phase, _) = self.masks();
        flip | phase
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if self.ops.len() != state.num_qubits() {
            return Err(Error::LengthMismatch { expected: state.num_qubits(), got: self.ops.len() });
        }
        Ok(())
    }

    /// Accumulates `coeff * P|psi>` into `out`.
    pub(crate) fn apply_accumulate(&self, coeff: f64, psi: &[Complex64], out: &mut [Complex64]) {
        let (flip, phase, ny) = self.masks();
        let yphase = i_power(ny) * coeff;
        for (i, &a) in psi.iter().enumerate() {
            let sign = if (i & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out[i ^ flip] += yphase * sign * a;
        }
    }

    /// `P|psi>`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check(state)?;
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_accumulate(1.0, state.amplitudes(), &mut out);
        StateVector::from_amplitudes(out)
    }
}

fn i_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        Ok(Self { ops })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.ops.iter().map(|p| p.as_char()).collect();
        f.write_str(&s)
    }
}

/// `<psi|P|psi>`.
pub fn expectation_exact(state: &StateVector, obs: &PauliString) -> Result<f64> {
    obs.check(state)?;
    let (flip, phase, ny) = obs.masks();
    let psi = state.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &a) in psi.iter().enumerate() {
        let sign = if (i & phase).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        acc += psi[i ^ flip].conj() * a * sign;
    }
    Ok((acc * i_power(ny)).re)
}

/// A real-weighted sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    num_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    pub fn new(num_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.len() != num_qubits {
                return Err(Error::LengthMismatch { expected: num_qubits, got: p.len() });
            }
        }
        Ok(Self { num_qubits, terms })
    }

    /// `sum_q weights[q] * Z_q`.
    pub fn weighted_z(weights: &[f64]) -> Self {
        let n = weights.len();
        let terms = weights.iter().enumerate().map(|(q, &w)| (w, PauliString::z(n, q))).collect();
        Self { num_qubits: n, terms }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn expectation_exact(&self, state: &StateVector) -> Result<f64> {
        self.terms
            .iter()
            .map(|(c, p)| expectation_exact(state, p).map(|e| c * e))
            .sum()
    }

    /// Accumulates `O·psi` into `out` for raw amplitude slices of matching length.
    pub(crate) fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for (c, p) in &self.terms {
            p.apply_accumulate(*c, psi, out);
        }
    }

    /// `O|psi>`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::LengthMismatch { expected: state.num_qubits(), got: self.num_qubits });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
        self.apply_into(state.amplitudes(), &mut out);
        StateVector::from_amplitudes(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::GateOp;

    fn bell() -> StateVector {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&GateOp::h(0), &[]).unwrap();
        s.apply(&GateOp::cnot(0, 1), &[]).unwrap();
        s
    }

    #[test]
    fn z_expectations() {
        let zero = StateVector::zero(1).unwrap();
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(expectation_exact(&zero, &z).unwrap(), 1.0);

        let mut plus = zero.clone();
        plus.apply(&GateOp::h(0), &[]).unwrap();
        assert!(expectation_exact(&plus, &z).unwrap().abs() < 1e-15);

        let zz: PauliString = "ZZ".parse().unwrap();
        assert!((expectation_exact(&bell(), &zz).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_correlators() {
        let b = bell();
        let e = |s: &str| expectation_exact(&b, &s.parse().unwrap()).unwrap();
        assert!((e("XX") - 1.0).abs() < 1e-12);
        assert!((e("YY") + 1.0).abs() < 1e-12);
        assert!(e("ZI").abs() < 1e-12);
        assert!(e("XY").abs() < 1e-12);
    }

    #[test]
    fn y_action_matches_matrix() {
        // Y|0> = i|1>
        let s = StateVector::zero(1).unwrap();
        let y: PauliString = "Y".parse().unwrap();
        let out = y.apply(&s).unwrap();
        assert_eq!(out.amplitudes()[1], Complex64::new(0.0, 1.0));
        assert_eq!(out.amplitudes()[0], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn parse_errors_and_length_mismatch() {
        assert_eq!("ZQ".parse::<PauliString>(), Err(Error::InvalidPauli('Q')));
        let s = StateVector::zero(2).unwrap();
        assert_eq!(
            expectation_exact(&s, &"Z".parse().unwrap()),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn qubit_wise_commutation() {
        let a: PauliString = "XIZ".parse().unwrap();
        assert!(a.qubit_wise_commutes(&"XZI".parse().unwrap()));
        assert!(!a.qubit_wise_commutes(&"ZII".parse().unwrap()));
    }
}
