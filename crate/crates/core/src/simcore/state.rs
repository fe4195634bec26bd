use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::gate::{GateOp, Mat2};
use crate::{Error, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 16;

/// Amplitudes of an n-qubit pure state, `2^n` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n))
    }
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::QubitOutOfRange { index, num_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::LengthMismatch { expected: self.num_qubits, got: other.num_qubits });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Bit mask of qubit `q` in a basis index.
    #[inline]
    pub(crate) fn mask(&self, q: usize) -> usize {
        1usize << (self.num_qubits - 1 - q)
    }

    pub fn apply(&mut self, gate: &GateOp, params: &[f64]) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let m = gate.matrix(params)?;
        self.apply_mat(gate.target, gate.control, &m);
        Ok(())
    }

    /// Applies the inverse (adjoint) of `gate`.
    pub fn apply_inverse(&mut self, gate: &GateOp, params: &[f64]) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let m = gate.matrix(params)?.adjoint();
        self.apply_mat(gate.target, gate.control, &m);
        Ok(())
    }

    /// Applies a single-qubit matrix to `target`, optionally conditioned on `control` being 1.
    pub(crate) fn apply_mat(&mut self, target: usize, control: Option<usize>, m: &Mat2) {
        let t = self.mask(target);
        let c = control.map_or(0, |q| self.mask(q));
        let [[m00, m01], [m10, m11]] = m.0;
        for i in 0..self.amps.len() {
            if i & t == 0 && i & c == c {
                let j = i | t;
                let a = self.amps[i];
                let b = self.amps[j];
                self.amps[i] = m00 * a + m01 * b;
                self.amps[j] = m10 * a + m11 * b;
            }
        }
    }
}

/// Encodes `features` (length `2^n`) as the real amplitudes `features / ||features||`.
pub fn amplitude_embed(features: &[f64]) -> Result<StateVector> {
    let dim = features.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    let norm = libm::sqrt(features.iter().map(|x| x * x).sum::<f64>());
    if !norm.is_finite() {
        return Err(Error::NonFinite("amplitude embedding"));
    }
    if norm <= 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let amps = features.iter().map(|&x| Complex64::new(x / norm, 0.0)).collect();
    StateVector::from_amplitudes(amps)
}

/// Pulls a gradient with respect to the (real) embedded amplitudes back to the
/// raw features through the normalization `x / ||x||`.
pub fn amplitude_embed_vjp(features: &[f64], amp_grad: &[f64]) -> Result<Vec<f64>> {
    if features.len() != amp_grad.len() {
        return Err(Error::LengthMismatch { expected: features.len(), got: amp_grad.len() });
    }
    let norm = libm::sqrt(features.iter().map(|x| x * x).sum::<f64>());
    if norm <= 1e-12 {
        return Err(Error::ZeroNorm);
    }
    let dot: f64 = features.iter().zip(amp_grad).map(|(x, g)| x / norm * g).sum();
    Ok(features
        .iter()
        .zip(amp_grad)
        .map(|(x, g)| (g - dot * x / norm) / norm)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, re: f64, im: f64) -> bool {
        (a.re - re).abs() < 1e-12 && (a.im - im).abs() < 1e-12
    }

    #[test]
    fn embed_basis_vector() {
        let mut f = [0.0; 16];
        f[0] = 1.0;
        let s = amplitude_embed(&f).unwrap();
        assert_eq!(s.num_qubits(), 4);
        assert_eq!(s, StateVector::zero(4).unwrap());
    }

    #[test]
    fn embed_uniform_and_pythagorean() {
        let s = amplitude_embed(&[1.0; 16]).unwrap();
        assert!(s.amplitudes().iter().all(|a| close(*a, 0.25, 0.0)));

        let mut f = [0.0; 16];
        f[0] = 3.0;
        f[1] = 4.0;
        let s = amplitude_embed(&f).unwrap();
        assert!(close(s.amplitudes()[0], 0.6, 0.0));
        assert!(close(s.amplitudes()[1], 0.8, 0.0));
        assert!(s.amplitudes()[2..].iter().all(|a| close(*a, 0.0, 0.0)));
    }

    #[test]
    fn embed_rejects_zero_norm_and_bad_length() {
        assert_eq!(amplitude_embed(&[0.0; 16]), Err(Error::ZeroNorm));
        assert_eq!(amplitude_embed(&[1.0; 12]), Err(Error::NotPowerOfTwo(12)));
    }

    #[test]
    fn embed_vjp_matches_finite_differences() {
        let x = [0.3, -1.2, 0.7, 2.0];
        let g = [0.5, 0.1, -0.4, 0.9];
        let analytic = amplitude_embed_vjp(&x, &g).unwrap();
        let h = 1e-6;
        for k in 0..4 {
            let f = |d: f64| {
                let mut y = x;
                y[k] += d;
                let s = amplitude_embed(&y).unwrap();
                s.amplitudes().iter().zip(&g).map(|(a, g)| a.re * g).sum::<f64>()
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            assert!((fd - analytic[k]).abs() < 1e-8, "{k}: {fd} vs {}", analytic[k]);
        }
    }

    #[test]
    fn qubit_bounds() {
        assert_eq!(StateVector::zero(0), Err(Error::QubitCount(0)));
        assert_eq!(StateVector::zero(17), Err(Error::QubitCount(17)));
        assert!(StateVector::zero(16).is_ok());
    }
}
