use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::gate::Mat2;
use super::pauli::{Pauli, PauliString};
use super::StateVector;
use crate::rng::Stream;
use crate::{Error, Result};

/// Histogram of measured basis states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotOutcome {
    pub counts: BTreeMap<usize, u64>,
    pub shots: u64,
}

/// Draws `shots` basis indices from `|amplitude|^2` into a dense histogram.
fn histogram(state: &StateVector, shots: u64, rng: &mut Stream) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut cdf = Vec::with_capacity(state.dim());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    let last = state.dim() - 1;
    let mut hist = vec![0u64; state.dim()];
    for _ in 0..shots {
        let x = rng.uniform() * total;
        let idx = cdf.partition_point(|&c| c <= x).min(last);
        hist[idx] += 1;
    }
    Ok(hist)
}

/// `shots` i.i.d. computational-basis measurements.
pub fn sample_counts(state: &StateVector, shots: u64, rng: &mut Stream) -> Result<ShotOutcome> {
    let hist = histogram(state, shots, rng)?;
    let counts = hist
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    Ok(ShotOutcome { counts, shots })
}

fn parity_mean(hist: &[u64], mask: usize, shots: u64) -> f64 {
    let signed: i64 = hist
        .iter()
        .enumerate()
        .map(|(i, &c)| if (i & mask).count_ones() % 2 == 0 { c as i64 } else { -(c as i64) })
        .sum();
    signed as f64 / shots as f64
}

/// Estimates `<Z_q>` for every requested qubit from one shared set of `shots` samples.
pub fn expectation_sampled_z(
    state: &StateVector,
    qubits: &[usize],
    shots: u64,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    for &q in qubits {
        if q >= state.num_qubits() {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: state.num_qubits() });
        }
    }
    let hist = histogram(state, shots, rng)?;
    Ok(qubits.iter().map(|&q| parity_mean(&hist, state.mask(q), shots)).collect())
}

/// Estimates every string of a qubit-wise commuting set from one execution of
/// `shots` shots: each qubit is rotated into the shared measurement basis
/// (H for X, S†·H for Y) and the strings are read off as parities.
/// Identity strings evaluate to exactly 1; a set of identities draws no samples.
pub fn estimate_commuting_sampled(
    state: &StateVector,
    paulis: &[PauliString],
    shots: u64,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = state.num_qubits();
    let mut basis = vec![Pauli::I; n];
    for p in paulis {
        if p.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: p.len() });
        }
        for (q, &letter) in p.ops().iter().enumerate() {
            match (basis[q], letter) {
                (_, Pauli::I) => {}
                (Pauli::I, l) => basis[q] = l,
                (b, l) if b == l => {}
                _ => return Err(Error::NonCommuting),
            }
        }
    }
    if paulis.iter().all(PauliString::is_identity) {
        return Ok(vec![1.0; paulis.len()]);
    }

    let mut rotated = state.clone();
    let s_dag = Mat2::S.adjoint();
    for (q, &b) in basis.iter().enumerate() {
        match b {
            Pauli::X => rotated.apply_mat(q, None, &Mat2::H),
            Pauli::Y => {
                rotated.apply_mat(q, None, &s_dag);
                rotated.apply_mat(q, None, &Mat2::H);
            }
            _ => {}
        }
    }
    let hist = histogram(&rotated, shots, rng)?;
    Ok(paulis.iter().map(|p| parity_mean(&hist, p.support_mask(), shots)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::{expectation_exact, GateOp};

    fn plus_product(n: usize) -> StateVector {
        let mut s = StateVector::zero(n).unwrap();
        for q in 0..n {
            s.apply(&GateOp::h(q), &[]).unwrap();
        }
        s
    }

    #[test]
    fn deterministic_states() {
        let one = StateVector::basis(1, 1).unwrap();
        let out = sample_counts(&one, 100, &mut Stream::from_seed(0)).unwrap();
        assert_eq!(out.counts.into_iter().collect::<Vec<_>>(), vec![(1, 100)]);

        let zero = StateVector::zero(4).unwrap();
        let z = expectation_sampled_z(&zero, &[0, 1, 2, 3], 50, &mut Stream::from_seed(1)).unwrap();
        assert_eq!(z, vec![1.0; 4]);

        let ones = StateVector::basis(4, 0b1111).unwrap();
        let z = expectation_sampled_z(&ones, &[0, 1, 2, 3], 1, &mut Stream::from_seed(2)).unwrap();
        assert_eq!(z, vec![-1.0; 4]);
    }

    #[test]
    fn bell_samples_only_correlated_outcomes() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&GateOp::h(0), &[]).unwrap();
        s.apply(&GateOp::cnot(0, 1), &[]).unwrap();
        let out = sample_counts(&s, 1000, &mut Stream::from_seed(3)).unwrap();
        assert!(out.counts.keys().all(|&k| k == 0 || k == 3));
        assert_eq!(out.counts.values().sum::<u64>(), 1000);
    }

    #[test]
    fn zero_shots_is_an_error() {
        let s = StateVector::zero(1).unwrap();
        assert_eq!(sample_counts(&s, 0, &mut Stream::from_seed(0)), Err(Error::ZeroShots));
        assert_eq!(
            expectation_sampled_z(&s, &[0], 0, &mut Stream::from_seed(0)),
            Err(Error::ZeroShots)
        );
    }

    #[test]
    fn same_seed_same_outcome() {
        let s = plus_product(3);
        let a = sample_counts(&s, 500, &mut Stream::from_seed(11)).unwrap();
        let b = sample_counts(&s, 500, &mut Stream::from_seed(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn plus_state_fraction_within_binomial_band() {
        // P(|k/n - 1/2| > 0.02) with n = 10^4 is about 6e-5 per seed.
        let s = plus_product(1);
        let mut inside = 0;
        for seed in 0..200 {
            let out = sample_counts(&s, 10_000, &mut Stream::from_seed(seed)).unwrap();
            let f = *out.counts.get(&0).unwrap_or(&0) as f64 / 10_000.0;
            if (0.48..=0.52).contains(&f) {
                inside += 1;
            }
        }
        assert!(inside >= 198, "{inside}");
    }

    #[test]
    fn product_plus_mean_over_seeds() {
        let s = plus_product(4);
        let mut mean = [0.0; 4];
        for seed in 0..200 {
            let z = expectation_sampled_z(&s, &[0, 1, 2, 3], 1000, &mut Stream::from_seed(seed)).unwrap();
            for q in 0..4 {
                mean[q] += z[q] / 200.0;
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 0.01), "{mean:?}");
    }

    #[test]
    fn commuting_estimates_converge_to_exact() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&GateOp::ry(0, 0), &[0.7]).unwrap();
        s.apply(&GateOp::rx(1, 0), &[1.3]).unwrap();
        s.apply(&GateOp::cnot(0, 1), &[]).unwrap();
        for set in [["XI", "XX"], ["YY", "IY"], ["ZZ", "II"]] {
            let ps: Vec<PauliString> = set.iter().map(|p| p.parse().unwrap()).collect();
            let est = estimate_commuting_sampled(&s, &ps, 400_000, &mut Stream::from_seed(4)).unwrap();
            for (p, e) in ps.iter().zip(&est) {
                let exact = expectation_exact(&s, p).unwrap();
                assert!((e - exact).abs() < 0.01, "{p}: {e} vs {exact}");
            }
        }
    }

    #[test]
    fn non_commuting_set_rejected() {
        let s = StateVector::zero(1).unwrap();
        let ps: Vec<PauliString> = vec!["X".parse().unwrap(), "Z".parse().unwrap()];
        assert_eq!(
            estimate_commuting_sampled(&s, &ps, 10, &mut Stream::from_seed(0)),
            Err(Error::NonCommuting)
        );
    }
}
