//! Variational ground-state search on Pauli-sum Hamiltonians under a shot schedule.

mod eigen;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use eigen::{ground_energy_lanczos, symmetric_eigenvalues, DENSE_MAX_QUBITS, EXACT_MAX_QUBITS};

use crate::ansatz::{adjoint_gradient, build_vqe_ansatz, parameter_shift, CircuitTemplate};
use crate::optim::{Adam, OptimizerConfig};
use crate::rng::{Purpose, Stream, StreamFamily};
use crate::schedule::{ShotCategory, ShotLedger, ShotSchedule};
use crate::simcore::{estimate_commuting_sampled, Observable, PauliString, StateVector, MAX_QUBITS};
use crate::{Error, Result};

/// `Σ cᵢ Pᵢ` with distinct strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliHamiltonian {
    name: String,
    observable: Observable,
}

impl PauliHamiltonian {
    /// Builds a Hamiltonian, summing the coefficients of repeated strings.
    /// Terms keep the order of first appearance.
    pub fn new(name: impl Into<String>, num_qubits: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        if terms.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(terms.len());
        for (c, p) in terms {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoefficient(p.to_string()));
            }
            if p.len() != num_qubits {
                return Err(Error::LengthMismatch { expected: num_qubits, got: p.len() });
            }
            match merged.iter_mut().find(|(_, q)| *q == p) {
                Some((acc, _)) => *acc += c,
                None => merged.push((c, p)),
            }
        }
        Ok(Self { name: name.into(), observable: Observable::new(num_qubits, merged)? })
    }

    /// Parses `(coefficient, "XYZI…")` pairs.
    pub fn from_strs(name: impl Into<String>, num_qubits: usize, terms: &[(f64, &str)]) -> Result<Self> {
        let parsed = terms
            .iter()
            .map(|(c, s)| s.parse::<PauliString>().map(|p| (*c, p)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, num_qubits, parsed)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.observable.num_qubits()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        self.observable.terms()
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    /// `Σ |cᵢ|` over non-identity terms.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms().iter().filter(|(_, p)| !p.is_identity()).map(|(c, _)| libm::fabs(*c)).sum()
    }
}

/// Minimum eigenvalue of `h`, for registers of at most [`EXACT_MAX_QUBITS`] qubits.
pub fn exact_ground_energy(h: &PauliHamiltonian) -> Result<f64> {
    eigen::ground_energy(h.observable())
}

/// An energy estimate and the shots it consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub energy: f64,
    pub shots: u64,
}

/// Splits `budget` shots over `terms` measured terms: an equal share each,
/// the remainder handed out one shot at a time from the first term, and at
/// least one shot per term.
pub fn split_budget(budget: u64, terms: usize) -> Vec<u64> {
    let k = terms as u64;
    if k == 0 {
        return Vec::new();
    }
    let (base, rem) = (budget / k, budget % k);
    (0..k).map(|i| (base + u64::from(i < rem)).max(1)).collect()
}

/// `<ψ(θ)|H|ψ(θ)>` for the ansatz prepared from `|0…0⟩`.
///
/// With `shots = Some(s)` the non-identity terms share the budget per
/// [`split_budget`]; term `i` (counting non-identity terms only) is measured
/// in its own eigenbasis using stream `streams.member(i)`. Identity terms are
/// added exactly.
pub fn energy_estimate(
    h: &PauliHamiltonian,
    ansatz: &CircuitTemplate,
    params: &[f64],
    shots: Option<u64>,
    streams: StreamFamily,
) -> Result<EnergyEstimate> {
    if ansatz.num_qubits() != h.num_qubits() {
        return Err(Error::LengthMismatch { expected: h.num_qubits(), got: ansatz.num_qubits() });
    }
    let state = ansatz.prepare(params, &StateVector::zero(h.num_qubits())?)?;
    let Some(budget) = shots else {
        return Ok(EnergyEstimate { energy: h.observable().expectation_exact(&state)?, shots: 0 });
    };
    if budget == 0 {
        return Err(Error::ZeroShots);
    }
    let measured: Vec<&(f64, PauliString)> = h.terms().iter().filter(|(_, p)| !p.is_identity()).collect();
    let constant: f64 = h.terms().iter().filter(|(_, p)| p.is_identity()).map(|(c, _)| c).sum();
    let split = split_budget(budget, measured.len());
    let mut energy = constant;
    for (i, ((c, p), &s)) in measured.iter().zip(&split).enumerate() {
        let mut rng = streams.member(i as u64);
        energy += c * estimate_commuting_sampled(&state, core::slice::from_ref(p), s, &mut rng)?[0];
    }
    Ok(EnergyEstimate { energy, shots: split.iter().sum() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeConfig {
    pub layers: usize,
    pub schedule: ShotSchedule,
    pub iterations: u64,
    pub optimizer: OptimizerConfig,
    pub seed: u64,
    /// Exact energies and adjoint gradients when false.
    pub sampled: bool,
    /// Reference energy for ΔE; computed exactly when absent.
    pub reference_energy: Option<f64>,
    /// Standard deviation of the N(0, σ²) initial angles.
    pub init_scale: f64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            schedule: ShotSchedule::constant(1000),
            iterations: 100,
            optimizer: OptimizerConfig { learning_rate: 0.05, ..OptimizerConfig::default() },
            seed: 0,
            sampled: true,
            reference_energy: None,
            init_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub iteration: u64,
    /// Objective estimate at the start of the iteration.
    pub energy: f64,
    /// Shots spent on that estimate.
    pub shots_iter: u64,
    pub shots_cumulative: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqeRun {
    pub trajectory: Vec<TrajectoryPoint>,
    /// Exact energy at the final parameters.
    pub final_energy: f64,
    /// Mean of the last (up to) ten trajectory estimates.
    pub tail_mean: f64,
    pub reference_energy: f64,
    /// `final_energy − reference_energy`.
    pub delta_e: f64,
    pub params: Vec<f64>,
    pub ledger: ShotLedger,
}

/// Adam descent on the energy of [`build_vqe_ansatz`].
///
/// Iteration `t` spends `shots_at(t)` shots on the recorded objective estimate
/// and the same per-evaluation budget on every parameter-shift evaluation
/// (ledgered separately as gradient shots).
pub fn vqe_optimize(h: &PauliHamiltonian, config: &VqeConfig) -> Result<VqeRun> {
    if config.iterations == 0 {
        return Err(Error::Config("iterations must be >= 1".into()));
    }
    config.schedule.validate()?;
    config.optimizer.validate()?;
    let reference_energy = match config.reference_energy {
        Some(e) => e,
        None => exact_ground_energy(h)?,
    };
    let ansatz = build_vqe_ansatz(h.num_qubits(), config.layers)?;
    let mut init = Stream::derive(config.seed, Purpose::VqeInit, 0, 0);
    let mut params: Vec<f64> = (0..ansatz.num_params()).map(|_| config.init_scale * init.normal()).collect();
    let mut adam = Adam::new(config.optimizer, params.len());
    let mut ledger = ShotLedger::new();
    let mut trajectory = Vec::with_capacity(config.iterations as usize);
    let terms = h.terms().len() as u64;
    let zero = StateVector::zero(h.num_qubits())?;

    for t in 1..=config.iterations {
        let shots = config.sampled.then(|| config.schedule.shots_at(t)).transpose()?;
        let objective = StreamFamily::new(config.seed, Purpose::VqeObjective, t);
        let est = energy_estimate(h, &ansatz, &params, shots, objective)?;
        ledger.record_total(ShotCategory::Forward, t, est.shots);
        trajectory.push(TrajectoryPoint {
            iteration: t,
            energy: est.energy,
            shots_iter: est.shots,
            shots_cumulative: ledger.forward_total(),
        });

        let grad = match shots {
            None => adjoint_gradient(&ansatz, &params, &zero, h.observable())?.params,
            Some(_) => {
                let family = StreamFamily::new(config.seed, Purpose::VqeGradient, t);
                let mut evaluation = 0u64;
                let mut spent = 0u64;
                let g = parameter_shift(&ansatz, &params, |shifted| {
                    let e = energy_estimate(h, &ansatz, shifted, shots, family.with_offset(evaluation * terms))?;
                    evaluation += 1;
                    spent += e.shots;
                    Ok(e.energy)
                })?;
                ledger.record_total(ShotCategory::Gradient, t, spent);
                g
            }
        };
        adam.step(&mut params, &grad)?;
    }

    let final_energy = energy_estimate(h, &ansatz, &params, None, StreamFamily::new(0, Purpose::General, 0))?.energy;
    let tail = &trajectory[trajectory.len().saturating_sub(10)..];
    let tail_mean = tail.iter().map(|p| p.energy).sum::<f64>() / tail.len() as f64;
    Ok(VqeRun {
        trajectory,
        final_energy,
        tail_mean,
        reference_energy,
        delta_e: final_energy - reference_energy,
        params,
        ledger,
    })
}

/// Standard deviation (population) of the last `n` trajectory energies.
pub fn tail_std(run: &VqeRun, n: usize) -> f64 {
    let tail = &run.trajectory[run.trajectory.len().saturating_sub(n)..];
    let m = tail.len() as f64;
    let mean = tail.iter().map(|p| p.energy).sum::<f64>() / m;
    libm::sqrt(tail.iter().map(|p| (p.energy - mean) * (p.energy - mean)).sum::<f64>() / m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn minus_z() -> PauliHamiltonian {
        PauliHamiltonian::from_strs("minus-z", 1, &[(-1.0, "Z")]).unwrap()
    }

    #[test]
    fn merges_and_validates() {
        let h = PauliHamiltonian::from_strs("m", 2, &[(0.3, "ZI"), (0.1, "XX"), (0.2, "ZI")]).unwrap();
        assert_eq!(h.terms().len(), 2);
        assert!((h.terms()[0].0 - 0.5).abs() < 1e-15);
        assert!(PauliHamiltonian::from_strs("m", 2, &[(1.0, "ZQ")]).is_err());
        assert!(PauliHamiltonian::from_strs("m", 2, &[(1.0, "Z")]).is_err());
        assert!(matches!(
            PauliHamiltonian::from_strs("m", 1, &[(f64::NAN, "Z")]),
            Err(Error::NonFiniteCoefficient(_))
        ));
        assert_eq!(PauliHamiltonian::new("m", 1, vec![]), Err(Error::EmptyHamiltonian));
    }

    #[test]
    fn budget_split() {
        assert_eq!(split_budget(10, 3), vec![4, 3, 3]);
        assert_eq!(split_budget(2, 4), vec![1, 1, 1, 1]);
        assert_eq!(split_budget(990, 14).iter().sum::<u64>(), 990);
    }

    #[test]
    fn minus_z_energies() {
        let h = minus_z();
        let ansatz = build_vqe_ansatz(1, 1).unwrap();
        let fam = StreamFamily::new(0, Purpose::General, 0);
        let at = |ry: f64| energy_estimate(&h, &ansatz, &[ry, 0.0], None, fam).unwrap().energy;
        assert!((at(0.0) + 1.0).abs() < 1e-12);
        assert!((at(core::f64::consts::PI) - 1.0).abs() < 1e-12);
        let s = energy_estimate(&h, &ansatz, &[core::f64::consts::PI, 0.0], Some(50), fam).unwrap();
        assert_eq!((s.energy, s.shots), (1.0, 50));
        assert_eq!(energy_estimate(&h, &ansatz, &[0.0, 0.0], Some(0), fam), Err(Error::ZeroShots));
    }

    #[test]
    fn minus_z_converges_exactly() {
        let cfg = VqeConfig { layers: 1, iterations: 200, sampled: false, init_scale: 1.0, seed: 4, ..Default::default() };
        let run = vqe_optimize(&minus_z(), &cfg).unwrap();
        assert!((run.final_energy + 1.0).abs() < 1e-3, "{}", run.final_energy);
        assert_eq!(run.trajectory.len(), 200);
        assert_eq!(run.delta_e, run.final_energy - run.reference_energy);
        assert_eq!(run.ledger.cumulative(), 0);
    }

    #[test]
    fn scheduled_trajectory_totals() {
        let h = PauliHamiltonian::from_strs("toy", 2, &[(0.5, "ZZ"), (0.3, "XI"), (-0.2, "IY"), (0.1, "II")]).unwrap();
        for (sched, total) in [(ShotSchedule::linear(1000, 10), 49_530), (ShotSchedule::step_default(), 54_020)] {
            let cfg = VqeConfig { layers: 1, schedule: sched, iterations: 100, ..Default::default() };
            let run = vqe_optimize(&h, &cfg).unwrap();
            assert_eq!(run.trajectory.last().unwrap().shots_cumulative, total);
            assert_eq!(run.ledger.forward_total(), total);
            assert!(run.ledger.total(ShotCategory::Gradient) > 0);
        }
    }
}
