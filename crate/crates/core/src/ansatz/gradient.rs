//! Gradients of circuit expectation values.
//!
//! Two routes compute the same derivative:
//! - adjoint differentiation: one forward pass plus one reverse sweep over the
//!   statevector, exact, and it also yields the derivative with respect to the
//!   input amplitudes;
//! - parameter shift: circuit re-evaluations at shifted angles. The two-term
//!   rule covers RX/RY/RZ/Rot slots and the four-term rule covers CRX/CRZ.
//!   With exact evaluations the rules are exact identities; with sampled
//!   evaluations they give an unbiased estimator whose cost is counted in shots.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, SQRT_2};

use num_complex::Complex64;

use super::CircuitTemplate;
use crate::rng::Stream;
use crate::simcore::{
    estimate_commuting_sampled, expectation_exact, GateKind, GateOp, Mat2, Observable, Pauli,
    PauliString, StateVector,
};
use crate::{Error, Result};

/// How expectation values and their gradients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientBackend {
    /// Exact expectations; gradients by adjoint differentiation.
    ExactAdjoint,
    /// Finite-shot expectations; gradients by parameter shift, each shifted
    /// evaluation costing `shots_per_evaluation` shots.
    SampledParamShift { shots_per_evaluation: u64 },
}

impl GradientBackend {
    pub fn sampled(shots: u64) -> Self {
        GradientBackend::SampledParamShift { shots_per_evaluation: shots }
    }

    pub fn shots(&self) -> Option<u64> {
        match *self {
            GradientBackend::ExactAdjoint => None,
            GradientBackend::SampledParamShift { shots_per_evaluation } => Some(shots_per_evaluation),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    TwoTerm,
    FourTerm,
}

impl ShiftRule {
    pub fn evaluations(self) -> u64 {
        match self {
            ShiftRule::TwoTerm => 2,
            ShiftRule::FourTerm => 4,
        }
    }
}

/// The shift rule of every parameter slot. Each slot must belong to exactly one gate.
pub fn shift_rules(template: &CircuitTemplate) -> Result<Vec<ShiftRule>> {
    let mut rules: Vec<Option<ShiftRule>> = vec![None; template.num_params()];
    for g in template.gates() {
        let rule = match g.kind {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rot => ShiftRule::TwoTerm,
            GateKind::Crx | GateKind::Crz => ShiftRule::FourTerm,
            _ => continue,
        };
        for &s in &g.slots {
            if rules[s].replace(rule).is_some() {
                return Err(Error::SharedSlot(s));
            }
        }
    }
    rules
        .into_iter()
        .enumerate()
        .map(|(s, r)| r.ok_or(Error::UnusedSlot(s)))
        .collect()
}

/// Circuit evaluations one parameter-shift gradient needs: `2·n₂ + 4·n₄`.
pub fn shift_evaluation_count(template: &CircuitTemplate) -> Result<u64> {
    Ok(shift_rules(template)?.iter().map(|r| r.evaluations()).sum())
}

/// Parameter-shift gradient of an arbitrary estimator `f(params)`.
///
/// Evaluation order is slot-major: `θ+π/2, θ−π/2` (then `θ+3π/2, θ−3π/2`
/// for four-term slots).
pub fn parameter_shift<F>(template: &CircuitTemplate, params: &[f64], mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    template.check_params(params)?;
    let rules = shift_rules(template)?;
    let c_plus = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
    let c_minus = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
    let mut shifted = params.to_vec();
    let mut eval_at = |k: usize, delta: f64, shifted: &mut Vec<f64>| -> Result<f64> {
        shifted[k] = params[k] + delta;
        let v = f(shifted);
        shifted[k] = params[k];
        v
    };
    let mut grad = Vec::with_capacity(params.len());
    for (k, rule) in rules.iter().enumerate() {
        let g = match rule {
            ShiftRule::TwoTerm => {
                let plus = eval_at(k, FRAC_PI_2, &mut shifted)?;
                let minus = eval_at(k, -FRAC_PI_2, &mut shifted)?;
                (plus - minus) / 2.0
            }
            ShiftRule::FourTerm => {
                let p1 = eval_at(k, FRAC_PI_2, &mut shifted)?;
                let m1 = eval_at(k, -FRAC_PI_2, &mut shifted)?;
                let p3 = eval_at(k, 3.0 * FRAC_PI_2, &mut shifted)?;
                let m3 = eval_at(k, -3.0 * FRAC_PI_2, &mut shifted)?;
                c_plus * (p1 - m1) - c_minus * (p3 - m3)
            }
        };
        grad.push(g);
    }
    Ok(grad)
}

/// A gate split into primitives with at most one parameter each.
enum Prim<'a> {
    Fixed(&'a GateOp),
    Rotation { axis: Pauli, target: usize, control: Option<usize>, slot: usize },
}

impl Prim<'_> {
    fn matrix(&self, params: &[f64]) -> Result<Mat2> {
        match self {
            Prim::Fixed(g) => g.matrix(params),
            Prim::Rotation { axis, slot, .. } => {
                let theta = params[*slot];
                Ok(match axis {
                    Pauli::X => Mat2::rx(theta),
                    Pauli::Y => Mat2::ry(theta),
                    _ => Mat2::rz(theta),
                })
            }
        }
    }

    fn wires(&self) -> (usize, Option<usize>) {
        match self {
            Prim::Fixed(g) => (g.target, g.control),
            Prim::Rotation { target, control, .. } => (*target, *control),
        }
    }
}

fn primitives(template: &CircuitTemplate) -> Vec<Prim<'_>> {
    let mut out = Vec::with_capacity(template.gates().len());
    for g in template.gates() {
        let rot = |axis, slot| Prim::Rotation { axis, target: g.target, control: g.control, slot };
        match g.kind {
            GateKind::Rx | GateKind::Crx => out.push(rot(Pauli::X, g.slots[0])),
            GateKind::Ry => out.push(rot(Pauli::Y, g.slots[0])),
            GateKind::Rz | GateKind::Crz => out.push(rot(Pauli::Z, g.slots[0])),
            GateKind::Rot => {
                out.push(rot(Pauli::Z, g.slots[0]));
                out.push(rot(Pauli::Y, g.slots[1]));
                out.push(rot(Pauli::Z, g.slots[2]));
            }
            _ => out.push(Prim::Fixed(g)),
        }
    }
    out
}

/// `Im <lambda| P_axis |psi>` over the control-is-1 subspace, which equals
/// `2 Re <lambda| (-i/2) P |psi>`, the derivative contribution of a rotation.
fn generator_term(
    lambda: &StateVector,
    psi: &StateVector,
    axis: Pauli,
    target: usize,
    control: Option<usize>,
) -> f64 {
    let t = psi.mask(target);
    let c = control.map_or(0, |q| psi.mask(q));
    let l = lambda.amplitudes();
    let p = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..p.len() {
        if i & c != c {
            continue;
        }
        let pp = match axis {
            Pauli::X => p[i ^ t],
            Pauli::Y => {
                if i & t != 0 {
                    Complex64::new(0.0, 1.0) * p[i ^ t]
                } else {
                    Complex64::new(0.0, -1.0) * p[i ^ t]
                }
            }
            _ => {
                if i & t == 0 {
                    p[i]
                } else {
                    -p[i]
                }
            }
        };
        acc += l[i].conj() * pp;
    }
    acc.im
}

/// Result of an adjoint sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointGradient {
    /// `<O>` at the given parameters.
    pub value: f64,
    /// `d<O>/dθ_k`.
    pub params: Vec<f64>,
    /// `d<O>/dψ₀_i` for real perturbations of the input amplitudes.
    pub input: Vec<f64>,
}

/// Exact gradient by adjoint differentiation.
pub fn adjoint_gradient(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    observable: &Observable,
) -> Result<AdjointGradient> {
    if observable.num_qubits() != template.num_qubits() {
        return Err(Error::LengthMismatch { expected: template.num_qubits(), got: observable.num_qubits() });
    }
    let mut psi = template.prepare(params, input)?;
    let mut lambda = observable.apply(&psi)?;
    let value = psi.inner(&lambda)?.re;

    let mut grad = vec![0.0; template.num_params()];
    for prim in primitives(template).iter().rev() {
        if let Prim::Rotation { axis, target, control, slot } = *prim {
            grad[slot] += generator_term(&lambda, &psi, axis, target, control);
        }
        let inv = prim.matrix(params)?.adjoint();
        let (target, control) = prim.wires();
        psi.apply_mat(target, control, &inv);
        lambda.apply_mat(target, control, &inv);
    }
    let input_grad = lambda.amplitudes().iter().map(|a| 2.0 * a.re).collect();
    Ok(AdjointGradient { value, params: grad, input: input_grad })
}

/// Expectation values of `observables` after running the template on `input`.
///
/// In sampled mode all observables are read from one shared execution of
/// `shots_per_evaluation` shots, so they must be qubit-wise commuting.
pub fn evaluate(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    observables: &[PauliString],
    backend: GradientBackend,
    rng: &mut Stream,
) -> Result<Vec<f64>> {
    let state = template.prepare(params, input)?;
    match backend {
        GradientBackend::ExactAdjoint => {
            observables.iter().map(|o| expectation_exact(&state, o)).collect()
        }
        GradientBackend::SampledParamShift { shots_per_evaluation } => {
            estimate_commuting_sampled(&state, observables, shots_per_evaluation, rng)
        }
    }
}

/// A gradient estimate and the shots spent on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub shots: u64,
}

/// `d<observable>/dθ` for every parameter.
///
/// Sampled mode evaluates the observable (a qubit-wise commuting sum) from one
/// shared execution per shifted circuit and reports
/// `(2·n₂ + 4·n₄) · shots_per_evaluation` consumed shots.
pub fn gradient(
    template: &CircuitTemplate,
    params: &[f64],
    input: &StateVector,
    observable: &Observable,
    backend: GradientBackend,
    rng: &mut Stream,
) -> Result<Gradient> {
    match backend {
        GradientBackend::ExactAdjoint => {
            let adj = adjoint_gradient(template, params, input, observable)?;
            Ok(Gradient { values: adj.params, shots: 0 })
        }
        GradientBackend::SampledParamShift { shots_per_evaluation } => {
            if shots_per_evaluation == 0 {
                return Err(Error::ZeroShots);
            }
            let strings: Vec<PauliString> = observable.terms().iter().map(|(_, p)| p.clone()).collect();
            let coeffs: Vec<f64> = observable.terms().iter().map(|(c, _)| *c).collect();
            let values = parameter_shift(template, params, |shifted| {
                let est = evaluate(template, shifted, input, &strings, backend, rng)?;
                Ok(est.iter().zip(&coeffs).map(|(e, c)| e * c).sum())
            })?;
            let shots = shift_evaluation_count(template)? * shots_per_evaluation;
            Ok(Gradient { values, shots })
        }
    }
}
