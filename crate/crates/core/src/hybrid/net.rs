use alloc::vec;
use alloc::vec::Vec;

use super::model::{HybridModel, Layout, CLASSES, HALF, HIDDEN1, HIDDEN2, INPUT, NUM_PARAMS, QFEATURES, QUBITS};
use crate::ansatz::{adjoint_gradient, build_qcnn_pqc, evaluate, gradient, CircuitTemplate, GradientBackend};
use crate::rng::Stream;
use crate::simcore::{amplitude_embed, amplitude_embed_vjp, Observable, PauliString};
use crate::{Error, Result};

/// How PQC expectations and their gradients are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Exact expectations, adjoint gradients.
    Exact,
    /// `shots` samples per circuit execution; parameter-shift gradients.
    Sampled { shots: u64 },
}

impl Mode {
    fn backend(self) -> GradientBackend {
        match self {
            Mode::Exact => GradientBackend::ExactAdjoint,
            Mode::Sampled { shots } => GradientBackend::sampled(shots),
        }
    }
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub hidden1_pre: Vec<f64>,
    pub hidden1: Vec<f64>,
    pub hidden2: Vec<f64>,
    /// `<Z_q>` of PQC A followed by PQC B.
    pub quantum: Vec<f64>,
    pub logits: Vec<f64>,
}

/// Per-item gradient of the cross-entropy loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemGradient {
    pub grad: Vec<f64>,
    pub loss: f64,
    pub correct: bool,
    /// Shots spent on parameter-shift evaluations (0 in exact mode).
    pub gradient_shots: u64,
}

/// Architecture shared by every model: the PQC template and the activation choice.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridNet {
    template: CircuitTemplate,
    relu_after_fc2: bool,
    z_observables: Vec<PauliString>,
}

impl Default for HybridNet {
    fn default() -> Self {
        Self::new(false)
    }
}

/// `out = W·x + b` with `W` row-major `[out][in]`.
fn dense(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    b.iter()
        .zip(w.chunks_exact(x.len()))
        .map(|(bias, row)| bias + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
        .collect()
}

/// Accumulates `dW += g ⊗ x`, `db += g` into `grad_w`/`grad_b` and returns `Wᵀ·g`.
fn dense_backward(w: &[f64], x: &[f64], g: &[f64], grad_w: &mut [f64], grad_b: &mut [f64]) -> Vec<f64> {
    let mut dx = vec![0.0; x.len()];
    for (o, &go) in g.iter().enumerate() {
        grad_b[o] += go;
        if go == 0.0 {
            continue;
        }
        let row = &w[o * x.len()..(o + 1) * x.len()];
        let grow = &mut grad_w[o * x.len()..(o + 1) * x.len()];
        for i in 0..x.len() {
            grow[i] += go * x[i];
            dx[i] += go * row[i];
        }
    }
    dx
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| x.max(0.0)).collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&l| libm::exp(l - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Softmax cross-entropy and whether the arg-max (lowest index on ties) hits `label`.
pub fn loss_and_accuracy(logits: &[f64], label: usize) -> (f64, bool) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + libm::log(logits.iter().map(|&l| libm::exp(l - max)).sum::<f64>());
    let argmax = logits.iter().position(|&l| l == max).unwrap_or(0);
    (lse - logits[label], argmax == label)
}

impl HybridNet {
    pub fn new(relu_after_fc2: bool) -> Self {
        Self {
            template: build_qcnn_pqc(),
            relu_after_fc2,
            z_observables: (0..QUBITS).map(|q| PauliString::z(QUBITS, q)).collect(),
        }
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn relu_after_fc2(&self) -> bool {
        self.relu_after_fc2
    }

    fn check_image(image: &[f64]) -> Result<()> {
        if image.len() != INPUT {
            return Err(Error::LengthMismatch { expected: INPUT, got: image.len() });
        }
        Ok(())
    }

    /// Full forward pass. In sampled mode each PQC is executed once with
    /// `shots` shots and all four `<Z_q>` are read from those samples.
    pub fn forward(&self, model: &HybridModel, image: &[f64], mode: Mode, rng: &mut Stream) -> Result<ForwardPass> {
        Self::check_image(image)?;
        let hidden1_pre = dense(model.block(Layout::FC1_W), model.block(Layout::FC1_B), image);
        let hidden1 = relu(&hidden1_pre);
        let mut hidden2 = dense(model.block(Layout::FC2_W), model.block(Layout::FC2_B), &hidden1);
        if self.relu_after_fc2 {
            hidden2 = relu(&hidden2);
        }
        let mut quantum = Vec::with_capacity(QFEATURES);
        for (half, block) in [Layout::PQC_A, Layout::PQC_B].into_iter().enumerate() {
            let input = amplitude_embed(&hidden2[half * HALF..(half + 1) * HALF])?;
            let z = evaluate(&self.template, model.block(block), &input, &self.z_observables, mode.backend(), rng)?;
            quantum.extend(z);
        }
        let logits = dense(model.block(Layout::FC3_W), model.block(Layout::FC3_B), &quantum);
        Ok(ForwardPass { hidden1_pre, hidden1, hidden2, quantum, logits })
    }

    pub fn logits(&self, model: &HybridModel, image: &[f64], mode: Mode, rng: &mut Stream) -> Result<Vec<f64>> {
        Ok(self.forward(model, image, mode, rng)?.logits)
    }

    /// Loss gradient for one labelled image.
    ///
    /// PQC angles use the mode's backend with observable `Σ_q (∂L/∂<Z_q>)·Z_q`;
    /// gradients flowing into the embedded features always use the exact
    /// adjoint sweep and the embedding's normalisation Jacobian.
    pub fn backward(
        &self,
        model: &HybridModel,
        image: &[f64],
        label: usize,
        mode: Mode,
        rng: &mut Stream,
    ) -> Result<ItemGradient> {
        if label >= CLASSES {
            return Err(Error::InvalidLabel(label as u8));
        }
        let fwd = self.forward(model, image, mode, rng)?;
        let (loss, correct) = loss_and_accuracy(&fwd.logits, label);
        let mut dlogits = softmax(&fwd.logits);
        dlogits[label] -= 1.0;

        let mut grad = vec![0.0; NUM_PARAMS];
        let (head, fc3_b) = grad.split_at_mut(Layout::FC3_B.start);
        let dq = dense_backward(
            model.block(Layout::FC3_W),
            &fwd.quantum,
            &dlogits,
            &mut head[Layout::FC3_W],
            &mut fc3_b[..CLASSES],
        );

        let mut dhidden2 = vec![0.0; HIDDEN2];
        let mut gradient_shots = 0;
        for (half, block) in [Layout::PQC_A, Layout::PQC_B].into_iter().enumerate() {
            let features = &fwd.hidden2[half * HALF..(half + 1) * HALF];
            let input = amplitude_embed(features)?;
            let observable = Observable::weighted_z(&dq[half * QUBITS..(half + 1) * QUBITS]);
            let params = model.block(block.clone());
            let adj = adjoint_gradient(&self.template, params, &input, &observable)?;
            let param_grad = match mode {
                Mode::Exact => adj.params,
                Mode::Sampled { .. } => {
                    let g = gradient(&self.template, params, &input, &observable, mode.backend(), rng)?;
                    gradient_shots += g.shots;
                    g.values
                }
            };
            grad[block].copy_from_slice(&param_grad);
            let dfeat = amplitude_embed_vjp(features, &adj.input)?;
            dhidden2[half * HALF..(half + 1) * HALF].copy_from_slice(&dfeat);
        }
        if self.relu_after_fc2 {
            for (d, &h) in dhidden2.iter_mut().zip(&fwd.hidden2) {
                if h <= 0.0 {
                    *d = 0.0;
                }
            }
        }

        let (lo, hi) = grad.split_at_mut(Layout::FC2_W.start);
        let (w2, rest) = hi.split_at_mut(HIDDEN2 * HIDDEN1);
        let mut dhidden1 = dense_backward(model.block(Layout::FC2_W), &fwd.hidden1, &dhidden2, w2, &mut rest[..HIDDEN2]);
        for (d, &pre) in dhidden1.iter_mut().zip(&fwd.hidden1_pre) {
            if pre <= 0.0 {
                *d = 0.0;
            }
        }
        let (w1, b1) = lo.split_at_mut(Layout::FC1_B.start);
        dense_backward(model.block(Layout::FC1_W), image, &dhidden1, w1, b1);

        Ok(ItemGradient { grad, loss, correct, gradient_shots })
    }
}
