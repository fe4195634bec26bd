use alloc::vec::Vec;
use core::ops::Range;

use crate::ansatz::QCNN_PARAMS;
use crate::rng::{Purpose, Stream};
use crate::{Error, Result};

pub const INPUT: usize = crate::dataio::IMAGE_LEN;
pub const HIDDEN1: usize = 128;
pub const HIDDEN2: usize = 32;
pub const HALF: usize = HIDDEN2 / 2;
pub const QUBITS: usize = 4;
pub const QFEATURES: usize = 2 * QUBITS;
pub const CLASSES: usize = crate::dataio::NUM_CLASSES;

/// Offsets of each block inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout;

impl Layout {
    pub const FC1_W: Range<usize> = 0..HIDDEN1 * INPUT;
    pub const FC1_B: Range<usize> = Self::FC1_W.end..Self::FC1_W.end + HIDDEN1;
    pub const FC2_W: Range<usize> = Self::FC1_B.end..Self::FC1_B.end + HIDDEN2 * HIDDEN1;
    pub const FC2_B: Range<usize> = Self::FC2_W.end..Self::FC2_W.end + HIDDEN2;
    pub const PQC_A: Range<usize> = Self::FC2_B.end..Self::FC2_B.end + QCNN_PARAMS;
    pub const PQC_B: Range<usize> = Self::PQC_A.end..Self::PQC_A.end + QCNN_PARAMS;
    pub const FC3_W: Range<usize> = Self::PQC_B.end..Self::PQC_B.end + CLASSES * QFEATURES;
    pub const FC3_B: Range<usize> = Self::FC3_W.end..Self::FC3_W.end + CLASSES;
}

pub const NUM_PARAMS: usize = Layout::FC3_B.end;

/// All trainable parameters in one flat vector; see [`Layout`].
/// Dense weights are row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    params: Vec<f64>,
}

impl HybridModel {
    /// Every parameter drawn i.i.d. from N(0, 1).
    pub fn init(seed: u64) -> Self {
        let mut rng = Stream::derive(seed, Purpose::ModelInit, 0, 0);
        Self { params: (0..NUM_PARAMS).map(|_| rng.normal()).collect() }
    }

    pub fn from_params(params: Vec<f64>) -> Result<Self> {
        if params.len() != NUM_PARAMS {
            return Err(Error::ParameterCount { expected: NUM_PARAMS, got: params.len() });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("model parameter"));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn into_params(self) -> Vec<f64> {
        self.params
    }

    pub fn block(&self, range: Range<usize>) -> &[f64] {
        &self.params[range]
    }

    pub fn block_mut(&mut self, range: Range<usize>) -> &mut [f64] {
        &mut self.params[range]
    }
}
