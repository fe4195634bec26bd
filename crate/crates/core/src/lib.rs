//! Finite-shot quantum circuit simulation and shot-scheduled training.
//!
//! The crate is `no_std` (it needs `alloc`) and contains every algorithmic
//! piece of the toolkit:
//!
//! - [`simcore`]: dense statevector simulator with exact and shot-sampled
//!   Pauli measurements.
//! - [`ansatz`]: circuit templates (QCNN conv/pool rings followed by strongly
//!   entangling layers, hardware-efficient VQE ansatz) and their gradients by
//!   adjoint differentiation or parameter shift.
//! - [`schedule`]: constant / linear / step shot schedules and the shot ledger.
//! - [`dataio`]: IDX decoding and stratified subsampling.
//! - [`hybrid`]: the classical-quantum image classifier and its training loop.
//! - [`vqe`]: Pauli Hamiltonians, exact ground energies and shot-scheduled VQE.
//!
//! Randomness comes exclusively from [`rng::Stream`], keyed by purpose and
//! index so that results are independent of evaluation order and thread count.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod ansatz;
pub mod dataio;
pub mod error;
pub mod hybrid;
pub mod optim;
mod par;
pub mod rng;
pub mod schedule;
pub mod simcore;
pub mod vqe;

pub use error::{Error, Result};
