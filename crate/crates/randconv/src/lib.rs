//! Compressive sensing by convolution with a white random waveform followed
//! by subsampling at fixed locations.
//!
//! The crate provides:
//!
//! - [`signal`]: white waveform and sparse-instance generation with
//!   reproducible seeding;
//! - [`operators`]: the fast circulant sensing operator, subsampling
//!   schemes, and the circulant spectral-norm identity;
//! - [`bases`]: orthonormal sparsity bases and the Fourier-coherence
//!   functional mu(F, Psi);
//! - [`recovery`]: matrix-free l1 minimization, recovery adjudication, and
//!   the dual-certificate verifier;
//! - [`analysis`]: closed-form evaluators for the measurement-count and
//!   concentration bounds plus Monte Carlo machinery to confront them with
//!   empirical frequencies;
//! - [`harness`]: experiment orchestration (phase transitions, concentration
//!   studies, the coded-aperture demo) and CSV/JSON persistence.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod analysis;
pub mod bases;
pub mod error;
pub mod fft;
pub mod harness;
pub mod operators;
pub mod recovery;
pub mod signal;

pub use error::{Error, Result};
