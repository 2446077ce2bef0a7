//! Repeated weak measurements of a single qubit.
//!
//! States live in the Pauli basis as [`PauliVector`]s. A measurement step is a
//! [`KrausSet`]; combined with a detector efficiency it becomes an
//! [`Instrument`], which owns the 4×4 superoperators used by every likelihood
//! computation. On top of that sit the record statistics (mutual information,
//! Bayes accuracy), the continuous-time SME integrator, and the closed-form
//! low-efficiency SNR theory.
//!
//! Everything here is `no_std` with `alloc`. Monte-Carlo estimators are
//! generic over a [`Runner`] so a host crate can fan chunks out to threads
//! without changing results.
#![no_std]
// `!(x > 0.0)` is how NaN gets rejected; matrix kernels index by design.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod algebra;
pub mod enumerate;
pub mod error;
pub mod info;
pub mod models;
pub mod readout;
pub mod rng;
pub mod runner;
pub mod sme;
pub mod snr;
pub mod superop;
pub mod tol;
pub mod trajectory;

pub use algebra::{apply_kraus, pauli_compose, pauli_decompose, ComplexMatrix2, DensityMatrix, Pauli, PauliVector, Sign, C64};
pub use error::{Error, Result};
pub use info::{EstimateWithBound, MiCurve, SampleBudget};
pub use models::{error_kernel, kraus_set_model1, kraus_set_model2, ErrorKernel, KrausSet, Model, ModelIIParams, ModelIParams};
pub use rng::StreamKey;
pub use runner::{Runner, Serial};
pub use superop::{SpectralReport, SuperopMatrix};
pub use trajectory::{Instrument, MeasurementRecord, Prior, TrajectorySample};
