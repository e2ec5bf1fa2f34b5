//! Randomized quasi-Monte Carlo gradient estimators for black-box
//! variational inference.
//!
//! The crate replaces the i.i.d. uniform draws behind Monte Carlo ELBO
//! gradients with randomized low-discrepancy sequences. It provides:
//!
//! * [`lds`] — uniform point sets on `[0,1)^d`: pseudo-random (MC),
//!   deterministic Sobol (QMC) and two randomizations (digital shift,
//!   linear matrix scramble + shift).
//! * [`transforms`] — maps from the unit cube to target distributions
//!   (inverse normal CDF, lognormal, Cholesky-correlated Gaussians).
//! * [`families`] — mean-field variational families with analytic
//!   log-density, score, reparameterization map and entropy gradient.
//! * [`models`] — built-in Bayesian targets with analytic joint-density
//!   gradients and synthetic data generators.
//! * [`estimators`] — score-function and reparameterization gradient
//!   estimators over a uniform batch.
//! * [`optim`] — SGD/Adam drivers, including constant-rate SGD with a
//!   geometrically increasing sample size.
//! * [`diagnostics`] — gradient-variance resampling, high-precision ELBO
//!   evaluation and log-log rate fitting.
//! * [`selftest`] — the end-to-end verification suite used by the CLI.
//!
//! ```
//! use quasivi::lds::{generate, SequenceSource, SourceKind};
//!
//! let src = SequenceSource::new(SourceKind::RqmcScramble, 2).with_seed(7);
//! let batch = generate(&src, 64).unwrap();
//! assert_eq!((batch.n(), batch.d()), (64, 2));
//! ```

pub mod diagnostics;
pub mod estimators;
pub mod families;
pub mod lds;
pub mod models;
pub mod optim;
pub mod selftest;
pub mod transforms;

mod error;
mod seeds;

pub use error::{Error, Result};
pub use seeds::derive_seed;
