//! Time-dependent quantum Monte Carlo (TDQMC) for a one-dimensional
//! soft-Coulomb helium model.
//!
//! The method couples an ensemble of Monte Carlo walkers to per-walker guide
//! waves. Each guide wave obeys its own single-particle Schrödinger equation
//! in which the electron-electron repulsion is replaced by a kernel-smoothed
//! effective potential over the walker cloud of the other electron. The width
//! of the smoothing kernel (the nonlocal quantum correlation length) is a
//! variational parameter: scanning it and minimizing either the ensemble
//! energy or the mean integrated squared error against the exact density
//! locates the same optimum.
//!
//! The crate ships:
//! - [`engine`]: the walker/guide-wave state machine (complex-time ground
//!   state preparation, real-time laser-driven propagation),
//! - [`oracle`]: a numerically exact two-electron grid solver used as the
//!   reference for densities and survival probabilities,
//! - [`estimators`]: ensemble energy, MISE, survival probability, and the
//!   correlation-length scan,
//! - [`kde`]: kernel density estimation with Silverman bandwidth selection,
//! - [`potentials`]: soft-core Coulomb potentials, the laser field, and the
//!   kernel-smoothed effective electron-electron potential,
//! - [`runner`] + a thin `tdqmc` binary for file-driven runs.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod config;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod grid;
pub mod kde;
pub mod oracle;
pub mod plot;
pub mod potentials;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
