//! Spectral Galerkin solver for the one-dimensional fractional stochastic
//! heat equation
//!
//! `∂u/∂t = -(-Δ)^α u + f(u) + ∂B/∂t`
//!
//! on `(0,1)` with homogeneous Dirichlet conditions, together with a Monte
//! Carlo harness that measures temporal strong-convergence rates.
//!
//! The crate is organized along the pipeline:
//!
//! - [`spectral`]: the sine eigenbasis, transforms and norms;
//! - [`noise`]: exact sampling of the Ornstein–Uhlenbeck stochastic
//!   convolution, coupled across dyadic time grids, with deterministic
//!   per-trajectory RNG streams;
//! - [`scheme`]: the baseline semi-implicit Euler scheme and the modified
//!   scheme with Lagrange-quotient corrections;
//! - [`harness`]: coupled-refinement error estimation, rate tables, presets
//!   and CSV output.

pub mod harness;
pub mod noise;
pub mod scheme;
pub mod spectral;

pub use harness::{
    empirical_rate, fit_rate, initial_condition, mc_error, run_ensemble, run_study,
    run_trajectory, theoretical_rate, Ensemble, HarnessError, RateRow, RateTable, StudyConfig,
};
pub use noise::{
    coarsen, correction_integral, ou_advance, ou_variance, sample_ladder, NoiseError, NoiseLadder,
    NoiseParams, NoiseStream, OUState,
};
pub use scheme::{
    baseline_step, first_step, integrate, modified_step, nemytskii, quotient, Nonlinearity,
    SchemeConfig, SchemeError, SchemeKind, TrajectoryState,
};
pub use spectral::{EigenBasis, SpectralError, SpectralField};
