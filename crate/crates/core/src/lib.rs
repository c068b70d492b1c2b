//! Drift-diffusion separation for bosonic Gaussian channels.
//!
//! Channels `(X, Y, δ)` and generators `(A, D, u)` act on first and second
//! moments. Diffusion is removed by conjugating with a Gaussian smoothing map
//! whose covariance solves a Stein (discrete time) or Lyapunov (continuous
//! time) equation. The conjugation leaves the drift untouched, so eigenvalues
//! and Jordan structure, and hence exceptional points, are decided by the
//! drift alone.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauging;
pub mod generators;
pub mod linalg;
pub mod matrix_equations;
pub mod models;
pub mod phase_space;
pub mod sampling;
pub mod spectrum;

pub use error::{Error, Result};
pub use gauging::{
    gauge_channel, gauge_semigroup, similarity_spectrum_check, GaugingResult, SemigroupGauge,
    SmoothingMap, SpectrumCheck,
};
pub use generators::{
    cp_check_generator, from_lindblad, from_white_noise, from_white_noise_unchecked,
    propagate_moments, semigroup_channel, GaussianGenerator, LindbladData, WhiteNoiseData,
};
pub use matrix_equations::{
    expm2, solve_lyapunov, solve_stein, stability, stein_jordan_closed_form, stein_series,
    GaugeCovariance, GaugeSource, JordanDrift2x2, StabilityMode, StabilityReport,
};
pub use models::{
    ep_free_catalog, nm_channel, nm_ep_gauge, squeezed_ep_gauge, squeezed_general_gauge,
    squeezed_generator, CatalogEntry, CatalogItem, DiffusionModel, EpBranch, NmFamilyParams,
    SqueezedReservoirParams,
};
pub use phase_space::{
    apply_channel, compose, cp_check, displacement_gauge, reorder_matrix, reorder_vector,
    symplectic_form, CpMethod, CpReport, GaussianChannel, MomentState, Ordering, SymplecticForm,
};
pub use spectrum::{
    additive_spectrum, drift_restriction_matrix, graded_spectrum, jordan_structure,
    truncated_ou_matrix, AdditiveSpectrum, JordanReport,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
