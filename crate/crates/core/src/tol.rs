//! Numerical tolerances used across the crate.
//!
//! Every bound that appears in a public contract is named here so tests and
//! downstream code pin the same values.

/// Relative kernel cutoff: eigenvalues below `EPS_KER * max_eigenvalue` are
/// treated as exact zeros when evaluating logarithms on an operator support.
pub const EPS_KER: f64 = 1e-12;

/// Squared-norm threshold below which an ensemble member counts as the zero
/// vector and is pruned.
pub const EPS_WEIGHT: f64 = 1e-14;

/// Gap threshold separating a genuine violation from numerical noise (bits).
pub const TAU_GAP: f64 = 1e-7;

/// Hermiticity residual allowed on general operator inputs.
pub const HERM_INPUT: f64 = 1e-10;

/// Hermiticity residual allowed when constructing a [`crate::DensityOperator`].
pub const DENSITY_HERM: f64 = 1e-12;

/// Most negative eigenvalue a positive-semidefinite operator may carry.
pub const PSD_MIN_EIG: f64 = -1e-10;

/// Deviation from unit trace tolerated where a normalized density operator is
/// required.
pub const UNIT_TRACE: f64 = 1e-10;

/// Deviation from unit norm tolerated on normalized state-vector inputs.
pub const UNIT_NORM: f64 = 1e-10;

/// Frobenius residual allowed on right-unitary inputs (`U†U = I`).
pub const RIGHT_UNITARY: f64 = 1e-10;

/// Relative spread tolerated when an operation requires uniform member
/// weights `1/n`.
pub const UNIFORM_WEIGHT: f64 = 1e-8;
