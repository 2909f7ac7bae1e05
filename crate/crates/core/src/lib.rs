//! Numerical toolkit for testing whether an ensemble decomposition of a
//! bipartite mixed state minimizes average entanglement.
//!
//! The crate is organized around a single quantity: the gap functional
//! `G(c) = ℰ(Σ c_i ψ_i) + Re Σ c_i c̄_j M_ij` built from a set of normalized
//! states and their cross table `M_ij = tr[σ_ij log₂ σ_ii]`. Nonnegativity of
//! `G` over the unit sphere characterizes optimal decompositions, a strictly
//! negative value certifies a better decomposition nearby, and the certificate
//! vector seeds an explicit improvement path.
//!
//! Modules:
//! - [`linalg`]: Hermitian eigendecomposition, partial traces, Schmidt form,
//!   entropy primitives with a fixed kernel-cutoff convention.
//! - [`ensemble`]: unnormalized-vector ensembles, right-unitary transforms,
//!   spectral and tensor-product constructions.
//! - [`condition`]: cross tables, the gap functional and its multistart
//!   minimizer, hermiticity and rotation-derivative checks.
//! - [`optimizer`]: exact perturbation paths, decomposition improvement, and
//!   brute-force entanglement-of-formation minimization over right unitaries.
//! - [`wootters`]: closed-form two-qubit concurrence, entanglement of
//!   formation, and optimal-decomposition construction used as ground truth.
//!
//! All entropies are in bits (base-2 logarithms). Bipartite amplitudes use the
//! flattening `index = a * dim_b + b`. The crate is `no_std` + `alloc`; it
//! spawns no threads, and every randomized routine takes an explicit seed.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod condition;
pub mod ensemble;
pub mod linalg;
pub mod optimizer;
pub mod tol;
pub mod wootters;

mod rng;

pub use condition::{
    build_cross_table, certificate_from_minima, gap, gap_start_points, hermiticity_check,
    minimize_gap, minimize_gap_at, rotation_derivative, second_derivative_crosscheck,
    superposition_bound, CrossTable, GapCertificate, LocalMinimum, MinimizeOpts, RotationFamily,
    Verdict,
};
pub use ensemble::{
    avg_entanglement, density, from_weighted, random_right_unitary, spectral_ensemble,
    tensor_product_ensemble, transform, Ensemble, RightUnitary,
};
pub use linalg::{
    entropy_flow_derivative, entropy_flow_second, entropy_term, herm_eig, homog_entanglement,
    partial_trace_b, schmidt, vn_entropy, BipartiteVector, CMat, CVec, DensityOperator,
    HermitianSpectrum, SchmidtForm,
};
pub use optimizer::{
    additivity_probe, eof_min, improve, perturb, AdditivityOutcome, EofLocalMinimum, EofOpts,
    EofResult, EofSearch, PerturbationPath,
};
pub use wootters::{
    concurrence, eof_2qubit, optimal_decomposition_2qubit, OptimalDecomposition, TwoQubitState,
};

use alloc::string::String;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Matrix or vector dimensions do not match what the operation requires.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// An input that must be Hermitian is not, beyond tolerance.
    #[error("input not Hermitian: residual {residual:.3e} exceeds {limit:.3e}")]
    NotHermitian { residual: f64, limit: f64 },
    /// An operator that must be positive semidefinite has a significantly
    /// negative eigenvalue.
    #[error("operator not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPositive { min_eig: f64 },
    /// A state vector or density operator fails its normalization contract.
    #[error("normalization error: {0}")]
    Normalization(String),
    /// Input is structurally valid but violates a precondition.
    #[error("validation error: {0}")]
    Validation(String),
    /// An input is too degenerate for the operation (for example, the zero
    /// vector where a direction is required).
    #[error("degenerate input: {0}")]
    Degenerate(String),
    /// An iterative search exhausted its budget without reaching its target.
    #[error("search failed: {0}")]
    SearchFailed(String),
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
