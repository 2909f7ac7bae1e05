//! Ensembles of unnormalized state vectors and their equivalences.
//!
//! A decomposition `ρ = Σ p_i |ψ_i⟩⟨ψ_i|` is stored as the list of tilde
//! vectors `ψ̃_i = √p_i ψ_i`, so weights live in the squared norms. Two
//! decompositions describe the same state exactly when they are related by a
//! right-unitary matrix acting on the tilde vectors, which makes the
//! equivalence class concretely walkable: [`transform`] applies such a matrix,
//! [`spectral_ensemble`] produces the canonical eigenvector decomposition and
//! [`random_right_unitary`] samples the orbit deterministically per seed.

// Under no_std, f64 math comes from this trait; std test graphs shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{herm_eig_unchecked, BipartiteVector, C64, CMat, CVec, DensityOperator};
use crate::rng::GaussianSource;
use crate::{tol, Error, Result};

/// Ordered list of unnormalized tilde vectors on one bipartite split.
///
/// Vectors with squared norm at or below [`tol::EPS_WEIGHT`] are pruned at
/// construction; an empty ensemble is valid and has the zero density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim_a: usize,
    dim_b: usize,
    vectors: Vec<BipartiteVector>,
}

impl Ensemble {
    /// Builds an ensemble from tilde vectors, pruning zero-weight members.
    pub fn new(dim_a: usize, dim_b: usize, vectors: Vec<BipartiteVector>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Shape(format!(
                "ensemble dims must be positive, got {dim_a}x{dim_b}"
            )));
        }
        for v in &vectors {
            if v.dim_a() != dim_a || v.dim_b() != dim_b {
                return Err(Error::Shape(format!(
                    "member split {}x{} does not match ensemble {dim_a}x{dim_b}",
                    v.dim_a(),
                    v.dim_b()
                )));
            }
        }
        let vectors = vectors
            .into_iter()
            .filter(|v| v.norm_sq() > tol::EPS_WEIGHT)
            .collect();
        Ok(Self {
            dim_a,
            dim_b,
            vectors,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Number of (nonzero) members.
    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[BipartiteVector] {
        &self.vectors
    }

    /// Member weights `p_i = ‖ψ̃_i‖²`.
    pub fn weights(&self) -> Vec<f64> {
        self.vectors.iter().map(|v| v.norm_sq()).collect()
    }

    /// Normalized member states `ψ_i = ψ̃_i / ‖ψ̃_i‖`.
    pub fn normalized_states(&self) -> Vec<BipartiteVector> {
        self.vectors
            .iter()
            .map(|v| v.normalized().expect("members have positive norm"))
            .collect()
    }
}

/// An `m × n` matrix with orthonormal columns (`U†U = I`), the object
/// connecting any two decompositions of the same density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct RightUnitary {
    mat: CMat,
}

impl RightUnitary {
    /// Validates column orthonormality within [`tol::RIGHT_UNITARY`]
    /// (Frobenius norm of `U†U − I`).
    pub fn new(mat: CMat) -> Result<Self> {
        let (m, n) = (mat.nrows(), mat.ncols());
        if m < n || n == 0 {
            return Err(Error::Shape(format!(
                "right unitary needs rows ≥ cols ≥ 1, got {m}x{n}"
            )));
        }
        let gram = mat.adjoint() * &mat;
        let residual = (&gram - CMat::identity(n, n)).norm();
        if residual > tol::RIGHT_UNITARY {
            return Err(Error::Validation(format!(
                "columns not orthonormal: ‖U†U − I‖_F = {residual:.3e}"
            )));
        }
        Ok(Self { mat })
    }

    pub fn rows(&self) -> usize {
        self.mat.nrows()
    }

    pub fn cols(&self) -> usize {
        self.mat.ncols()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }
}

/// Converts a weighted list of normalized states into tilde form.
///
/// Weights must be nonnegative with sum at most `1 + 1e-10`; states must be
/// normalized within [`tol::UNIT_NORM`]. Zero-weight entries are dropped.
pub fn from_weighted(weights: &[f64], states: &[BipartiteVector]) -> Result<Ensemble> {
    if weights.len() != states.len() || states.is_empty() {
        return Err(Error::Shape(format!(
            "need matching nonempty lists, got {} weights and {} states",
            weights.len(),
            states.len()
        )));
    }
    let total: f64 = weights.iter().sum();
    if total > 1.0 + 1e-10 {
        return Err(Error::Validation(format!(
            "weights sum to {total:.12}, above 1"
        )));
    }
    let (da, db) = (states[0].dim_a(), states[0].dim_b());
    let mut vectors = Vec::with_capacity(states.len());
    for (&w, psi) in weights.iter().zip(states) {
        if w < 0.0 {
            return Err(Error::Validation(format!("negative weight {w}")));
        }
        let norm_err = (psi.norm_sq().sqrt() - 1.0).abs();
        if norm_err > tol::UNIT_NORM {
            return Err(Error::Normalization(format!(
                "state norm deviates from 1 by {norm_err:.3e}"
            )));
        }
        vectors.push(psi.scaled(C64::new(w.sqrt(), 0.0)));
    }
    Ensemble::new(da, db, vectors)
}

/// Density operator `ρ = Σ_i |ψ̃_i⟩⟨ψ̃_i|` realized by an ensemble.
pub fn density(e: &Ensemble) -> DensityOperator {
    let d = e.dim_a() * e.dim_b();
    let mut rho = CMat::zeros(d, d);
    for v in e.vectors() {
        let amps = v.amplitudes();
        for i in 0..d {
            for j in 0..d {
                rho[(i, j)] += amps[i] * amps[j].conj();
            }
        }
    }
    DensityOperator::trusted(rho)
}

/// Average entanglement `Σ_i ℰ(ψ̃_i) = Σ_i p_i E(ψ_i)` in bits.
pub fn avg_entanglement(e: &Ensemble) -> f64 {
    e.vectors()
        .iter()
        .map(crate::linalg::homog_entanglement)
        .sum()
}

/// Applies a right unitary: output member `φ̃_j = Σ_i U_ji ψ̃_i`.
///
/// The realized density operator is preserved exactly in exact arithmetic;
/// numerically the residual stays below 1e-10 for valid inputs. Members whose
/// norm collapses under the transform are pruned.
pub fn transform(e: &Ensemble, u: &RightUnitary) -> Result<Ensemble> {
    if u.cols() != e.count() {
        return Err(Error::Shape(format!(
            "right unitary has {} columns but the ensemble has {} members",
            u.cols(),
            e.count()
        )));
    }
    let mut out = Vec::with_capacity(u.rows());
    for j in 0..u.rows() {
        let coeffs: Vec<C64> = (0..u.cols()).map(|i| u.matrix()[(j, i)]).collect();
        out.push(BipartiteVector::superpose(&coeffs, e.vectors())?);
    }
    Ensemble::new(e.dim_a(), e.dim_b(), out)
}

/// Spectral decomposition of a density operator on a declared bipartite
/// split: one tilde vector `√λ_k v_k` per eigenvalue above the relative
/// kernel cutoff.
pub fn spectral_ensemble(rho: &DensityOperator, dim_a: usize, dim_b: usize) -> Result<Ensemble> {
    if dim_a * dim_b != rho.dim() {
        return Err(Error::Validation(format!(
            "declared split {dim_a}x{dim_b} does not match operator dimension {}",
            rho.dim()
        )));
    }
    let spec = herm_eig_unchecked(rho.matrix());
    let lam_max = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol::EPS_KER * lam_max;
    let mut vectors = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let col = spec.eigenvectors.column(k).clone_owned() * C64::new(lam.sqrt(), 0.0);
        vectors.push(BipartiteVector::new(dim_a, dim_b, col)?);
    }
    Ensemble::new(dim_a, dim_b, vectors)
}

/// All pairwise tensor products `ψ̃_i ⊗ φ̃_j`, reindexed so both A factors
/// come before both B factors: the output lives on the split
/// `(dim_a1·dim_a2, dim_b1·dim_b2)` with
/// `out[((a1·dA2 + a2)·dB1 + b1)·dB2 + b2] = ψ̃[a1·dB1 + b1] · φ̃[a2·dB2 + b2]`.
/// Members are ordered by `i` then `j`.
pub fn tensor_product_ensemble(e1: &Ensemble, e2: &Ensemble) -> Ensemble {
    let (da1, db1) = (e1.dim_a(), e1.dim_b());
    let (da2, db2) = (e2.dim_a(), e2.dim_b());
    let (da, db) = (da1 * da2, db1 * db2);
    let mut vectors = Vec::with_capacity(e1.count() * e2.count());
    for v1 in e1.vectors() {
        for v2 in e2.vectors() {
            let mut amps = CVec::zeros(da * db);
            for a1 in 0..da1 {
                for b1 in 0..db1 {
                    let x = v1.amplitudes()[a1 * db1 + b1];
                    for a2 in 0..da2 {
                        for b2 in 0..db2 {
                            let y = v2.amplitudes()[a2 * db2 + b2];
                            let a = a1 * da2 + a2;
                            let b = b1 * db2 + b2;
                            amps[a * db + b] = x * y;
                        }
                    }
                }
            }
            vectors.push(BipartiteVector::new(da, db, amps).expect("constructed length"));
        }
    }
    Ensemble::new(da, db, vectors).expect("positive dims")
}

/// Haar-like random right unitary, deterministic per seed: a seeded complex
/// Gaussian matrix orthonormalized column by column (modified Gram-Schmidt
/// with positive real diagonal).
pub fn random_right_unitary(m: usize, n: usize, seed: u64) -> Result<RightUnitary> {
    if m < n || n == 0 {
        return Err(Error::Shape(format!(
            "right unitary needs rows ≥ cols ≥ 1, got {m}x{n}"
        )));
    }
    let mut src = GaussianSource::new(seed);
    let mut mat = CMat::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            mat[(i, j)] = C64::new(src.normal(), src.normal());
        }
    }
    orthonormalize_columns(&mut mat)?;
    RightUnitary::new(mat)
}

/// In-place modified Gram-Schmidt with re-orthogonalization; the implicit R
/// diagonal is real positive, which fixes the distribution's phase gauge.
pub(crate) fn orthonormalize_columns(mat: &mut CMat) -> Result<()> {
    let n = mat.ncols();
    for j in 0..n {
        for _pass in 0..2 {
            for k in 0..j {
                let proj = mat.column(k).adjoint() * mat.column(j);
                let coeff = proj[(0, 0)];
                let prev = mat.column(k).clone_owned();
                let mut col = mat.column_mut(j);
                col.axpy(-coeff, &prev, C64::new(1.0, 0.0));
            }
        }
        let norm = mat.column(j).norm();
        if norm < 1e-300 {
            return Err(Error::Degenerate(
                "rank-deficient matrix cannot be orthonormalized".into(),
            ));
        }
        let mut col = mat.column_mut(j);
        col /= C64::new(norm, 0.0);
    }
    Ok(())
}
