//! Dense complex linear algebra and entropy primitives.
//!
//! Everything downstream reduces to the routines here: a deterministic
//! Hermitian eigendecomposition, partial traces of bipartite outer products,
//! and entropy-type traces evaluated on an operator's support with a fixed
//! relative kernel cutoff ([`crate::tol::EPS_KER`]).

// Under no_std, f64 math comes from this trait; std test graphs shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};

use crate::{tol, Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = DVector<C64>;

/// Eigendecomposition of a Hermitian matrix with a deterministic convention:
/// eigenvalues descending, each eigenvector's first significant component made
/// real positive.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub eigenvectors: CMat,
}

/// State vector on a bipartite space, flattened as `index = a * dim_b + b`.
///
/// The squared norm is meaningful: ensembles store unnormalized vectors whose
/// squared norms carry the member weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteVector {
    dim_a: usize,
    dim_b: usize,
    amplitudes: CVec,
}

impl BipartiteVector {
    /// Builds a vector, checking length and finiteness.
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: CVec) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Shape(format!(
                "bipartite dims must be positive, got {dim_a}x{dim_b}"
            )));
        }
        if amplitudes.len() != dim_a * dim_b {
            return Err(Error::Shape(format!(
                "amplitude length {} does not match {dim_a}x{dim_b}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("non-finite amplitude".into()));
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    /// The zero vector on the given split.
    pub fn zero(dim_a: usize, dim_b: usize) -> Self {
        Self {
            dim_a,
            dim_b,
            amplitudes: CVec::zeros(dim_a * dim_b),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Squared Euclidean norm (the weight of a tilde vector).
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Returns `self` scaled by a complex factor.
    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amplitudes: &self.amplitudes * factor,
        }
    }

    /// Returns the normalized copy of a nonzero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq().sqrt();
        if n <= 0.0 {
            return Err(Error::Degenerate("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// Linear combination `Σ coeff_i · vecs_i` over vectors sharing one split.
    pub fn superpose(coeffs: &[C64], vecs: &[BipartiteVector]) -> Result<Self> {
        if coeffs.len() != vecs.len() || vecs.is_empty() {
            return Err(Error::Shape(format!(
                "superposition needs matching nonempty lists, got {} coefficients and {} vectors",
                coeffs.len(),
                vecs.len()
            )));
        }
        let (da, db) = (vecs[0].dim_a, vecs[0].dim_b);
        let mut amps = CVec::zeros(da * db);
        for (c, v) in coeffs.iter().zip(vecs) {
            if v.dim_a != da || v.dim_b != db {
                return Err(Error::Shape("mixed bipartite splits".into()));
            }
            amps.axpy(*c, &v.amplitudes, C64::new(1.0, 0.0));
        }
        Ok(Self {
            dim_a: da,
            dim_b: db,
            amplitudes: amps,
        })
    }
}

/// Positive-semidefinite Hermitian operator. The trace is not required to be
/// one: density operators built from tilde vectors carry their total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMat,
}

impl DensityOperator {
    /// Validates Hermiticity (within [`tol::DENSITY_HERM`]) and positive
    /// semidefiniteness (min eigenvalue ≥ [`tol::PSD_MIN_EIG`]).
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "density operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = hermiticity_residual(&matrix);
        if residual > tol::DENSITY_HERM {
            return Err(Error::NotHermitian {
                residual,
                limit: tol::DENSITY_HERM,
            });
        }
        let sym = hermitian_part(&matrix);
        let min_eig = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < tol::PSD_MIN_EIG {
            return Err(Error::NotPositive { min_eig });
        }
        Ok(Self { matrix: sym })
    }

    /// Wraps a matrix known to be Hermitian PSD by construction (for example
    /// `tr_B |ψ⟩⟨ψ|`), skipping the eigenvalue check. The Hermitian part is
    /// still taken so roundoff cannot leak asymmetry downstream.
    pub(crate) fn trusted(matrix: CMat) -> Self {
        Self {
            matrix: hermitian_part(&matrix),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

/// Schmidt form of a bipartite vector: `ψ = Σ_k s_k |a_k⟩⊗|b_k⟩` with
/// descending positive coefficients and orthonormal bases. Zero coefficients
/// are dropped, so the column count equals the Schmidt rank.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    /// Positive Schmidt coefficients, descending; squared sum = ‖ψ‖².
    pub coefficients: Vec<f64>,
    /// Orthonormal columns on the A side, one per coefficient.
    pub basis_a: CMat,
    /// Orthonormal columns on the B side, one per coefficient.
    pub basis_b: CMat,
}

/// Largest absolute entry of `m − m†`.
pub fn hermiticity_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub(crate) fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Deterministic Hermitian eigendecomposition.
///
/// Rejects non-square or non-Hermitian input (residual above
/// [`tol::HERM_INPUT`]), then symmetrizes, diagonalizes, sorts eigenvalues in
/// descending order, and fixes each eigenvector's phase so its first component
/// of significant magnitude is real positive.
pub fn herm_eig(h: &CMat) -> Result<HermitianSpectrum> {
    if !h.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let residual = hermiticity_residual(h);
    if residual > tol::HERM_INPUT {
        return Err(Error::NotHermitian {
            residual,
            limit: tol::HERM_INPUT,
        });
    }
    Ok(herm_eig_unchecked(&hermitian_part(h)))
}

/// Eigendecomposition of an already-Hermitian matrix (no validation).
pub(crate) fn herm_eig_unchecked(h: &CMat) -> HermitianSpectrum {
    let n = h.nrows();
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues.push(se.eigenvalues[src]);
        let mut col = se.eigenvectors.column(src).clone_owned();
        fix_phase(&mut col);
        eigenvectors.set_column(dst, &col);
    }
    HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Rotates a vector's global phase so its first component whose magnitude
/// exceeds `1e-12 · max magnitude` becomes real positive.
fn fix_phase(v: &mut CVec) {
    let max_abs = v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if max_abs == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() > 1e-12 * max_abs)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot / C64::new(pivot.norm(), 0.0);
    *v *= phase.conj();
}

/// Partial trace over the B factor of the outer product `|ψ⟩⟨φ|`.
///
/// Returns the `dim_a × dim_a` matrix with entries
/// `σ[a, a'] = Σ_b ψ[a·dim_b + b] · conj(φ[a'·dim_b + b])`. For `ψ = φ` the
/// result is Hermitian PSD with trace `‖ψ‖²`.
pub fn partial_trace_b(psi: &BipartiteVector, phi: &BipartiteVector) -> Result<CMat> {
    if psi.dim_a != phi.dim_a || psi.dim_b != phi.dim_b {
        return Err(Error::Shape(format!(
            "partial trace needs matching splits, got {}x{} and {}x{}",
            psi.dim_a, psi.dim_b, phi.dim_a, phi.dim_b
        )));
    }
    let (da, db) = (psi.dim_a, psi.dim_b);
    let mut sigma = CMat::zeros(da, da);
    for a in 0..da {
        for a2 in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..db {
                acc += psi.amplitudes[a * db + b] * phi.amplitudes[a2 * db + b].conj();
            }
            sigma[(a, a2)] = acc;
        }
    }
    Ok(sigma)
}

/// Reduced density operator `tr_B |ψ⟩⟨ψ|` of a single vector.
pub fn reduced_a(psi: &BipartiteVector) -> DensityOperator {
    let sigma = partial_trace_b(psi, psi).expect("identical splits");
    DensityOperator::trusted(sigma)
}

/// Schmidt decomposition of a nonzero bipartite vector.
///
/// Computed from the eigendecomposition of the reduced operator on the
/// smaller factor, which keeps the output deterministic through the
/// [`herm_eig`] phase convention. Coefficients below `1e-12 · s_max` are
/// treated as zero and dropped together with their basis columns.
pub fn schmidt(psi: &BipartiteVector) -> Result<SchmidtForm> {
    let norm_sq = psi.norm_sq();
    if norm_sq <= 0.0 {
        return Err(Error::Degenerate(
            "Schmidt form of the zero vector is undefined".into(),
        ));
    }
    let (da, db) = (psi.dim_a, psi.dim_b);
    // W[a, b] = ψ[a·db + b]; reduced A operator is W W†.
    let w = CMat::from_fn(da, db, |a, b| psi.amplitudes[a * db + b]);
    let spec = herm_eig_unchecked(&hermitian_part(&(&w * w.adjoint())));
    let s_max = spec.eigenvalues[0].max(0.0).sqrt();
    let mut coefficients = Vec::new();
    let mut cols_a: Vec<CVec> = Vec::new();
    let mut cols_b: Vec<CVec> = Vec::new();
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s <= 1e-12 * s_max {
            continue;
        }
        let a_col = spec.eigenvectors.column(k).clone_owned();
        // b_k = conj(W† a_k)/s_k, so that Σ s_k a_k ⊗ b_k rebuilds ψ without
        // a conjugation; orthonormal because the a_k are eigenvectors.
        let b_col = (w.adjoint() * &a_col).conjugate() / C64::new(s, 0.0);
        coefficients.push(s);
        cols_a.push(a_col);
        cols_b.push(b_col);
    }
    let rank = coefficients.len();
    let mut basis_a = CMat::zeros(da, rank);
    let mut basis_b = CMat::zeros(db, rank);
    for k in 0..rank {
        basis_a.set_column(k, &cols_a[k]);
        basis_b.set_column(k, &cols_b[k]);
    }
    Ok(SchmidtForm {
        coefficients,
        basis_a,
        basis_b,
    })
}

/// Von Neumann entropy in bits of a normalized density operator.
///
/// The input trace must equal one within [`tol::UNIT_TRACE`]; no internal
/// renormalization is performed. Eigenvalues at or below zero contribute
/// nothing (the `0·log 0 = 0` convention).
pub fn vn_entropy(rho: &DensityOperator) -> Result<f64> {
    let trace = rho.trace();
    if (trace - 1.0).abs() > tol::UNIT_TRACE {
        return Err(Error::Normalization(format!(
            "vn_entropy requires unit trace, got {trace:.12}"
        )));
    }
    let spec = herm_eig_unchecked(rho.matrix());
    let mut h = 0.0;
    for &lam in &spec.eigenvalues {
        if lam > 0.0 {
            h -= lam * lam.log2();
        }
    }
    Ok(h.max(0.0))
}

/// Degree-2 homogeneous pure-state entanglement `ℰ(ψ̃) = ‖ψ̃‖² E(ψ̃/‖ψ̃‖)`,
/// in bits times weight. Returns zero for the zero vector.
pub fn homog_entanglement(psi: &BipartiteVector) -> f64 {
    let total = psi.norm_sq();
    if total <= 0.0 {
        return 0.0;
    }
    let sigma = reduced_a(psi);
    let spec = herm_eig_unchecked(sigma.matrix());
    // −Σ λ_k log₂(λ_k / tr) over positive eigenvalues; λ_k sums to tr = ‖ψ̃‖².
    let mut value = 0.0;
    for &lam in &spec.eigenvalues {
        if lam > 0.0 {
            value -= lam * (lam / total).log2();
        }
    }
    value.max(0.0)
}

/// Eigenpairs of a PSD operator restricted to its support: pairs
/// `(λ_k, v_k)` with `λ_k > EPS_KER · λ_max`.
fn support_pairs(spec: &HermitianSpectrum) -> impl Iterator<Item = (f64, usize)> + '_ {
    let lam_max = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol::EPS_KER * lam_max;
    spec.eigenvalues
        .iter()
        .enumerate()
        .filter(move |(_, &lam)| lam > cutoff)
        .map(|(k, &lam)| (lam, k))
}

/// Cross-entropy trace `tr[σ_ij · log₂ σ_ii]`, evaluated in the eigenbasis of
/// `σ_ii` and summed only over eigenvalues above the kernel cutoff.
///
/// Kernel-diagonal contributions are dropped: for cross operators built from
/// genuine state pairs they vanish identically, so the cutoff removes only
/// roundoff noise.
pub fn entropy_term(sigma_ij: &CMat, sigma_ii: &DensityOperator) -> Result<C64> {
    let d = sigma_ii.dim();
    if sigma_ij.nrows() != d || sigma_ij.ncols() != d {
        return Err(Error::Shape(format!(
            "entropy_term shapes differ: {}x{} vs {d}x{d}",
            sigma_ij.nrows(),
            sigma_ij.ncols()
        )));
    }
    let spec = herm_eig_unchecked(sigma_ii.matrix());
    let mut acc = C64::new(0.0, 0.0);
    for (lam, k) in support_pairs(&spec) {
        let v = spec.eigenvectors.column(k);
        // v† σ_ij v
        let expectation = (v.adjoint() * sigma_ij * v)[(0, 0)];
        acc += expectation * C64::new(lam.log2(), 0.0);
    }
    Ok(acc)
}

/// First derivative of the homogeneous entropy flow: for a family `A(t)` of
/// positive operators with `A(t₀) = a` and `A'(t₀) = a_dot`, returns
/// `d/dt [−tr A log₂(A/tr A)] = −tr[a_dot · log₂(a/tr a)]`, evaluated on the
/// support of `a`.
pub fn entropy_flow_derivative(a: &DensityOperator, a_dot: &CMat) -> Result<f64> {
    let residual = hermiticity_residual(a_dot);
    if residual > tol::HERM_INPUT {
        return Err(Error::NotHermitian {
            residual,
            limit: tol::HERM_INPUT,
        });
    }
    log_trace_on_support(a, a_dot)
}

/// Second derivative of the entropy flow at a stationary point: for a family
/// with `A'(t₀) = 0` and `A''(t₀) = a_ddot`, returns
/// `−tr[a_ddot · log₂(a₀/tr a₀)]` on the support of `a₀`. The stationarity of
/// the family is the caller's responsibility and is not checked here.
pub fn entropy_flow_second(a0: &DensityOperator, a_ddot: &CMat) -> Result<f64> {
    let d = a0.dim();
    if a_ddot.nrows() != d || a_ddot.ncols() != d {
        return Err(Error::Shape(format!(
            "entropy_flow_second shapes differ: {}x{} vs {d}x{d}",
            a_ddot.nrows(),
            a_ddot.ncols()
        )));
    }
    log_trace_on_support(a0, a_ddot)
}

/// Shared kernel of the two entropy-flow derivatives:
/// `−tr[x · log₂(a/tr a)]` over the support of `a`.
fn log_trace_on_support(a: &DensityOperator, x: &CMat) -> Result<f64> {
    let trace = a.trace();
    if trace <= 0.0 {
        return Err(Error::Degenerate(
            "entropy flow needs an operator with positive trace".into(),
        ));
    }
    let spec = herm_eig_unchecked(a.matrix());
    let mut acc = 0.0;
    for (lam, k) in support_pairs(&spec) {
        let v = spec.eigenvectors.column(k);
        let expectation = (v.adjoint() * x * v)[(0, 0)].re;
        acc -= expectation * (lam / trace).log2();
    }
    Ok(acc)
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}
