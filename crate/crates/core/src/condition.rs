//! The optimality test: cross tables, the gap functional, and its minimizer.
//!
//! For a set of normalized states `{ψ_i}` the cross table holds
//! `M_ij = tr[σ_ij log₂ σ_ii]` with `σ_ij = tr_B |ψ_i⟩⟨ψ_j|`. The gap
//! functional
//!
//! ```text
//! G(c) = ℰ(Σ_i c_i ψ_i) + Re Σ_ij c_i c̄_j M_ij
//! ```
//!
//! is nonnegative on the whole unit sphere exactly when the set is the state
//! set of an optimal decomposition. [`minimize_gap`] searches for negative
//! values; because the search is nonconvex and one-sided, a clean pass is
//! reported as `NoViolationFound`, never as a proof of optimality. A negative
//! certificate, by contrast, is checkable by direct evaluation and seeds a
//! strictly better decomposition via [`crate::optimizer::improve`].

// Under no_std, f64 math comes from this trait; std test graphs shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{
    entropy_term, herm_eig_unchecked, homog_entanglement, partial_trace_b, reduced_a,
    BipartiteVector, C64, CMat, CVec, DensityOperator,
};
use crate::rng::GaussianSource;
use crate::{tol, Error, Result};

/// Cross table of a normalized state set: all pairwise partial traces
/// `σ_ij` and the matrix `M_ij = tr[σ_ij log₂ σ_ii]`.
#[derive(Debug, Clone)]
pub struct CrossTable {
    states: Vec<BipartiteVector>,
    sigma: Vec<CMat>,
    m_table: CMat,
    /// Hermitian matrix representing the quadratic form:
    /// `Re Σ_ij c_i c̄_j M_ij = c† K c` with `K = (Mᵀ + M̄)/2`.
    quad: CMat,
}

impl CrossTable {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    /// The normalized states the table was built from.
    pub fn states(&self) -> &[BipartiteVector] {
        &self.states
    }

    /// `σ_ij = tr_B |ψ_i⟩⟨ψ_j|`.
    pub fn sigma(&self, i: usize, j: usize) -> &CMat {
        &self.sigma[i * self.states.len() + j]
    }

    /// The matrix `M_ij`.
    pub fn m_table(&self) -> &CMat {
        &self.m_table
    }
}

/// Search verdict for the sign of the gap functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// A unit vector with `G(c) < −τ_gap` was found; the set is not optimal.
    Violated,
    /// No violation was found within the search budget. Not a proof.
    NoViolationFound,
}

/// Outcome of [`minimize_gap`]: the best minimum found and where it came from.
#[derive(Debug, Clone)]
pub struct GapCertificate {
    /// Unit-norm coefficient vector attaining `gap`.
    pub c: CVec,
    /// Best (lowest) gap value found, in bits.
    pub gap: f64,
    pub verdict: Verdict,
    /// Total number of starts searched.
    pub restarts_used: usize,
    /// Local minimum per start, as `(start index, value)`.
    pub min_history: Vec<(usize, f64)>,
}

/// Options for [`minimize_gap`].
#[derive(Debug, Clone)]
pub struct MinimizeOpts {
    /// Number of seeded random starts added to the deterministic start list.
    pub restarts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Seed for the random starts.
    pub seed: u64,
    /// Violation threshold in bits.
    pub tau_gap: f64,
}

impl Default for MinimizeOpts {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            seed: 0,
            tau_gap: tol::TAU_GAP,
        }
    }
}

/// One local minimization result, used by the per-start API.
#[derive(Debug, Clone)]
pub struct LocalMinimum {
    pub start_index: usize,
    pub c: CVec,
    pub gap: f64,
}

/// Rotation family for the two-state derivative check: a real rotation or a
/// phase rotation between two members, signed by direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationFamily {
    RealPlus,
    RealMinus,
    ImagPlus,
    ImagMinus,
}

/// Builds the cross table of a set of normalized states.
///
/// Inputs must be normalized within [`tol::UNIT_NORM`] and share one split;
/// the table is the object every downstream check consumes. The off-diagonal
/// structure satisfies `σ_ij† = σ_ji`, and the diagonal satisfies
/// `M_ii = −E(ψ_i)`.
pub fn build_cross_table(states: &[BipartiteVector]) -> Result<CrossTable> {
    if states.is_empty() {
        return Err(Error::Shape("cross table needs at least one state".into()));
    }
    let (da, db) = (states[0].dim_a(), states[0].dim_b());
    for psi in states {
        if psi.dim_a() != da || psi.dim_b() != db {
            return Err(Error::Shape("mixed bipartite splits".into()));
        }
        let norm_err = (psi.norm_sq().sqrt() - 1.0).abs();
        if norm_err > tol::UNIT_NORM {
            return Err(Error::Normalization(format!(
                "cross table takes normalized states; norm deviates by {norm_err:.3e}"
            )));
        }
    }
    let n = states.len();
    let mut sigma = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            sigma.push(partial_trace_b(&states[i], &states[j])?);
        }
    }
    let mut m_table = CMat::zeros(n, n);
    for i in 0..n {
        let sigma_ii = DensityOperator::trusted(sigma[i * n + i].clone());
        for j in 0..n {
            m_table[(i, j)] = entropy_term(&sigma[i * n + j], &sigma_ii)?;
        }
    }
    let quad = (m_table.transpose() + m_table.conjugate()) * C64::new(0.5, 0.0);
    Ok(CrossTable {
        states: states.to_vec(),
        sigma,
        m_table,
        quad,
    })
}

/// Evaluates the gap functional `G(c)` for a nonzero coefficient vector.
/// Homogeneous of degree two: `G(λc) = |λ|² G(c)`.
pub fn gap(ct: &CrossTable, c: &CVec) -> Result<f64> {
    check_coeffs(ct, c)?;
    Ok(gap_parts(ct, c).0)
}

/// Gap value together with the superposition it evaluates.
fn gap_parts(ct: &CrossTable, c: &CVec) -> (f64, BipartiteVector) {
    let coeffs: Vec<C64> = c.iter().copied().collect();
    let w = BipartiteVector::superpose(&coeffs, &ct.states).expect("validated lengths");
    let quad = (c.adjoint() * &ct.quad * c)[(0, 0)].re;
    (homog_entanglement(&w) + quad, w)
}

fn check_coeffs(ct: &CrossTable, c: &CVec) -> Result<()> {
    if c.len() != ct.count() {
        return Err(Error::Shape(format!(
            "coefficient length {} does not match table size {}",
            c.len(),
            ct.count()
        )));
    }
    if c.iter().map(|z| z.norm_sqr()).sum::<f64>() <= 0.0 {
        return Err(Error::Degenerate("gap needs a nonzero coefficient vector".into()));
    }
    Ok(())
}

/// Largest hermiticity defect `max_{k≠l} |M_kl − conj(M_lk)|`.
///
/// Vanishing of every such difference is a necessary condition for an optimal
/// set, so a large value is a fast-path disproof; a small value proves
/// nothing on its own.
pub fn hermiticity_check(ct: &CrossTable) -> f64 {
    let n = ct.count();
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            if k == l {
                continue;
            }
            let d = (ct.m_table[(k, l)] - ct.m_table[(l, k)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Analytic derivative at θ = 0 of the total entanglement
/// `Σ_i ℰ(A_i(θ))` along a two-member rotation family with uniform weights
/// `1/n`: members `k, l` rotate into each other (really or with a phase,
/// signed by the family), all others stay fixed.
///
/// For an optimal set every family must be nonnegative to first order; these
/// four one-sided derivatives are how the hermiticity condition arises.
pub fn rotation_derivative(
    ct: &CrossTable,
    k: usize,
    l: usize,
    family: RotationFamily,
) -> Result<f64> {
    let n = ct.count();
    if k >= n || l >= n {
        return Err(Error::Shape(format!(
            "rotation indices ({k}, {l}) out of range for {n} states"
        )));
    }
    if k == l {
        return Err(Error::Validation("rotation needs two distinct members".into()));
    }
    let weight = C64::new(1.0 / n as f64, 0.0);
    let sigma_kl = ct.sigma(k, l) * weight;
    let sigma_lk = ct.sigma(l, k) * weight;
    // Derivatives of the weighted reduced operators A_k = σ_kk/n along the
    // family; both directions are Hermitian by σ_kl† = σ_lk.
    let (da_k, da_l) = match family {
        RotationFamily::RealPlus => (&sigma_lk + &sigma_kl, -(&sigma_kl + &sigma_lk)),
        RotationFamily::RealMinus => (-(&sigma_lk + &sigma_kl), &sigma_kl + &sigma_lk),
        RotationFamily::ImagPlus => (
            (&sigma_lk - &sigma_kl) * C64::i(),
            (&sigma_kl - &sigma_lk) * C64::i(),
        ),
        RotationFamily::ImagMinus => (
            (&sigma_kl - &sigma_lk) * C64::i(),
            (&sigma_lk - &sigma_kl) * C64::i(),
        ),
    };
    let a_k = DensityOperator::trusted(ct.sigma(k, k) * weight);
    let a_l = DensityOperator::trusted(ct.sigma(l, l) * weight);
    Ok(crate::linalg::entropy_flow_derivative(&a_k, &da_k)?
        + crate::linalg::entropy_flow_derivative(&a_l, &da_l)?)
}

/// The superposition lower bound `Σ_i |c_i|² E(ψ_i) − Re Σ_{i≠j} c_i c̄_j M_ij`,
/// equal to `−Re Σ_ij c_i c̄_j M_ij` because `M_ii = −E(ψ_i)`.
///
/// When the set is optimal this bounds `ℰ(Σ c_i ψ_i)` from below.
pub fn superposition_bound(ct: &CrossTable, c: &CVec) -> Result<f64> {
    if c.len() != ct.count() {
        return Err(Error::Shape(format!(
            "coefficient length {} does not match table size {}",
            c.len(),
            ct.count()
        )));
    }
    Ok(-(c.adjoint() * &ct.quad * c)[(0, 0)].re)
}

/// Second-derivative consistency check for a uniform-weight ensemble.
///
/// Returns `(analytic, numeric)`: the analytic value `(2/n)·G(c)` assembled
/// from stationary-point entropy-flow second derivatives plus the homogeneous
/// term, and the central second finite difference (step `h`) of
/// `t ↦ Σ_j ℰ(φ̃_j(t))` along the exact perturbation path generated by `c`.
/// The two agree to about `h²` for paths with full-rank marginals.
pub fn second_derivative_crosscheck(
    e: &crate::Ensemble,
    c: &CVec,
    h: f64,
) -> Result<(f64, f64)> {
    let n = e.count();
    require_uniform_weights(e)?;
    if c.len() != n {
        return Err(Error::Shape(format!(
            "coefficient length {} does not match ensemble size {n}",
            c.len()
        )));
    }
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol::UNIT_NORM {
        return Err(Error::Normalization(format!(
            "coefficients must be unit norm, got {norm:.12}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Validation("step must be positive".into()));
    }

    // Analytic side: per-member second derivatives at the stationary point
    // plus twice the homogeneous entanglement of the injected superposition.
    let coeffs: Vec<C64> = c.iter().copied().collect();
    let w = BipartiteVector::superpose(&coeffs, e.vectors())?;
    let mut analytic = 2.0 * homog_entanglement(&w);
    for (i, psi_i) in e.vectors().iter().enumerate() {
        let cross = partial_trace_b(&w, psi_i)?;
        // A_i''(0) = −(c̄_i tr_B|w̃⟩⟨ψ̃_i| + c_i tr_B|ψ̃_i⟩⟨w̃|)
        let ddot = -(&cross * coeffs[i].conj() + cross.adjoint() * coeffs[i]);
        let a_i = reduced_a(psi_i);
        analytic += crate::linalg::entropy_flow_second(&a_i, &ddot)?;
    }

    // Numeric side: exact unitary path, central second difference.
    let path = crate::optimizer::PerturbationPath::new(e, c)?;
    let total = |t: f64| -> f64 {
        let members = path.members(t);
        members.iter().map(homog_entanglement).sum()
    };
    let f0: f64 = e.vectors().iter().map(homog_entanglement).sum();
    let numeric = (total(h) - 2.0 * f0 + total(-h)) / (h * h);
    Ok((analytic, numeric))
}

/// Checks that every member weight equals `1/n` within
/// [`tol::UNIFORM_WEIGHT`] relative.
pub(crate) fn require_uniform_weights(e: &crate::Ensemble) -> Result<()> {
    let n = e.count();
    if n == 0 {
        return Err(Error::Validation("empty ensemble".into()));
    }
    let target = 1.0 / n as f64;
    for (i, w) in e.weights().iter().enumerate() {
        if ((w - target) / target).abs() > tol::UNIFORM_WEIGHT {
            return Err(Error::Validation(format!(
                "member {i} has weight {w:.12}, expected uniform {target:.12}"
            )));
        }
    }
    Ok(())
}

/// Deterministic start list for the gap search: every basis vector, every
/// two-vector combination `(e_k ± e_l)/√2` and `(e_k ± i e_l)/√2`, then
/// `opts.restarts` seeded random unit vectors.
pub fn gap_start_points(ct: &CrossTable, opts: &MinimizeOpts) -> Vec<CVec> {
    let n = ct.count();
    let mut starts = Vec::new();
    for k in 0..n {
        let mut c = CVec::zeros(n);
        c[k] = C64::new(1.0, 0.0);
        starts.push(c);
    }
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let factors = [
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, -1.0),
    ];
    for k in 0..n {
        for l in (k + 1)..n {
            for &factor in &factors {
                let mut c = CVec::zeros(n);
                c[k] = C64::new(s, 0.0);
                c[l] = factor * C64::new(s, 0.0);
                starts.push(c);
            }
        }
    }
    let mut src = GaussianSource::new(opts.seed);
    for _ in 0..opts.restarts {
        let mut c = CVec::from_fn(n, |_, _| C64::new(src.normal(), src.normal()));
        let norm = c.norm();
        if norm > 0.0 {
            c /= C64::new(norm, 0.0);
        } else {
            c[0] = C64::new(1.0, 0.0);
        }
        starts.push(c);
    }
    starts
}

/// Projected-gradient local minimization of `G` on the unit sphere from one
/// start point. Deterministic; independent of every other start.
pub fn minimize_gap_at(
    ct: &CrossTable,
    start_index: usize,
    start: &CVec,
    opts: &MinimizeOpts,
) -> LocalMinimum {
    let mut c = start.clone();
    let norm = c.norm();
    if norm > 0.0 {
        c /= C64::new(norm, 0.0);
    }
    let (mut value, mut w) = gap_parts(ct, &c);
    let mut step = 0.5;
    for _iter in 0..opts.max_iters {
        let grad = gap_gradient(ct, &c, &w);
        // Tangent projection with respect to the real inner product Re⟨·,·⟩.
        let radial = (c.adjoint() * &grad)[(0, 0)].re;
        let tangent = &grad - &c * C64::new(radial, 0.0);
        let slope = tangent.norm_squared();
        if slope.sqrt() < 1e-11 {
            break;
        }
        // Armijo backtracking along the normalized retraction.
        let mut accepted = false;
        let mut alpha = step;
        for _bt in 0..60 {
            let mut trial = &c - &tangent * C64::new(alpha, 0.0);
            let tn = trial.norm();
            if tn > 0.0 {
                trial /= C64::new(tn, 0.0);
            }
            let (trial_value, trial_w) = gap_parts(ct, &trial);
            if trial_value <= value - 1e-4 * alpha * slope {
                c = trial;
                value = trial_value;
                w = trial_w;
                step = (alpha * 1.5).min(0.5);
                accepted = true;
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-18 {
                break;
            }
        }
        if !accepted {
            break;
        }
    }
    LocalMinimum {
        start_index,
        c,
        gap: value,
    }
}

/// Euclidean gradient of `G` at `c` (real inner-product convention): the
/// quadratic part contributes `2Kc`; the entanglement part contributes
/// `−2⟨ψ_i|(log₂(A/tr A) ⊗ I)|w⟩` with `A = tr_B |w⟩⟨w|`, `w = Σ c_i ψ_i`.
fn gap_gradient(ct: &CrossTable, c: &CVec, w: &BipartiteVector) -> CVec {
    let n = ct.count();
    let mut grad = &ct.quad * c * C64::new(2.0, 0.0);
    let total = w.norm_sq();
    if total <= 1e-300 {
        // ℰ has a removable singularity at w = 0 with zero contribution.
        return grad;
    }
    let a = reduced_a(w);
    let spec = herm_eig_unchecked(a.matrix());
    let lam_max = spec.eigenvalues[0].max(0.0);
    let cutoff = tol::EPS_KER * lam_max;
    let (da, db) = (w.dim_a(), w.dim_b());
    // (L ⊗ I)|w⟩ computed by applying L = log₂(A/tr A) on the A index.
    let mut lw = CVec::zeros(da * db);
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        if lam <= cutoff {
            continue;
        }
        let log_lam = (lam / total).log2();
        let v = spec.eigenvectors.column(k);
        // Overlap per B column: Σ_a conj(v[a]) w[a·db + b]
        for b in 0..db {
            let mut overlap = C64::new(0.0, 0.0);
            for a_idx in 0..da {
                overlap += v[a_idx].conj() * w.amplitudes()[a_idx * db + b];
            }
            let scaled = overlap * C64::new(log_lam, 0.0);
            for a_idx in 0..da {
                lw[a_idx * db + b] += v[a_idx] * scaled;
            }
        }
    }
    for i in 0..n {
        let mut inner = C64::new(0.0, 0.0);
        for idx in 0..da * db {
            inner += ct.states[i].amplitudes()[idx].conj() * lw[idx];
        }
        grad[i] -= inner * C64::new(2.0, 0.0);
    }
    grad
}

/// Merges per-start local minima into a certificate. The winner is the lowest
/// gap, ties broken by lowest start index, so sequential and parallel
/// execution produce identical results.
pub fn certificate_from_minima(minima: &[LocalMinimum], opts: &MinimizeOpts) -> GapCertificate {
    assert!(!minima.is_empty(), "at least one start is required");
    let mut best = &minima[0];
    for m in &minima[1..] {
        if m.gap < best.gap || (m.gap == best.gap && m.start_index < best.start_index) {
            best = m;
        }
    }
    let verdict = if best.gap < -opts.tau_gap {
        Verdict::Violated
    } else {
        Verdict::NoViolationFound
    };
    GapCertificate {
        c: best.c.clone(),
        gap: best.gap,
        verdict,
        restarts_used: minima.len(),
        min_history: minima.iter().map(|m| (m.start_index, m.gap)).collect(),
    }
}

/// Multistart minimization of the gap functional over the unit sphere.
///
/// Runs every deterministic start plus `opts.restarts` seeded random starts
/// and merges the local minima. `Violated` means a certifiably negative gap;
/// `NoViolationFound` means exactly that and nothing stronger.
pub fn minimize_gap(ct: &CrossTable, opts: &MinimizeOpts) -> GapCertificate {
    let starts = gap_start_points(ct, opts);
    let minima: Vec<LocalMinimum> = starts
        .iter()
        .enumerate()
        .map(|(idx, start)| minimize_gap_at(ct, idx, start, opts))
        .collect();
    certificate_from_minima(&minima, opts)
}
