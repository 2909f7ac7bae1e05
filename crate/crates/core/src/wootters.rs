//! Closed-form two-qubit entanglement: concurrence, entanglement of
//! formation, and an explicit minimizing decomposition in which every member
//! carries the concurrence of the state itself.

// Under no_std, f64 math comes from this trait; std test graphs shadow it.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::ensemble::{density, Ensemble};
use crate::linalg::{
    herm_eig_unchecked, hermitian_part, BipartiteVector, C64, CMat, CVec, DensityOperator,
};
use crate::rng::GaussianSource;
use crate::{tol, Error, Result};

/// Seed of the deterministic diagonal jitter applied when the direct
/// construction fails on a numerically degenerate spin-flip spectrum.
const JITTER_SEED: u64 = 23;
/// Scale of that jitter; small enough to stay far inside every advertised
/// tolerance, large enough to split degenerate eigenvalues.
const JITTER_SCALE: f64 = 1e-10;

/// A validated two-qubit density operator: 4 by 4, Hermitian, positive
/// semidefinite, unit trace.
#[derive(Debug, Clone)]
pub struct TwoQubitState {
    op: DensityOperator,
}

impl TwoQubitState {
    /// Validates and wraps a 4 by 4 density matrix.
    pub fn new(matrix: CMat) -> Result<Self> {
        if matrix.nrows() != 4 || matrix.ncols() != 4 {
            return Err(Error::Shape(format!(
                "two-qubit state must be 4 by 4, got {} by {}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = DensityOperator::new(matrix)?;
        let trace = op.trace();
        if (trace - 1.0).abs() > tol::UNIT_TRACE {
            return Err(Error::Normalization(format!(
                "two-qubit state must have unit trace, got {trace:.12}"
            )));
        }
        Ok(Self { op })
    }

    /// The stored (hermitized) matrix.
    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    /// The state as a general density operator.
    pub fn operator(&self) -> &DensityOperator {
        &self.op
    }
}

/// An explicit minimizing decomposition of a two-qubit state. Every member is
/// a pure state whose concurrence equals the state's, so the weighted average
/// entanglement meets the closed-form value.
#[derive(Debug, Clone)]
pub struct OptimalDecomposition {
    /// The minimizing ensemble, at most four members.
    pub ensemble: Ensemble,
    /// Concurrence of the input state.
    pub concurrence: f64,
    /// Scale of the diagonal jitter used before a retry, when the direct
    /// construction failed its internal verification; `None` on the clean
    /// path.
    pub jitter: Option<f64>,
}

/// The spin flip of a two-qubit vector: `(σ_y ⊗ σ_y) conj(ψ)`.
fn spin_flip(v: &CVec) -> CVec {
    CVec::from_fn(4, |i, _| match i {
        0 => -v[3].conj(),
        1 => v[2].conj(),
        2 => v[1].conj(),
        _ => -v[0].conj(),
    })
}

fn spin_flip_matrix() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 3)] = C64::new(-1.0, 0.0);
    m[(1, 2)] = C64::new(1.0, 0.0);
    m[(2, 1)] = C64::new(1.0, 0.0);
    m[(3, 0)] = C64::new(-1.0, 0.0);
    m
}

/// Concurrence of a two-qubit state: `max(0, λ1 − λ2 − λ3 − λ4)` over the
/// descending square roots of the eigenvalues of `√ρ ρ̃ √ρ`. Eigenvalues
/// inside the kernel cutoff are treated as exact zeros before the square
/// root, so roundoff in the kernel cannot be amplified into fake
/// entanglement.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    concurrence_of_matrix(state.matrix())
}

fn concurrence_of_matrix(rho: &CMat) -> f64 {
    let spec = herm_eig_unchecked(rho);
    let mut sq = CMat::zeros(4, 4);
    for (k, &lam) in spec.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        if s == 0.0 {
            continue;
        }
        let col = spec.eigenvectors.column(k);
        for i in 0..4 {
            for j in 0..4 {
                sq[(i, j)] += col[i] * col[j].conj() * C64::new(s, 0.0);
            }
        }
    }
    let sf = spin_flip_matrix();
    let flipped = &sf * rho.conjugate() * &sf;
    let h = hermitian_part(&(&sq * flipped * &sq));
    let hs = herm_eig_unchecked(&h);
    let lam_max = hs.eigenvalues[0].max(0.0);
    let cutoff = tol::EPS_KER * lam_max;
    let roots: Vec<f64> = hs
        .eigenvalues
        .iter()
        .map(|&w| if w <= cutoff { 0.0 } else { w.sqrt() })
        .collect();
    (roots[0] - roots[1] - roots[2] - roots[3]).max(0.0)
}

/// Entanglement of formation of a two-qubit state, in bits, through the
/// closed-form function of the concurrence.
pub fn eof_2qubit(state: &TwoQubitState) -> f64 {
    entanglement_of_concurrence(concurrence(state))
}

fn entanglement_of_concurrence(c: f64) -> f64 {
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) * 0.5;
    binary_entropy(x)
}

fn binary_entropy(x: f64) -> f64 {
    let mut h = 0.0;
    for p in [x, 1.0 - x] {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h.max(0.0)
}

/// Builds a decomposition of the state into at most four pure members, each
/// with concurrence equal to the state's, so the average entanglement equals
/// the closed-form entanglement of formation.
///
/// The construction diagonalizes the spin-flip pairing over the spectral
/// vectors and then rebalances it: for an entangled state a real orthogonal
/// rotation equalizes every member's pairing at the concurrence; for a
/// separable state phases close the pairing values into a zero-sum polygon
/// and a flat mixing spreads that zero across all members. If the direct
/// construction misses its internal verification (possible when the
/// spin-flip spectrum is numerically degenerate), one deterministic
/// diagonal jitter of scale [`JITTER_SCALE`] is applied and the
/// construction retried; the jitter is recorded in the result.
pub fn optimal_decomposition_2qubit(state: &TwoQubitState) -> Result<OptimalDecomposition> {
    let c_ref = concurrence(state);
    if let Ok(ensemble) = build_decomposition(state.matrix()) {
        return Ok(OptimalDecomposition {
            ensemble,
            concurrence: c_ref,
            jitter: None,
        });
    }
    let mut src = GaussianSource::new(JITTER_SEED);
    let mut jittered = state.matrix().clone();
    let mut added = 0.0;
    for k in 0..4 {
        let bump = JITTER_SCALE * src.unit_open();
        jittered[(k, k)] += C64::new(bump, 0.0);
        added += bump;
    }
    jittered = jittered.unscale(1.0 + added);
    let ensemble = build_decomposition(&jittered)?;
    Ok(OptimalDecomposition {
        ensemble,
        concurrence: c_ref,
        jitter: Some(JITTER_SCALE),
    })
}

fn build_decomposition(rho: &CMat) -> Result<Ensemble> {
    let c_target = concurrence_of_matrix(rho);
    let spec = herm_eig_unchecked(rho);
    let lam_max = spec.eigenvalues[0].max(0.0);
    if lam_max <= 0.0 {
        return Err(Error::Degenerate("zero state".into()));
    }
    let cutoff = tol::EPS_KER * lam_max;
    let mut subnorm: Vec<CVec> = Vec::new();
    for (k, &w) in spec.eigenvalues.iter().enumerate() {
        if w <= cutoff {
            continue;
        }
        let s = w.sqrt();
        subnorm.push(CVec::from_fn(4, |i, _| {
            spec.eigenvectors[(i, k)] * C64::new(s, 0.0)
        }));
    }
    let r = subnorm.len();
    let members: Vec<CVec> = if r == 1 {
        vec![subnorm[0].clone()]
    } else {
        let tilded: Vec<CVec> = subnorm.iter().map(spin_flip).collect();
        // Pairing table τ_ij = ⟨v_i|ṽ_j⟩, complex symmetric.
        let tau = CMat::from_fn(r, r, |i, j| subnorm[i].dotc(&tilded[j]));
        let (lams, v) = takagi_symmetric(&tau)?;
        let xs: Vec<CVec> = (0..r)
            .map(|i| {
                let mut x = CVec::zeros(4);
                for j in 0..r {
                    x.axpy(v[(j, i)], &subnorm[j], C64::new(1.0, 0.0));
                }
                x
            })
            .collect();
        let rest: f64 = lams[1..].iter().sum();
        let ct = lams[0] - rest;
        if ct > 0.0 {
            entangled_members(&xs, &lams, ct)
        } else {
            separable_members(&xs, &lams)
        }
    };
    let vectors: Vec<BipartiteVector> = members
        .into_iter()
        .map(|m| BipartiteVector::new(2, 2, m))
        .collect::<Result<_>>()?;
    let ensemble = Ensemble::new(2, 2, vectors)?;
    verify_members(&ensemble, rho, c_target)?;
    Ok(ensemble)
}

/// Entangled branch: alternate phases make the pairing the real diagonal
/// `diag(λ1, −λ2, …)` with trace equal to the concurrence; subtracting the
/// concurrence times the real Gram matrix leaves a traceless real symmetric
/// matrix whose diagonal a real orthogonal rotation drives to zero, which
/// pins every member's pairing ratio at the concurrence.
fn entangled_members(xs: &[CVec], lams: &[f64], ct: f64) -> Vec<CVec> {
    let r = xs.len();
    let ys: Vec<CVec> = xs
        .iter()
        .enumerate()
        .map(|(k, x)| if k == 0 { x.clone() } else { x * C64::i() })
        .collect();
    let mut s = DMatrix::<f64>::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            s[(i, j)] = -ct * ys[i].dotc(&ys[j]).re;
        }
        s[(i, i)] += if i == 0 { lams[0] } else { -lams[i] };
    }
    let o = zero_diag_rotation(&s);
    (0..r)
        .map(|i| {
            let mut z = CVec::zeros(4);
            for j in 0..r {
                z.axpy(C64::new(o[(i, j)], 0.0), &ys[j], C64::new(1.0, 0.0));
            }
            z
        })
        .collect()
}

/// Separable branch: the pairing values admit phases closing them into a
/// zero-sum polygon (the largest is at most the sum of the rest here), and a
/// mixing matrix with all squared entries equal hands every member the mean
/// of that polygon, which is zero. Two members suffice at rank 2; otherwise
/// the decomposition is widened to four.
fn separable_members(xs: &[CVec], lams: &[f64]) -> Vec<CVec> {
    let r = xs.len();
    let d = polygon_phases(lams);
    let ys: Vec<CVec> = xs
        .iter()
        .zip(&d)
        .map(|(x, dk)| {
            // y = e^{−i arg(d)/2} x turns the pairing entry into d itself.
            let half = dk.arg() * 0.5;
            x * C64::new(half.cos(), -half.sin())
        })
        .collect();
    let rows: [[f64; 4]; 4] = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0, 1.0],
    ];
    let (count, scale) = if r == 2 {
        (2, core::f64::consts::FRAC_1_SQRT_2)
    } else {
        (4, 0.5)
    };
    (0..count)
        .map(|j| {
            let mut z = CVec::zeros(4);
            for (k, y) in ys.iter().enumerate() {
                z.axpy(C64::new(rows[j][k] * scale, 0.0), y, C64::new(1.0, 0.0));
            }
            z
        })
        .collect()
}

/// Phases turning nonnegative lengths (descending, largest at most the sum
/// of the rest) into complex numbers of those moduli summing to zero: a
/// degenerate two-gon, a triangle, or a quadrilateral built by merging the
/// two smallest sides into one collinear pair.
fn polygon_phases(lam: &[f64]) -> Vec<C64> {
    match lam.len() {
        2 => vec![C64::new(lam[0], 0.0), C64::new(-lam[1], 0.0)],
        3 => triangle(lam[0], lam[1], lam[2]).to_vec(),
        _ => {
            let merged_len = lam[2] + lam[3];
            let t = triangle(lam[0], lam[1], merged_len);
            let dir = if merged_len > 0.0 {
                t[2].unscale(merged_len)
            } else {
                C64::new(1.0, 0.0)
            };
            vec![t[0], t[1], dir.scale(lam[2]), dir.scale(lam[3])]
        }
    }
}

/// A triangle with side lengths `a, b, c` laid out around the origin so the
/// three side vectors sum to zero.
fn triangle(a: f64, b: f64, c: f64) -> [C64; 3] {
    let cos_g = if a * b > 0.0 {
        ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    let angle = core::f64::consts::PI - cos_g.acos();
    let d1 = C64::new(a, 0.0);
    let d2 = C64::new(b * angle.cos(), b * angle.sin());
    [d1, d2, -(d1 + d2)]
}

/// Factorization of a complex symmetric matrix as `V diag(vals) Vᵀ` with
/// unitary `V` and nonnegative descending values, through the doubled real
/// symmetric eigenproblem `[[Re, Im], [Im, −Re]]`. The near-kernel
/// eigenspace of the doubling is closed under the complex structure, so a
/// complex orthonormalization pass selects one representative per value
/// there. Reconstruction and unitarity are checked before returning; a miss
/// reports the input as degenerate.
fn takagi_symmetric(tau: &CMat) -> Result<(Vec<f64>, CMat)> {
    let r = tau.nrows();
    let mut m = DMatrix::<f64>::zeros(2 * r, 2 * r);
    for i in 0..r {
        for j in 0..r {
            let z = (tau[(i, j)] + tau[(j, i)]) * C64::new(0.5, 0.0);
            m[(i, j)] = z.re;
            m[(i, j + r)] = z.im;
            m[(i + r, j)] = z.im;
            m[(i + r, j + r)] = -z.re;
        }
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..2 * r).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut lams: Vec<f64> = Vec::with_capacity(r);
    let mut cols: Vec<CVec> = Vec::with_capacity(r);
    for &k in &order {
        if cols.len() == r {
            break;
        }
        let w = eig.eigenvalues[k];
        if w < -1e-12 {
            break;
        }
        let q = eig.eigenvectors.column(k);
        let mut x = CVec::from_fn(r, |i, _| C64::new(q[i], q[i + r]));
        if w <= 1e-14 {
            for c in &cols {
                let overlap = c.dotc(&x);
                x.axpy(-overlap, c, C64::new(1.0, 0.0));
            }
            let n = x.norm();
            if n < 1e-8 {
                continue;
            }
            x = x.unscale(n);
        } else {
            x = x.unscale(x.norm());
        }
        cols.push(x);
        lams.push(w.max(0.0));
    }
    if cols.len() < r {
        return Err(Error::Degenerate(
            "incomplete basis for the spin-flip pairing".into(),
        ));
    }
    let v = CMat::from_fn(r, r, |i, j| cols[j][i]);
    let mut recon = CMat::zeros(r, r);
    for (k, &lam) in lams.iter().enumerate() {
        for i in 0..r {
            for j in 0..r {
                recon[(i, j)] += v[(i, k)] * v[(j, k)] * C64::new(lam, 0.0);
            }
        }
    }
    let residual = (&recon - tau).norm();
    let gram = (v.adjoint() * &v - CMat::identity(r, r)).norm();
    if residual > 1e-9 || gram > 1e-9 {
        return Err(Error::Degenerate(format!(
            "pairing factorization residual {residual:.3e}, gram residual {gram:.3e}"
        )));
    }
    Ok((lams, v))
}

/// Real orthogonal congruence driving the diagonal of a (numerically)
/// traceless real symmetric matrix to zero: while entries of both signs
/// remain, a rotation in the plane of the extreme pair zeroes the positive
/// one exactly.
fn zero_diag_rotation(s: &DMatrix<f64>) -> DMatrix<f64> {
    let r = s.nrows();
    let mut o = DMatrix::<f64>::identity(r, r);
    for _ in 0..3 * r {
        let a = &o * s * o.transpose();
        let (mut hi, mut lo) = (0usize, 0usize);
        for k in 1..r {
            if a[(k, k)] > a[(hi, hi)] {
                hi = k;
            }
            if a[(k, k)] < a[(lo, lo)] {
                lo = k;
            }
        }
        let p = a[(hi, hi)];
        let q = a[(lo, lo)];
        if p.abs().max(q.abs()) < 1e-13 || p <= 0.0 || q >= 0.0 {
            break;
        }
        let x = a[(hi, lo)];
        // p + 2tx + t²q = 0 has real roots since pq < 0.
        let disc = (x * x - p * q).sqrt();
        let t1 = (-x + disc) / q;
        let t2 = (-x - disc) / q;
        let t = if t1.abs() <= t2.abs() { t1 } else { t2 };
        let c = 1.0 / (1.0 + t * t).sqrt();
        let sn = t * c;
        for col in 0..r {
            let u = o[(hi, col)];
            let w = o[(lo, col)];
            o[(hi, col)] = c * u + sn * w;
            o[(lo, col)] = -sn * u + c * w;
        }
    }
    o
}

fn verify_members(e: &Ensemble, rho: &CMat, c_target: f64) -> Result<()> {
    let recon = (density(e).matrix() - rho).norm();
    if recon > 1e-9 {
        return Err(Error::Degenerate(format!(
            "decomposition misses the state by {recon:.3e}"
        )));
    }
    for v in e.vectors() {
        let weight = v.norm_sq();
        let pairing = v.amplitudes().dotc(&spin_flip(v.amplitudes())).norm();
        let member_c = pairing / weight;
        if (member_c - c_target).abs() > 1e-9 {
            return Err(Error::Degenerate(format!(
                "member concurrence {member_c:.12} drifts from {c_target:.12}"
            )));
        }
    }
    Ok(())
}
