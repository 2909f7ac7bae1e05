//! Finite-difference verification of every analytic derivative the library
//! exposes: entropy flow first and second derivatives, rotation derivatives,
//! and the second-derivative identity tying the gap to the perturbation path.

use entwine_core::linalg::C64;
use entwine_core::{
    build_cross_table, entropy_flow_derivative, entropy_flow_second, from_weighted, gap,
    herm_eig, second_derivative_crosscheck, rotation_derivative, BipartiteVector, CMat, CVec,
    DensityOperator, RotationFamily,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn rand_c64(rng: &mut StdRng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_hermitian(rng: &mut StdRng, d: usize) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| rand_c64(rng));
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Strictly positive random operator: a Gram matrix plus a ridge.
fn random_positive(rng: &mut StdRng, d: usize) -> DensityOperator {
    let g = CMat::from_fn(d, d, |_, _| rand_c64(rng));
    let m = &g * g.adjoint() + CMat::identity(d, d) * C64::new(0.2, 0.0);
    DensityOperator::new(m).unwrap()
}

/// The weighted entropy functional −Σ λ log2(λ / tr) the flow derivatives
/// differentiate, evaluated from scratch.
fn entropy_value(m: &CMat) -> f64 {
    let spec = herm_eig(m).unwrap();
    let total: f64 = spec.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mut s = 0.0;
    for &lam in &spec.eigenvalues {
        if lam > 1e-15 * total {
            s -= lam * (lam / total).log2();
        }
    }
    s
}

fn normalized_state(rng: &mut StdRng, da: usize, db: usize) -> BipartiteVector {
    let v = CVec::from_fn(da * db, |_, _| rand_c64(rng));
    BipartiteVector::new(da, db, v).unwrap().normalized().unwrap()
}

#[test]
fn entropy_flow_first_derivative_matches_differences() {
    let mut rng = StdRng::seed_from_u64(11);
    for trial in 0..40 {
        let d = rng.gen_range(2..=6);
        let a = random_positive(&mut rng, d);
        let da = random_hermitian(&mut rng, d);
        let analytic = entropy_flow_derivative(&a, &da).unwrap();
        let h = 1e-4;
        let plus = entropy_value(&(a.matrix() + &da * C64::new(h, 0.0)));
        let minus = entropy_value(&(a.matrix() - &da * C64::new(h, 0.0)));
        let fd = (plus - minus) / (2.0 * h);
        let tol = 1e-5 * analytic.abs().max(1.0);
        assert!(
            (analytic - fd).abs() <= tol,
            "trial {trial}: analytic {analytic} vs fd {fd}"
        );
    }
}

#[test]
fn entropy_flow_second_derivative_matches_differences() {
    // Paths A(t) = A + (t²/2)·Ä have vanishing first derivative, where the
    // second derivative of the entropy reduces to the flow formula.
    let mut rng = StdRng::seed_from_u64(12);
    for trial in 0..40 {
        let d = rng.gen_range(2..=6);
        let a = random_positive(&mut rng, d);
        let ddot = random_hermitian(&mut rng, d);
        let analytic = entropy_flow_second(&a, &ddot).unwrap();
        let h = 1e-3;
        let s0 = entropy_value(a.matrix());
        let bumped = entropy_value(&(a.matrix() + &ddot * C64::new(h * h / 2.0, 0.0)));
        let fd = 2.0 * (bumped - s0) / (h * h);
        let tol = 1e-4 * analytic.abs().max(1.0);
        assert!(
            (analytic - fd).abs() <= tol,
            "trial {trial}: analytic {analytic} vs fd {fd}"
        );
    }
}

#[test]
fn rotation_derivatives_match_differences() {
    let mut rng = StdRng::seed_from_u64(13);
    for trial in 0..25 {
        let da = rng.gen_range(2..=3);
        let db = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=4);
        let states: Vec<_> = (0..n).map(|_| normalized_state(&mut rng, da, db)).collect();
        let ct = build_cross_table(&states).unwrap();
        let k = rng.gen_range(0..n);
        let l = (k + rng.gen_range(1..n)) % n;
        let scale = C64::new(1.0 / (n as f64).sqrt(), 0.0);

        for family in [
            RotationFamily::RealPlus,
            RotationFamily::RealMinus,
            RotationFamily::ImagPlus,
            RotationFamily::ImagMinus,
        ] {
            let analytic = rotation_derivative(&ct, k, l, family).unwrap();
            // The member pair rotates with a Givens-type unitary; everything
            // else is frozen, so only two entropy terms move.
            let rotated_pair = |t: f64| -> f64 {
                let (ck, sk) = (t.cos(), t.sin());
                let phase = match family {
                    RotationFamily::RealPlus => C64::new(sk, 0.0),
                    RotationFamily::RealMinus => C64::new(-sk, 0.0),
                    RotationFamily::ImagPlus => C64::new(0.0, sk),
                    RotationFamily::ImagMinus => C64::new(0.0, -sk),
                };
                let counter = match family {
                    RotationFamily::RealPlus => C64::new(-sk, 0.0),
                    RotationFamily::RealMinus => C64::new(sk, 0.0),
                    RotationFamily::ImagPlus => C64::new(0.0, sk),
                    RotationFamily::ImagMinus => C64::new(0.0, -sk),
                };
                let new_k = states[k]
                    .scaled(C64::new(ck, 0.0))
                    .amplitudes()
                    .clone()
                    + states[l].amplitudes() * phase;
                let new_l = states[l]
                    .scaled(C64::new(ck, 0.0))
                    .amplitudes()
                    .clone()
                    + states[k].amplitudes() * counter;
                let vk = BipartiteVector::new(da, db, new_k * scale).unwrap();
                let vl = BipartiteVector::new(da, db, new_l * scale).unwrap();
                entwine_core::homog_entanglement(&vk) + entwine_core::homog_entanglement(&vl)
            };
            let h = 1e-5;
            let fd = (rotated_pair(h) - rotated_pair(-h)) / (2.0 * h);
            assert!(
                (analytic - fd).abs() <= 1e-5 * analytic.abs().max(1.0),
                "trial {trial} {family:?}: analytic {analytic} vs fd {fd}"
            );
        }
    }
}

#[test]
fn second_derivative_identity_holds() {
    let mut rng = StdRng::seed_from_u64(14);
    for trial in 0..30 {
        let da = rng.gen_range(2..=3);
        let db = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=4);
        let states: Vec<_> = (0..n).map(|_| normalized_state(&mut rng, da, db)).collect();
        let weights = vec![1.0 / n as f64; n];
        let e = from_weighted(&weights, &states).unwrap();
        let mut c = CVec::from_fn(n, |_, _| rand_c64(&mut rng));
        c = c.unscale(c.norm());
        let (analytic, numeric) = second_derivative_crosscheck(&e, &c, 1e-3).unwrap();
        assert!(
            (analytic - numeric).abs() <= 1e-4,
            "trial {trial}: {analytic} vs {numeric}"
        );
        // The identity pins the analytic side to (2/n)·G(c).
        let ct = build_cross_table(&states).unwrap();
        let g = gap(&ct, &c).unwrap();
        assert!(
            (analytic - 2.0 * g / n as f64).abs() <= 1e-9,
            "trial {trial}: {analytic} vs (2/n)G = {}",
            2.0 * g / n as f64
        );
    }
}

#[test]
fn ensemble_requires_uniform_weights_for_path_checks() {
    let mut rng = StdRng::seed_from_u64(15);
    let states: Vec<_> = (0..2).map(|_| normalized_state(&mut rng, 2, 2)).collect();
    let skew = from_weighted(&[0.7, 0.3], &states).unwrap();
    let c = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert!(second_derivative_crosscheck(&skew, &c, 1e-3).is_err());
}
