//! Acceptance gate for the whole workspace: one test per release criterion,
//! each printing a single `acceptance <name>: PASS (...)` line (visible with
//! `--nocapture`) and enforcing its runtime budget. Tolerances are pinned
//! here on purpose; loosening them is a release decision, not a test fix.

use std::time::{Duration, Instant};

use entwine::formats::{self, CertificateFile, EnsembleFile};
use entwine_core::linalg::C64;
use entwine_core::optimizer::density_residual;
use entwine_core::{
    additivity_probe, avg_entanglement, build_cross_table, density, entropy_flow_derivative,
    entropy_flow_second, eof_2qubit, eof_min, from_weighted, gap, herm_eig, hermiticity_check,
    homog_entanglement, improve, minimize_gap, optimal_decomposition_2qubit, perturb,
    random_right_unitary, second_derivative_crosscheck, transform, BipartiteVector, CMat, CVec,
    DensityOperator, EofOpts, MinimizeOpts, TwoQubitState, Verdict,
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

/// Strictly positive operator: a Gram matrix plus a ridge keeping the
/// spectrum away from the kernel cutoff.
fn random_positive(rng: &mut StdRng, d: usize) -> DensityOperator {
    let g = CMat::from_fn(d, d, |_, _| rand_c64(rng));
    let m = &g * g.adjoint() + CMat::identity(d, d) * C64::new(0.2, 0.0);
    DensityOperator::new(m).unwrap()
}

/// The weighted entropy −Σ λ log2(λ / tr), evaluated from scratch.
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

fn gram_state(seed: u64, rank: usize) -> TwoQubitState {
    let mut rng = StdRng::seed_from_u64(seed);
    let m = CMat::from_fn(4, rank, |_, _| rand_c64(&mut rng));
    let rho = &m * m.adjoint();
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    TwoQubitState::new(rho / C64::new(tr, 0.0)).unwrap()
}

/// Random rank-2 two-qubit state, reproducible per seed.
fn random_rank2_state(seed: u64) -> TwoQubitState {
    gram_state(seed, 2)
}

fn bell(sign: f64) -> BipartiteVector {
    let s = 0.5_f64.sqrt();
    let v = CVec::from_iterator(
        4,
        [
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(sign * s, 0.0),
        ]
        .into_iter(),
    );
    BipartiteVector::new(2, 2, v).unwrap()
}

#[test]
fn entropy_flow_derivatives() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let mut worst_first = 0.0_f64;
    let mut worst_second = 0.0_f64;
    for _ in 0..100 {
        let d = rng.gen_range(2..=8);
        let a = random_positive(&mut rng, d);

        let a_dot = random_hermitian(&mut rng, d);
        let analytic = entropy_flow_derivative(&a, &a_dot).unwrap();
        let h = 1e-4;
        let plus = entropy_value(&(a.matrix() + &a_dot * C64::new(h, 0.0)));
        let minus = entropy_value(&(a.matrix() - &a_dot * C64::new(h, 0.0)));
        let fd = (plus - minus) / (2.0 * h);
        let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
        worst_first = worst_first.max(rel);
        assert!(rel <= 1e-5, "first derivative off by {rel:e}");

        // A + (t²/2)·Ä has vanishing first derivative at t = 0.
        let a_ddot = random_hermitian(&mut rng, d);
        let analytic = entropy_flow_second(&a, &a_ddot).unwrap();
        let h = 1e-3;
        let s0 = entropy_value(a.matrix());
        let bumped = entropy_value(&(a.matrix() + &a_ddot * C64::new(h * h / 2.0, 0.0)));
        let fd = 2.0 * (bumped - s0) / (h * h);
        let rel = (analytic - fd).abs() / analytic.abs().max(1.0);
        worst_second = worst_second.max(rel);
        assert!(rel <= 1e-4, "second derivative off by {rel:e}");
    }
    let dt = started.elapsed();
    assert!(dt < Duration::from_secs(30), "took {dt:?}");
    println!(
        "acceptance entropy_flow_derivatives: PASS (100 paths, worst first {worst_first:.2e}, \
         worst second {worst_second:.2e}, {:.2}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn optimal_ensembles_pass() {
    let started = Instant::now();
    let mut worst_gap = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    for k in 0..50 {
        let state = random_rank2_state(200 + k);
        let dec = optimal_decomposition_2qubit(&state).unwrap();
        let ct = build_cross_table(&dec.ensemble.normalized_states()).unwrap();
        let herm = hermiticity_check(&ct);
        let cert = minimize_gap(&ct, &MinimizeOpts::default());
        assert_eq!(
            cert.verdict,
            Verdict::NoViolationFound,
            "state {k}: gap {}",
            cert.gap
        );
        assert!(cert.gap >= -1e-6, "state {k}: gap {}", cert.gap);
        assert!(herm <= 1e-8, "state {k}: hermiticity {herm:e}");
        worst_gap = worst_gap.min(cert.gap);
        worst_herm = worst_herm.max(herm);
    }
    let dt = started.elapsed();
    assert!(dt < Duration::from_secs(300), "took {dt:?}");
    println!(
        "acceptance optimal_ensembles_pass: PASS (50 rank-2 states, worst gap {worst_gap:.2e}, \
         worst hermiticity {worst_herm:.2e}, {:.2}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn violation_detection_and_repair() {
    let started = Instant::now();
    // Equal Bell mixture of the separable state diag(1/2, 0, 0, 1/2).
    let e = from_weighted(&[0.5, 0.5], &[bell(1.0), bell(-1.0)]).unwrap();
    let ct = build_cross_table(&e.normalized_states()).unwrap();
    let cert = minimize_gap(&ct, &MinimizeOpts::default());
    assert_eq!(cert.verdict, Verdict::Violated);
    assert!(cert.gap <= -0.99, "gap {}", cert.gap);

    // The certificate must be the equal superposition up to a global phase.
    let phase = cert.c[0] / C64::new(cert.c[0].norm(), 0.0);
    let aligned: Vec<C64> = cert.c.iter().map(|z| z / phase).collect();
    let s = 0.5_f64.sqrt();
    let dist = |sign: f64| -> f64 {
        ((aligned[0] - C64::new(s, 0.0)).norm_sqr() + (aligned[1] - C64::new(sign * s, 0.0)).norm_sqr())
            .sqrt()
    };
    let deviation = dist(1.0).min(dist(-1.0));
    assert!(deviation <= 1e-3, "certificate off by {deviation:e}");

    let improved = improve(&e, &cert).unwrap();
    let first = avg_entanglement(&improved);
    assert!(first <= 0.9, "first improvement only reached {first}");

    let mut current = improved;
    for _ in 0..20 {
        let table = build_cross_table(&current.normalized_states()).unwrap();
        let c = minimize_gap(&table, &MinimizeOpts::default());
        if c.verdict != Verdict::Violated {
            break;
        }
        match improve(&current, &c) {
            Ok(next) => current = next,
            Err(_) => break,
        }
    }
    let chased = avg_entanglement(&current);
    let brute = eof_min(
        &density(&e),
        2,
        2,
        4,
        &EofOpts {
            restarts: 8,
            ..EofOpts::default()
        },
    )
    .unwrap();
    let floor = chased.min(brute.value);
    assert!(floor < 1e-3, "repair stalled at {floor}");

    let dt = started.elapsed();
    assert!(dt < Duration::from_secs(60), "took {dt:?}");
    println!(
        "acceptance violation_detection_and_repair: PASS (gap {:.3}, first repair {first:.2e}, \
         floor {floor:.2e} bits, {:.2}s)",
        cert.gap,
        dt.as_secs_f64()
    );
}

#[test]
fn second_derivative_identity() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(104);
    let mut worst = 0.0_f64;
    for trial in 0..100 {
        let da = rng.gen_range(2..=3);
        let db = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=4);
        let states: Vec<_> = (0..n).map(|_| normalized_state(&mut rng, da, db)).collect();
        let weights = vec![1.0 / n as f64; n];
        let e = from_weighted(&weights, &states).unwrap();
        let mut c = CVec::from_fn(n, |_, _| rand_c64(&mut rng));
        c = c.unscale(c.norm());

        let ct = build_cross_table(&e.normalized_states()).unwrap();
        let scaled_gap = 2.0 / n as f64 * gap(&ct, &c).unwrap();
        let (_, numeric) = second_derivative_crosscheck(&e, &c, 1e-3).unwrap();
        let diff = (scaled_gap - numeric).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-4, "trial {trial}: {scaled_gap} vs {numeric}");
    }
    let dt = started.elapsed();
    assert!(dt < Duration::from_secs(120), "took {dt:?}");
    println!(
        "acceptance second_derivative_identity: PASS (100 pairs, worst |2G/n - d2/dt2| \
         {worst:.2e}, {:.2}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn brute_force_matches_closed_form() {
    let started = Instant::now();
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let state = random_rank2_state(300 + k);
        let exact = eof_2qubit(&state);
        let brute = eof_min(
            state.operator(),
            2,
            2,
            4,
            &EofOpts {
                restarts: 8,
                ..EofOpts::default()
            },
        )
        .unwrap();
        let diff = (brute.value - exact).abs();
        worst = worst.max(diff);
        assert!(diff <= 5e-3, "state {k}: brute {} vs exact {exact}", brute.value);
    }
    let dt = started.elapsed();
    assert!(dt < Duration::from_secs(600), "took {dt:?}");
    println!(
        "acceptance brute_force_matches_closed_form: PASS (100 rank-2 states, worst gap to \
         closed form {worst:.2e} bits, {:.2}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn gap_verdicts_agree_with_brute_force() {
    let started = Instant::now();
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 0..100 {
        let state = random_rank2_state(300 + k);
        let dec = optimal_decomposition_2qubit(&state).unwrap();
        let ct = build_cross_table(&dec.ensemble.normalized_states()).unwrap();
        let cert = minimize_gap(&ct, &MinimizeOpts::default());
        assert_eq!(
            cert.verdict,
            Verdict::NoViolationFound,
            "state {k}: gap {}",
            cert.gap
        );
        let brute = eof_min(
            state.operator(),
            2,
            2,
            4,
            &EofOpts {
                restarts: 8,
                ..EofOpts::default()
            },
        )
        .unwrap();
        let excess = avg_entanglement(&dec.ensemble) - brute.value;
        worst_excess = worst_excess.max(excess);
        assert!(
            excess <= 5e-3,
            "state {k}: accepted ensemble sits {excess:e} bits above the brute-force minimum"
        );
    }
    let dt = started.elapsed();
    println!(
        "acceptance gap_verdicts_agree_with_brute_force: PASS (100 rank-2 states, worst excess \
         {worst_excess:.2e} bits, {:.2}s)",
        dt.as_secs_f64()
    );
}

#[test]
fn additivity_probe_completes() {
    let started = Instant::now();
    // Full-rank states so each factor decomposes into four members and the
    // product set reaches its largest shape, sixteen vectors on a 4x4 split.
    let left = optimal_decomposition_2qubit(&gram_state(1001, 4)).unwrap();
    let right = optimal_decomposition_2qubit(&gram_state(1002, 4)).unwrap();
    let outcome = additivity_probe(&left.ensemble, &right.ensemble, &MinimizeOpts::default()).unwrap();
    let dt = started.elapsed();

    assert!(outcome.product.count() <= 16);
    assert!(
        outcome.hermiticity_residual <= 1e-8,
        "hermiticity {:e}",
        outcome.hermiticity_residual
    );
    assert!(dt < Duration::from_secs(600), "took {dt:?}");

    // A violation would contradict additivity for this pair: double-check it
    // and report, but do not fail the gate on it.
    if outcome.certificate.verdict == Verdict::Violated {
        let product_value = avg_entanglement(&outcome.product);
        let repaired = improve(&outcome.product, &outcome.certificate)
            .map(|e| avg_entanglement(&e));
        let brute = eof_min(
            &density(&outcome.product),
            outcome.product.dim_a(),
            outcome.product.dim_b(),
            outcome.product.count().max(4),
            &EofOpts {
                restarts: 2,
                ..EofOpts::default()
            },
        )
        .map(|r| r.value);
        println!(
            "acceptance additivity_probe_completes: PASS with caveat (VIOLATED gap {:.3e}; \
             product {product_value:.6} bits, improve {repaired:?}, brute force {brute:?}; \
             double-check before drawing conclusions)",
            outcome.certificate.gap
        );
        return;
    }
    println!(
        "acceptance additivity_probe_completes: PASS (verdict NO_VIOLATION_FOUND, gap {:.2e}, \
         hermiticity {:.2e}, {} product members, {} starts, {:.2}s)",
        outcome.certificate.gap,
        outcome.hermiticity_residual,
        outcome.product.count(),
        outcome.certificate.restarts_used,
        dt.as_secs_f64()
    );
}

#[test]
fn invariant_suites() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(108);
    let mut worst_density = 0.0_f64;
    let mut worst_homog = 0.0_f64;
    let mut worst_basis = 0.0_f64;

    for _ in 0..5 {
        let da = rng.gen_range(2..=3);
        let db = rng.gen_range(2..=3);
        let n = rng.gen_range(2..=4);

        // Density preservation under a right-unitary transform with extra rows.
        let states: Vec<_> = (0..n).map(|_| normalized_state(&mut rng, da, db)).collect();
        let mut weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let e = from_weighted(&weights, &states).unwrap();
        let rho = density(&e);
        let u = random_right_unitary(n + 2, n, rng.gen()).unwrap();
        let moved = transform(&e, &u).unwrap();
        worst_density = worst_density.max(density_residual(&moved, &rho));

        // Density preservation along the perturbation path, uniform weights.
        let uniform = from_weighted(&vec![1.0 / n as f64; n], &states).unwrap();
        let rho_u = density(&uniform);
        let mut c = CVec::from_fn(n, |_, _| rand_c64(&mut rng));
        c = c.unscale(c.norm());
        let perturbed = perturb(&uniform, &c, 0.7).unwrap();
        worst_density = worst_density.max(density_residual(&perturbed, &rho_u));
        assert!(worst_density <= 1e-10, "density drift {worst_density:e}");

        // Degree-2 homogeneity of the entanglement extension.
        let psi = states[0].scaled(C64::new(rng.gen_range(0.2..1.5), 0.3));
        let base = homog_entanglement(&psi);
        for s in [0.3, 2.5] {
            let scaled = homog_entanglement(&psi.scaled(C64::new(s, 0.0)));
            let rel = (scaled - s * s * base).abs() / base.abs().max(1.0);
            worst_homog = worst_homog.max(rel);
        }

        // Gap homogeneity, phase invariance, and vanishing on basis vectors.
        let ct = build_cross_table(&uniform.normalized_states()).unwrap();
        let g = gap(&ct, &c).unwrap();
        let scaled = gap(&ct, &(&c * C64::new(1.7, 0.0))).unwrap();
        worst_homog = worst_homog.max((scaled - 1.7 * 1.7 * g).abs() / g.abs().max(1.0));
        let rotated = gap(&ct, &(&c * C64::new(0.0, 1.0))).unwrap();
        worst_homog = worst_homog.max((rotated - g).abs() / g.abs().max(1.0));
        assert!(worst_homog <= 1e-12, "homogeneity drift {worst_homog:e}");
        for k in 0..n {
            let mut basis = CVec::from_element(n, C64::new(0.0, 0.0));
            basis[k] = C64::new(1.0, 0.0);
            worst_basis = worst_basis.max(gap(&ct, &basis).unwrap().abs());
        }
        assert!(worst_basis <= 1e-10, "basis gap {worst_basis:e}");
    }

    // Serialization round-trips byte-exactly.
    let e = from_weighted(
        &[1.0 / 3.0, 2.0 / 3.0],
        &[bell(1.0), bell(-1.0)],
    )
    .unwrap();
    let file = EnsembleFile::from_ensemble(&e);
    let json = formats::to_json(&file);
    let back: EnsembleFile = formats::parse_json(json.as_bytes(), "ensemble").unwrap();
    assert_eq!(formats::to_json(&back), json);
    for (v, w) in file.vectors.iter().zip(&back.vectors) {
        for (a, b) in v.iter().zip(w) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }

    // Determinism per seed, byte for byte, including through serialization.
    let pair = from_weighted(&[0.5, 0.5], &[bell(1.0), bell(-1.0)]).unwrap();
    let ct = build_cross_table(&pair.normalized_states()).unwrap();
    let opts = MinimizeOpts {
        seed: 42,
        ..MinimizeOpts::default()
    };
    let first = minimize_gap(&ct, &opts);
    let second = minimize_gap(&ct, &opts);
    assert_eq!(first.gap.to_bits(), second.gap.to_bits());
    for (a, b) in first.c.iter().zip(second.c.iter()) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
    let digest = formats::digest(json.as_bytes());
    let cert_a = CertificateFile::new(&first, 0.0, opts.seed, digest.clone());
    let cert_b = CertificateFile::new(&second, 0.0, opts.seed, digest);
    assert_eq!(formats::to_json(&cert_a), formats::to_json(&cert_b));

    let rho = density(&pair);
    let eof_opts = EofOpts {
        seed: 42,
        restarts: 4,
        ..EofOpts::default()
    };
    let ra = eof_min(&rho, 2, 2, 4, &eof_opts).unwrap();
    let rb = eof_min(&rho, 2, 2, 4, &eof_opts).unwrap();
    assert_eq!(ra.value.to_bits(), rb.value.to_bits());
    for (x, y) in ra
        .ensemble
        .vectors()
        .iter()
        .zip(rb.ensemble.vectors().iter())
    {
        for (a, b) in x.amplitudes().iter().zip(y.amplitudes().iter()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    let dt = started.elapsed();
    println!(
        "acceptance invariant_suites: PASS (density {worst_density:.2e}, homogeneity \
         {worst_homog:.2e}, basis gap {worst_basis:.2e}, serialization and determinism \
         byte-exact, {:.2}s)",
        dt.as_secs_f64()
    );
}
