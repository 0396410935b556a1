//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Tolerances are pinned here, not configurable.

use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rfiqkd::channel::{rotate_bob, FrameDriftModel};
use rfiqkd::linalg::{bell_state, random_density_matrix, werner_state};
use rfiqkd::photonic;
use rfiqkd::protocol::{
    estimate_correlations, exact_correlations, frame_invariant_c, frame_invariant_c_estimate, qber,
    qber_estimate, sample_transcript, BasisChoice,
};
use rfiqkd::qutrit;
use rfiqkd::security::{
    eve_information, rate_zero_crossing, six_state_reference, twirl, werner_c_of_q,
};

/// Independent oracle: dense grid search over the (u, v) constraint
/// manifold, with its own binary entropy.
fn grid_search_eve_info(q: f64, c: f64, points: usize) -> f64 {
    let h = |x: f64| -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
        }
    };
    let half_c = c / 2.0;
    if q == 0.0 {
        return h((1.0 + half_c.sqrt().min(1.0)) / 2.0);
    }
    let u_max = (half_c.sqrt() / (1.0 - q)).min(1.0);
    let u_min = ((half_c - q * q).max(0.0).sqrt() / (1.0 - q)).min(u_max);
    let mut best = f64::NEG_INFINITY;
    for i in 0..=points {
        let u = u_min + (u_max - u_min) * i as f64 / points as f64;
        let v = ((half_c - (1.0 - q) * (1.0 - q) * u * u).max(0.0)).sqrt() / q;
        let val = (1.0 - q) * h((1.0 + u) / 2.0) + q * h((1.0 + v.min(1.0)) / 2.0);
        best = best.max(val);
    }
    best
}

#[test]
fn criterion_01_werner_six_state_coincidence() {
    for k in 0..151 {
        let q = 0.15 * k as f64 / 150.0;
        let ours = eve_information(q, werner_c_of_q(q)).unwrap().eve_info;
        let six = six_state_reference(q).unwrap().eve_info;
        assert!((ours - six).abs() < 1e-9, "Q={q}: |{ours} - {six}| >= 1e-9");
    }
    println!("acceptance 01 werner/six-state coincidence (151 points, <1e-9): PASS");
}

#[test]
fn criterion_02_werner_threshold() {
    let zero = rate_zero_crossing(werner_c_of_q, 0.05, 0.2, 1e-7)
        .unwrap()
        .expect("rate changes sign on [0.05, 0.2]");
    assert!(
        (zero - 0.1262).abs() <= 5e-4,
        "zero crossing at {zero}, expected 0.1262 +/- 0.0005"
    );
    println!("acceptance 02 werner threshold Q* = {zero:.5} (0.1262 +/- 0.0005): PASS");
}

#[test]
fn criterion_03_beta_invariance() {
    for rho in [bell_state(1).unwrap(), werner_state(0.05).unwrap()] {
        let c0 = frame_invariant_c(&exact_correlations(&rho).unwrap()).unwrap();
        for k in 0..100 {
            let beta = 2.0 * std::f64::consts::PI * k as f64 / 100.0;
            let c =
                frame_invariant_c(&exact_correlations(&rotate_bob(&rho, beta)).unwrap()).unwrap();
            assert!((c - c0).abs() < 1e-12, "beta={beta}: |{c} - {c0}| >= 1e-12");
        }
    }
    println!("acceptance 03 beta-invariance of exact C (100 angles, <1e-12): PASS");
}

#[test]
fn criterion_04_optimizer_oracle_equivalence() {
    // 50x50 feasible (Q, C) grid, >= 10^4-point grid search per cell.
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let q = 0.49 * (i + 1) as f64 / 50.0;
        let cap = 2.0 * ((1.0 - q) * (1.0 - q) + q * q);
        for j in 0..50 {
            let c = cap * (j as f64 + 0.5) / 50.0;
            let est = eve_information(q, c).unwrap().eve_info;
            let oracle = grid_search_eve_info(q, c, 10_000);
            worst = worst.max((est - oracle).abs());
        }
    }
    assert!(worst < 1e-6, "worst optimizer/oracle gap {worst} >= 1e-6");
    println!("acceptance 04 optimizer vs grid-search oracle (50x50 grid, worst {worst:.2e} < 1e-6): PASS");
}

#[test]
fn criterion_05_monotonicity_certificate() {
    // dI_E/du > 0 at 100 interior points, for a 30x30 grid over
    // Q in (0, 0.159] and C strictly inside the feasible interval.
    let h = |x: f64| -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
        }
    };
    for i in 0..30 {
        let q = 0.159 * (i + 1) as f64 / 30.0;
        let cap = 2.0 * ((1.0 - q) * (1.0 - q) + q * q);
        for j in 0..30 {
            let c = cap * (j + 1) as f64 / 31.0;
            let half_c = c / 2.0;
            let u_max = (half_c.sqrt() / (1.0 - q)).min(1.0);
            let u_min = ((half_c - q * q).max(0.0).sqrt() / (1.0 - q)).min(u_max);
            if u_max - u_min < 1e-12 {
                continue;
            }
            let ie = |u: f64| {
                let v = ((half_c - (1.0 - q) * (1.0 - q) * u * u).max(0.0)).sqrt() / q;
                (1.0 - q) * h((1.0 + u) / 2.0) + q * h((1.0 + v.min(1.0)) / 2.0)
            };
            let delta = (u_max - u_min) * 1e-4;
            for k in 1..=100 {
                let u = u_min + (u_max - u_min) * k as f64 / 101.0;
                let d = (ie(u + delta) - ie(u - delta)) / (2.0 * delta);
                assert!(d > 0.0, "dI_E/du = {d} <= 0 at Q={q}, C={c}, u={u}");
            }
        }
    }
    println!("acceptance 05 monotonicity certificate (30x30 grid x 100 points): PASS");
}

#[test]
fn criterion_06_spectrum_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(616);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let rho = random_density_matrix((2, 2), &mut rng);
        let c_corr = frame_invariant_c(&exact_correlations(&rho).unwrap()).unwrap();
        let c_spec = rfiqkd::security::bell_spectrum(&rho)
            .unwrap()
            .correlation_sum();
        worst = worst.max((c_corr - c_spec).abs());
    }
    assert!(
        worst < 1e-10,
        "worst spectrum/correlator gap {worst} >= 1e-10"
    );
    println!(
        "acceptance 06 spectrum C vs correlator C (1000 states, worst {worst:.2e} < 1e-10): PASS"
    );
}

#[test]
fn criterion_07_twirl_preservation() {
    let mut rng = ChaCha8Rng::seed_from_u64(717);
    for _ in 0..1000 {
        let rho = random_density_matrix((2, 2), &mut rng);
        let before = exact_correlations(&rho).unwrap();
        let twirled = twirl(&rho).unwrap();
        let after = exact_correlations(&twirled).unwrap();
        assert!((qber(&before).unwrap() - qber(&after).unwrap()).abs() < 1e-12);
        assert!(
            (frame_invariant_c(&before).unwrap() - frame_invariant_c(&after).unwrap()).abs()
                < 1e-12
        );
        let again = twirl(&twirled).unwrap();
        assert!(again.matrix().approx_eq(twirled.matrix(), 1e-12));
    }
    println!("acceptance 07 twirl preserves Q and C, idempotent (1000 states, <1e-12): PASS");
}

#[test]
fn criterion_08_monte_carlo_consistency() {
    let rho = werner_state(0.05).unwrap();
    let n = 1_000_000u64;
    let bases = BasisChoice::uniform_qubit();
    let t = sample_transcript(&rho, n, &bases, &FrameDriftModel::constant(0.0), 808).unwrap();
    let est = estimate_correlations(&t).unwrap();

    let q_est = qber_estimate(&est).unwrap();
    let c_est = frame_invariant_c_estimate(&est).unwrap();
    let se_q = q_est.std_error.unwrap();
    let se_c = c_est.std_error.unwrap();
    assert!(
        (q_est.value - 0.05).abs() < 5.0 * se_q,
        "Q = {} +/- {se_q}, exact 0.05",
        q_est.value
    );
    assert!(
        (c_est.value - 1.62).abs() < 5.0 * se_c,
        "C = {} +/- {se_c}, exact 1.62",
        c_est.value
    );

    // Propagate (se_Q, se_C) through the bound by central differences and
    // compare the resulting rate against the exact r(0.05, 1.62).
    let r_est = eve_information(q_est.value, c_est.value).unwrap().key_rate;
    let dq = se_q.max(1e-9);
    let dc = se_c.max(1e-9);
    let dr_dq = (eve_information(q_est.value + dq, c_est.value)
        .unwrap()
        .key_rate
        - eve_information(q_est.value - dq, c_est.value)
            .unwrap()
            .key_rate)
        / (2.0 * dq);
    let dr_dc = (eve_information(q_est.value, c_est.value + dc)
        .unwrap()
        .key_rate
        - eve_information(q_est.value, c_est.value - dc)
            .unwrap()
            .key_rate)
        / (2.0 * dc);
    let se_r = ((dr_dq * se_q).powi(2) + (dr_dc * se_c).powi(2)).sqrt();
    let exact_r = 0.496816268319;
    assert!(
        (r_est - exact_r).abs() < 5.0 * se_r,
        "r = {r_est} +/- {se_r}, exact {exact_r}"
    );
    println!(
        "acceptance 08 monte-carlo consistency (n=10^6): Q={:.5}~0.05, C={:.4}~1.62, r={:.4}~0.4968: PASS",
        q_est.value, c_est.value, r_est
    );
}

#[test]
fn criterion_09_smearing_under_drift() {
    let rho = bell_state(1).unwrap();
    let n = 1_000_000u64;
    let bases = BasisChoice::uniform_qubit();
    let drift = FrameDriftModel::RandomWalk {
        beta0: 0.0,
        rate: 1e-3,
        seed: 909,
    };
    let t = sample_transcript(&rho, n, &bases, &drift, 910).unwrap();
    let est = estimate_correlations(&t).unwrap();

    let q_est = qber_estimate(&est).unwrap();
    let c_est = frame_invariant_c_estimate(&est).unwrap();
    let se_q = q_est.std_error.unwrap();
    let se_c = c_est.std_error.unwrap().max(1e-12);
    assert!(
        q_est.value.abs() <= 5.0 * se_q,
        "Q = {} +/- {se_q} should stay at 0 under Z-axis drift",
        q_est.value
    );
    assert!(
        c_est.value < 2.0 - 5.0 * se_c,
        "C = {} +/- {se_c} not smeared below 2",
        c_est.value
    );
    println!(
        "acceptance 09 drift smearing (walk 1e-3, n=10^6): C={:.4} << 2, Q={:.2e}~0: PASS",
        c_est.value, q_est.value
    );
}

#[test]
fn criterion_10_qutrit_invariant() {
    // Exact maximum on the qutrit Bell state.
    let bell = qutrit::qutrit_bell();
    let c3 = qutrit::frame_invariant_c3(&qutrit::expectation_table(&bell).unwrap()).unwrap();
    assert!((c3 - 3.0).abs() < 1e-12, "C3(Bell) = {c3}");

    // Phase-drift invariance over a 20x20 grid.
    for i in 0..20 {
        for j in 0..20 {
            let phi1 = 2.0 * std::f64::consts::PI * i as f64 / 20.0;
            let phi2 = 2.0 * std::f64::consts::PI * j as f64 / 20.0;
            let drifted = qutrit::rotate_bob_phases(&bell, phi1, phi2);
            let c3_d =
                qutrit::frame_invariant_c3(&qutrit::expectation_table(&drifted).unwrap()).unwrap();
            assert!(
                (c3_d - 3.0).abs() < 1e-12,
                "C3 = {c3_d} at phases ({phi1}, {phi2})"
            );
        }
    }

    // Bound on random two-qutrit states.
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut max_seen: f64 = 0.0;
    for _ in 0..1000 {
        let rho = random_density_matrix((3, 3), &mut rng);
        let c3 = qutrit::frame_invariant_c3(&qutrit::expectation_table(&rho).unwrap()).unwrap();
        assert!(c3 <= 3.0 + 1e-12, "C3 = {c3} exceeds 3");
        max_seen = max_seen.max(c3);
    }
    println!(
        "acceptance 10 qutrit invariant: C3(Bell)=3, 20x20 phase grid <1e-12, bound on 1000 states (max {max_seen:.3}): PASS"
    );
}

#[test]
fn criterion_11_photonic_verification() {
    let chip = photonic::hadamard_chip();
    let (unitarity, modulus) = photonic::hadamard_residuals(chip.matrix());
    assert!(unitarity < 1e-12, "chip unitarity residual {unitarity}");
    assert!(modulus < 1e-12, "chip modulus residual {modulus}");

    let povm = photonic::measurement_device([0.5, 0.5, 0.5]).unwrap();
    let completeness = povm.completeness_residual();
    assert!(
        completeness < 1e-10,
        "POVM completeness residual {completeness}"
    );

    // Fault injection: DC3 coefficient corrupted to 1/sqrt(2).
    let bad = photonic::coupler_matrix(
        photonic::CouplerKind::Dc3,
        Some(std::f64::consts::FRAC_1_SQRT_2),
    );
    let faulty_chip = photonic::hadamard_product(
        &photonic::coupler_matrix(photonic::CouplerKind::Dc2, None),
        &bad,
        &photonic::coupler_matrix(photonic::CouplerKind::Dc4, None),
    );
    let (bad_unitarity, bad_modulus) = photonic::hadamard_residuals(&faulty_chip);
    assert!(
        bad_modulus > 1e-12 && bad_unitarity > 1e-12,
        "fault injection not caught"
    );
    println!(
        "acceptance 11 photonic verification: chip residuals ({unitarity:.1e}, {modulus:.1e}), POVM {completeness:.1e}, fault caught: PASS"
    );
}

// Auxiliary cross-check used by several criteria: the qutrit Bell state's
// joint computational outcomes stay perfectly correlated under any fixed
// phase drift (the key side of the phase-invariance story).
#[test]
fn qutrit_key_correlations_unaffected_by_phase_drift() {
    let bell = qutrit::qutrit_bell();
    let drifted = qutrit::rotate_bob_phases(&bell, 2.13, 5.7);
    for a in 0..3 {
        for b in 0..3 {
            let idx = a * 3 + b;
            let p = drifted.matrix().get(idx, idx).re;
            let expected = if a == b { 1.0 / 3.0 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12);
        }
    }
    let _ = Complex64::new(0.0, 0.0);
}
