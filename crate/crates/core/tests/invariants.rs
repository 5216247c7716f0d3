//! Property tests for the structural invariants of states, operators,
//! propagation, protocols and diagnostics.

use std::f64::consts::{PI, TAU};

use cavity_cat::analysis::{
    cat_lifetime, fidelity, hp_convergence_with, husimi, wigner, GridSpec, HpOptions,
};
use cavity_cat::evolution::{propagate_schedule, Propagator, Segment};
use cavity_cat::hamiltonians::{
    full_excitation_op, full_hamiltonian, jc_excitation_op, jc_hamiltonian, ModelParams,
};
use cavity_cat::hilbert::{
    atomic_coherent_state, coherent_state, coherent_state_auto, collective_spin_ops, fock_state,
    ladder_ops, number_op, photon_plus, photon_plus_fock, qubit_state, tensor, Basis, StateVector,
    Subsystem,
};
use cavity_cat::protocols::{
    analytic_cat, analytic_compass, cat_norm_squared, cat_protocol, detection_protocol_with,
    measure_photon, u_pi2, Branch, Photon, ProtocolOptions, Undo,
};
use cavity_cat::C64;
use nalgebra::DVector;
use proptest::prelude::*;

fn amp() -> impl Strategy<Value = C64> {
    (0.0..4.0f64, 0.0..TAU).prop_map(|(r, th)| C64::from_polar(r, th))
}

fn random_vector(basis: Basis, raw: &[(f64, f64)]) -> StateVector {
    let dim = basis.total_dim();
    let amps = DVector::from_iterator(
        dim,
        (0..dim).map(|i| {
            let (a, b) = raw[i % raw.len()];
            C64::new(a + 0.01 * i as f64, b)
        }),
    );
    StateVector::from_amplitudes(basis, amps)
        .unwrap()
        .normalized()
        .unwrap()
}

fn dispersive(alpha_abs: f64, ratio: f64) -> ModelParams {
    ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, alpha_abs.max(0.5).powi(2), ratio).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coherent_states_are_unit_norm_with_mean_excitation(alpha in amp()) {
        let psi = coherent_state_auto(alpha).unwrap();
        prop_assert!((psi.norm() - 1.0).abs() <= 1e-10);
        let n = number_op(psi.dim() - 1).unwrap();
        prop_assert!((n.expectation(&psi).unwrap().re - alpha.norm_sqr()).abs() <= 1e-8);
    }

    #[test]
    fn fock_and_qubit_states_are_unit_norm(n in 0usize..30, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        prop_assert!((fock_state(n, 30).unwrap().norm() - 1.0).abs() <= 1e-12);
        prop_assume!(a.abs() + b.abs() > 1e-3);
        let q = qubit_state(C64::new(a, 0.0), C64::new(0.0, b)).unwrap();
        prop_assert!((q.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn spin_coherent_states_are_unit_norm(n_atoms in 1usize..300, eta in amp()) {
        prop_assume!(eta.norm_sqr() <= 0.5 * n_atoms as f64);
        let s = atomic_coherent_state(n_atoms, eta).unwrap();
        prop_assert!((s.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn ladder_commutator_deviates_only_at_top(cutoff in 1usize..40) {
        let (a, ad) = ladder_ops(cutoff).unwrap();
        let comm = a.commutator(&ad).unwrap();
        for i in 0..=cutoff {
            for j in 0..=cutoff {
                let expected = if i == j && i < cutoff { 1.0 } else { 0.0 };
                if i == cutoff && j == cutoff {
                    continue;
                }
                prop_assert!((comm.get(i, j) - C64::new(expected, 0.0)).norm() <= 1e-12);
            }
        }
        prop_assert!((comm.get(cutoff, cutoff).re + cutoff as f64).abs() <= 1e-12);
    }

    #[test]
    fn spin_operators_obey_su2(n_atoms in 1usize..=1000) {
        let (jz, jp, jm) = collective_spin_ops(n_atoms).unwrap();
        let two_jz = jz.scale(C64::new(2.0, 0.0));
        prop_assert!(jp.commutator(&jm).unwrap().sub(&two_jz).unwrap().max_abs() <= 1e-10);
        prop_assert!(jz.commutator(&jp).unwrap().sub(&jp).unwrap().max_abs() <= 1e-10);
        let minus_jm = jm.scale(C64::new(-1.0, 0.0));
        prop_assert!(jz.commutator(&jm).unwrap().sub(&minus_jm).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn tensor_is_associative(
        raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..8),
        d in (1usize..4, 1usize..4, 1usize..4),
    ) {
        let x = random_vector(Basis::single(Subsystem::fock(d.0).unwrap()), &raw);
        let y = random_vector(Basis::single(Subsystem::spin(d.1).unwrap()), &raw[1..]
            .iter().chain(&raw).cloned().collect::<Vec<_>>());
        let z = random_vector(Basis::single(Subsystem::Qubit), &raw);
        let left = tensor(&tensor(&x, &y), &z);
        let right = tensor(&x, &tensor(&y, &z));
        // equal up to the rounding of the reassociated products
        prop_assert!((left.amplitudes() - right.amplitudes()).norm() <= 1e-15);
        prop_assert_eq!(left.basis().factors(), right.basis().factors());
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in amp(), b in amp()) {
        let x = coherent_state(a, 60).unwrap();
        let y = coherent_state(b, 60).unwrap();
        let f = fidelity(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&y, &x).unwrap()).abs() <= 1e-14);
        let phased = x.scaled(C64::from_polar(1.0, b.arg()));
        prop_assert!((fidelity(&x, &phased).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn u_pi2_is_unitary_and_measurement_complete(
        c0 in amp(), c1 in amp(), atoms in amp(),
    ) {
        prop_assume!(c0.norm() + c1.norm() > 1e-3);
        let photon = qubit_state(c0, c1).unwrap();
        let x = tensor(&photon, &coherent_state(atoms, 60).unwrap());
        let y = tensor(&photon_plus(), &coherent_state(atoms * 0.5, 60).unwrap());
        let (ux, uy) = (u_pi2(&x).unwrap(), u_pi2(&y).unwrap());
        prop_assert!((ux.norm() - 1.0).abs() <= 1e-12);
        prop_assert!((ux.inner(&uy).unwrap() - x.inner(&y).unwrap()).norm() <= 1e-12);
        let p0 = measure_photon(&ux, Photon::Zero).map(|m| m.probability).unwrap_or(0.0);
        let p1 = measure_photon(&ux, Photon::One).map(|m| m.probability).unwrap_or(0.0);
        prop_assert!((p0 + p1 - 1.0).abs() <= 1e-10);
        if let Ok(m) = measure_photon(&ux, Photon::One) {
            prop_assert!((m.collapsed.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn cat_norms_complete_and_cats_are_unit_norm(alpha in amp(), phi in 0.0..PI) {
        let n1 = cat_norm_squared(alpha, phi, Branch::One);
        let n2 = cat_norm_squared(alpha, phi, Branch::Two);
        prop_assert!((n1 + n2 - 4.0).abs() <= 1e-12);
        for b in Branch::BOTH {
            if let Ok(c) = analytic_cat(alpha, phi, b) {
                prop_assert!((c.norm() - 1.0).abs() <= 1e-10);
            }
        }
        if let Ok(c) = analytic_compass(alpha, Branch::One) {
            prop_assert!((c.norm() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn lifetime_depends_only_on_magnitude(r in 0.5..30.0f64, th in 0.0..TAU, t_r in 0.01..10.0f64) {
        let a = cat_lifetime(t_r, C64::new(r, 0.0)).unwrap();
        let b = cat_lifetime(t_r, C64::from_polar(r, th)).unwrap();
        prop_assert!((a.t - b.t).abs() <= 1e-15 * a.t);
        prop_assert!((a.t - 2.0 * t_r / (2.0 * r).powi(2)).abs() <= 1e-14 * a.t);
    }

    #[test]
    fn phase_space_grids_normalize(alpha in amp()) {
        prop_assume!(alpha.norm() <= 3.0);
        let psi = coherent_state_auto(alpha).unwrap();
        let spec = GridSpec::for_amplitude(alpha.norm());
        let w = wigner(&psi, &spec).unwrap();
        prop_assert!((w.integral() - 1.0).abs() <= 1e-3);
        let q = husimi(&psi, &spec).unwrap();
        prop_assert!(q.min() >= 0.0);
        prop_assert!(q.max() <= 1.0 / PI + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jc_evolution_conserves_norm_energy_and_excitation(
        alpha in amp(), ratio in 0.001..0.05f64, frac in -2.0..2.0f64, split in 0.05..0.95f64,
    ) {
        prop_assume!(alpha.norm() <= 3.0);
        let p = dispersive(alpha.norm(), ratio);
        let cutoff = 50;
        let h = jc_hamiltonian(&p, cutoff).unwrap();
        prop_assert!(h.hermitian_deviation() <= 1e-12 * h.max_abs());
        let n_exc = jc_excitation_op(cutoff).unwrap();
        prop_assert!(h.commutator(&n_exc).unwrap().max_abs() <= 1e-10 * h.max_abs());
        let psi = tensor(&photon_plus(), &coherent_state(alpha, cutoff).unwrap());
        let t = frac * p.t_star().unwrap();
        let u = Propagator::new(&h).unwrap();
        let out = u.evolve_unchecked(&psi, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
        let e0 = h.expectation(&psi).unwrap().re;
        prop_assert!((h.expectation(&out).unwrap().re - e0).abs() <= 1e-9 * e0.abs().max(1.0));
        let n0 = n_exc.expectation(&psi).unwrap().re;
        prop_assert!((n_exc.expectation(&out).unwrap().re - n0).abs() <= 1e-9 * n0.max(1.0));
        let composed = u
            .evolve_unchecked(&u.evolve_unchecked(&psi, split * t).unwrap(), (1.0 - split) * t)
            .unwrap();
        prop_assert!((composed.amplitudes() - out.amplitudes()).norm() <= 1e-10);
        let back = u.evolve_unchecked(&out, -t).unwrap();
        prop_assert!(fidelity(&back, &psi).unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn full_model_conserves_excitation(n_atoms in 2usize..120, cutoff in 1usize..5, eta in amp()) {
        prop_assume!(eta.norm_sqr() <= 0.25 * n_atoms as f64);
        let p = dispersive(2.0, 0.005).rescaled_atoms(n_atoms).unwrap();
        let h = full_hamiltonian(&p, cutoff).unwrap();
        prop_assert!(h.hermitian_deviation() <= 1e-12 * h.max_abs());
        let n_exc = full_excitation_op(cutoff, n_atoms).unwrap();
        prop_assert!(h.commutator(&n_exc).unwrap().max_abs() <= 1e-10 * h.max_abs());
        let psi = tensor(
            &photon_plus_fock(cutoff).unwrap(),
            &atomic_coherent_state(n_atoms, eta).unwrap(),
        );
        let out = Propagator::new(&h).unwrap().evolve_unchecked(&psi, p.t_star().unwrap()).unwrap();
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
        let n0 = n_exc.expectation(&psi).unwrap().re;
        prop_assert!((n_exc.expectation(&out).unwrap().re - n0).abs() <= 1e-9 * n0.abs().max(1.0));
    }

    #[test]
    fn schedule_halves_match_single_segment(alpha in amp(), ratio in 0.001..0.05f64) {
        prop_assume!(alpha.norm() <= 3.0);
        let p = dispersive(alpha.norm(), ratio);
        let h = jc_hamiltonian(&p, 50).unwrap();
        let psi = tensor(&photon_plus(), &coherent_state(alpha, 50).unwrap());
        let t = p.t_star().unwrap();
        let one = propagate_schedule(&[Segment::new(h.clone(), t).unwrap()], &psi, 3).unwrap();
        let two = propagate_schedule(
            &[Segment::new(h.clone(), 0.5 * t).unwrap(), Segment::new(h, 0.5 * t).unwrap()],
            &psi,
            3,
        )
        .unwrap();
        prop_assert!(
            (one.final_state().amplitudes() - two.final_state().amplitudes()).norm() <= 1e-10
        );
        prop_assert!(two.times.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(two.states.iter().all(|s| (s.norm() - 1.0).abs() <= 1e-10));
    }

    #[test]
    fn cat_protocol_probabilities_complete(alpha in amp(), ratio in 0.001..0.01f64) {
        prop_assume!(alpha.norm() >= 0.5 && alpha.norm() <= 3.0);
        let p = dispersive(alpha.norm(), ratio);
        let r = cat_protocol(&p, alpha, p.t_star().unwrap()).unwrap();
        prop_assert!((r.probabilities[0] + r.probabilities[1] - 1.0).abs() <= 1e-10);
        prop_assert!((r.phi - PI / 2.0).abs() <= 1e-12);
        prop_assert!((r.alpha_tilde - alpha * C64::from_polar(1.0, -p.delta * r.t_star)).norm() <= 1e-9);
    }
}

#[test]
fn swapping_photon_outcome_swaps_cat_branches() {
    let alpha = C64::new(2.0, 0.0);
    let p = dispersive(2.0, 0.0025);
    let r = cat_protocol(&p, alpha, p.t_star().unwrap()).unwrap();
    let one = measure_photon(&r.rotated, Photon::One).unwrap().collapsed;
    let zero = measure_photon(&r.rotated, Photon::Zero).unwrap().collapsed;
    let (a1, a2) = (
        r.analytic(Branch::One).unwrap(),
        r.analytic(Branch::Two).unwrap(),
    );
    assert!(fidelity(&one, &a1).unwrap() > 0.99);
    assert!(fidelity(&zero, &a2).unwrap() > 0.99);
    assert!(fidelity(&one, &a2).unwrap() < 0.01);
    assert!(fidelity(&zero, &a1).unwrap() < 0.01);
}

#[test]
fn detection_undo_returns_to_zero() {
    let alpha = C64::new(2.0, 0.0);
    let p = dispersive(2.0, 0.005);
    let p1 = detection_protocol_with(
        &p,
        alpha,
        TAU * 50.0,
        0.0,
        Undo::Inverse,
        &ProtocolOptions::default(),
    )
    .unwrap();
    assert!(p1.p1.abs() <= 1e-12, "P1 = {}", p1.p1);
}

#[test]
fn spin_coherent_state_approaches_coherent_state() {
    let eta = C64::new(1.5, 0.0);
    let fids: Vec<f64> = [20usize, 80, 320]
        .iter()
        .map(|&n| {
            let spin = atomic_coherent_state(n, eta).unwrap();
            let boson = coherent_state(eta, n).unwrap();
            let mapped =
                StateVector::from_amplitudes(boson.basis().clone(), spin.amplitudes().clone())
                    .unwrap();
            fidelity(&mapped, &boson).unwrap()
        })
        .collect();
    assert!(fids.windows(2).all(|w| w[1] > w[0]), "{fids:?}");
}

#[test]
fn hp_fidelity_non_increasing_in_excitation() {
    let p = dispersive(2.0, 0.005);
    let t = p.t_star().unwrap();
    let opts = HpOptions {
        photon_cutoff: 1,
        ..Default::default()
    };
    let fids: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|a| hp_convergence_with(&[200], C64::new(*a, 0.0), &p, t, &opts).unwrap()[0].fidelity)
        .collect();
    assert!(fids.windows(2).all(|w| w[1] <= w[0]), "{fids:?}");
}
