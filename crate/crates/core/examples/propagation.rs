// Time evolution: block-diagonal propagation of the JC Hamiltonian,
// Krylov fallback, piecewise schedules and conserved quantities.

use std::f64::consts::TAU;

use cavity_cat::evolution::{propagate_schedule, Propagator, PropagatorOptions, Segment};
use cavity_cat::hamiltonians::{jc_excitation_op, jc_hamiltonian, ModelParams};
use cavity_cat::hilbert::{coherent_state, photon_plus, tensor};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let p = ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, 4.0, 0.005)?;
    let cutoff = 40;
    let h = jc_hamiltonian(&p, cutoff)?;
    let psi0 = tensor(&photon_plus(), &coherent_state(C64::new(2.0, 0.0), cutoff)?);
    let t = p.t_star()?;

    let eig = Propagator::new(&h)?;
    let krylov = Propagator::with_options(
        &h,
        PropagatorOptions {
            dense_limit: 0,
            ..Default::default()
        },
    )?;
    println!("excitation blocks: {:?}", &eig.block_sizes()[..6]);
    let a = eig.evolve(&psi0, t)?;
    let b = krylov.evolve(&psi0, t)?;
    println!(
        "eigen vs Krylov at t* = {:.4e} s: |Δψ| = {:.3e}",
        t,
        (a.amplitudes() - b.amplitudes()).norm()
    );

    let n_exc = jc_excitation_op(cutoff)?;
    println!(
        "norm drift {:.3e}, <N_exc> drift {:.3e}",
        (a.norm() - 1.0).abs(),
        (n_exc.expectation(&a)?.re - n_exc.expectation(&psi0)?.re).abs()
    );

    let back = eig.evolve(&a, -t)?;
    println!(
        "reversibility |U(-t)U(t)ψ - ψ| = {:.3e}",
        (back.amplitudes() - psi0.amplitudes()).norm()
    );

    let schedule = [
        Segment::new(h.clone(), 0.5 * t)?,
        Segment::new(h.clone(), 0.5 * t)?,
    ];
    let traj = propagate_schedule(&schedule, &psi0, 4)?;
    println!(
        "schedule: {} samples, final vs single step |Δψ| = {:.3e}",
        traj.times.len(),
        (traj.final_state().amplitudes() - a.amplitudes()).norm()
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
