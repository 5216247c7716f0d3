// Interferometric detection: cat generation, a free rotation for `δt`,
// the undo segment and photon readout, against the closed-form law.

use std::f64::consts::TAU;

use cavity_cat::analysis::{fit_oscillation, rms};
use cavity_cat::hamiltonians::ModelParams;
use cavity_cat::protocols::{detection_grid, detection_sweep, ProtocolOptions, Undo};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let delta_prime = TAU * 50.0;
    for a in [1.0, 2.0] {
        let alpha = C64::new(a, 0.0);
        let p = ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, a * a, 0.005)?;
        let times = detection_grid(alpha, delta_prime, 1.0, 16)?;
        let rows = detection_sweep(
            &p,
            alpha,
            delta_prime,
            &times,
            Undo::Forward,
            &ProtocolOptions::default(),
        )?;
        let sim: Vec<f64> = rows.iter().map(|r| r.p1).collect();
        let ana: Vec<f64> = rows.iter().map(|r| r.p1_analytic).collect();
        println!(
            "|α| = {a}: RMS(simulated - closed form) = {:.4}",
            rms(&sim, &ana)
        );
        for r in rows.iter().step_by(4) {
            println!(
                "  δt = {:.4e} s  P1 = {:.5}  closed form {:.5}",
                r.delta_t, r.p1, r.p1_analytic
            );
        }
        match fit_oscillation(&times, &sim) {
            Ok(fit) => println!("  fitted ω = {:.4e} rad/s", fit.omega),
            Err(e) => println!("  no oscillation fit: {e}"),
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
