// Exact collective-spin model against its Holstein-Primakoff (JC) image
// as the atom number grows at fixed `g√N` and excitation.

use std::f64::consts::TAU;

use cavity_cat::analysis::{hp_convergence_with, loglog_slope, HpOptions};
use cavity_cat::hamiltonians::ModelParams;
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let eta = C64::new(2.0, 0.0);
    let p = ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, eta.norm_sqr(), 0.005)?;
    let opts = HpOptions {
        photon_cutoff: 1,
        ..Default::default()
    };
    let rows = hp_convergence_with(&[50, 100, 200, 400], eta, &p, p.t_star()?, &opts)?;
    for r in &rows {
        println!(
            "N = {:4}  |η|²/N = {:.4}  F = {:.6}  1-F = {:.4e}  leakage = {:.1e}",
            r.n_atoms, r.excitation_fraction, r.fidelity, r.infidelity, r.photon_leakage
        );
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.excitation_fraction).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.infidelity).collect();
    println!(
        "slope of ln(1-F) vs ln(|η|²/N): {:.3}",
        loglog_slope(&xs, &ys)?
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
