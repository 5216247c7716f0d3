// Laboratory scales: cat generation time for `g = 2π·1 kHz`,
// `N = 10⁴` at a compliant detuning, and the damping-limited lifetime.

use std::f64::consts::TAU;

use cavity_cat::analysis::cat_lifetime;
use cavity_cat::hamiltonians::ModelParams;
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let n_atoms = 10_000;
    let g_eff = TAU * 1e3 * (n_atoms as f64).sqrt();
    for n in [4.0, 50.0, 400.0] {
        let p = ModelParams::for_dispersive_ratio(g_eff, n_atoms, n, 0.005)?;
        println!(
            "|α|² = {n:5}: Δ = 2π·{:.3e} Hz, t* = {:.1} μs, t″ = {:.1} μs",
            p.delta / TAU,
            p.t_star()? * 1e6,
            p.t_double_prime()? * 1e6
        );
    }
    for n in [50.0, 100.0, 200.0, 400.0_f64] {
        let l = cat_lifetime(1.0, C64::new(n.sqrt(), 0.0))?;
        println!("|α̃|² = {n:5}: T = {:.2} ms at T_r = 1 s", l.t * 1e3);
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
