// Wigner and Husimi grids of coherent, cat and Fock states.

use cavity_cat::analysis::{husimi, local_maxima, wigner, GridSpec};
use cavity_cat::hilbert::{coherent_state_auto, fock_state};
use cavity_cat::protocols::{analytic_cat, Branch};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let alpha = C64::new(2.0, 0.0);
    let spec = GridSpec::for_amplitude(alpha.norm());
    let states = [
        ("coherent", coherent_state_auto(alpha)?),
        (
            "even cat",
            analytic_cat(alpha, std::f64::consts::FRAC_PI_2, Branch::Two)?,
        ),
        ("Fock 1", fock_state(1, 10)?),
    ];
    for (label, psi) in &states {
        let w = wigner(psi, &spec)?;
        let q = husimi(psi, &spec)?;
        println!(
            "{label:9} ∫W = {:.6}  min W = {:+.4}  max W = {:.4}  ∫Q = {:.6}  Q peaks = {}",
            w.integral(),
            w.min(),
            w.max(),
            q.integral(),
            local_maxima(&q, 0.5).len()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
