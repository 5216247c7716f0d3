// Cat-state generation: JC evolution for `t*`, `U_{π/2}` on the photon
// and photon post-selection, compared with the analytic cats.

use std::f64::consts::TAU;

use cavity_cat::analysis::{cat_lifetime, fidelity};
use cavity_cat::hamiltonians::ModelParams;
use cavity_cat::protocols::{cat_norm_squared, cat_protocol, Branch};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let alpha = C64::new(2.0, 0.0);
    for ratio in [0.04, 0.01, 0.0025] {
        let p = ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, alpha.norm_sqr(), ratio)?;
        let r = cat_protocol(&p, alpha, p.t_star()?)?;
        print!("ratio {ratio:<7} t* = {:.3e} s", r.t_star);
        for b in Branch::BOTH {
            let f = fidelity(r.branch(b)?, &r.analytic(b)?)?;
            print!(
                "  branch {}: P = {:.4} (Ñ²/4 = {:.4}) F = {:.5}",
                b.index() + 1,
                r.probabilities[b.index()],
                cat_norm_squared(r.alpha_tilde, r.phi, b) / 4.0,
                f
            );
        }
        println!();
    }
    let life = cat_lifetime(1.0, C64::new(20.0, 0.0))?;
    println!(
        "lifetime at T_r = 1 s, |α̃|² = 400: D = {}, T = {:.3e} s",
        life.d, life.t
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
