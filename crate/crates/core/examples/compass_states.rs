// Compass states: a second JC segment of length `t″` on a heralded cat,
// compared with the four-component superposition and its Husimi peaks.

use std::f64::consts::TAU;

use cavity_cat::analysis::{fidelity, husimi, local_maxima, GridSpec};
use cavity_cat::hamiltonians::ModelParams;
use cavity_cat::protocols::{compass_protocol_with, Branch, ProtocolOptions};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let alpha = C64::new(2.5, 0.0);
    let p = ModelParams::for_dispersive_ratio(TAU * 1e5, 10_000, alpha.norm_sqr(), 0.005)?;
    let r = compass_protocol_with(&p, alpha, &ProtocolOptions::default())?;
    println!("α* = {:.4}, t″ = {:.4e} s", r.alpha_star, r.t_double_prime);
    let spec = GridSpec::for_amplitude(alpha.norm());
    for b in Branch::BOTH {
        let state = &r.branches[b.index()];
        let f = fidelity(state, &r.analytic(b)?)?;
        let peaks = local_maxima(&husimi(state, &spec)?, 0.5);
        println!(
            "branch {}: F = {:.5}, {} Husimi peaks",
            b.index() + 1,
            f,
            peaks.len()
        );
        for pk in &peaks {
            let beta = pk.beta();
            println!(
                "  |β| = {:.3}, arg β - arg α* = {:+.4} π",
                beta.norm(),
                (beta / r.alpha_star).arg() / std::f64::consts::PI
            );
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
