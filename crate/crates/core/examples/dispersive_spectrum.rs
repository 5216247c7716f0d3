// The `n`-excitation JC doublet: exact energies against the dispersive
// approximation, and the quadratic error law in the validity ratio.

use std::f64::consts::TAU;

use cavity_cat::analysis::{dispersive_error_table, loglog_slope};
use cavity_cat::hamiltonians::{derive_params, dispersive_eigen, exact_block_energies};
use cavity_cat::Result;

pub fn run_example() -> Result<()> {
    let p = derive_params(TAU * 1e8, TAU * -9.4333e7, TAU * 1e5, TAU * 1e6, 10_000)?;
    println!(
        "derived: Δ = 2π·{:.4e} Hz, g = 2π·{:.4e} Hz, g√N = 2π·{:.4e} Hz",
        p.delta / TAU,
        p.g / TAU,
        p.g_eff / TAU
    );
    for n in [1, 4, 16] {
        let d = dispersive_eigen(&p, n)?;
        let (ep, em) = exact_block_energies(&p, n);
        println!(
            "n = {n:2}: ratio {:.3e} valid {:5}  E+ {:+.6e} (exact {:+.6e})  E- {:+.6e} (exact {:+.6e})",
            d.ratio, d.valid, d.e_plus, ep, d.e_minus, em
        );
    }

    let ratios = [0.04, 0.01, 0.0025];
    let rows = dispersive_error_table(p.delta, 10_000, 4, &ratios)?;
    for r in &rows {
        println!(
            "ratio {:.4}: error {:.4e} rad/s, bound {:.4e}",
            r.ratio, r.error, r.bound
        );
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    println!("log-log slope: {:.4}", loglog_slope(&ratios, &errors)?);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
