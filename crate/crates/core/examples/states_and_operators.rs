// Truncated Fock and collective-spin spaces: states, ladder operators,
// tensor products and the truncation artefact of `[a, a†]`.

use cavity_cat::hilbert::{
    atomic_coherent_state, coherent_state_auto, collective_spin_ops, embed, ladder_ops, number_op,
    tensor, Basis, Subsystem,
};
use cavity_cat::{Result, C64};

pub fn run_example() -> Result<()> {
    let alpha = C64::new(2.0, 0.0);
    let psi = coherent_state_auto(alpha)?;
    let n = number_op(psi.dim() - 1)?;
    println!(
        "coherent |α| = 2: cutoff {}, norm {:.12}, <n> = {:.6}",
        psi.dim() - 1,
        psi.norm(),
        n.expectation(&psi)?.re
    );

    let (a, ad) = ladder_ops(6)?;
    let comm = a.commutator(&ad)?;
    println!(
        "[a, a†] diagonal at cutoff 6: {:?}",
        (0..7).map(|k| comm.get(k, k).re).collect::<Vec<_>>()
    );

    let (jz, jp, _) = collective_spin_ops(4)?;
    let spin = atomic_coherent_state(4, C64::new(0.5, 0.0))?;
    println!(
        "spin-2 coherent: <J_z> = {:.6}, <J_+> = {:.6}",
        jz.expectation(&spin)?.re,
        jp.expectation(&spin)?
    );

    let joint = tensor(&coherent_state_auto(C64::new(0.0, 1.0))?, &spin);
    let basis = Basis::new(vec![
        Subsystem::fock(joint.basis().factors()[0].dim() - 1)?,
        Subsystem::spin(4)?,
    ])?;
    let jz_full = embed(&basis, 1, &jz)?;
    println!(
        "joint dim {}, norm {:.12}, <J_z> on factor 1 = {:.6}",
        joint.dim(),
        joint.norm(),
        jz_full.expectation(&joint)?.re
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
