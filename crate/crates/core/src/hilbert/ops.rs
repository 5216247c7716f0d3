//! Standard operator sets: truncated ladder operators, collective spin and
//! the photon Pauli operators.

use num_complex::Complex64 as C64;

use super::basis::{Basis, Subsystem};
use super::operator::Operator;
use crate::error::Result;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Truncated `(a, a†)` with `⟨n-1|a|n⟩ = √n`.
pub fn ladder_ops(cutoff: usize) -> Result<(Operator, Operator)> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    let a = Operator::from_triplets(
        basis,
        (1..=cutoff).map(|n| (n - 1, n, re((n as f64).sqrt()))),
    );
    let adag = a.adjoint();
    Ok((a, adag))
}

/// `a†a` on a truncated mode.
pub fn number_op(cutoff: usize) -> Result<Operator> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    let diag: Vec<f64> = (0..=cutoff).map(|n| n as f64).collect();
    Operator::diagonal(basis, &diag)
}

/// `(J_z, J_+, J_-)` on the spin-`N/2` Dicke manifold, ordered by
/// excitation number `k` with `J_z = k - N/2` and
/// `⟨k+1|J_+|k⟩ = √((k+1)(N-k))`.
pub fn collective_spin_ops(n_atoms: usize) -> Result<(Operator, Operator, Operator)> {
    let basis = Basis::single(Subsystem::spin(n_atoms)?);
    let half = n_atoms as f64 / 2.0;
    let jz_diag: Vec<f64> = (0..=n_atoms).map(|k| k as f64 - half).collect();
    let jz = Operator::diagonal(basis.clone(), &jz_diag)?;
    let jp = Operator::from_triplets(
        basis,
        (0..n_atoms).map(|k| {
            let amp = (((k + 1) * (n_atoms - k)) as f64).sqrt();
            (k + 1, k, re(amp))
        }),
    );
    let jm = jp.adjoint();
    Ok((jz, jp, jm))
}

/// Photon Pauli operators on `{|0⟩, |1⟩}` with `σ^x = a† + a`,
/// `σ^y = i(a† - a)` and `σ^z = 1 - 2a†a`, so `σ^z|0⟩ = +|0⟩`.
pub fn pauli_ops() -> (Operator, Operator, Operator) {
    let q = Basis::single(Subsystem::Qubit);
    let sx = Operator::from_triplets(q.clone(), vec![(0, 1, re(1.0)), (1, 0, re(1.0))])
        .flagged_hermitian();
    let sy = Operator::from_triplets(
        q.clone(),
        vec![(0, 1, C64::new(0.0, -1.0)), (1, 0, C64::new(0.0, 1.0))],
    )
    .flagged_hermitian();
    let sz = Operator::diagonal(q, &[1.0, -1.0]).expect("qubit diagonal has two entries");
    (sx, sy, sz)
}

/// `σ_+ = |1⟩⟨0|`: creates the photon.
pub fn sigma_plus() -> Operator {
    Operator::from_triplets(Basis::single(Subsystem::Qubit), vec![(1, 0, re(1.0))])
}

/// `σ_- = |0⟩⟨1|`: removes the photon.
pub fn sigma_minus() -> Operator {
    Operator::from_triplets(Basis::single(Subsystem::Qubit), vec![(0, 1, re(1.0))])
}

/// `|level⟩⟨level|` on a single factor.
pub fn projector(factor: Subsystem, level: usize) -> Operator {
    let basis = Basis::single(factor);
    Operator::from_triplets(basis, vec![(level, level, re(1.0))]).flagged_hermitian()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_state, StateVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_matrix_elements() {
        let (a, adag) = ladder_ops(10).unwrap();
        let one = fock_state(1, 10).unwrap();
        assert_eq!(a.apply(&one).unwrap(), fock_state(0, 10).unwrap());
        let vac = fock_state(0, 10).unwrap();
        assert_eq!(a.apply(&vac).unwrap().norm(), 0.0);
        assert_abs_diff_eq!(a.get(2, 3).re, 3f64.sqrt());
        assert_eq!(adag.get(3, 2), a.get(2, 3).conj());
    }

    #[test]
    fn truncated_commutator_deviates_only_at_top() {
        let cutoff = 12;
        let (a, adag) = ladder_ops(cutoff).unwrap();
        let comm = a.commutator(&adag).unwrap();
        let id = Operator::identity(comm.basis().clone());
        let diff = comm.sub(&id).unwrap();
        for (i, j, v) in diff.triplets().into_iter().filter(|t| t.2.norm() > 1e-12) {
            assert_eq!(
                (i, j),
                (cutoff, cutoff),
                "unexpected deviation {v} at ({i},{j})"
            );
        }
    }

    #[test]
    fn spin_half_jz() {
        let (jz, _, _) = collective_spin_ops(1).unwrap();
        assert_eq!(jz.get(0, 0).re, -0.5);
        assert_eq!(jz.get(1, 1).re, 0.5);
    }

    #[test]
    fn su2_algebra_at_n_100() {
        let (jz, jp, jm) = collective_spin_ops(100).unwrap();
        let c = jp.commutator(&jm).unwrap();
        let two_jz = jz.scale(C64::new(2.0, 0.0));
        assert!(c.sub(&two_jz).unwrap().max_abs() <= 1e-10);
        let zp = jz.commutator(&jp).unwrap();
        assert!(zp.sub(&jp).unwrap().max_abs() <= 1e-10);
        let zm = jz.commutator(&jm).unwrap();
        assert!(zm.add(&jm).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn j_plus_on_vacuum_gives_sqrt_n() {
        let n = 100;
        let (_, jp, _) = collective_spin_ops(n).unwrap();
        let vac =
            StateVector::basis_state(Basis::single(Subsystem::Spin { n_atoms: n }), 0).unwrap();
        let out = jp.apply(&vac).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[1].re, (n as f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm(), (n as f64).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn pauli_convention() {
        let (sx, sy, sz) = pauli_ops();
        let zero = StateVector::basis_state(Basis::single(Subsystem::Qubit), 0).unwrap();
        let one = StateVector::basis_state(Basis::single(Subsystem::Qubit), 1).unwrap();
        assert_eq!(sz.apply(&zero).unwrap(), zero);
        assert_eq!(sx.apply(&zero).unwrap(), one);
        let id = Operator::identity(Basis::single(Subsystem::Qubit));
        assert_eq!(sx.matmul(&sx).unwrap().sub(&id).unwrap().max_abs(), 0.0);
        assert_eq!(sy.matmul(&sy).unwrap().sub(&id).unwrap().max_abs(), 0.0);
        // σ^x = a† + a with a = σ_-
        let built = sigma_plus().add(&sigma_minus()).unwrap();
        assert_eq!(built.sub(&sx).unwrap().max_abs(), 0.0);
    }
}
