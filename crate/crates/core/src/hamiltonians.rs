//! Model Hamiltonians and the dispersive-regime energies.
//!
//! Frequencies are angular (rad/s) with `ħ = 1`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, Subsystem};

/// Largest Hilbert-space dimension a builder will allocate by default.
pub const DEFAULT_MAX_DIM: usize = 1 << 20;

/// Default bound on the dispersive validity ratio `4g²Nn/Δ²`.
pub const DEFAULT_DISPERSIVE_THRESHOLD: f64 = 0.01;

/// Physical inputs and the derived two-photon parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta1: f64,
    pub delta2: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
    pub n_atoms: usize,
    /// Two-photon detuning `Δ = Δ1 + Δ2 - Ωrf²/Δ1`.
    pub delta: f64,
    /// Effective two-photon Rabi frequency `g = Ωc Ωrf / Δ1`.
    pub g: f64,
    /// Collectively enhanced coupling `g √N`.
    pub g_eff: f64,
}

/// Derives `Δ`, `g` and `g√N` from the level-scheme inputs.
pub fn derive_params(
    delta1: f64,
    delta2: f64,
    omega_c: f64,
    omega_rf: f64,
    n_atoms: usize,
) -> Result<ModelParams> {
    if delta1 == 0.0 {
        return Err(Error::Singularity(
            "single-photon detuning delta1 is zero".into(),
        ));
    }
    if n_atoms < 1 {
        return Err(Error::Domain("at least one atom is required".into()));
    }
    for (name, v) in [
        ("delta1", delta1),
        ("delta2", delta2),
        ("omega_c", omega_c),
        ("omega_rf", omega_rf),
    ] {
        if !v.is_finite() {
            return Err(Error::Domain(format!("{name} is not finite")));
        }
    }
    let delta = delta1 + delta2 - omega_rf * omega_rf / delta1;
    let g = omega_c * omega_rf / delta1;
    Ok(ModelParams {
        delta1,
        delta2,
        omega_c,
        omega_rf,
        n_atoms,
        delta,
        g,
        g_eff: g * (n_atoms as f64).sqrt(),
    })
}

impl ModelParams {
    /// Back-solves level-scheme inputs that reproduce the given `Δ` and `g`.
    ///
    /// Uses `Δ1 = Ωrf` equal to a power of two so the light shift
    /// `Ωrf²/Δ1` and the ratio `Ωrf/Δ1` are exact; `Ωc = g` and `Δ2 = Δ`.
    pub fn with_effective(delta: f64, g: f64, n_atoms: usize) -> Result<Self> {
        let scale = if delta != 0.0 { delta.abs() } else { 1.0 };
        let reference = 2f64.powi(scale.log2().floor() as i32);
        derive_params(reference, delta, g, reference, n_atoms)
    }

    /// Parameters at collective coupling `g_eff` whose detuning puts
    /// excitation `n` at validity ratio `ratio`: `Δ = 2 g_eff √n / √ratio`.
    pub fn for_dispersive_ratio(g_eff: f64, n_atoms: usize, n: f64, ratio: f64) -> Result<Self> {
        if ratio <= 0.0 || n <= 0.0 {
            return Err(Error::Domain(
                "ratio and excitation must be positive".into(),
            ));
        }
        let delta = 2.0 * g_eff * n.sqrt() / ratio.sqrt();
        ModelParams::with_effective(delta, g_eff / (n_atoms as f64).sqrt(), n_atoms)
    }

    /// Copy with a different atom number at fixed `g√N` and `Δ`.
    pub fn rescaled_atoms(&self, n_atoms: usize) -> Result<Self> {
        ModelParams::with_effective(self.delta, self.g_eff / (n_atoms as f64).sqrt(), n_atoms)
    }

    /// `4g²Nn/Δ²`.
    pub fn validity_ratio(&self, n: f64) -> f64 {
        4.0 * self.g_eff * self.g_eff * n / (self.delta * self.delta)
    }

    /// Dispersive phase `φ = g²N t / Δ` accumulated in time `t`.
    pub fn dispersive_phase(&self, t: f64) -> Result<f64> {
        self.check_detuning()?;
        Ok(self.g_eff * self.g_eff * t / self.delta)
    }

    /// Time for a dispersive phase `phi`: `t = φΔ / g²N`.
    pub fn time_for_phase(&self, phi: f64) -> Result<f64> {
        self.check_detuning()?;
        if self.g_eff == 0.0 {
            return Err(Error::Singularity("coupling g is zero".into()));
        }
        Ok(phi * self.delta / (self.g_eff * self.g_eff))
    }

    /// Cat generation time `t* = πΔ / 2g²N` (dispersive phase π/2).
    pub fn t_star(&self) -> Result<f64> {
        self.time_for_phase(PI / 2.0)
    }

    /// Compass step time `t″ = πΔ / 4g²N` (dispersive phase π/4).
    pub fn t_double_prime(&self) -> Result<f64> {
        self.time_for_phase(PI / 4.0)
    }

    fn check_detuning(&self) -> Result<()> {
        if self.delta == 0.0 {
            Err(Error::Singularity("two-photon detuning is zero".into()))
        } else {
            Ok(())
        }
    }
}

fn check_dim(dim: usize, max_dim: usize) -> Result<()> {
    if dim > max_dim {
        Err(Error::Resource { dim, max: max_dim })
    } else {
        Ok(())
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `H = Δ J_z - g (a† J_- + J_+ a)` on `Fock(photon_cutoff) ⊗ Spin(N)`.
pub fn full_hamiltonian(params: &ModelParams, photon_cutoff: usize) -> Result<Operator> {
    full_hamiltonian_capped(params, photon_cutoff, DEFAULT_MAX_DIM)
}

pub fn full_hamiltonian_capped(
    params: &ModelParams,
    photon_cutoff: usize,
    max_dim: usize,
) -> Result<Operator> {
    let n_atoms = params.n_atoms;
    let basis = Basis::new(vec![
        Subsystem::fock(photon_cutoff)?,
        Subsystem::spin(n_atoms)?,
    ])?;
    check_dim(basis.total_dim(), max_dim)?;
    let ds = n_atoms + 1;
    let idx = |n: usize, k: usize| n * ds + k;
    let half = n_atoms as f64 / 2.0;
    let mut entries = Vec::with_capacity(basis.total_dim() * 3);
    for n in 0..=photon_cutoff {
        for k in 0..=n_atoms {
            entries.push((idx(n, k), idx(n, k), re(params.delta * (k as f64 - half))));
        }
    }
    // a† J_- : |n, k⟩ -> √(n+1) √(k(N-k+1)) |n+1, k-1⟩
    for n in 0..photon_cutoff {
        for k in 1..=n_atoms {
            let amp = ((n + 1) as f64).sqrt() * ((k * (n_atoms - k + 1)) as f64).sqrt();
            let v = re(-params.g * amp);
            entries.push((idx(n + 1, k - 1), idx(n, k), v));
            entries.push((idx(n, k), idx(n + 1, k - 1), v));
        }
    }
    Ok(Operator::from_triplets(basis, entries).into_hermitian()?)
}

/// `H = Δ b†b + g√N (b† σ_- + σ_+ b)` on `Qubit(photon) ⊗ Fock(atom_cutoff)`.
pub fn jc_hamiltonian(params: &ModelParams, atom_cutoff: usize) -> Result<Operator> {
    jc_hamiltonian_capped(params, atom_cutoff, DEFAULT_MAX_DIM)
}

pub fn jc_hamiltonian_capped(
    params: &ModelParams,
    atom_cutoff: usize,
    max_dim: usize,
) -> Result<Operator> {
    let basis = Basis::new(vec![Subsystem::Qubit, Subsystem::fock(atom_cutoff)?])?;
    check_dim(basis.total_dim(), max_dim)?;
    let da = atom_cutoff + 1;
    let idx = |q: usize, k: usize| q * da + k;
    let mut entries = Vec::with_capacity(basis.total_dim() * 2);
    for q in 0..2 {
        for k in 0..=atom_cutoff {
            entries.push((idx(q, k), idx(q, k), re(params.delta * k as f64)));
        }
    }
    // b† σ_- : |1, k⟩ -> √(k+1) |0, k+1⟩
    for k in 0..atom_cutoff {
        let v = re(params.g_eff * ((k + 1) as f64).sqrt());
        entries.push((idx(0, k + 1), idx(1, k), v));
        entries.push((idx(1, k), idx(0, k + 1), v));
    }
    Ok(Operator::from_triplets(basis, entries).into_hermitian()?)
}

/// `H0 = Δ' b†b` on the condensate mode, identity on the photon qubit.
pub fn free_hamiltonian(delta_prime: f64, atom_cutoff: usize) -> Result<Operator> {
    let basis = Basis::new(vec![Subsystem::Qubit, Subsystem::fock(atom_cutoff)?])?;
    let diag: Vec<f64> = (0..2)
        .flat_map(|_| (0..=atom_cutoff).map(move |k| delta_prime * k as f64))
        .collect();
    Operator::diagonal(basis, &diag)
}

/// Conserved excitation number of the JC model, `b†b + |1⟩⟨1|`.
pub fn jc_excitation_op(atom_cutoff: usize) -> Result<Operator> {
    let basis = Basis::new(vec![Subsystem::Qubit, Subsystem::fock(atom_cutoff)?])?;
    let diag: Vec<f64> = (0..2)
        .flat_map(|q| (0..=atom_cutoff).map(move |k| (k + q) as f64))
        .collect();
    Operator::diagonal(basis, &diag)
}

/// Conserved quantity of the exact model, `a†a + J_z`.
pub fn full_excitation_op(photon_cutoff: usize, n_atoms: usize) -> Result<Operator> {
    let basis = Basis::new(vec![
        Subsystem::fock(photon_cutoff)?,
        Subsystem::spin(n_atoms)?,
    ])?;
    let half = n_atoms as f64 / 2.0;
    let diag: Vec<f64> = (0..=photon_cutoff)
        .flat_map(|n| (0..=n_atoms).map(move |k| n as f64 + k as f64 - half))
        .collect();
    Operator::diagonal(basis, &diag)
}

/// Approximate dispersive energies of the `n`-excitation JC doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveReport {
    pub n: usize,
    /// `4g²Nn/Δ²`.
    pub ratio: f64,
    /// `E_+ ≈ (n-1)Δ - g²Nn/Δ`, the level continuing `|1, n-1⟩`.
    pub e_plus: f64,
    /// `E_- ≈ nΔ + g²Nn/Δ`, the level continuing `|0, n⟩`.
    pub e_minus: f64,
    pub valid: bool,
}

pub fn dispersive_eigen(params: &ModelParams, n: usize) -> Result<DispersiveReport> {
    dispersive_eigen_with(params, n, DEFAULT_DISPERSIVE_THRESHOLD)
}

pub fn dispersive_eigen_with(
    params: &ModelParams,
    n: usize,
    threshold: f64,
) -> Result<DispersiveReport> {
    if n < 1 {
        return Err(Error::Domain("excitation number must be at least 1".into()));
    }
    if params.delta == 0.0 {
        return Err(Error::Singularity("two-photon detuning is zero".into()));
    }
    let nf = n as f64;
    let shift = params.g_eff * params.g_eff * nf / params.delta;
    let ratio = params.validity_ratio(nf);
    Ok(DispersiveReport {
        n,
        ratio,
        e_plus: (nf - 1.0) * params.delta - shift,
        e_minus: nf * params.delta + shift,
        valid: ratio < threshold,
    })
}

/// The `n`-excitation block of the JC Hamiltonian on
/// `{|1, n-1⟩, |0, n⟩}`.
pub fn jc_block(params: &ModelParams, n: usize) -> [[f64; 2]; 2] {
    let nf = n as f64;
    let c = params.g_eff * nf.sqrt();
    [[(nf - 1.0) * params.delta, c], [c, nf * params.delta]]
}

/// Exact eigenvalues `(E_+, E_-)` of [`jc_block`], labelled by continuity
/// with the bare states `|1, n-1⟩` and `|0, n⟩`.
pub fn exact_block_energies(params: &ModelParams, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mid = (nf - 0.5) * params.delta;
    let half = 0.5 * (params.delta * params.delta + 4.0 * params.g_eff * params.g_eff * nf).sqrt();
    if params.delta >= 0.0 {
        (mid - half, mid + half)
    } else {
        (mid + half, mid - half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn params(delta: f64, g: f64, n: usize) -> ModelParams {
        ModelParams::with_effective(delta, g, n).unwrap()
    }

    #[test]
    fn derive_params_formulas() {
        let p = derive_params(10.0, 3.0, 2.0, 4.0, 9).unwrap();
        assert_eq!(p.delta, 10.0 + 3.0 - 16.0 / 10.0);
        assert_eq!(p.g, 2.0 * 4.0 / 10.0);
        assert_eq!(p.g_eff, p.g * 3.0);
        assert!(matches!(
            derive_params(0.0, 1.0, 1.0, 1.0, 1),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn collective_coupling_reaches_100_khz() {
        // Ωc Ωrf / Δ1 = 2π·1 kHz
        let delta1 = TAU * 1e6;
        let omega_rf = TAU * 1e5;
        let omega_c = TAU * 1e3 * delta1 / omega_rf;
        let p = derive_params(delta1, TAU * 2e6, omega_c, omega_rf, 10_000).unwrap();
        assert_relative_eq!(p.g, TAU * 1e3, max_relative = 1e-12);
        assert_relative_eq!(p.g_eff, TAU * 1e5, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_and_scaling_limits() {
        let p = derive_params(5.0, 2.0, 3.0, 0.0, 4).unwrap();
        assert_eq!(p.g, 0.0);
        assert_eq!(p.delta, 7.0);
        let a = derive_params(5.0, 2.0, 3.0, 1.5, 4).unwrap();
        let b = derive_params(10.0, 2.0, 3.0, 1.5, 4).unwrap();
        assert_relative_eq!(b.g, a.g / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn with_effective_round_trips() {
        let p = params(TAU * 5.657e6, TAU * 1e3, 10_000);
        assert_relative_eq!(p.delta, TAU * 5.657e6, max_relative = 1e-14);
        assert_relative_eq!(p.g, TAU * 1e3, max_relative = 1e-15);
    }

    #[test]
    fn full_hamiltonian_decoupled_is_diagonal() {
        let p = params(1.3, 0.0, 3);
        let h = full_hamiltonian(&p, 2).unwrap();
        for (i, j, v) in h.triplets() {
            assert_eq!(i, j);
            let k = i % 4;
            assert_relative_eq!(v.re, 1.3 * (k as f64 - 1.5), max_relative = 1e-15);
        }
    }

    #[test]
    fn full_hamiltonian_two_level_block() {
        let (delta, g) = (0.7, 0.3);
        let h = full_hamiltonian(&params(delta, g, 1), 1)
            .unwrap()
            .to_dense();
        // basis |n, k⟩: 0=|0,0⟩ 1=|0,1⟩ 2=|1,0⟩ 3=|1,1⟩
        let expected = [
            [-delta / 2.0, 0.0, 0.0, 0.0],
            [0.0, delta / 2.0, -g, 0.0],
            [0.0, -g, -delta / 2.0, 0.0],
            [0.0, 0.0, 0.0, delta / 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((h[(i, j)] - C64::new(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn full_hamiltonian_conserves_excitations() {
        let p = params(2.0, 0.05, 30);
        let h = full_hamiltonian(&p, 4).unwrap();
        assert!(h.hermitian_deviation() <= 1e-12);
        let x = full_excitation_op(4, 30).unwrap();
        let c = h.commutator(&x).unwrap();
        assert!(c.max_abs() <= 1e-10 * h.max_abs());
    }

    #[test]
    fn jc_hamiltonian_structure() {
        let p = params(1.1, 0.02, 100);
        let h = jc_hamiltonian(&p, 20).unwrap();
        assert!(h.hermitian_deviation() <= 1e-12);
        let x = jc_excitation_op(20).unwrap();
        assert!(h.commutator(&x).unwrap().max_abs() <= 1e-10 * h.max_abs());
        // block at n: |1, n-1⟩ = 21 + n - 1, |0, n⟩ = n
        let n = 5;
        let off = h.get(n, 21 + n - 1);
        assert_relative_eq!(off.re, p.g_eff * (n as f64).sqrt(), max_relative = 1e-14);
        let block = jc_block(&p, n);
        assert_relative_eq!(h.get(21 + n - 1, 21 + n - 1).re, block[0][0]);
        assert_relative_eq!(h.get(n, n).re, block[1][1]);
    }

    #[test]
    fn jc_decoupled_spectrum_doubly_degenerate() {
        let h = jc_hamiltonian(&params(0.9, 0.0, 10), 6).unwrap();
        let mut diag: Vec<f64> = (0..h.dim()).map(|i| h.get(i, i).re).collect();
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for n in 0..=6 {
            assert_relative_eq!(diag[2 * n], 0.9 * n as f64);
            assert_relative_eq!(diag[2 * n + 1], 0.9 * n as f64);
        }
    }

    #[test]
    fn free_hamiltonian_diagonal() {
        let h = free_hamiltonian(0.0, 5).unwrap();
        assert_eq!(h.max_abs(), 0.0);
        let h = free_hamiltonian(1.7, 5).unwrap();
        assert_relative_eq!(h.get(3, 3).re, 3.0 * 1.7);
        assert_relative_eq!(h.get(6 + 3, 6 + 3).re, 3.0 * 1.7);
    }

    #[test]
    fn dispersive_energies_at_n_one() {
        let p = params(50.0, 0.1, 100);
        let r = dispersive_eigen(&p, 1).unwrap();
        let shift = p.g_eff * p.g_eff / p.delta;
        assert_relative_eq!(r.e_plus, -shift);
        assert_relative_eq!(r.e_minus, p.delta + shift);
        let free = dispersive_eigen(&params(50.0, 0.0, 100), 3).unwrap();
        assert_eq!((free.e_plus, free.e_minus, free.ratio), (100.0, 150.0, 0.0));
        assert!(free.valid);
        let zero = ModelParams { delta: 0.0, ..p };
        assert!(matches!(
            dispersive_eigen(&zero, 1),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn exact_block_energies_match_numerical_diagonalization() {
        let p = params(3.0, 0.4, 9);
        for n in 1..6 {
            let b = jc_block(&p, n);
            let m = nalgebra::Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]);
            let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().cloned().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (ep, em) = exact_block_energies(&p, n);
            assert_relative_eq!(ep, ev[0], max_relative = 1e-12);
            assert_relative_eq!(em, ev[1], max_relative = 1e-12);
        }
    }

    #[test]
    fn dimension_guard() {
        let p = params(1.0, 0.1, 1000);
        assert!(matches!(
            full_hamiltonian_capped(&p, 4, 1000),
            Err(Error::Resource { .. })
        ));
    }
}
