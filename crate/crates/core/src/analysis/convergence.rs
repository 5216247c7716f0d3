//! Model-vs-model convergence tables.

use nalgebra::{DVector, Matrix2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Propagator;
use crate::hamiltonians::{
    dispersive_eigen, full_hamiltonian_capped, jc_block, jc_hamiltonian_capped, ModelParams,
    DEFAULT_MAX_DIM,
};
use crate::hilbert::{
    atomic_coherent_state, coherent_state, default_cutoff, photon_plus, photon_plus_fock, tensor,
    Basis, StateVector, Subsystem,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpOptions {
    /// Photon Fock cutoff of the exact model.
    pub photon_cutoff: usize,
    /// Condensate cutoff of the JC model; `None` applies the default rule.
    pub atom_cutoff: Option<usize>,
    /// Keep `g√N` fixed across the atom numbers (otherwise keep `g`).
    pub fixed_collective_coupling: bool,
    /// Compare against JC with the coupling sign of the exact model.
    pub match_coupling_sign: bool,
    pub max_dim: usize,
}

impl Default for HpOptions {
    fn default() -> Self {
        HpOptions {
            photon_cutoff: 4,
            atom_cutoff: None,
            fixed_collective_coupling: true,
            match_coupling_sign: true,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// One row of [`hp_convergence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpRow {
    pub n_atoms: usize,
    /// `|eta|²/N`.
    pub excitation_fraction: f64,
    pub fidelity: f64,
    pub infidelity: f64,
    /// Exact-model population in the top photon levels at the end.
    pub photon_leakage: f64,
}

/// Exact collective-spin model against its bosonized JC image.
///
/// For each `N`, `(|0⟩+|1⟩)/√2 ⊗ |eta⟩_spin` evolves under the exact model
/// and `(|0⟩+|1⟩)/√2 ⊗ |eta⟩` under JC for time `t`; the Dicke index is
/// mapped onto the Fock index and photon levels above 1 are dropped.
pub fn hp_convergence(
    n_list: &[usize],
    eta: C64,
    params: &ModelParams,
    t: f64,
) -> Result<Vec<HpRow>> {
    hp_convergence_with(n_list, eta, params, t, &HpOptions::default())
}

pub fn hp_convergence_with(
    n_list: &[usize],
    eta: C64,
    params: &ModelParams,
    t: f64,
    opts: &HpOptions,
) -> Result<Vec<HpRow>> {
    let excitation = eta.norm_sqr();
    let n_min = *n_list
        .iter()
        .min()
        .ok_or_else(|| Error::Domain("empty atom-number list".into()))?;
    if n_min == 0 || excitation / n_min as f64 > 0.5 {
        return Err(Error::Domain(format!(
            "|eta|²/N = {} exceeds 0.5 at N = {n_min}",
            excitation / n_min.max(1) as f64
        )));
    }
    let atom_cutoff = opts
        .atom_cutoff
        .unwrap_or_else(|| default_cutoff(eta.norm()));
    n_list
        .par_iter()
        .map(|&n| hp_row(n, eta, params, t, atom_cutoff, opts))
        .collect()
}

fn hp_row(
    n_atoms: usize,
    eta: C64,
    params: &ModelParams,
    t: f64,
    atom_cutoff: usize,
    opts: &HpOptions,
) -> Result<HpRow> {
    let p = if opts.fixed_collective_coupling {
        params.rescaled_atoms(n_atoms)?
    } else {
        ModelParams::with_effective(params.delta, params.g, n_atoms)?
    };
    // exact model
    let h_full = full_hamiltonian_capped(&p, opts.photon_cutoff, opts.max_dim)?;
    let psi_full = tensor(
        &photon_plus_fock(opts.photon_cutoff)?,
        &atomic_coherent_state(n_atoms, eta)?,
    );
    let out_full = Propagator::new(&h_full)?.evolve_unchecked(&psi_full, t)?;
    let photon_leakage = out_full.max_leakage().max(0.0);

    // JC image; the exact model couples with -g
    let p_jc = if opts.match_coupling_sign {
        ModelParams::with_effective(p.delta, -p.g, n_atoms)?
    } else {
        p
    };
    let h_jc = jc_hamiltonian_capped(&p_jc, atom_cutoff, opts.max_dim)?;
    let psi_jc = tensor(&photon_plus(), &coherent_state(eta, atom_cutoff)?);
    let out_jc = Propagator::new(&h_jc)?.evolve_unchecked(&psi_jc, t)?;

    let embedded = embed_spin_state(&out_full, atom_cutoff)?;
    let fidelity = out_jc.inner(&embedded)?.norm_sqr().clamp(0.0, 1.0);
    Ok(HpRow {
        n_atoms,
        excitation_fraction: eta.norm_sqr() / n_atoms as f64,
        fidelity,
        infidelity: 1.0 - fidelity,
        photon_leakage,
    })
}

/// `Fock(photon) ⊗ Spin(N)` → `Qubit ⊗ Fock(atom_cutoff)`, mapping Dicke
/// index `k` to Fock level `k`. Photon levels above 1 and Dicke levels
/// above the cutoff are dropped, so the result may have norm below one.
fn embed_spin_state(psi: &StateVector, atom_cutoff: usize) -> Result<StateVector> {
    let (n_atoms, photon_dim) = match psi.basis().factors() {
        [Subsystem::Fock { cutoff }, Subsystem::Spin { n_atoms }] => (*n_atoms, cutoff + 1),
        _ => {
            return Err(Error::Type(
                "expected a Fock(photon) ⊗ Spin(N) state".into(),
            ))
        }
    };
    let basis = Basis::new(vec![Subsystem::Qubit, Subsystem::fock(atom_cutoff)?])?;
    let mut amps = DVector::zeros(basis.total_dim());
    let src = psi.amplitudes();
    for q in 0..photon_dim.min(2) {
        for k in 0..=n_atoms.min(atom_cutoff) {
            amps[q * (atom_cutoff + 1) + k] = src[q * (n_atoms + 1) + k];
        }
    }
    StateVector::from_amplitudes(basis, amps)
}

/// Exact vs approximate dispersive energies of one JC doublet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveErrorRow {
    pub ratio: f64,
    pub g_eff: f64,
    pub exact_plus: f64,
    pub exact_minus: f64,
    pub approx_plus: f64,
    pub approx_minus: f64,
    /// `max |exact - approx|` over the doublet.
    pub error: f64,
    /// `4g⁴N²n²/|Δ|³`.
    pub bound: f64,
}

/// Sweeps the validity ratio at fixed `Δ` by varying `g√N`, diagonalizing
/// the `n`-excitation JC block numerically at each point.
pub fn dispersive_error_table(
    delta: f64,
    n_atoms: usize,
    n: usize,
    ratios: &[f64],
) -> Result<Vec<DispersiveErrorRow>> {
    if n == 0 {
        return Err(Error::Domain("excitation number must be at least 1".into()));
    }
    ratios
        .iter()
        .map(|&ratio| {
            if !(ratio > 0.0) {
                return Err(Error::Domain(format!(
                    "ratio must be positive, got {ratio}"
                )));
            }
            let g_eff = delta.abs() * (ratio / (4.0 * n as f64)).sqrt();
            let p = ModelParams::with_effective(delta, g_eff / (n_atoms as f64).sqrt(), n_atoms)?;
            let b = jc_block(&p, n);
            let eig = Matrix2::new(b[0][0], b[0][1], b[1][0], b[1][1]).symmetric_eigen();
            // label by overlap with the bare state |1, n-1⟩
            let v = eig.eigenvectors;
            let (ip, im) = if v[(0, 0)].abs() >= v[(0, 1)].abs() {
                (0, 1)
            } else {
                (1, 0)
            };
            let report = dispersive_eigen(&p, n)?;
            let (exact_plus, exact_minus) = (eig.eigenvalues[ip], eig.eigenvalues[im]);
            let g2n = p.g_eff * p.g_eff;
            Ok(DispersiveErrorRow {
                ratio: report.ratio,
                g_eff: p.g_eff,
                exact_plus,
                exact_minus,
                approx_plus: report.e_plus,
                approx_minus: report.e_minus,
                error: (exact_plus - report.e_plus)
                    .abs()
                    .max((exact_minus - report.e_minus).abs()),
                bound: 4.0 * g2n * g2n * (n * n) as f64 / delta.abs().powi(3),
            })
        })
        .collect()
}
