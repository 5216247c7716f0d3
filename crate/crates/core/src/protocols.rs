//! Measurement-assisted protocols: cat generation, phase-amplified
//! detection and compass-state production.
//!
//! Pipelines run on `Qubit(photon) ⊗ Fock(condensate)`; the photon is
//! always factor 0. Photon label 1 is the one-photon state.
//!
//! JC evolution for a time `τ` leaves the one-photon branch with an extra
//! dispersive phase `e^{iφ}`, `φ = g²Nτ/Δ`. The analytic states are
//! written in the frame where that photon phase is removed, so every JC
//! step here is followed by the photon-only rotation `|1⟩ → e^{-iφ}|1⟩`
//! (see [`photon_frame_correction`]). It can be switched off through
//! [`ProtocolOptions::frame_correction`].

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{Propagator, PropagatorOptions};
use crate::hamiltonians::{
    free_hamiltonian, jc_hamiltonian_capped, ModelParams, DEFAULT_DISPERSIVE_THRESHOLD,
    DEFAULT_MAX_DIM,
};
use crate::hilbert::{
    coherent_amplitudes, coherent_state, default_cutoff, photon_plus, tensor, Basis, StateVector,
    Subsystem,
};

/// Below this a post-selection probability counts as impossible.
pub const POST_SELECTION_FLOOR: f64 = 1e-12;

/// Allowed photon population outside `{|0⟩, |1⟩}` for [`u_pi2`].
pub const QUBIT_SUBSPACE_TOLERANCE: f64 = 1e-10;

/// Photon label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Photon {
    Zero,
    One,
}

impl Photon {
    pub fn level(self) -> usize {
        match self {
            Photon::Zero => 0,
            Photon::One => 1,
        }
    }

    pub fn flipped(self) -> Photon {
        match self {
            Photon::Zero => Photon::One,
            Photon::One => Photon::Zero,
        }
    }
}

/// Cat or compass branch label, 1 (minus) or 2 (plus).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    One,
    Two,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::One, Branch::Two];

    /// `-1` for branch 1, `+1` for branch 2.
    pub fn sign(self) -> f64 {
        match self {
            Branch::One => -1.0,
            Branch::Two => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Branch::One => 0,
            Branch::Two => 1,
        }
    }

    /// Photon outcome that heralds this cat branch after `U_{π/2}`.
    pub fn heralding_photon(self) -> Photon {
        match self {
            Branch::One => Photon::One,
            Branch::Two => Photon::Zero,
        }
    }

    pub fn from_number(b: u8) -> Result<Branch> {
        match b {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            _ => Err(Error::Domain(format!("branch must be 1 or 2, got {b}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolOptions {
    /// Condensate Fock cutoff; `None` applies the default cutoff rule.
    pub atom_cutoff: Option<usize>,
    /// Bound on the validity ratio `4g²Nn/Δ²` before a warning is raised.
    pub dispersive_threshold: f64,
    pub propagator: PropagatorOptions,
    /// Remove the one-photon dispersive phase after each JC step.
    pub frame_correction: bool,
    pub max_dim: usize,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            atom_cutoff: None,
            dispersive_threshold: DEFAULT_DISPERSIVE_THRESHOLD,
            propagator: PropagatorOptions::default(),
            frame_correction: true,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl ProtocolOptions {
    fn cutoff_for(&self, alpha: C64) -> usize {
        self.atom_cutoff
            .unwrap_or_else(|| default_cutoff(alpha.norm()))
    }

    fn check_validity(&self, params: &ModelParams, alpha: C64, warnings: &mut Vec<String>) {
        let n = alpha.norm_sqr();
        if n == 0.0 {
            return;
        }
        let ratio = params.validity_ratio(n);
        if !(ratio < self.dispersive_threshold) {
            let msg = format!(
                "dispersive validity ratio {ratio:.4e} at n = {n:.3} exceeds threshold {:.4e}",
                self.dispersive_threshold
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
}

fn photon_stride(psi: &StateVector) -> Result<usize> {
    let f = psi
        .basis()
        .factor(0)
        .ok_or_else(|| Error::Type("state has no factors".into()))?;
    match f {
        Subsystem::Qubit | Subsystem::Fock { .. } => {}
        Subsystem::Spin { .. } => {
            return Err(Error::Type(
                "factor 0 is a collective spin, not a photon".into(),
            ))
        }
    }
    Ok(psi.basis().stride(0))
}

/// `U_{π/2}` on the photon factor: `|1⟩ → (|1⟩+|0⟩)/√2`,
/// `|0⟩ → (|0⟩-|1⟩)/√2`.
///
/// A Fock photon is accepted if its population above `|1⟩` is negligible.
pub fn u_pi2(psi: &StateVector) -> Result<StateVector> {
    let stride = photon_stride(psi)?;
    let amps = psi.amplitudes();
    let outside: f64 = amps.iter().skip(2 * stride).map(|a| a.norm_sqr()).sum();
    if outside > QUBIT_SUBSPACE_TOLERANCE {
        return Err(Error::ContractViolation(format!(
            "photon population {outside:.3e} outside {{|0⟩, |1⟩}}"
        )));
    }
    let mut out = DVector::zeros(amps.len());
    for r in 0..stride {
        let (c0, c1) = (amps[r], amps[stride + r]);
        out[r] = (c0 + c1) * FRAC_1_SQRT_2;
        out[stride + r] = (c1 - c0) * FRAC_1_SQRT_2;
    }
    StateVector::from_amplitudes(psi.basis().clone(), out)
}

/// `|1⟩ → e^{-iφ}|1⟩` on the photon factor.
pub fn photon_frame_correction(psi: &StateVector, phi: f64) -> Result<StateVector> {
    let stride = photon_stride(psi)?;
    let mut amps = psi.amplitudes().clone();
    let phase = C64::from_polar(1.0, -phi);
    for a in amps.rows_mut(stride, stride).iter_mut() {
        *a *= phase;
    }
    StateVector::from_amplitudes(psi.basis().clone(), amps)
}

/// Post-selected photon measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub outcome: Photon,
    pub probability: f64,
    /// Remaining factors, renormalized.
    pub collapsed: StateVector,
}

/// Projects the photon (factor 0) onto `outcome` and renormalizes the rest.
pub fn measure_photon(psi: &StateVector, outcome: Photon) -> Result<MeasurementOutcome> {
    photon_stride(psi)?;
    let part = psi.slice(0, outcome.level())?;
    let probability = part.norm_squared() / psi.norm_squared();
    if !(probability >= POST_SELECTION_FLOOR) {
        return Err(Error::PostSelectionImpossible {
            outcome: outcome.level() as u8,
            probability,
        });
    }
    Ok(MeasurementOutcome {
        outcome,
        probability,
        collapsed: part.normalized()?,
    })
}

/// Probability of photon outcome `outcome`, without collapsing.
pub fn photon_probability(psi: &StateVector, outcome: Photon) -> Result<f64> {
    photon_stride(psi)?;
    Ok(psi.slice(0, outcome.level())?.norm_squared() / psi.norm_squared())
}

/// `Ñ²` for a cat branch: `2 ∓ 2 e^{-|α̃|²(1-cos2φ)} cos(|α̃|² sin2φ)`.
pub fn cat_norm_squared(alpha_tilde: C64, phi: f64, branch: Branch) -> f64 {
    let m = alpha_tilde.norm_sqr();
    let overlap = (-m * (1.0 - (2.0 * phi).cos())).exp() * (m * (2.0 * phi).sin()).cos();
    2.0 + 2.0 * branch.sign() * overlap
}

fn superpose(cutoff: usize, terms: &[(f64, C64)]) -> Result<StateVector> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    let mut amps = DVector::<C64>::zeros(cutoff + 1);
    for &(w, beta) in terms {
        amps += coherent_amplitudes(beta, cutoff) * C64::new(w, 0.0);
    }
    Ok(StateVector::from_parts(basis, amps))
}

/// `(|α̃e^{iφ}⟩ ∓ |α̃e^{-iφ}⟩)/Ñ` at the default cutoff for `|α̃|`.
pub fn analytic_cat(alpha_tilde: C64, phi: f64, branch: Branch) -> Result<StateVector> {
    analytic_cat_with_cutoff(alpha_tilde, phi, branch, default_cutoff(alpha_tilde.norm()))
}

pub fn analytic_cat_with_cutoff(
    alpha_tilde: C64,
    phi: f64,
    branch: Branch,
    cutoff: usize,
) -> Result<StateVector> {
    let norm2 = cat_norm_squared(alpha_tilde, phi, branch);
    if !(norm2 > POST_SELECTION_FLOOR) {
        return Err(Error::DegenerateBranch { norm2 });
    }
    let rot = C64::from_polar(1.0, phi);
    superpose(
        cutoff,
        &[
            (1.0, alpha_tilde * rot),
            (branch.sign(), alpha_tilde * rot.conj()),
        ],
    )?
    .normalized()
}

/// Exactly normalized four-component compass
/// `|α*e^{iπ/4}⟩ ∓ |α*e^{-iπ/4}⟩ + |α*e^{3iπ/4}⟩ ∓ |α*e^{-3iπ/4}⟩`.
pub fn analytic_compass(alpha_star: C64, branch: Branch) -> Result<StateVector> {
    analytic_compass_with_cutoff(alpha_star, branch, default_cutoff(alpha_star.norm()))
}

pub fn analytic_compass_with_cutoff(
    alpha_star: C64,
    branch: Branch,
    cutoff: usize,
) -> Result<StateVector> {
    let s = branch.sign();
    let at = |theta: f64| alpha_star * C64::from_polar(1.0, theta);
    let raw = superpose(
        cutoff,
        &[
            (1.0, at(FRAC_PI_4)),
            (s, at(-FRAC_PI_4)),
            (1.0, at(3.0 * FRAC_PI_4)),
            (s, at(-3.0 * FRAC_PI_4)),
        ],
    )?;
    let norm2 = raw.norm_squared();
    if !(norm2 > POST_SELECTION_FLOOR) {
        return Err(Error::DegenerateBranch { norm2 });
    }
    raw.normalized()
}

/// JC evolution for `tau` plus the optional photon-frame correction.
fn jc_step(
    params: &ModelParams,
    psi: &StateVector,
    tau: f64,
    cutoff: usize,
    opts: &ProtocolOptions,
) -> Result<(StateVector, StateVector)> {
    let h = jc_hamiltonian_capped(params, cutoff, opts.max_dim)?;
    let evolved = Propagator::with_options(&h, opts.propagator)?.evolve(psi, tau)?;
    let corrected = if opts.frame_correction && tau != 0.0 {
        photon_frame_correction(&evolved, params.dispersive_phase(tau)?)?
    } else {
        evolved.clone()
    };
    Ok((evolved, corrected))
}

/// Output of [`cat_protocol`].
#[derive(Debug, Clone)]
pub struct CatResult {
    /// Post-selected condensate states `[Ψ̃₁, Ψ̃₂]`; `None` where the
    /// heralding outcome has zero probability.
    pub branches: [Option<StateVector>; 2],
    /// Probabilities of the heralding outcomes for `[Ψ̃₁, Ψ̃₂]`.
    pub probabilities: [f64; 2],
    /// `φ = g²N t*/Δ`.
    pub phi: f64,
    /// `α̃ = α e^{-iΔt*}`.
    pub alpha_tilde: C64,
    pub t_star: f64,
    pub atom_cutoff: usize,
    /// Validity ratio `4g²Nn/Δ²` at `n = |α|²`.
    pub validity_ratio: f64,
    /// Joint state right after the JC segment, before any correction.
    pub evolved: StateVector,
    /// Joint state after the frame correction and `U_{π/2}`.
    pub rotated: StateVector,
    pub warnings: Vec<String>,
}

impl CatResult {
    pub fn branch(&self, b: Branch) -> Result<&StateVector> {
        self.branches[b.index()]
            .as_ref()
            .ok_or(Error::PostSelectionImpossible {
                outcome: b.heralding_photon().level() as u8,
                probability: self.probabilities[b.index()],
            })
    }

    pub fn analytic(&self, b: Branch) -> Result<StateVector> {
        analytic_cat_with_cutoff(self.alpha_tilde, self.phi, b, self.atom_cutoff)
    }
}

/// Initial product state `(|0⟩+|1⟩)/√2 ⊗ |α⟩`.
pub fn cat_initial_state(alpha: C64, atom_cutoff: usize) -> Result<StateVector> {
    Ok(tensor(&photon_plus(), &coherent_state(alpha, atom_cutoff)?))
}

/// Cat generation: JC for `t_star`, `U_{π/2}`, both photon measurements.
pub fn cat_protocol(params: &ModelParams, alpha: C64, t_star: f64) -> Result<CatResult> {
    cat_protocol_with(params, alpha, t_star, &ProtocolOptions::default())
}

pub fn cat_protocol_with(
    params: &ModelParams,
    alpha: C64,
    t_star: f64,
    opts: &ProtocolOptions,
) -> Result<CatResult> {
    let mut warnings = Vec::new();
    opts.check_validity(params, alpha, &mut warnings);
    let cutoff = opts.cutoff_for(alpha);
    let initial = cat_initial_state(alpha, cutoff)?;
    let (evolved, corrected) = jc_step(params, &initial, t_star, cutoff, opts)?;
    let rotated = u_pi2(&corrected)?;
    let mut branches = [None, None];
    let mut probabilities = [0.0; 2];
    for b in Branch::BOTH {
        let photon = b.heralding_photon();
        match measure_photon(&rotated, photon) {
            Ok(m) => {
                probabilities[b.index()] = m.probability;
                branches[b.index()] = Some(m.collapsed);
            }
            Err(Error::PostSelectionImpossible { probability, .. }) => {
                probabilities[b.index()] = probability.max(0.0);
                let msg = format!(
                    "cat branch {} unavailable: photon |{}⟩ has probability {probability:.3e}",
                    b.index() + 1,
                    photon.level()
                );
                log::warn!("{msg}");
                warnings.push(msg);
            }
            Err(e) => return Err(e),
        }
    }
    let phi = if params.delta == 0.0 {
        0.0
    } else {
        params.dispersive_phase(t_star)?
    };
    Ok(CatResult {
        branches,
        probabilities,
        phi,
        alpha_tilde: alpha * C64::from_polar(1.0, -params.delta * t_star),
        t_star,
        atom_cutoff: cutoff,
        validity_ratio: params.validity_ratio(alpha.norm_sqr()),
        evolved,
        rotated,
        warnings,
    })
}

/// How the second JC segment of the detection protocol is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Undo {
    /// JC switched on again for `t' = πΔ/2g²N`.
    Forward,
    /// The exact inverse of the preparation segment, `e^{+iH t*}`.
    Inverse,
}

/// Output of [`detection_protocol`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectionResult {
    pub delta_t: f64,
    /// Simulated probability of the one-photon outcome.
    pub p1: f64,
    /// `[1 - cos(2|α̃'|²Δ'δt)]/2`.
    pub p1_analytic: f64,
    pub t_prime: f64,
    pub alpha_tilde_prime: C64,
}

/// Closed-form one-photon probability `[1 - cos(2|α̃'|²Δ'δt)]/2`.
pub fn detection_p1_analytic(alpha_tilde_prime: C64, delta_prime: f64, delta_t: f64) -> f64 {
    0.5 * (1.0 - (2.0 * alpha_tilde_prime.norm_sqr() * delta_prime * delta_t).cos())
}

/// Phase-amplified detection, returning `P₁`.
pub fn detection_protocol(
    params: &ModelParams,
    alpha: C64,
    delta_prime: f64,
    delta_t: f64,
) -> Result<f64> {
    Ok(detection_protocol_with(
        params,
        alpha,
        delta_prime,
        delta_t,
        Undo::Forward,
        &ProtocolOptions::default(),
    )?
    .p1)
}

/// Cat (φ = π/2) → `H₀ = Δ'b†b` for `δt` → JC for `t'` (or the inverse of
/// the preparation) → `U_{π/2}` → probability of photon `|1⟩`.
pub fn detection_protocol_with(
    params: &ModelParams,
    alpha: C64,
    delta_prime: f64,
    delta_t: f64,
    undo: Undo,
    opts: &ProtocolOptions,
) -> Result<DetectionResult> {
    Ok(detection_sweep(params, alpha, delta_prime, &[delta_t], undo, opts)?[0])
}

/// [`detection_protocol_with`] at several `δt`, sharing the preparation.
pub fn detection_sweep(
    params: &ModelParams,
    alpha: C64,
    delta_prime: f64,
    delta_ts: &[f64],
    undo: Undo,
    opts: &ProtocolOptions,
) -> Result<Vec<DetectionResult>> {
    if let Some(bad) = delta_ts.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Domain(format!(
            "delta_t must be non-negative, got {bad}"
        )));
    }
    let mut warnings = Vec::new();
    opts.check_validity(params, alpha, &mut warnings);
    let cutoff = opts.cutoff_for(alpha);
    let t_star = params.t_star()?;
    let h_jc = jc_hamiltonian_capped(params, cutoff, opts.max_dim)?;
    let jc = Propagator::with_options(&h_jc, opts.propagator)?;
    let free = Propagator::with_options(&free_hamiltonian(delta_prime, cutoff)?, opts.propagator)?;
    let frame = |psi: StateVector, tau: f64| -> Result<StateVector> {
        if opts.frame_correction {
            photon_frame_correction(&psi, params.dispersive_phase(tau)?)
        } else {
            Ok(psi)
        }
    };
    let initial = cat_initial_state(alpha, cutoff)?;
    let cat = frame(jc.evolve(&initial, t_star)?, t_star)?;
    let t_prime = match undo {
        Undo::Forward => t_star,
        Undo::Inverse => -t_star,
    };
    let alpha_tilde_prime = alpha * C64::from_polar(1.0, -params.delta * (t_star + t_prime));
    delta_ts
        .iter()
        .map(|&dt| {
            let rotated = free.evolve(&cat, dt)?;
            let undone = match undo {
                Undo::Forward => frame(jc.evolve(&rotated, t_prime)?, t_prime)?,
                // inverse of frame ∘ JC(t*)
                Undo::Inverse => jc.evolve(&frame(rotated, -t_star)?, -t_star)?,
            };
            let p1 = photon_probability(&u_pi2(&undone)?, Photon::One)?;
            Ok(DetectionResult {
                delta_t: dt,
                p1,
                p1_analytic: detection_p1_analytic(alpha_tilde_prime, delta_prime, dt),
                t_prime,
                alpha_tilde_prime,
            })
        })
        .collect()
}

/// `δt` grid covering `periods` oscillations of the closed-form `P₁`, with
/// `per_period` samples per period.
pub fn detection_grid(
    alpha: C64,
    delta_prime: f64,
    periods: f64,
    per_period: usize,
) -> Result<Vec<f64>> {
    let omega = 2.0 * alpha.norm_sqr() * delta_prime;
    if !(omega.abs() > 0.0) || per_period == 0 || !(periods > 0.0) {
        return Err(Error::Domain(
            "detection grid needs nonzero |α|²Δ', periods and samples".into(),
        ));
    }
    let period = 2.0 * PI / omega.abs();
    let n = (periods * per_period as f64).round() as usize;
    Ok((0..=n)
        .map(|k| period * periods * k as f64 / n as f64)
        .collect())
}

/// Output of [`compass_protocol`].
#[derive(Debug, Clone)]
pub struct CompassResult {
    /// `[Ψ'₁, Ψ'₂]`: branch `b` is the photon-`|0⟩` outcome seeded by cat
    /// branch `b`.
    pub branches: [StateVector; 2],
    /// All four outcomes, indexed `[seed branch][photon level]`.
    pub outcomes: [[Option<MeasurementOutcome>; 2]; 2],
    /// `α* = α̃ e^{-iΔt″}`.
    pub alpha_star: C64,
    pub t_double_prime: f64,
    pub cat: CatResult,
    pub warnings: Vec<String>,
}

impl CompassResult {
    pub fn analytic(&self, b: Branch) -> Result<StateVector> {
        analytic_compass_with_cutoff(self.alpha_star, b, self.cat.atom_cutoff)
    }
}

/// Returns the two compass branches `[Ψ'₁, Ψ'₂]`.
pub fn compass_protocol(params: &ModelParams, alpha: C64) -> Result<[StateVector; 2]> {
    Ok(compass_protocol_with(params, alpha, &ProtocolOptions::default())?.branches)
}

/// Cat branch (φ = π/2) ⊗ fresh `(|0⟩+|1⟩)/√2` photon → JC for
/// `t″ = πΔ/4g²N` → `U_{π/2}` → both photon measurements, for both seeds.
pub fn compass_protocol_with(
    params: &ModelParams,
    alpha: C64,
    opts: &ProtocolOptions,
) -> Result<CompassResult> {
    let t_star = params.t_star()?;
    let cat = cat_protocol_with(params, alpha, t_star, opts)?;
    let mut warnings = cat.warnings.clone();
    let t2 = params.t_double_prime()?;
    let mut outcomes: [[Option<MeasurementOutcome>; 2]; 2] = Default::default();
    for seed in Branch::BOTH {
        let joint = tensor(&photon_plus(), cat.branch(seed)?);
        let (_, corrected) = jc_step(params, &joint, t2, cat.atom_cutoff, opts)?;
        let rotated = u_pi2(&corrected)?;
        for photon in [Photon::Zero, Photon::One] {
            match measure_photon(&rotated, photon) {
                Ok(m) => outcomes[seed.index()][photon.level()] = Some(m),
                Err(Error::PostSelectionImpossible { probability, .. }) => warnings.push(format!(
                    "compass seed {} photon |{}⟩ unavailable (p = {probability:.3e})",
                    seed.index() + 1,
                    photon.level()
                )),
                Err(e) => return Err(e),
            }
        }
    }
    let pick = |seed: Branch| -> Result<StateVector> {
        outcomes[seed.index()][0]
            .as_ref()
            .map(|m| m.collapsed.clone())
            .ok_or(Error::PostSelectionImpossible {
                outcome: 0,
                probability: 0.0,
            })
    };
    let branches = [pick(Branch::One)?, pick(Branch::Two)?];
    Ok(CompassResult {
        branches,
        outcomes,
        alpha_star: cat.alpha_tilde * C64::from_polar(1.0, -params.delta * t2),
        t_double_prime: t2,
        cat,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{propagate_schedule, Segment};
    use crate::hamiltonians::jc_hamiltonian;
    use crate::hilbert::qubit_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fid(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).unwrap().norm_sqr()
    }

    fn params_at(ratio: f64, alpha: f64) -> ModelParams {
        ModelParams::for_dispersive_ratio(2.0 * PI * 1e5, 10_000, alpha * alpha, ratio).unwrap()
    }

    #[test]
    fn u_pi2_maps_as_stated() {
        let atoms = coherent_state(c(1.0, 0.0), 20).unwrap();
        let one = tensor(&qubit_state(c(0.0, 0.0), c(1.0, 0.0)).unwrap(), &atoms);
        let out = u_pi2(&one).unwrap();
        assert_abs_diff_eq!(
            fid(&out, &tensor(&photon_plus(), &atoms)),
            1.0,
            epsilon = 1e-14
        );
        let twice = u_pi2(&out).unwrap();
        let zero = tensor(&qubit_state(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), &atoms);
        assert!((twice.amplitudes() - zero.amplitudes()).norm() < 1e-14);
    }

    #[test]
    fn u_pi2_rejects_multi_photon_population() {
        let psi =
            StateVector::basis_state(Basis::single(Subsystem::Fock { cutoff: 3 }), 2).unwrap();
        assert!(matches!(u_pi2(&psi), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn measurement_of_initial_state() {
        let alpha = c(2.0, 0.0);
        let psi = cat_initial_state(alpha, 40).unwrap();
        let m = measure_photon(&psi, Photon::One).unwrap();
        assert_abs_diff_eq!(m.probability, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(
            fid(&m.collapsed, &coherent_state(alpha, 40).unwrap()),
            1.0,
            epsilon = 1e-12
        );
        let vac = tensor(
            &qubit_state(c(1.0, 0.0), c(0.0, 0.0)).unwrap(),
            &coherent_state(alpha, 40).unwrap(),
        );
        assert!(matches!(
            measure_photon(&vac, Photon::One),
            Err(Error::PostSelectionImpossible { outcome: 1, .. })
        ));
    }

    #[test]
    fn cat_norm_formula() {
        let n1 = cat_norm_squared(c(2.0, 0.0), FRAC_PI_2, Branch::One);
        assert!((n1 - (2.0 - 2.0 * (-8.0f64).exp())).abs() < 1e-12);
        assert_eq!(cat_norm_squared(c(2.0, 0.0), 0.0, Branch::Two), 4.0);
    }

    #[test]
    fn analytic_cat_limits() {
        let a = c(2.0, 0.0);
        let plus = analytic_cat(a, 0.0, Branch::Two).unwrap();
        assert_abs_diff_eq!(
            fid(&plus, &coherent_state_auto_fixed(a)),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            analytic_cat(a, 0.0, Branch::One),
            Err(Error::DegenerateBranch { .. })
        ));
        assert_abs_diff_eq!(
            analytic_cat(a, 1.0, Branch::One).unwrap().norm(),
            1.0,
            epsilon = 1e-12
        );
    }

    fn coherent_state_auto_fixed(a: C64) -> StateVector {
        coherent_state(a, default_cutoff(a.norm())).unwrap()
    }

    #[test]
    fn analytic_compass_limits() {
        assert!(matches!(
            analytic_compass(c(0.0, 0.0), Branch::One),
            Err(Error::DegenerateBranch { .. })
        ));
        let s = analytic_compass(c(2.5, 0.0), Branch::Two).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cat_protocol_at_t_star() {
        let p = params_at(0.005, 2.0);
        let t = p.t_star().unwrap();
        let r = cat_protocol(&p, c(2.0, 0.0), t).unwrap();
        assert_abs_diff_eq!(r.phi, FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.probabilities[0] + r.probabilities[1],
            1.0,
            epsilon = 1e-10
        );
        for b in Branch::BOTH {
            assert!(fid(r.branch(b).unwrap(), &r.analytic(b).unwrap()) > 0.99);
        }
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn cat_protocol_without_interaction() {
        let p = params_at(0.005, 2.0);
        let r = cat_protocol(&p, c(2.0, 0.0), 0.0).unwrap();
        assert!(r.branches[0].is_none());
        assert_abs_diff_eq!(r.probabilities[1], 1.0, epsilon = 1e-12);
        let coh = coherent_state(c(2.0, 0.0), r.atom_cutoff).unwrap();
        assert_abs_diff_eq!(
            fid(r.branch(Branch::Two).unwrap(), &coh),
            1.0,
            epsilon = 1e-12
        );
        assert!(matches!(
            r.branch(Branch::One),
            Err(Error::PostSelectionImpossible { .. })
        ));
    }

    #[test]
    fn schedule_reproduces_cat_evolution() {
        let p = params_at(0.005, 2.0);
        let t = p.t_star().unwrap();
        let r = cat_protocol(&p, c(2.0, 0.0), t).unwrap();
        let h = jc_hamiltonian(&p, r.atom_cutoff).unwrap();
        let psi0 = cat_initial_state(c(2.0, 0.0), r.atom_cutoff).unwrap();
        let traj = propagate_schedule(&[Segment::new(h, t).unwrap()], &psi0, 4).unwrap();
        assert!((traj.final_state().amplitudes() - r.evolved.amplitudes()).norm() < 1e-9);
    }

    #[test]
    fn swapped_outcomes_exchange_branches() {
        let p = params_at(0.005, 2.0);
        let r = cat_protocol(&p, c(2.0, 0.0), p.t_star().unwrap()).unwrap();
        let one = measure_photon(&r.rotated, Photon::One).unwrap();
        let zero = measure_photon(&r.rotated, Photon::Zero).unwrap();
        assert_eq!(&one.collapsed, r.branch(Branch::One).unwrap());
        assert_eq!(&zero.collapsed, r.branch(Branch::Two).unwrap());
        assert!(fid(&one.collapsed, &r.analytic(Branch::Two).unwrap()) < 0.05);
    }

    #[test]
    fn detection_inverse_undo_at_zero_delay() {
        let p = params_at(0.005, 2.0);
        let r = detection_protocol_with(
            &p,
            c(2.0, 0.0),
            1e4,
            0.0,
            Undo::Inverse,
            &ProtocolOptions::default(),
        )
        .unwrap();
        assert!(r.p1.abs() < 1e-20, "p1 = {}", r.p1);
        assert_eq!(r.p1_analytic, 0.0);
        let fwd = detection_protocol(&p, c(2.0, 0.0), 1e4, 0.0).unwrap();
        assert!((0.0..=1.0).contains(&fwd));
    }

    #[test]
    fn compass_branches_normalized() {
        let p = params_at(0.005, 2.5);
        let r = compass_protocol_with(&p, c(2.5, 0.0), &ProtocolOptions::default()).unwrap();
        for b in Branch::BOTH {
            assert_abs_diff_eq!(r.branches[b.index()].norm(), 1.0, epsilon = 1e-10);
        }
        for seed in &r.outcomes {
            let total: f64 = seed.iter().flatten().map(|m| m.probability).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        }
    }
}
