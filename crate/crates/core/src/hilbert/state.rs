use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::basis::{Basis, Subsystem};
use crate::error::{Error, Result};

/// Tail weight above which a truncated coherent state is rejected.
pub const TRUNCATION_TOLERANCE: f64 = 1e-10;

/// Default Fock cutoff for a coherent amplitude of modulus `alpha_abs`:
/// `ceil(|α|² + 8|α| + 10)`.
pub fn default_cutoff(alpha_abs: f64) -> usize {
    let a = alpha_abs.abs();
    (a * a + 8.0 * a + 10.0).ceil() as usize
}

/// Complex amplitudes over a declared basis.
///
/// Constructors and unitary evolution return unit vectors; the result of
/// applying a general operator (or slicing out a measurement branch) is
/// left unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: Basis, amps: DVector<C64>) -> Result<Self> {
        if amps.len() != basis.total_dim() {
            return Err(Error::Domain(format!(
                "amplitude vector has length {} but basis {} has dimension {}",
                amps.len(),
                basis,
                basis.total_dim()
            )));
        }
        Ok(StateVector { basis, amps })
    }

    pub(crate) fn from_parts(basis: Basis, amps: DVector<C64>) -> Self {
        debug_assert_eq!(amps.len(), basis.total_dim());
        StateVector { basis, amps }
    }

    /// The basis vector at flat index `index`.
    pub fn basis_state(basis: Basis, index: usize) -> Result<Self> {
        let dim = basis.total_dim();
        if index >= dim {
            return Err(Error::Domain(format!(
                "index {index} outside basis of dimension {dim}"
            )));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { basis, amps })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amps.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Ok(StateVector {
            basis: self.basis.clone(),
            amps: self.amps.unscale(n),
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        StateVector {
            basis: self.basis.clone(),
            amps: &self.amps * factor,
        }
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.basis.ensure_same(&other.basis)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Populations of every level of factor `factor`.
    pub fn factor_populations(&self, factor: usize) -> Result<Vec<f64>> {
        let sub = self
            .basis
            .factor(factor)
            .ok_or_else(|| Error::Domain(format!("no factor {factor} in {}", self.basis)))?;
        let mut pops = vec![0.0; sub.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            pops[self.basis.level(i, factor)] += a.norm_sqr();
        }
        Ok(pops)
    }

    /// Population sitting in the top Fock levels (at most two, never below
    /// level 2) of every Fock factor. Returns `(factor, population)` pairs.
    pub fn top_fock_populations(&self) -> Vec<(usize, f64)> {
        self.basis
            .factors()
            .iter()
            .enumerate()
            .filter_map(|(i, f)| match *f {
                Subsystem::Fock { cutoff } => {
                    let lowest = cutoff.saturating_sub(1).max(2);
                    let pops = self.factor_populations(i).ok()?;
                    let p = pops.iter().skip(lowest).sum::<f64>();
                    Some((i, p))
                }
                _ => None,
            })
            .collect()
    }

    /// Largest top-level Fock population over all Fock factors.
    pub fn max_leakage(&self) -> f64 {
        self.top_fock_populations()
            .into_iter()
            .map(|(_, p)| p)
            .fold(0.0, f64::max)
    }

    /// Component with factor `factor` fixed at `level`, over the remaining
    /// factors. Not renormalized.
    pub fn slice(&self, factor: usize, level: usize) -> Result<StateVector> {
        let rest = self.basis.without(factor).ok_or_else(|| {
            Error::Domain(format!(
                "cannot slice factor {factor} out of {}",
                self.basis
            ))
        })?;
        let dim_f = self.basis.factors()[factor].dim();
        if level >= dim_f {
            return Err(Error::Domain(format!(
                "level {level} outside factor of dimension {dim_f}"
            )));
        }
        let amps: Vec<C64> = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.basis.level(*i, factor) == level)
            .map(|(_, a)| *a)
            .collect();
        Ok(StateVector {
            basis: rest,
            amps: DVector::from_vec(amps),
        })
    }

    /// Re-express a single-Fock-mode state at a different cutoff. Amplitudes
    /// above the new cutoff must be zero.
    pub fn with_fock_cutoff(&self, cutoff: usize) -> Result<StateVector> {
        match self.basis.factors() {
            [Subsystem::Fock { .. }] => {}
            _ => {
                return Err(Error::Type(
                    "cutoff change needs a single Fock factor".into(),
                ))
            }
        }
        let basis = Basis::single(Subsystem::fock(cutoff)?);
        let mut amps = DVector::zeros(cutoff + 1);
        for (n, a) in self.amps.iter().enumerate() {
            if n <= cutoff {
                amps[n] = *a;
            } else if a.norm_sqr() > 0.0 {
                return Err(Error::Domain(format!(
                    "level {n} is populated but the new cutoff is {cutoff}"
                )));
            }
        }
        Ok(StateVector { basis, amps })
    }
}

/// `|n⟩` in a Fock space truncated at `cutoff`.
pub fn fock_state(n: usize, cutoff: usize) -> Result<StateVector> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    if n > cutoff {
        return Err(Error::Domain(format!(
            "Fock level {n} above cutoff {cutoff}"
        )));
    }
    StateVector::basis_state(basis, n)
}

/// Poisson weight of levels above `cutoff` for mean `mean`.
pub(crate) fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    // ln p_n = -λ + n ln λ - ln n!
    let ln_mean = mean.ln();
    let mut ln_fact = 0.0;
    for k in 1..=cutoff + 1 {
        ln_fact += (k as f64).ln();
    }
    let mut n = cutoff + 1;
    let mut tail = 0.0;
    loop {
        let term = (-mean + n as f64 * ln_mean - ln_fact).exp();
        tail += term;
        if n as f64 > mean && term <= tail * 1e-17 {
            break;
        }
        if n > cutoff + 100_000 {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    tail
}

/// Smallest cutoff whose Poisson tail is below `tolerance`.
pub(crate) fn required_cutoff(mean: f64, tolerance: f64) -> usize {
    let mut c = 1;
    while poisson_tail(mean, c) > tolerance {
        c += 1;
    }
    c
}

/// Unnormalized-by-truncation coherent amplitudes `e^{-|α|²/2} α^n / √n!`.
pub(crate) fn coherent_amplitudes(alpha: C64, cutoff: usize) -> DVector<C64> {
    let mut amps = DVector::zeros(cutoff + 1);
    let mut term = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amps[0] = term;
    for n in 1..=cutoff {
        term = term * alpha / (n as f64).sqrt();
        amps[n] = term;
    }
    amps
}

/// Coherent state `|α⟩` truncated at `cutoff` and renormalized.
///
/// Fails with a truncation error naming the smallest adequate cutoff when
/// the discarded Poisson tail exceeds [`TRUNCATION_TOLERANCE`].
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<StateVector> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    let mean = alpha.norm_sqr();
    let tail = poisson_tail(mean, cutoff);
    if tail > TRUNCATION_TOLERANCE {
        return Err(Error::Truncation {
            cutoff,
            required: required_cutoff(mean, TRUNCATION_TOLERANCE),
            tail,
            tolerance: TRUNCATION_TOLERANCE,
        });
    }
    let amps = coherent_amplitudes(alpha, cutoff);
    let norm = amps.norm();
    Ok(StateVector {
        basis,
        amps: amps.unscale(norm),
    })
}

/// Coherent state at the [`default_cutoff`] for `|α|`.
pub fn coherent_state_auto(alpha: C64) -> Result<StateVector> {
    coherent_state(alpha, default_cutoff(alpha.norm()))
}

/// Spin-coherent state of `n_atoms` atoms, `exp(ζ J_+)` applied to the
/// zero-excitation Dicke state, with the rotation chosen so the mean
/// excitation `⟨J_z + N/2⟩` equals `|eta|²` and the phase of each Dicke
/// amplitude follows `eta^k`.
pub fn atomic_coherent_state(n_atoms: usize, eta: C64) -> Result<StateVector> {
    let basis = Basis::single(Subsystem::spin(n_atoms)?);
    let n = n_atoms as f64;
    let excitation = eta.norm_sqr();
    if excitation > n {
        return Err(Error::Domain(format!(
            "excitation |eta|² = {excitation} exceeds the atom number {n_atoms}"
        )));
    }
    if excitation / n > 0.1 {
        log::warn!(
            "spin-coherent excitation fraction {:.3} is not small; the bosonic picture is poor",
            excitation / n
        );
    }
    let dim = n_atoms + 1;
    let mut amps = DVector::zeros(dim);
    if excitation == 0.0 {
        amps[0] = C64::new(1.0, 0.0);
        return Ok(StateVector { basis, amps });
    }
    if excitation == n {
        amps[n_atoms] = C64::from_polar(1.0, n * eta.arg());
        return Ok(StateVector { basis, amps });
    }
    // |c_k| = sqrt(C(N,k)) s^k c^(N-k), s² = |eta|²/N
    let s2 = excitation / n;
    let ln_s = 0.5 * s2.ln();
    let ln_c = 0.5 * (1.0 - s2).ln();
    let phase = eta.arg();
    let mut ln_binom = 0.0;
    let mut logs = Vec::with_capacity(dim);
    for k in 0..dim {
        if k > 0 {
            ln_binom += ((n_atoms - k + 1) as f64).ln() - (k as f64).ln();
        }
        logs.push(0.5 * ln_binom + k as f64 * ln_s + (n_atoms - k) as f64 * ln_c);
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (k, l) in logs.iter().enumerate() {
        amps[k] = C64::from_polar((l - peak).exp(), k as f64 * phase);
    }
    let norm = amps.norm();
    Ok(StateVector {
        basis,
        amps: amps.unscale(norm),
    })
}

/// Qubit state `c0|0⟩ + c1|1⟩`, normalized.
pub fn qubit_state(c0: C64, c1: C64) -> Result<StateVector> {
    StateVector::from_parts(
        Basis::single(Subsystem::Qubit),
        DVector::from_vec(vec![c0, c1]),
    )
    .normalized()
}

/// The photon superposition `(|0⟩ + |1⟩)/√2` on a qubit factor.
pub fn photon_plus() -> StateVector {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    StateVector::from_parts(
        Basis::single(Subsystem::Qubit),
        DVector::from_vec(vec![h, h]),
    )
}

/// `(|0⟩ + |1⟩)/√2` embedded in a Fock mode with the given cutoff.
pub fn photon_plus_fock(cutoff: usize) -> Result<StateVector> {
    let basis = Basis::single(Subsystem::fock(cutoff)?);
    let mut amps = DVector::zeros(cutoff + 1);
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[1] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Ok(StateVector { basis, amps })
}

/// `⟨x|y⟩` with conjugation on `x`.
pub fn inner_product(x: &StateVector, y: &StateVector) -> Result<C64> {
    x.inner(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn fock_state_edges() {
        let vac = fock_state(0, 10).unwrap();
        assert_eq!(vac.amplitudes()[0], c(1.0, 0.0));
        let top = fock_state(10, 10).unwrap();
        assert_eq!(top.amplitudes()[10], c(1.0, 0.0));
        assert_abs_diff_eq!(fock_state(3, 20).unwrap().norm(), 1.0);
        assert!(matches!(fock_state(11, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_coherent_state_is_fock_vacuum() {
        assert_eq!(
            coherent_state(c(0.0, 0.0), 10).unwrap(),
            fock_state(0, 10).unwrap()
        );
    }

    #[test]
    fn coherent_mean_excitation_by_direct_summation() {
        let psi = coherent_state(c(2.0, 0.0), 40).unwrap();
        let mean: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum();
        assert_abs_diff_eq!(mean, 4.0, epsilon = 1e-8);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coherent_cutoffs_40_and_60_agree() {
        let a = coherent_state(c(2.0, 0.0), 40)
            .unwrap()
            .with_fock_cutoff(60)
            .unwrap();
        let b = coherent_state(c(2.0, 0.0), 60).unwrap();
        let f = a.inner(&b).unwrap().norm_sqr();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn truncation_error_names_required_cutoff() {
        match coherent_state(c(4.0, 0.0), 10) {
            Err(Error::Truncation {
                required, cutoff, ..
            }) => {
                assert_eq!(cutoff, 10);
                assert!(poisson_tail(16.0, required) <= TRUNCATION_TOLERANCE);
                assert!(poisson_tail(16.0, required - 1) > TRUNCATION_TOLERANCE);
                assert!(coherent_state(c(4.0, 0.0), required).is_ok());
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn default_cutoff_bounds_tail() {
        for &a in &[0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let cut = default_cutoff(a);
            assert!(poisson_tail(a * a, cut) < 1e-10, "alpha {a}");
        }
    }

    #[test]
    fn coherent_overlap_matches_closed_form() {
        let a = c(1.0, 0.0);
        let b = c(0.0, 2.0);
        let x = coherent_state(a, 60).unwrap();
        let y = coherent_state(b, 60).unwrap();
        let got = inner_product(&x, &y).unwrap();
        let expected = (-a.norm_sqr() / 2.0 - b.norm_sqr() / 2.0 + a.conj() * b).exp();
        assert_abs_diff_eq!(got.re, expected.re, epsilon = 1e-8);
        assert_abs_diff_eq!(got.im, expected.im, epsilon = 1e-8);
    }

    #[test]
    fn fock_orthogonality_and_mismatch() {
        let z = fock_state(0, 5).unwrap();
        let o = fock_state(1, 5).unwrap();
        assert_eq!(z.inner(&o).unwrap(), c(0.0, 0.0));
        let other = fock_state(0, 6).unwrap();
        assert!(matches!(z.inner(&other), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn atomic_coherent_state_vacuum_and_mean() {
        let vac = atomic_coherent_state(100, c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(vac.amplitudes()[0].norm_sqr(), 1.0);
        let psi = atomic_coherent_state(100, c(2.0, 0.0)).unwrap();
        let mean: f64 = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, a)| k as f64 * a.norm_sqr())
            .sum();
        assert!((mean - 4.0).abs() < 0.05 * 4.0);
        assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-12);
        assert!(atomic_coherent_state(3, c(2.0, 0.0)).is_err());
    }

    #[test]
    fn atomic_coherent_state_approaches_coherent_state() {
        let eta = c(2.0, 0.0);
        let target = coherent_state_auto(eta).unwrap();
        let cutoff = target.dim() - 1;
        let mut last = 0.0;
        for &n in &[50usize, 100, 200] {
            let spin = atomic_coherent_state(n, eta).unwrap();
            let amps: Vec<C64> = (0..=cutoff)
                .map(|k| {
                    if k <= n {
                        spin.amplitudes()[k]
                    } else {
                        c(0.0, 0.0)
                    }
                })
                .collect();
            let embedded =
                StateVector::from_amplitudes(target.basis().clone(), DVector::from_vec(amps))
                    .unwrap();
            let f = embedded.inner(&target).unwrap().norm_sqr();
            assert!(f > last, "fidelity not increasing at N = {n}");
            last = f;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn slice_extracts_branch() {
        let joint_basis =
            Basis::new(vec![Subsystem::Qubit, Subsystem::Fock { cutoff: 2 }]).unwrap();
        let psi = StateVector::basis_state(joint_basis, 4).unwrap();
        let one = psi.slice(0, 1).unwrap();
        assert_eq!(one.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(psi.slice(0, 0).unwrap().norm(), 0.0);
    }
}
