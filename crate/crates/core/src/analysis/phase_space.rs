//! Wigner and Husimi functions on rectangular grids.
//!
//! Points are labelled by quadratures `(x, p)` with `β = (x + ip)/√2`, so
//! the vacuum Wigner peak is `1/π` and `∫W dx dp = 1`. Husimi values are
//! `Q(β) = |⟨β|ψ⟩|²/π`, a density in `d²β`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{StateVector, Subsystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Wigner,
    Husimi,
}

/// Rectangular sampling window in `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Points per axis.
    pub points: usize,
}

impl GridSpec {
    pub const DEFAULT_POINTS: usize = 201;

    pub fn square(half_width: f64, points: usize) -> Self {
        GridSpec {
            x_min: -half_width,
            x_max: half_width,
            p_min: -half_width,
            p_max: half_width,
            points,
        }
    }

    /// Default window for states of amplitude up to `|α|`: half-width
    /// `√2|α| + 4`, 201 points per axis.
    pub fn for_amplitude(alpha_abs: f64) -> Self {
        GridSpec::square(
            std::f64::consts::SQRT_2 * alpha_abs + 4.0,
            Self::DEFAULT_POINTS,
        )
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.x_max > self.x_min) || !(self.p_max > self.p_min) {
            return Err(Error::Domain(
                "grid needs at least two points and a non-empty window".into(),
            ));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn x_axis(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.points)
    }

    pub fn p_axis(&self) -> Vec<f64> {
        Self::axis(self.p_min, self.p_max, self.points)
    }
}

/// Sampled quasi-probability; `values[(i, j)]` sits at `(x_axis[i], p_axis[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub kind: GridKind,
    pub x_axis: Vec<f64>,
    pub p_axis: Vec<f64>,
    pub values: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub x: f64,
    pub p: f64,
    pub value: f64,
}

impl Peak {
    /// `β = (x + ip)/√2`.
    pub fn beta(&self) -> C64 {
        C64::new(self.x, self.p) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl PhaseSpaceGrid {
    /// Trapezoid-rule integral over the window in `dx dp`. Wigner grids
    /// give 1; Husimi grids give 2, since `Q` is a density in
    /// `d²β = dx dp / 2`.
    pub fn integral(&self) -> f64 {
        let w = |axis: &[f64], k: usize| {
            let h = axis[1] - axis[0];
            if k == 0 || k + 1 == axis.len() {
                0.5 * h
            } else {
                h
            }
        };
        let mut total = 0.0;
        for i in 0..self.x_axis.len() {
            for j in 0..self.p_axis.len() {
                total += w(&self.x_axis, i) * w(&self.p_axis, j) * self.values[(i, j)];
            }
        }
        total
    }

    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }

    /// Grid value nearest to `(x, p)`.
    pub fn nearest(&self, x: f64, p: f64) -> f64 {
        let pick = |axis: &[f64], v: f64| {
            let h = axis[1] - axis[0];
            (((v - axis[0]) / h).round().max(0.0) as usize).min(axis.len() - 1)
        };
        self.values[(pick(&self.x_axis, x), pick(&self.p_axis, p))]
    }
}

fn single_mode(psi: &StateVector) -> Result<&nalgebra::DVector<C64>> {
    match psi.basis().factors() {
        [Subsystem::Fock { .. }] => Ok(psi.amplitudes()),
        [_] => Err(Error::Type("phase-space functions need a Fock mode".into())),
        f => Err(Error::ReduceFirst { factors: f.len() }),
    }
}

fn fill<F>(spec: &GridSpec, kind: GridKind, f: F) -> PhaseSpaceGrid
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let x_axis = spec.x_axis();
    let p_axis = spec.p_axis();
    let columns: Vec<Vec<f64>> = x_axis
        .par_iter()
        .map(|&x| p_axis.iter().map(|&p| f(x, p)).collect())
        .collect();
    let values = DMatrix::from_fn(x_axis.len(), p_axis.len(), |i, j| columns[i][j]);
    PhaseSpaceGrid {
        kind,
        x_axis,
        p_axis,
        values,
    }
}

/// Wigner function `W(x, p) = (1/π) ⟨ψ|D(2β) Π|ψ⟩`.
///
/// The displaced-parity matrix elements are generated by the standard
/// two-index recurrence in the Fock basis, one grid point at a time.
pub fn wigner(psi: &StateVector, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    let amps = single_mode(psi)?;
    let norm2 = psi.norm_squared();
    let dim = amps.len();
    // keep only the populated prefix
    let last = amps.iter().rposition(|a| a.norm_sqr() > 0.0).unwrap_or(0);
    let c: Vec<C64> = amps.iter().take(last + 1).cloned().collect();
    let m_dim = c.len().min(dim);
    let sq: Vec<f64> = (0..=m_dim).map(|k| (k as f64).sqrt()).collect();
    Ok(fill(spec, GridKind::Wigner, |x, p| {
        let a = C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2;
        let mut w = vec![C64::new(0.0, 0.0); m_dim];
        w[0] = C64::new((-2.0 * a.norm_sqr()).exp() / std::f64::consts::PI, 0.0);
        // ρ_mn = c_m c_n*
        let rho = |m: usize, n: usize| c[m] * c[n].conj();
        let mut total = (rho(0, 0) * w[0]).re;
        for n in 1..m_dim {
            w[n] = 2.0 * a * w[n - 1] / sq[n];
            total += 2.0 * (rho(0, n) * w[n]).re;
        }
        for m in 1..m_dim {
            let mut temp = w[m];
            w[m] = (2.0 * a.conj() * temp - sq[m] * w[m - 1]) / sq[m];
            total += (rho(m, m) * w[m]).re;
            for n in m + 1..m_dim {
                let next = (2.0 * a * w[n - 1] - sq[m] * temp) / sq[n];
                temp = w[n];
                w[n] = next;
                total += 2.0 * (rho(m, n) * w[n]).re;
            }
        }
        total / norm2
    }))
}

/// Husimi function `Q(β) = |⟨β|ψ⟩|²/π`.
pub fn husimi(psi: &StateVector, spec: &GridSpec) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    let amps = single_mode(psi)?;
    let norm2 = psi.norm_squared();
    Ok(fill(spec, GridKind::Husimi, |x, p| {
        let b = C64::new(x, p) * std::f64::consts::FRAC_1_SQRT_2;
        let bc = b.conj();
        // ⟨β|n⟩ = e^{-|β|²/2} β*^n / √n!
        let mut term = C64::new((-0.5 * b.norm_sqr()).exp(), 0.0);
        let mut sum = term * amps[0];
        for (n, a) in amps.iter().enumerate().skip(1) {
            term = term * bc / (n as f64).sqrt();
            sum += term * a;
        }
        sum.norm_sqr() / (std::f64::consts::PI * norm2)
    }))
}

/// Strict local maxima (8-neighbourhood) above `fraction` of the global
/// maximum, with parabolic sub-cell refinement, strongest first.
pub fn local_maxima(grid: &PhaseSpaceGrid, fraction: f64) -> Vec<Peak> {
    let v = &grid.values;
    let (nx, np) = v.shape();
    let floor = fraction * grid.max();
    let mut peaks = Vec::new();
    for i in 0..nx {
        for j in 0..np {
            let c = v[(i, j)];
            if c < floor {
                continue;
            }
            let mut is_max = true;
            'nb: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= np as i64 {
                        continue;
                    }
                    if v[(ii as usize, jj as usize)] >= c {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if !is_max {
                continue;
            }
            let refine = |lo: f64, mid: f64, hi: f64| {
                let den = lo - 2.0 * mid + hi;
                if den < 0.0 {
                    (0.5 * (lo - hi) / den).clamp(-0.5, 0.5)
                } else {
                    0.0
                }
            };
            let hx = grid.x_axis[1] - grid.x_axis[0];
            let hp = grid.p_axis[1] - grid.p_axis[0];
            let ox = if i > 0 && i + 1 < nx {
                refine(v[(i - 1, j)], c, v[(i + 1, j)])
            } else {
                0.0
            };
            let op = if j > 0 && j + 1 < np {
                refine(v[(i, j - 1)], c, v[(i, j + 1)])
            } else {
                0.0
            };
            peaks.push(Peak {
                x: grid.x_axis[i] + ox * hx,
                p: grid.p_axis[j] + op * hp,
                value: c,
            });
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value));
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_state, fock_state, tensor, Basis};
    use crate::protocols::{analytic_cat, analytic_compass, Branch};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Closed-form Wigner function of `(c1|a⟩ + c2|b⟩)`.
    fn two_coherent_wigner(c1: C64, a: C64, c2: C64, b: C64, x: f64, p: f64) -> f64 {
        let z = c(x, p) / 2f64.sqrt();
        // W of |u⟩⟨v| = ⟨v|u⟩ e^{-2(z* - v*)(z - u)} / π
        let cross = |u: C64, v: C64| {
            let ov = (-0.5 * u.norm_sqr() - 0.5 * v.norm_sqr() + v.conj() * u).exp();
            ov * (-2.0 * (z.conj() - v.conj()) * (z - u)).exp() / PI
        };
        let w = c1.norm_sqr() * cross(a, a)
            + c2.norm_sqr() * cross(b, b)
            + 2.0 * (c1 * c2.conj() * cross(a, b)).re;
        w.re
    }

    #[test]
    fn vacuum_wigner_peak_and_norm() {
        let vac = fock_state(0, 10).unwrap();
        let g = wigner(&vac, &GridSpec::square(6.0, 201)).unwrap();
        assert_abs_diff_eq!(g.nearest(0.0, 0.0), 1.0 / PI, epsilon = 1e-6);
        assert_abs_diff_eq!(g.integral(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn fock_one_wigner_at_origin_is_negative() {
        let one = fock_state(1, 4).unwrap();
        let g = wigner(&one, &GridSpec::square(4.0, 81)).unwrap();
        assert_abs_diff_eq!(g.nearest(0.0, 0.0), -1.0 / PI, epsilon = 1e-12);
    }

    #[test]
    fn cat_wigner_matches_closed_form() {
        let at = c(2.0, 0.0);
        let phi = FRAC_PI_2;
        let cat = analytic_cat(at, phi, Branch::Two).unwrap();
        let spec = GridSpec::for_amplitude(2.0);
        let g = wigner(&cat, &spec).unwrap();
        let n = (2.0 + 2.0 * (-8.0f64).exp()).sqrt();
        let (a, b) = (
            at * C64::from_polar(1.0, phi),
            at * C64::from_polar(1.0, -phi),
        );
        let mut worst: f64 = 0.0;
        for i in (0..spec.points).step_by(10) {
            for j in (0..spec.points).step_by(10) {
                let exact = two_coherent_wigner(
                    c(1.0 / n, 0.0),
                    a,
                    c(1.0 / n, 0.0),
                    b,
                    g.x_axis[i],
                    g.p_axis[j],
                );
                worst = worst.max((exact - g.values[(i, j)]).abs());
            }
        }
        assert!(worst < 1e-9, "max deviation {worst}");
        assert!(g.min() <= -0.05);
        assert_abs_diff_eq!(g.integral(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn asymmetric_superposition_matches_closed_form() {
        let (a, b) = (c(1.0, 0.5), c(-0.3, 1.0));
        let (c1, c2) = (c(0.6, 0.2), c(-0.1, 0.7));
        let cutoff = 40;
        let raw = coherent_state(a, cutoff).unwrap().amplitudes() * c1
            + coherent_state(b, cutoff).unwrap().amplitudes() * c2;
        let psi =
            StateVector::from_amplitudes(Basis::single(Subsystem::Fock { cutoff }), raw).unwrap();
        let norm2 = psi.norm_squared();
        let g = wigner(&psi, &GridSpec::square(4.0, 21)).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                let exact = two_coherent_wigner(c1, a, c2, b, g.x_axis[i], g.p_axis[j]) / norm2;
                assert_abs_diff_eq!(g.values[(i, j)], exact, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn husimi_coherent_peak() {
        let alpha = c(1.5, -0.5);
        let s = coherent_state(alpha, 40).unwrap();
        let spec = GridSpec::for_amplitude(alpha.norm());
        let q = husimi(&s, &spec).unwrap();
        let peaks = local_maxima(&q, 0.5);
        assert_eq!(peaks.len(), 1);
        let cell = (spec.x_max - spec.x_min) / (spec.points - 1) as f64;
        assert!((peaks[0].beta() - alpha).norm() * 2f64.sqrt() < cell);
        assert!(q.min() >= 0.0 && q.max() <= 1.0 / PI + 1e-12);
    }

    #[test]
    fn compass_husimi_has_four_peaks() {
        let a = c(2.5, 0.0);
        let s = analytic_compass(a, Branch::One).unwrap();
        let q = husimi(&s, &GridSpec::for_amplitude(2.5)).unwrap();
        let peaks = local_maxima(&q, 0.5);
        assert_eq!(peaks.len(), 4);
        for k in [1.0, -1.0, 3.0, -3.0] {
            let target = a * C64::from_polar(1.0, k * FRAC_PI_4);
            let best = peaks
                .iter()
                .map(|p| (p.beta() - target).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 0.05 * a.norm(), "component at {target}: {best}");
        }
    }

    #[test]
    fn multi_factor_state_must_be_reduced() {
        let q = StateVector::basis_state(Basis::single(Subsystem::Qubit), 0).unwrap();
        let joint = tensor(&q, &fock_state(0, 3).unwrap());
        assert!(matches!(
            wigner(&joint, &GridSpec::square(2.0, 5)),
            Err(Error::ReduceFirst { factors: 2 })
        ));
        assert!(matches!(
            husimi(&q, &GridSpec::square(2.0, 5)),
            Err(Error::Type(_))
        ));
    }
}
