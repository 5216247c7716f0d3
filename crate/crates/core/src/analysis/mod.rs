//! Diagnostics: fidelities, cat lifetimes, phase-space grids, model
//! convergence tables and small fitting helpers.

mod convergence;
mod phase_space;

pub use convergence::{
    dispersive_error_table, hp_convergence, hp_convergence_with, DispersiveErrorRow, HpOptions,
    HpRow,
};
pub use phase_space::{husimi, local_maxima, wigner, GridKind, GridSpec, Peak, PhaseSpaceGrid};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::StateVector;

/// `|⟨x|y⟩|²`, clamped to `[0, 1]`.
pub fn fidelity(x: &StateVector, y: &StateVector) -> Result<f64> {
    let ov = x.inner(y)?.norm_sqr() / (x.norm_squared() * y.norm_squared());
    Ok(ov.clamp(0.0, 1.0))
}

/// Cat lifetime `T = 2T_r/D²` with `D = 2|α̃|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeEstimate {
    pub t_r: f64,
    pub d: f64,
    pub t: f64,
}

pub fn cat_lifetime(t_r: f64, alpha_tilde: C64) -> Result<LifetimeEstimate> {
    let a = alpha_tilde.norm();
    if a == 0.0 {
        return Err(Error::Singularity("cat lifetime diverges at α̃ = 0".into()));
    }
    if !(t_r > 0.0) || !t_r.is_finite() {
        return Err(Error::Domain(format!(
            "damping time must be positive, got {t_r}"
        )));
    }
    if a < 0.5 {
        return Err(Error::Domain(format!(
            "lifetime estimate needs |α̃| ≥ 0.5, got {a}"
        )));
    }
    let d = 2.0 * a;
    if d < 2.0 {
        log::warn!("cat separation D = {d:.3} is not large; the lifetime estimate is rough");
    }
    Ok(LifetimeEstimate {
        t_r,
        d,
        t: 2.0 * t_r / (d * d),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Domain(
            "slope needs at least two matching points".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log slope needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("x values are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Root-mean-square difference.
pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n as f64).sqrt()
}

/// Best-fit angular frequency of `[1 - cos(ωt)]/2` to the samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationFit {
    pub omega: f64,
    pub rms: f64,
}

/// Fits `ω` in `[1 - cos(ωt)]/2` by a scan over the frequencies the
/// sampling can resolve, then golden-section refinement.
///
/// The scan runs from a quarter cycle over the sampled span up to the
/// Nyquist frequency. An optimum on either edge means the data holds no
/// resolvable oscillation and is reported as an error.
pub fn fit_oscillation(times: &[f64], values: &[f64]) -> Result<OscillationFit> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::Domain(
            "fit needs at least four matching samples".into(),
        ));
    }
    let span = times.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - times.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(span > 0.0) {
        return Err(Error::Domain(
            "sample times must span a positive interval".into(),
        ));
    }
    let dt = span / (times.len() - 1) as f64;
    let lo = 0.5 * std::f64::consts::PI / span;
    let hi = std::f64::consts::PI / dt;
    let cost = |w: f64| -> f64 {
        let model: Vec<f64> = times.iter().map(|t| 0.5 * (1.0 - (w * t).cos())).collect();
        rms(&model, values)
    };
    let steps = 4000;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| lo * (hi / lo).powf(k as f64 / steps as f64))
        .collect();
    let (best, _) =
        grid.iter()
            .enumerate()
            .map(|(i, w)| (i, cost(*w)))
            .fold(
                (0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
    if best == 0 || best == steps {
        return Err(Error::Domain(
            "no resolvable oscillation: best frequency sits on the scan boundary".into(),
        ));
    }
    let (mut a, mut b) = (grid[best - 1], grid[best + 1]);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - gr * (b - a);
        let d = a + gr * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    Ok(OscillationFit {
        omega,
        rms: cost(omega),
    })
}
