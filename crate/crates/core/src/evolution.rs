//! Unitary propagation under piecewise-constant Hamiltonians.
//!
//! The Hamiltonians here conserve an excitation number, so their sparsity
//! graph splits into small connected components. [`Propagator`] finds those
//! invariant blocks and diagonalizes each exactly; a block larger than
//! `dense_limit` falls back to a Lanczos (Krylov) exponential.
//!
//! Negative durations are allowed and run the evolution backwards.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, Operator, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOptions {
    /// Blocks up to this size are diagonalized densely.
    pub dense_limit: usize,
    /// Target accuracy of a Krylov step.
    pub krylov_tol: f64,
    /// Maximum Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Allowed population in the top Fock levels after a step.
    pub leakage_tol: f64,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            dense_limit: 2000,
            krylov_tol: 1e-12,
            krylov_dim: 40,
            leakage_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
enum BlockKind {
    Eigen {
        energies: DVector<f64>,
        vectors: DMatrix<C64>,
    },
    Krylov {
        rows: Vec<Vec<(usize, C64)>>,
    },
}

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    /// Mean diagonal energy, removed before diagonalizing and applied as
    /// an exact phase so large offsets do not cost precision.
    shift: f64,
    kind: BlockKind,
}

/// Reusable `e^{-iHt}` for one Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    basis: Basis,
    blocks: Vec<Block>,
    options: PropagatorOptions,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl Propagator {
    pub fn new(h: &Operator) -> Result<Self> {
        Propagator::with_options(h, PropagatorOptions::default())
    }

    pub fn with_options(h: &Operator, options: PropagatorOptions) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::Type(
                "propagation requires a Hermitian-flagged operator".into(),
            ));
        }
        let dim = h.dim();
        let triplets = h.triplets();
        let mut parent: Vec<usize> = (0..dim).collect();
        for &(i, j, _) in &triplets {
            if i != j {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut block_of = vec![usize::MAX; dim];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in 0..dim {
            let r = find(&mut parent, i);
            if block_of[r] == usize::MAX {
                block_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[block_of[r]].push(i);
        }
        let blocks = groups
            .into_iter()
            .map(|indices| {
                let shift =
                    indices.iter().map(|&i| h.get(i, i).re).sum::<f64>() / indices.len() as f64;
                let kind = if indices.len() <= options.dense_limit {
                    let mut m = h.submatrix(&indices);
                    for k in 0..indices.len() {
                        m[(k, k)] -= C64::new(shift, 0.0);
                    }
                    let eig = SymmetricEigen::new(m);
                    BlockKind::Eigen {
                        energies: eig.eigenvalues,
                        vectors: eig.eigenvectors,
                    }
                } else {
                    BlockKind::Krylov {
                        rows: local_rows(&triplets, &indices, dim),
                    }
                };
                Block {
                    indices,
                    shift,
                    kind,
                }
            })
            .collect();
        Ok(Propagator {
            basis: h.basis().clone(),
            blocks,
            options,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Sizes of the invariant blocks found in the Hamiltonian.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// `e^{-iHt} psi` without the leakage check.
    pub fn evolve_unchecked(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.basis.ensure_same(psi.basis())?;
        let src = psi.amplitudes();
        let mut out = DVector::zeros(src.len());
        for block in &self.blocks {
            let v =
                DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&i| src[i]));
            if v.iter().all(|x| *x == C64::new(0.0, 0.0)) {
                continue;
            }
            let w = match &block.kind {
                BlockKind::Eigen { energies, vectors } => {
                    let mut coeffs = vectors.ad_mul(&v);
                    for (c, e) in coeffs.iter_mut().zip(energies.iter()) {
                        *c *= C64::from_polar(1.0, -e * t);
                    }
                    vectors * coeffs
                }
                BlockKind::Krylov { rows } => expm_krylov(rows, block.shift, &v, t, &self.options),
            };
            let phase = C64::from_polar(1.0, -block.shift * t);
            for (&i, x) in block.indices.iter().zip(w.iter()) {
                out[i] = *x * phase;
            }
        }
        Ok(StateVector::from_parts(self.basis.clone(), out))
    }

    /// `e^{-iHt} psi`, failing if the result leaks into the top Fock levels.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let out = self.evolve_unchecked(psi, t)?;
        check_leakage(&out, self.options.leakage_tol)?;
        Ok(out)
    }
}

fn local_rows(
    triplets: &[(usize, usize, C64)],
    indices: &[usize],
    dim: usize,
) -> Vec<Vec<(usize, C64)>> {
    let mut local = vec![usize::MAX; dim];
    for (l, &g) in indices.iter().enumerate() {
        local[g] = l;
    }
    let mut rows = vec![Vec::new(); indices.len()];
    for &(i, j, v) in triplets {
        let (li, lj) = (local[i], local[j]);
        if li != usize::MAX && lj != usize::MAX {
            rows[li].push((lj, v));
        }
    }
    rows
}

fn matvec(rows: &[Vec<(usize, C64)>], v: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(
        rows.len(),
        rows.iter()
            .map(|row| row.iter().map(|(j, x)| *x * v[*j]).sum::<C64>()),
    )
}

/// Lanczos approximation of `e^{-i(H - shift)t} v` with adaptive
/// sub-stepping.
fn expm_krylov(
    rows: &[Vec<(usize, C64)>],
    shift: f64,
    v: &DVector<C64>,
    t: f64,
    opts: &PropagatorOptions,
) -> DVector<C64> {
    let mut w = v.clone();
    let mut remaining = t;
    let mut tau = t;
    let m_max = opts.krylov_dim.max(2).min(rows.len());
    while remaining != 0.0 {
        let beta0 = w.norm();
        if beta0 == 0.0 {
            break;
        }
        // Lanczos with full reorthogonalization
        let mut basis: Vec<DVector<C64>> = vec![w.unscale(beta0)];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut exhausted = false;
        let mut scale = 0.0f64;
        for j in 0..m_max {
            let mut u = matvec(rows, &basis[j]) - basis[j].scale(shift);
            scale = scale.max(u.norm());
            let a = basis[j].dotc(&u).re;
            alphas.push(a);
            for q in &basis {
                let proj = q.dotc(&u);
                u -= q * proj;
            }
            let b = u.norm();
            if b < 1e-13 * scale.max(1.0) {
                exhausted = true;
                break;
            }
            betas.push(b);
            if j + 1 == m_max {
                break;
            }
            basis.push(u.unscale(b));
        }
        let m = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alphas[i];
            if i + 1 < m {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let small = |step: f64| -> DVector<C64> {
            // e^{-iT step} e1
            let mut out = DVector::<C64>::zeros(m);
            for k in 0..m {
                let phase = C64::from_polar(1.0, -eig.eigenvalues[k] * step);
                let c = eig.eigenvectors[(0, k)] * phase;
                for i in 0..m {
                    out[i] += eig.eigenvectors[(i, k)] * c;
                }
            }
            out
        };
        // a Krylov space as large as the block is the whole block
        let trailing = if exhausted || betas.len() < m || m == rows.len() {
            0.0
        } else {
            betas[m - 1]
        };
        let mut step = if tau.abs() > remaining.abs() {
            remaining
        } else {
            tau
        };
        let mut y = small(step);
        while trailing * y[m - 1].norm() > opts.krylov_tol && step.abs() > t.abs() * 1e-12 {
            step /= 2.0;
            y = small(step);
        }
        let mut next = DVector::<C64>::zeros(w.len());
        for (q, c) in basis.iter().zip(y.iter()) {
            next += q * (*c * beta0);
        }
        w = next;
        remaining -= step;
        if remaining.abs() < t.abs() * 1e-15 {
            remaining = 0.0;
        }
        tau = step * 2.0;
    }
    w
}

fn check_leakage(psi: &StateVector, tolerance: f64) -> Result<()> {
    for (factor, population) in psi.top_fock_populations() {
        if population > tolerance {
            return Err(Error::Leakage {
                factor,
                population,
                tolerance,
            });
        }
    }
    Ok(())
}

/// `e^{-iHt} psi` with the default options.
pub fn propagate(h: &Operator, psi: &StateVector, t: f64) -> Result<StateVector> {
    Propagator::new(h)?.evolve(psi, t)
}

/// A Hamiltonian switched on for `duration` seconds.
#[derive(Debug, Clone)]
pub struct Segment {
    pub hamiltonian: Operator,
    pub duration: f64,
}

impl Segment {
    pub fn new(hamiltonian: Operator, duration: f64) -> Result<Self> {
        if !(duration >= 0.0) || !duration.is_finite() {
            return Err(Error::Domain(format!(
                "segment duration must be finite and non-negative, got {duration}"
            )));
        }
        if !hamiltonian.is_hermitian() {
            return Err(Error::Type("segment Hamiltonian is not Hermitian".into()));
        }
        Ok(Segment {
            hamiltonian,
            duration,
        })
    }
}

/// Sampled evolution through a schedule.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// Largest top-Fock-level population at each sample.
    pub leakage: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

/// Evolves `psi0` through `segments`, sampling each one uniformly at
/// `samples_per_segment` points (the segment end is always sampled).
pub fn propagate_schedule(
    segments: &[Segment],
    psi0: &StateVector,
    samples_per_segment: usize,
) -> Result<Trajectory> {
    propagate_schedule_with(
        segments,
        psi0,
        samples_per_segment,
        PropagatorOptions::default(),
    )
}

pub fn propagate_schedule_with(
    segments: &[Segment],
    psi0: &StateVector,
    samples_per_segment: usize,
    options: PropagatorOptions,
) -> Result<Trajectory> {
    if samples_per_segment == 0 {
        return Err(Error::Domain("need at least one sample per segment".into()));
    }
    for s in segments {
        s.hamiltonian.basis().ensure_same(psi0.basis())?;
    }
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![psi0.clone()],
        leakage: vec![psi0.max_leakage()],
    };
    let mut t0 = 0.0;
    let mut start = psi0.clone();
    for seg in segments {
        if seg.duration == 0.0 {
            continue;
        }
        let prop = Propagator::with_options(&seg.hamiltonian, options)?;
        let dt = seg.duration / samples_per_segment as f64;
        for k in 1..=samples_per_segment {
            let local = if k == samples_per_segment {
                seg.duration
            } else {
                dt * k as f64
            };
            let state = prop.evolve(&start, local)?;
            traj.times.push(t0 + local);
            traj.leakage.push(state.max_leakage());
            traj.states.push(state);
        }
        t0 += seg.duration;
        start = traj.final_state().clone();
    }
    Ok(traj)
}
