//! Cavity-QED generation of Schrödinger-cat and compass states of a
//! two-component Bose–Einstein condensate.
//!
//! The condensate's collective spin couples to a single microwave cavity
//! photon through a two-photon transition. At low excitation the spin maps
//! onto a harmonic oscillator and the system reduces to a Jaynes–Cummings
//! model; in the dispersive regime the photon imprints opposite phase
//! shifts on a coherent condensate state, and a photon measurement leaves
//! the condensate in a superposition of rotated coherent states.
//!
//! Modules, bottom-up:
//!
//! - [`hilbert`]: bases, states and operators on truncated spaces.
//! - [`hamiltonians`]: the exact collective-spin model, the effective
//!   Jaynes–Cummings model, free evolution and dispersive energies.
//! - [`evolution`]: piecewise-constant unitary propagation with leakage
//!   monitoring.
//! - [`protocols`]: cat generation, phase-amplified detection and compass
//!   production.
//! - [`analysis`]: fidelities, lifetimes, Wigner/Husimi grids and the
//!   Holstein–Primakoff convergence study.
//! - [`scenario`]: TOML scenario files, sweeps, CSV/JSON output.
//!
//! All frequencies are angular (rad/s) and `ħ = 1`; scenario files take Hz.

pub mod analysis;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod hilbert;
pub mod protocols;
pub mod scenario;

pub use error::{Error, Result};
pub use hilbert::C64;
