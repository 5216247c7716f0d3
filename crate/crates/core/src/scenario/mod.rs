//! Declarative scenarios: TOML configuration, sweeps, and CSV/JSON output.
//!
//! ```toml
//! protocol = "cat"            # cat | detection | compass | hp_convergence | wigner
//! t_r = 1.0                   # s, optional
//!
//! [effective]                 # or [model] with delta1, delta2, omega_c, omega_rf, n_atoms
//! g = 1.0e3                   # Hz
//! n_atoms = 10000
//! validity_ratio = 0.005      # or delta = ... (Hz)
//!
//! [alpha]
//! magnitude = 2.0
//! phase = 0.0                 # rad
//! ```
//!
//! All frequencies in scenario files are in Hz; they are multiplied by 2π
//! internally.

mod config;
mod run;

pub use config::{
    parse_config, AlphaInput, Cutoffs, EffectiveInput, GridInput, GridState, HpInput, ModelInput,
    OutputKind, OutputSpec, ProtocolKind, ScenarioConfig, SweepInput, TimingInput, Tolerances,
    SWEEP_PARAMETERS,
};
pub use run::{
    derive, run_scenario, run_scenario_with, CatSummary, CompassSummary, Derived, DetectionSummary,
    GridSummary, HpSummary, PointReport, PointResult, RunOptions, RunReport, Summary,
};

use std::path::Path;

use crate::error::{Error, Result};

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
