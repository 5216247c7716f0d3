//! Scenario file schema.
//!
//! Frequencies in scenario files are in Hz and converted to rad/s on use;
//! times are in seconds.

use std::f64::consts::TAU;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{derive_params, ModelParams, DEFAULT_DISPERSIVE_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Cat,
    Detection,
    Compass,
    HpConvergence,
    Wigner,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Cat => "cat",
            ProtocolKind::Detection => "detection",
            ProtocolKind::Compass => "compass",
            ProtocolKind::HpConvergence => "hp_convergence",
            ProtocolKind::Wigner => "wigner",
        }
    }
}

/// Level-scheme inputs, Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelInput {
    pub delta1: f64,
    pub delta2: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
    pub n_atoms: usize,
}

/// Effective inputs, Hz: `g` and either `delta` or a target validity
/// ratio at `n = |α|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectiveInput {
    pub g: f64,
    pub n_atoms: usize,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub validity_ratio: Option<f64>,
}

/// Complex amplitude as magnitude and phase (radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaInput {
    pub magnitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl AlphaInput {
    pub fn value(&self) -> C64 {
        C64::from_polar(self.magnitude, self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingInput {
    /// Cat generation time override, s; default `πΔ/2g²N`.
    pub t_star: Option<f64>,
    /// Single detection delay, s; default is a sweep over `periods`.
    pub delta_t: Option<f64>,
    pub periods: f64,
    pub samples_per_period: usize,
}

impl Default for TimingInput {
    fn default() -> Self {
        TimingInput {
            t_star: None,
            delta_t: None,
            periods: 1.0,
            samples_per_period: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepInput {
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub count: Option<usize>,
}

/// Parameters a sweep may vary.
pub const SWEEP_PARAMETERS: [&str; 6] = [
    "delta_t",
    "alpha",
    "t_star",
    "delta_prime",
    "n_atoms",
    "validity_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Cutoffs {
    pub atom_cutoff: Option<usize>,
    pub photon_cutoff: usize,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Cutoffs {
            atom_cutoff: None,
            photon_cutoff: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub dispersive_threshold: f64,
    pub leakage: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            dispersive_threshold: DEFAULT_DISPERSIVE_THRESHOLD,
            leakage: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HpInput {
    pub n_list: Vec<usize>,
    /// Evolution time, s; default `t*`.
    pub time: Option<f64>,
    pub match_coupling_sign: bool,
}

impl Default for HpInput {
    fn default() -> Self {
        HpInput {
            n_list: vec![50, 100, 200],
            time: None,
            match_coupling_sign: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridState {
    Cat,
    CatAnalytic,
    Compass,
    CompassAnalytic,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridInput {
    pub points: usize,
    /// Half-width in quadrature units; default `√2|α| + 4`.
    pub half_width: Option<f64>,
    pub state: GridState,
    pub branch: u8,
}

impl Default for GridInput {
    fn default() -> Self {
        GridInput {
            points: 201,
            half_width: None,
            state: GridState::Cat,
            branch: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// JSON run report.
    Report,
    /// Per-point CSV table.
    Table,
    /// Wigner grid as a CSV matrix.
    Wigner,
    /// Husimi grid as a CSV matrix.
    Husimi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub protocol: ProtocolKind,
    /// `Δ'`, Hz.
    #[serde(default)]
    pub delta_prime: Option<f64>,
    /// Condensate damping time `T_r`, s.
    #[serde(default)]
    pub t_r: Option<f64>,
    #[serde(default)]
    pub model: Option<ModelInput>,
    #[serde(default)]
    pub effective: Option<EffectiveInput>,
    pub alpha: AlphaInput,
    #[serde(default)]
    pub timing: TimingInput,
    #[serde(default)]
    pub sweep: Option<SweepInput>,
    #[serde(default)]
    pub cutoffs: Cutoffs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub hp: HpInput,
    #[serde(default)]
    pub grid: GridInput,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn backticked(message: &str) -> Option<String> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(message[start..start + len].to_string())
}

/// Parses and validates a scenario document.
///
/// Malformed TOML is a parse error carrying the line; schema violations
/// (unknown or missing keys, wrong types, bad values) are validation
/// errors naming the field.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    if let Err(e) = text.parse::<toml::Table>() {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        return Err(Error::Parse {
            line,
            message: e.message().trim().to_string(),
        });
    }
    let config: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let message = e.message().trim().to_string();
        let field = backticked(&message).unwrap_or_else(|| "scenario".into());
        let located = match e.span() {
            Some(s) => format!("{message} (line {})", line_of(text, s.start)),
            None => message,
        };
        Error::validation(field, located)
    })?;
    config.validate()?;
    Ok(config)
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be positive, got {v}"),
        ))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        match (&self.model, &self.effective) {
            (Some(m), None) => {
                finite("model.delta1", m.delta1)?;
                if m.delta1 == 0.0 {
                    return Err(Error::validation("model.delta1", "must be nonzero"));
                }
                finite("model.delta2", m.delta2)?;
                finite("model.omega_c", m.omega_c)?;
                finite("model.omega_rf", m.omega_rf)?;
                if m.n_atoms == 0 {
                    return Err(Error::validation("model.n_atoms", "must be at least 1"));
                }
            }
            (None, Some(e)) => {
                positive("effective.g", e.g)?;
                if e.n_atoms == 0 {
                    return Err(Error::validation("effective.n_atoms", "must be at least 1"));
                }
                match (e.delta, e.validity_ratio) {
                    (Some(d), None) => {
                        finite("effective.delta", d)?;
                        if d == 0.0 {
                            return Err(Error::validation("effective.delta", "must be nonzero"));
                        }
                    }
                    (None, Some(r)) => {
                        positive("effective.validity_ratio", r)?;
                        if self.alpha.magnitude == 0.0 {
                            return Err(Error::validation(
                                "effective.validity_ratio",
                                "needs a nonzero alpha to fix the excitation number",
                            ));
                        }
                    }
                    _ => {
                        return Err(Error::validation(
                            "effective",
                            "give exactly one of `delta` and `validity_ratio`",
                        ))
                    }
                }
            }
            _ => {
                return Err(Error::validation(
                    "model",
                    "give exactly one of the [model] and [effective] tables",
                ))
            }
        }
        if !(self.alpha.magnitude >= 0.0) || !self.alpha.magnitude.is_finite() {
            return Err(Error::validation(
                "alpha.magnitude",
                "must be finite and non-negative",
            ));
        }
        finite("alpha.phase", self.alpha.phase)?;
        if let Some(d) = self.delta_prime {
            finite("delta_prime", d)?;
        }
        if self.protocol == ProtocolKind::Detection && self.delta_prime.is_none() {
            return Err(Error::validation(
                "delta_prime",
                "required by the detection protocol",
            ));
        }
        if let Some(t) = self.t_r {
            positive("t_r", t)?;
        }
        if let Some(t) = self.timing.t_star {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::validation("timing.t_star", "must be non-negative"));
            }
        }
        if let Some(t) = self.timing.delta_t {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::validation("timing.delta_t", "must be non-negative"));
            }
        }
        positive("timing.periods", self.timing.periods)?;
        if self.timing.samples_per_period == 0 {
            return Err(Error::validation(
                "timing.samples_per_period",
                "must be at least 1",
            ));
        }
        if let Some(c) = self.cutoffs.atom_cutoff {
            if c == 0 {
                return Err(Error::validation(
                    "cutoffs.atom_cutoff",
                    "must be at least 1",
                ));
            }
        }
        if self.cutoffs.photon_cutoff == 0 {
            return Err(Error::validation(
                "cutoffs.photon_cutoff",
                "must be at least 1",
            ));
        }
        positive(
            "tolerances.dispersive_threshold",
            self.tolerances.dispersive_threshold,
        )?;
        positive("tolerances.leakage", self.tolerances.leakage)?;
        if self.protocol == ProtocolKind::HpConvergence {
            if self.hp.n_list.is_empty() || self.hp.n_list.contains(&0) {
                return Err(Error::validation(
                    "hp.n_list",
                    "needs at least one positive atom number",
                ));
            }
            if let Some(t) = self.hp.time {
                finite("hp.time", t)?;
            }
        }
        if self.grid.points < 2 {
            return Err(Error::validation("grid.points", "must be at least 2"));
        }
        if let Some(h) = self.grid.half_width {
            positive("grid.half_width", h)?;
        }
        if !matches!(self.grid.branch, 1 | 2) {
            return Err(Error::validation("grid.branch", "must be 1 or 2"));
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if o.path.as_os_str().is_empty() {
                return Err(Error::validation(
                    format!("outputs[{i}].path"),
                    "must not be empty",
                ));
            }
        }
        if let Some(s) = &self.sweep {
            self.validate_sweep(s)?;
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepInput) -> Result<()> {
        if !SWEEP_PARAMETERS.contains(&s.parameter.as_str()) {
            return Err(Error::validation(
                "sweep.parameter",
                format!(
                    "unknown parameter `{}`; expected one of {}",
                    s.parameter,
                    SWEEP_PARAMETERS.join(", ")
                ),
            ));
        }
        let applicable = match s.parameter.as_str() {
            "delta_t" | "delta_prime" => self.protocol == ProtocolKind::Detection,
            "t_star" => self.protocol == ProtocolKind::Cat,
            "validity_ratio" => self.effective.is_some(),
            _ => true,
        };
        if !applicable {
            return Err(Error::validation(
                "sweep.parameter",
                format!(
                    "`{}` cannot be swept for this scenario (protocol {})",
                    s.parameter,
                    self.protocol.name()
                ),
            ));
        }
        let values = s.values()?;
        if values.is_empty() {
            return Err(Error::validation("sweep.values", "sweep has no values"));
        }
        for v in &values {
            finite("sweep.values", *v)?;
            let ok = match s.parameter.as_str() {
                "n_atoms" => *v >= 1.0 && v.fract() == 0.0,
                "validity_ratio" => *v > 0.0,
                "alpha" | "delta_t" | "t_star" => *v >= 0.0,
                _ => true,
            };
            if !ok {
                return Err(Error::validation(
                    "sweep.values",
                    format!("value {v} is out of range for `{}`", s.parameter),
                ));
            }
        }
        Ok(())
    }

    /// Number of runs the scenario expands to.
    pub fn run_count(&self) -> usize {
        self.sweep
            .as_ref()
            .and_then(|s| s.values().ok())
            .map(|v| v.len())
            .unwrap_or(1)
    }

    /// One config per sweep point, with the swept value applied.
    pub fn expand(&self) -> Result<Vec<(Option<f64>, ScenarioConfig)>> {
        let Some(s) = &self.sweep else {
            return Ok(vec![(None, self.clone())]);
        };
        s.values()?
            .into_iter()
            .map(|v| {
                let mut c = self.clone();
                c.sweep = None;
                match s.parameter.as_str() {
                    "delta_t" => c.timing.delta_t = Some(v),
                    "alpha" => c.alpha.magnitude = v,
                    "t_star" => c.timing.t_star = Some(v),
                    "delta_prime" => c.delta_prime = Some(v),
                    "n_atoms" => match (&mut c.model, &mut c.effective) {
                        (Some(m), _) => m.n_atoms = v as usize,
                        (_, Some(e)) => e.n_atoms = v as usize,
                        _ => unreachable!("validated"),
                    },
                    "validity_ratio" => {
                        if let Some(e) = &mut c.effective {
                            e.validity_ratio = Some(v);
                            e.delta = None;
                        }
                    }
                    other => {
                        return Err(Error::validation(
                            "sweep.parameter",
                            format!("unknown parameter `{other}`"),
                        ))
                    }
                }
                c.validate()?;
                Ok((Some(v), c))
            })
            .collect()
    }

    /// Model parameters in rad/s.
    pub fn model_params(&self) -> Result<ModelParams> {
        match (&self.model, &self.effective) {
            (Some(m), _) => derive_params(
                TAU * m.delta1,
                TAU * m.delta2,
                TAU * m.omega_c,
                TAU * m.omega_rf,
                m.n_atoms,
            ),
            (_, Some(e)) => {
                let g = TAU * e.g;
                match (e.delta, e.validity_ratio) {
                    (Some(d), _) => ModelParams::with_effective(TAU * d, g, e.n_atoms),
                    (_, Some(r)) => ModelParams::for_dispersive_ratio(
                        g * (e.n_atoms as f64).sqrt(),
                        e.n_atoms,
                        self.alpha.magnitude.powi(2),
                        r,
                    ),
                    _ => Err(Error::validation("effective", "missing delta")),
                }
            }
            _ => Err(Error::validation("model", "missing model")),
        }
    }

    /// `Δ'` in rad/s.
    pub fn delta_prime_rad(&self) -> Option<f64> {
        self.delta_prime.map(|d| TAU * d)
    }
}

impl SweepInput {
    pub fn values(&self) -> Result<Vec<f64>> {
        match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Ok(Vec::new());
                }
                if n == 1 {
                    return Ok(vec![a]);
                }
                Ok((0..n)
                    .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
                    .collect())
            }
            _ => Err(Error::validation(
                "sweep",
                "give either `values` or all of `start`, `stop`, `count`",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
protocol = "cat"

[model]
delta1 = 1.0e6
delta2 = 5.0e6
omega_c = 1.0e4
omega_rf = 1.0e5
n_atoms = 10000

[alpha]
magnitude = 2.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.protocol, ProtocolKind::Cat);
        assert_eq!(c.tolerances.dispersive_threshold, 0.01);
        assert_eq!(c.cutoffs.atom_cutoff, None);
        assert_eq!(c.cutoffs.photon_cutoff, 4);
        assert_eq!(c.run_count(), 1);
        let p = c.model_params().unwrap();
        assert!((p.g - TAU * 1e3).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("omega_rf = 1.0e5", "omega_rf = 1.0e5\nomega_x = 3.0");
        match parse_config(&text) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "omega_x"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_line() {
        let text = "protocol = \"cat\"\n[model\ndelta1 = 1\n";
        match parse_config(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_expands_to_runs() {
        let text = MINIMAL.replace(
            "protocol = \"cat\"",
            "protocol = \"detection\"\ndelta_prime = 1.0e3",
        )
            + "\n[sweep]\nparameter = \"delta_t\"\nstart = 0.0\nstop = 1.0e-4\ncount = 64\n";
        let c = parse_config(&text).unwrap();
        assert_eq!(c.run_count(), 64);
        let runs = c.expand().unwrap();
        assert_eq!(runs.len(), 64);
        assert_eq!(runs[63].1.timing.delta_t, Some(1.0e-4));
    }

    #[test]
    fn sweep_parameter_must_exist() {
        let text = format!("{MINIMAL}\n[sweep]\nparameter = \"omega_q\"\nvalues = [1.0]\n");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Validation { ref field, .. }) if field == "sweep.parameter"
        ));
    }

    #[test]
    fn detection_needs_delta_prime() {
        let text = MINIMAL.replace("\"cat\"", "\"detection\"");
        assert!(matches!(
            parse_config(&text),
            Err(Error::Validation { ref field, .. }) if field == "delta_prime"
        ));
    }
}
