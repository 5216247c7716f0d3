//! Scenario execution and output writing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{GridState, OutputKind, OutputSpec, ProtocolKind, ScenarioConfig};
use crate::analysis::{
    cat_lifetime, fidelity, fit_oscillation, hp_convergence_with, husimi, local_maxima,
    loglog_slope, rms, wigner, GridSpec, HpOptions, HpRow, LifetimeEstimate, Peak, PhaseSpaceGrid,
};
use crate::error::{Error, Result};
use crate::evolution::PropagatorOptions;
use crate::hamiltonians::{ModelParams, DEFAULT_MAX_DIM};
use crate::hilbert::{coherent_state_auto, StateVector};
use crate::protocols::{
    analytic_cat, analytic_compass, cat_norm_squared, cat_protocol_with, compass_protocol_with,
    detection_grid, detection_sweep, Branch, DetectionResult, ProtocolOptions, Undo,
};

/// Runtime knobs that do not belong in the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Directory receiving every output file (file names are kept).
    pub out_dir: Option<PathBuf>,
    /// Worker threads for sweep points; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Skip writing files.
    pub dry_run: bool,
}

/// Derived timing and coupling values for the base configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Derived {
    pub delta: f64,
    pub g: f64,
    pub g_eff: f64,
    /// `φ = g²N t*/Δ` for the configured `t*`.
    pub phi: f64,
    pub t_star: f64,
    pub t_prime: f64,
    pub t_double_prime: f64,
    /// `4g²Nn/Δ²` at `n = |α|²`.
    pub validity_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatSummary {
    pub t_star: f64,
    pub phi: f64,
    pub alpha_tilde: C64,
    pub validity_ratio: f64,
    /// Heralding probabilities of branches 1 and 2.
    pub probabilities: [f64; 2],
    /// `Ñ²/4` for branches 1 and 2.
    pub expected_probabilities: [f64; 2],
    /// Fidelity against the analytic cat; `None` for an unavailable branch.
    pub fidelities: [Option<f64>; 2],
    pub lifetime: Option<LifetimeEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub delta_prime: f64,
    pub rows: Vec<DetectionResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompassSummary {
    pub alpha_star: C64,
    pub t_double_prime: f64,
    pub fidelities: [f64; 2],
    /// `[seed][photon]` outcome probabilities.
    pub outcome_probabilities: [[f64; 2]; 2],
    /// Husimi maxima above half the global maximum, per branch.
    pub husimi_peaks: [Vec<Peak>; 2],
    /// Largest distance from an expected component to its nearest peak,
    /// relative to `|α*|`, per branch.
    pub peak_offsets: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HpSummary {
    pub time: f64,
    pub photon_cutoff: usize,
    pub rows: Vec<HpRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub state: GridState,
    pub branch: u8,
    pub wigner_integral: f64,
    pub wigner_min: f64,
    pub wigner_max: f64,
    pub husimi_peaks: Vec<Peak>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum PointResult {
    Cat(CatSummary),
    Detection(DetectionSummary),
    Compass(CompassSummary),
    HpConvergence(HpSummary),
    Wigner(GridSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointReport {
    pub index: usize,
    pub sweep_value: Option<f64>,
    pub result: Option<PointResult>,
    pub error: Option<String>,
    pub exit_code: Option<i32>,
    pub warnings: Vec<String>,
}

/// Aggregates across all points.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_rms_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_fitted_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_analytic_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_fit_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_infidelity_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hp_monotone: Option<bool>,
    pub failed_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: Option<String>,
    pub protocol: ProtocolKind,
    pub config: ScenarioConfig,
    pub derived: Derived,
    pub points: Vec<PointReport>,
    pub summary: Summary,
    pub warnings: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

struct PointOutcome {
    result: PointResult,
    warnings: Vec<String>,
    grids: Vec<PhaseSpaceGrid>,
}

fn protocol_options(cfg: &ScenarioConfig) -> ProtocolOptions {
    ProtocolOptions {
        atom_cutoff: cfg.cutoffs.atom_cutoff,
        dispersive_threshold: cfg.tolerances.dispersive_threshold,
        propagator: PropagatorOptions {
            leakage_tol: cfg.tolerances.leakage,
            ..Default::default()
        },
        frame_correction: true,
        max_dim: DEFAULT_MAX_DIM,
    }
}

fn configured_t_star(cfg: &ScenarioConfig, p: &ModelParams) -> Result<f64> {
    match cfg.timing.t_star {
        Some(t) => Ok(t),
        None => p.t_star(),
    }
}

/// Derived values for a configuration.
pub fn derive(cfg: &ScenarioConfig) -> Result<Derived> {
    let p = cfg.model_params()?;
    let t_star = configured_t_star(cfg, &p)?;
    Ok(Derived {
        delta: p.delta,
        g: p.g,
        g_eff: p.g_eff,
        phi: p.dispersive_phase(t_star)?,
        t_star,
        t_prime: p.t_star()?,
        t_double_prime: p.t_double_prime()?,
        validity_ratio: p.validity_ratio(cfg.alpha.magnitude.powi(2)),
    })
}

fn max_peak_offset(peaks: &[Peak], alpha_star: C64) -> f64 {
    let scale = alpha_star.norm().max(f64::MIN_POSITIVE);
    [1.0, -1.0, 3.0, -3.0]
        .iter()
        .map(|k| {
            let target = alpha_star * C64::from_polar(1.0, k * std::f64::consts::FRAC_PI_4);
            peaks
                .iter()
                .map(|p| (p.beta() - target).norm())
                .fold(f64::INFINITY, f64::min)
                / scale
        })
        .fold(0.0, f64::max)
}

fn grid_spec(cfg: &ScenarioConfig) -> GridSpec {
    let half = cfg
        .grid
        .half_width
        .unwrap_or(std::f64::consts::SQRT_2 * cfg.alpha.magnitude + 4.0);
    GridSpec::square(half, cfg.grid.points)
}

fn run_cat(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    let p = cfg.model_params()?;
    let t_star = configured_t_star(cfg, &p)?;
    let r = cat_protocol_with(&p, cfg.alpha.value(), t_star, &protocol_options(cfg))?;
    let mut warnings = r.warnings.clone();
    let mut fidelities = [None, None];
    for b in Branch::BOTH {
        if let (Ok(state), Ok(target)) = (r.branch(b), r.analytic(b)) {
            fidelities[b.index()] = Some(fidelity(state, &target)?);
        }
    }
    let lifetime = match cfg.t_r {
        Some(t_r) => match cat_lifetime(t_r, r.alpha_tilde) {
            Ok(l) => Some(l),
            Err(e) => {
                warnings.push(format!("lifetime not estimated: {e}"));
                None
            }
        },
        None => None,
    };
    let expected = Branch::BOTH.map(|b| cat_norm_squared(r.alpha_tilde, r.phi, b) / 4.0);
    Ok(PointOutcome {
        result: PointResult::Cat(CatSummary {
            t_star,
            phi: r.phi,
            alpha_tilde: r.alpha_tilde,
            validity_ratio: r.validity_ratio,
            probabilities: r.probabilities,
            expected_probabilities: expected,
            fidelities,
            lifetime,
        }),
        warnings,
        grids: Vec::new(),
    })
}

fn run_detection(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    let p = cfg.model_params()?;
    let alpha = cfg.alpha.value();
    let dp = cfg
        .delta_prime_rad()
        .ok_or_else(|| Error::validation("delta_prime", "required by the detection protocol"))?;
    let times = match cfg.timing.delta_t {
        Some(t) => vec![t],
        None => detection_grid(alpha, dp, cfg.timing.periods, cfg.timing.samples_per_period)?,
    };
    let opts = protocol_options(cfg);
    let mut warnings = Vec::new();
    let ratio = p.validity_ratio(alpha.norm_sqr());
    if !(ratio < opts.dispersive_threshold) && alpha.norm_sqr() > 0.0 {
        warnings.push(format!(
            "dispersive validity ratio {ratio:.4e} exceeds threshold {:.4e}",
            opts.dispersive_threshold
        ));
    }
    let rows = detection_sweep(&p, alpha, dp, &times, Undo::Forward, &opts)?;
    Ok(PointOutcome {
        result: PointResult::Detection(DetectionSummary {
            delta_prime: dp,
            rows,
        }),
        warnings,
        grids: Vec::new(),
    })
}

fn run_compass(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    let p = cfg.model_params()?;
    let r = compass_protocol_with(&p, cfg.alpha.value(), &protocol_options(cfg))?;
    let spec = grid_spec(cfg);
    let mut fidelities = [0.0; 2];
    let mut peaks: [Vec<Peak>; 2] = Default::default();
    let mut offsets = [0.0; 2];
    for b in Branch::BOTH {
        let i = b.index();
        fidelities[i] = fidelity(&r.branches[i], &r.analytic(b)?)?;
        let q = husimi(&r.branches[i], &spec)?;
        peaks[i] = local_maxima(&q, 0.5);
        offsets[i] = max_peak_offset(&peaks[i], r.alpha_star);
    }
    let probs = r
        .outcomes
        .clone()
        .map(|seed| seed.map(|o| o.map(|m| m.probability).unwrap_or(0.0)));
    Ok(PointOutcome {
        result: PointResult::Compass(CompassSummary {
            alpha_star: r.alpha_star,
            t_double_prime: r.t_double_prime,
            fidelities,
            outcome_probabilities: probs,
            husimi_peaks: peaks,
            peak_offsets: offsets,
        }),
        warnings: r.warnings,
        grids: Vec::new(),
    })
}

fn run_hp(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    let p = cfg.model_params()?;
    let time = match cfg.hp.time {
        Some(t) => t,
        None => configured_t_star(cfg, &p)?,
    };
    let opts = HpOptions {
        photon_cutoff: cfg.cutoffs.photon_cutoff,
        atom_cutoff: cfg.cutoffs.atom_cutoff,
        fixed_collective_coupling: true,
        match_coupling_sign: cfg.hp.match_coupling_sign,
        max_dim: DEFAULT_MAX_DIM,
    };
    let rows = hp_convergence_with(&cfg.hp.n_list, cfg.alpha.value(), &p, time, &opts)?;
    let warnings = rows
        .iter()
        .filter(|r| r.photon_leakage > cfg.tolerances.leakage)
        .map(|r| {
            format!(
                "N = {}: exact-model photon leakage {:.3e} exceeds {:.1e}",
                r.n_atoms, r.photon_leakage, cfg.tolerances.leakage
            )
        })
        .collect();
    Ok(PointOutcome {
        result: PointResult::HpConvergence(HpSummary {
            time,
            photon_cutoff: cfg.cutoffs.photon_cutoff,
            rows,
        }),
        warnings,
        grids: Vec::new(),
    })
}

fn grid_state(cfg: &ScenarioConfig) -> Result<(StateVector, Vec<String>)> {
    let p = cfg.model_params()?;
    let alpha = cfg.alpha.value();
    let branch = Branch::from_number(cfg.grid.branch)?;
    let opts = protocol_options(cfg);
    Ok(match cfg.grid.state {
        GridState::Coherent => (coherent_state_auto(alpha)?, Vec::new()),
        GridState::Cat => {
            let r = cat_protocol_with(&p, alpha, configured_t_star(cfg, &p)?, &opts)?;
            (r.branch(branch)?.clone(), r.warnings)
        }
        GridState::CatAnalytic => {
            let t = configured_t_star(cfg, &p)?;
            let at = alpha * C64::from_polar(1.0, -p.delta * t);
            (
                analytic_cat(at, p.dispersive_phase(t)?, branch)?,
                Vec::new(),
            )
        }
        GridState::Compass => {
            let r = compass_protocol_with(&p, alpha, &opts)?;
            (r.branches[branch.index()].clone(), r.warnings)
        }
        GridState::CompassAnalytic => {
            let t = p.t_star()? + p.t_double_prime()?;
            (
                analytic_compass(alpha * C64::from_polar(1.0, -p.delta * t), branch)?,
                Vec::new(),
            )
        }
    })
}

fn run_wigner(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    let (state, warnings) = grid_state(cfg)?;
    let spec = grid_spec(cfg);
    let w = wigner(&state, &spec)?;
    let q = husimi(&state, &spec)?;
    let summary = GridSummary {
        state: cfg.grid.state,
        branch: cfg.grid.branch,
        wigner_integral: w.integral(),
        wigner_min: w.min(),
        wigner_max: w.max(),
        husimi_peaks: local_maxima(&q, 0.5),
    };
    Ok(PointOutcome {
        result: PointResult::Wigner(summary),
        warnings,
        grids: vec![w, q],
    })
}

fn run_point(cfg: &ScenarioConfig) -> Result<PointOutcome> {
    match cfg.protocol {
        ProtocolKind::Cat => run_cat(cfg),
        ProtocolKind::Detection => run_detection(cfg),
        ProtocolKind::Compass => run_compass(cfg),
        ProtocolKind::HpConvergence => run_hp(cfg),
        ProtocolKind::Wigner => run_wigner(cfg),
    }
}

/// Runs a scenario with default options (global thread pool, declared
/// output paths).
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_with(config, &RunOptions::default())
}

pub fn run_scenario_with(config: &ScenarioConfig, options: &RunOptions) -> Result<RunReport> {
    let started = Instant::now();
    config.validate()?;
    let derived = derive(config)?;
    let points = config.expand()?;
    let work =
        || -> Vec<Result<PointOutcome>> { points.par_iter().map(|(_, c)| run_point(c)).collect() };
    let outcomes = match options.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Io(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let swept = config.sweep.is_some();
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut grids = Vec::new();
    let mut warnings = Vec::new();
    let mut first_error = None;
    for (index, ((value, _), outcome)) in points.iter().zip(outcomes).enumerate() {
        match outcome {
            Ok(o) => {
                warnings.extend(o.warnings.iter().map(|w| match value {
                    Some(v) => format!("point {index} ({v}): {w}"),
                    None => w.clone(),
                }));
                grids.push((index, o.grids));
                reports.push(PointReport {
                    index,
                    sweep_value: *value,
                    result: Some(o.result),
                    error: None,
                    exit_code: None,
                    warnings: o.warnings,
                });
            }
            Err(e) => {
                if !swept {
                    return Err(e);
                }
                log::warn!("sweep point {index} failed: {e}");
                reports.push(PointReport {
                    index,
                    sweep_value: *value,
                    result: None,
                    error: Some(e.to_string()),
                    exit_code: Some(e.exit_code()),
                    warnings: Vec::new(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = reports.iter().filter(|r| r.error.is_some()).count();
    if failed == reports.len() {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    let summary = summarize(config, &reports, failed);
    let mut report = RunReport {
        name: config.name.clone(),
        protocol: config.protocol,
        config: config.clone(),
        derived,
        points: reports,
        summary,
        warnings,
        outputs: Vec::new(),
        wall_clock_seconds: 0.0,
    };
    if !options.dry_run {
        report.outputs = write_outputs(config, options, &report, &grids)?;
    }
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    if !options.dry_run {
        if let Some(path) = report_path(config, options) {
            write_report(&path, &report)?;
        }
    }
    Ok(report)
}

fn detection_rows(reports: &[PointReport]) -> Vec<DetectionResult> {
    reports
        .iter()
        .filter_map(|r| match &r.result {
            Some(PointResult::Detection(d)) => Some(d.rows.clone()),
            _ => None,
        })
        .flatten()
        .collect()
}

fn summarize(config: &ScenarioConfig, reports: &[PointReport], failed: usize) -> Summary {
    let mut s = Summary {
        failed_points: failed,
        ..Default::default()
    };
    match config.protocol {
        ProtocolKind::Detection => {
            let rows = detection_rows(reports);
            let sim: Vec<f64> = rows.iter().map(|r| r.p1).collect();
            let ana: Vec<f64> = rows.iter().map(|r| r.p1_analytic).collect();
            s.p1_rms_residual = Some(rms(&sim, &ana));
            if let Some(dp) = config.delta_prime_rad() {
                s.p1_analytic_omega = Some(2.0 * config.alpha.magnitude.powi(2) * dp);
            }
            let times: Vec<f64> = rows.iter().map(|r| r.delta_t).collect();
            match fit_oscillation(&times, &sim) {
                Ok(f) => s.p1_fitted_omega = Some(f.omega),
                Err(e) => s.p1_fit_error = Some(e.to_string()),
            }
        }
        ProtocolKind::HpConvergence => {
            if let Some(Some(PointResult::HpConvergence(h))) =
                reports.first().map(|r| r.result.as_ref())
            {
                let xs: Vec<f64> = h.rows.iter().map(|r| r.excitation_fraction).collect();
                let ys: Vec<f64> = h.rows.iter().map(|r| r.infidelity).collect();
                s.hp_infidelity_slope = loglog_slope(&xs, &ys).ok();
                let mut sorted = h.rows.clone();
                sorted.sort_by_key(|r| r.n_atoms);
                s.hp_monotone = Some(sorted.windows(2).all(|w| w[1].fidelity >= w[0].fidelity));
            }
        }
        _ => {}
    }
    s
}

fn default_outputs(config: &ScenarioConfig) -> Vec<OutputSpec> {
    let mut out = vec![
        OutputSpec {
            kind: OutputKind::Report,
            path: "report.json".into(),
        },
        OutputSpec {
            kind: OutputKind::Table,
            path: match config.protocol {
                ProtocolKind::Wigner => "wigner_summary.csv".into(),
                other => format!("{}.csv", other.name()).into(),
            },
        },
    ];
    if config.protocol == ProtocolKind::Wigner {
        out.push(OutputSpec {
            kind: OutputKind::Wigner,
            path: "wigner.csv".into(),
        });
        out.push(OutputSpec {
            kind: OutputKind::Husimi,
            path: "husimi.csv".into(),
        });
    }
    out
}

fn resolve(path: &Path, options: &RunOptions) -> PathBuf {
    match &options.out_dir {
        Some(dir) => dir.join(path.file_name().unwrap_or(path.as_os_str())),
        None => path.to_path_buf(),
    }
}

fn outputs_of(config: &ScenarioConfig) -> Vec<OutputSpec> {
    if config.outputs.is_empty() {
        default_outputs(config)
    } else {
        config.outputs.clone()
    }
}

fn report_path(config: &ScenarioConfig, options: &RunOptions) -> Option<PathBuf> {
    outputs_of(config)
        .into_iter()
        .find(|o| o.kind == OutputKind::Report)
        .map(|o| resolve(&o.path, options))
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Error::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    Ok(())
}

fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    ensure_parent(path)?;
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn indexed(path: &Path, index: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("grid");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}_{index}.{ext}"))
}

fn write_outputs(
    config: &ScenarioConfig,
    options: &RunOptions,
    report: &RunReport,
    grids: &[(usize, Vec<PhaseSpaceGrid>)],
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let multi = grids.len() > 1;
    for spec in outputs_of(config) {
        let path = resolve(&spec.path, options);
        match spec.kind {
            OutputKind::Report => written.push(path),
            OutputKind::Table => {
                ensure_parent(&path)?;
                write_table(&path, config, report)?;
                written.push(path);
            }
            OutputKind::Wigner | OutputKind::Husimi => {
                let slot = if spec.kind == OutputKind::Wigner {
                    0
                } else {
                    1
                };
                for (index, g) in grids {
                    let Some(grid) = g.get(slot) else { continue };
                    let target = if multi {
                        indexed(&path, *index)
                    } else {
                        path.clone()
                    };
                    ensure_parent(&target)?;
                    write_grid(&target, grid)?;
                    written.push(target);
                }
            }
        }
    }
    Ok(written)
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn write_table(path: &Path, config: &ScenarioConfig, report: &RunReport) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let sweep_col: Option<String> = config.sweep.as_ref().map(|s| s.parameter.clone());
    let header: Vec<&str> = match config.protocol {
        ProtocolKind::Cat => vec![
            "t_star",
            "phi",
            "validity_ratio",
            "P_branch1",
            "P_branch2",
            "P_branch1_expected",
            "P_branch2_expected",
            "fidelity_branch1",
            "fidelity_branch2",
            "lifetime",
        ],
        ProtocolKind::Detection => vec!["delta_t", "P1_simulated", "P1_analytic"],
        ProtocolKind::Compass => vec![
            "fidelity_branch1",
            "fidelity_branch2",
            "peaks_branch1",
            "peaks_branch2",
            "peak_offset_branch1",
            "peak_offset_branch2",
        ],
        ProtocolKind::HpConvergence => vec![
            "n_atoms",
            "excitation_fraction",
            "fidelity",
            "infidelity",
            "photon_leakage",
        ],
        ProtocolKind::Wigner => vec![
            "wigner_integral",
            "wigner_min",
            "wigner_max",
            "husimi_peaks",
        ],
    };
    let mut full: Vec<String> = Vec::new();
    if let Some(c) = &sweep_col {
        if !header.contains(&c.as_str()) {
            full.push(c.clone());
        }
    }
    let lead = full.len();
    full.extend(header.iter().map(|s| s.to_string()));
    full.push("error".into());
    w.write_record(&full)?;
    for point in &report.points {
        let prefix: Vec<String> = if lead == 1 {
            vec![opt(point.sweep_value)]
        } else {
            Vec::new()
        };
        let mut rows: Vec<Vec<String>> = Vec::new();
        match &point.result {
            Some(PointResult::Cat(c)) => rows.push(vec![
                fmt(c.t_star),
                fmt(c.phi),
                fmt(c.validity_ratio),
                fmt(c.probabilities[0]),
                fmt(c.probabilities[1]),
                fmt(c.expected_probabilities[0]),
                fmt(c.expected_probabilities[1]),
                opt(c.fidelities[0]),
                opt(c.fidelities[1]),
                opt(c.lifetime.map(|l| l.t)),
            ]),
            Some(PointResult::Detection(d)) => {
                for r in &d.rows {
                    rows.push(vec![fmt(r.delta_t), fmt(r.p1), fmt(r.p1_analytic)]);
                }
            }
            Some(PointResult::Compass(c)) => rows.push(vec![
                fmt(c.fidelities[0]),
                fmt(c.fidelities[1]),
                c.husimi_peaks[0].len().to_string(),
                c.husimi_peaks[1].len().to_string(),
                fmt(c.peak_offsets[0]),
                fmt(c.peak_offsets[1]),
            ]),
            Some(PointResult::HpConvergence(h)) => {
                for r in &h.rows {
                    rows.push(vec![
                        r.n_atoms.to_string(),
                        fmt(r.excitation_fraction),
                        fmt(r.fidelity),
                        fmt(r.infidelity),
                        fmt(r.photon_leakage),
                    ]);
                }
            }
            Some(PointResult::Wigner(g)) => rows.push(vec![
                fmt(g.wigner_integral),
                fmt(g.wigner_min),
                fmt(g.wigner_max),
                g.husimi_peaks.len().to_string(),
            ]),
            None => {
                let mut blank = vec![String::new(); header.len()];
                if let Some(i) = sweep_col
                    .as_ref()
                    .and_then(|c| header.iter().position(|h| h == c))
                {
                    blank[i] = opt(point.sweep_value);
                }
                rows.push(blank);
            }
        }
        for row in rows {
            let mut rec = prefix.clone();
            rec.extend(row);
            rec.push(point.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV matrix: the header row holds the `x` axis, each following row
/// starts with its `p` value.
fn write_grid(path: &Path, grid: &PhaseSpaceGrid) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut header = vec!["p\\x".to_string()];
    header.extend(grid.x_axis.iter().map(|x| fmt(*x)));
    w.write_record(&header)?;
    for (j, p) in grid.p_axis.iter().enumerate() {
        let mut row = vec![fmt(*p)];
        row.extend((0..grid.x_axis.len()).map(|i| fmt(grid.values[(i, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
