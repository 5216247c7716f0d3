use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cavity_cat::scenario::{
    load_config, run_scenario_with, AlphaInput, Cutoffs, EffectiveInput, GridInput, HpInput,
    ProtocolKind, RunOptions, RunReport, ScenarioConfig, TimingInput, Tolerances,
};
use cavity_cat::{Error, Result};

#[derive(Parser)]
#[command(
    name = "cavity-cat",
    version,
    about = "Cavity-QED cat and compass state simulator"
)]
struct Cli {
    /// Directory for all output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Parse and validate only; run nothing.
    #[arg(long, global = true)]
    validate_only: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Cat-state generation and heralding.
    Cat(ProtocolArgs),
    /// Interferometric detection sweep.
    Detection(ProtocolArgs),
    /// Compass-state generation.
    Compass(ProtocolArgs),
    /// Exact vs Jaynes-Cummings convergence table.
    HpConvergence(ProtocolArgs),
    /// Wigner and Husimi grids.
    Wigner(ProtocolArgs),
}

/// Either a scenario file (its protocol is overridden) or inline
/// effective parameters; frequencies in Hz.
#[derive(Args)]
struct ProtocolArgs {
    config: Option<PathBuf>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    n_atoms: Option<usize>,
    #[arg(long, conflicts_with = "validity_ratio")]
    delta: Option<f64>,
    #[arg(long)]
    validity_ratio: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    alpha_phase: f64,
    #[arg(long)]
    delta_prime: Option<f64>,
    #[arg(long)]
    t_r: Option<f64>,
}

impl ProtocolArgs {
    fn into_config(self, protocol: ProtocolKind) -> Result<ScenarioConfig> {
        if let Some(path) = &self.config {
            let mut cfg = load_config(path)?;
            cfg.protocol = protocol;
            cfg.validate()?;
            return Ok(cfg);
        }
        let missing = |f: &str| Error::Validation {
            field: f.into(),
            message: "required without a scenario file".into(),
        };
        let cfg = ScenarioConfig {
            name: None,
            protocol,
            delta_prime: self.delta_prime,
            t_r: self.t_r,
            model: None,
            effective: Some(EffectiveInput {
                g: self.g.ok_or_else(|| missing("g"))?,
                n_atoms: self.n_atoms.ok_or_else(|| missing("n_atoms"))?,
                delta: self.delta,
                validity_ratio: self.validity_ratio,
            }),
            alpha: AlphaInput {
                magnitude: self.alpha,
                phase: self.alpha_phase,
            },
            timing: TimingInput::default(),
            sweep: None,
            cutoffs: Cutoffs::default(),
            tolerances: Tolerances::default(),
            hp: HpInput::default(),
            grid: GridInput::default(),
            outputs: Vec::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn summarize(report: &RunReport) {
    let d = &report.derived;
    println!(
        "{}: Δ = {:.6e} rad/s, g√N = {:.6e} rad/s, t* = {:.6e} s, t'' = {:.6e} s, ratio = {:.3e}",
        report.protocol.name(),
        d.delta,
        d.g_eff,
        d.t_star,
        d.t_double_prime,
        d.validity_ratio
    );
    println!(
        "{} point(s), {} failed, {:.2} s",
        report.points.len(),
        report.summary.failed_points,
        report.wall_clock_seconds
    );
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for p in &report.outputs {
        println!("wrote {}", p.display());
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match cli.command {
        Command::Run { config } => load_config(&config)?,
        Command::Cat(a) => a.into_config(ProtocolKind::Cat)?,
        Command::Detection(a) => a.into_config(ProtocolKind::Detection)?,
        Command::Compass(a) => a.into_config(ProtocolKind::Compass)?,
        Command::HpConvergence(a) => a.into_config(ProtocolKind::HpConvergence)?,
        Command::Wigner(a) => a.into_config(ProtocolKind::Wigner)?,
    };
    if cli.validate_only {
        println!(
            "valid: {} ({} run(s))",
            config.protocol.name(),
            config.run_count()
        );
        return Ok(());
    }
    let options = RunOptions {
        out_dir: cli.out_dir,
        threads: cli.threads,
        dry_run: false,
    };
    let report = run_scenario_with(&config, &options)?;
    summarize(&report);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
