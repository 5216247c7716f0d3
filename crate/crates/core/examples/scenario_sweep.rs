// Declarative scenarios: a TOML sweep over the validity ratio, run on a
// fixed thread pool, with the CSV table and JSON report written to a
// temporary directory.

use cavity_cat::scenario::{parse_config, run_scenario_with, PointResult, RunOptions};
use cavity_cat::Result;

const SCENARIO: &str = r#"
name = "ratio-sweep"
protocol = "cat"
t_r = 1.0

[effective]
g = 1.0e3
n_atoms = 10000
validity_ratio = 0.01

[alpha]
magnitude = 2.0

[sweep]
parameter = "validity_ratio"
values = [0.04, 0.01, 0.0025]
"#;

pub fn run_example() -> Result<()> {
    let config = parse_config(SCENARIO)?;
    let out_dir = std::env::temp_dir().join("cavity-cat-scenario-example");
    let report = run_scenario_with(
        &config,
        &RunOptions {
            out_dir: Some(out_dir),
            threads: Some(2),
            dry_run: false,
        },
    )?;
    for point in &report.points {
        if let Some(PointResult::Cat(c)) = &point.result {
            println!(
                "ratio {:?}: fidelities {:?}",
                point.sweep_value, c.fidelities
            );
        }
    }
    for path in &report.outputs {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
