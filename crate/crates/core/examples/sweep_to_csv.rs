//! Builds an experiment in code rather than TOML: RURA against TURA over
//! the number of users, a few drops each. Writes CSV and JSON and prints
//! the per-cell aggregates.
//!
//! cargo run --release --example sweep_to_csv -- [out dir]

use std::path::PathBuf;

use scn_harm::emit::{emit, Format};
use scn_harm::experiment::{aggregate, run_experiment, Arm, Axis, ExperimentSpec, Sweep};
use scn_harm::harm::{HarmConfig, Mode};
use scn_harm::tura::QpsoConfig;
use scn_harm::ScenarioConfig;

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    let spec = ExperimentSpec {
        name: "users-sweep".into(),
        seed: 2024,
        drops: 4,
        traces: false,
        scenario: ScenarioConfig::default(),
        qpso: QpsoConfig {
            swarm_size: 20,
            max_iters: 100,
            ..QpsoConfig::default()
        },
        harm: HarmConfig::default(),
        sweep: Sweep {
            axis: Axis::Users,
            values: vec![6.0, 9.0, 12.0],
        },
        arms: vec![Arm::plain(Mode::Rura), Arm::plain(Mode::Tura)],
    };
    spec.validate()?;

    let out = run_experiment(&spec)?;
    let csv = emit(&dir, &spec, &out.records, Format::Csv)?;
    let json = emit(&dir, &spec, &out.records, Format::Json)?;

    for a in aggregate(&spec, &out.records) {
        println!(
            "K={:<3} {:<5} EE {:.4}±{:.4} Mbit/J  outage {:.3}  offload {:.3}",
            a.sweep_value,
            a.mode,
            a.ee_mean / 1e6,
            a.ee_std / 1e6,
            a.outage_mean,
            a.offload_mean
        );
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}
