//! Lists the bundled experiment presets, then runs one with fewer drops
//! and a lighter swarm so it finishes in seconds.
//!
//! cargo run --release --example presets -- [preset] [drops]

use scn_harm::experiment::{aggregate, preset, run_experiment, PRESETS};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fig5".into());
    let drops = args.next().and_then(|a| a.parse().ok()).unwrap_or(3);

    for (key, _) in PRESETS {
        let p = preset(key)?;
        println!("{key:<6} {} arms over {} = {:?}", p.arms.len(), p.sweep.axis.name(), p.sweep.values);
    }

    let mut spec = preset(&name)?;
    spec.drops = drops;
    spec.qpso.swarm_size = 16;
    spec.qpso.max_iters = 80;
    let out = run_experiment(&spec)?;
    println!("\n{name}, {drops} drops:");
    for a in aggregate(&spec, &out.records) {
        println!(
            "  {}={:<5} {:<16} EE {:.4} Mbit/J  outage {:.3}  offload {:.3}",
            spec.sweep.axis.name(),
            a.sweep_value,
            a.mode,
            a.ee_mean / 1e6,
            a.outage_mean,
            a.offload_mean
        );
    }
    Ok(())
}
