//! One drop of a three-group network solved four ways: centralized TURA,
//! the RSRP baseline, pure resource competition and the hybrid scheme.
//!
//! cargo run --release --example compare_modes -- [users] [fronthaul Mbit/s]

use scn_harm::harm::{run_harm, HarmConfig, Mode};
use scn_harm::tura::QpsoConfig;
use scn_harm::{generate_deployment, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let params = ScenarioConfig {
        groups: 3,
        rscs_per_group: 2,
        users: args.first().map_or(12, |&k| k as usize),
        fronthaul_mbps: vec![args.get(1).copied().unwrap_or(30.0)],
        ..ScenarioConfig::default()
    }
    .resolve()?;
    let depl = generate_deployment(&params, 3)?;
    let qpso = QpsoConfig {
        swarm_size: 20,
        max_iters: 150,
        ..QpsoConfig::default()
    };

    println!("{:<6} {:>10} {:>8} {:>8} {:>6}", "mode", "EE Mbit/J", "outage", "offload", "iters");
    for mode in Mode::ALL {
        let cfg = HarmConfig { mode, ..HarmConfig::default() };
        let s = run_harm(&params, &depl, &qpso, &cfg)?;
        println!(
            "{:<6} {:>10.4} {:>8.3} {:>8.3} {:>6}",
            mode,
            s.metrics.ee / 1e6,
            s.metrics.outage_prob,
            s.metrics.offload_prob,
            s.iterations
        );
    }
    Ok(())
}
