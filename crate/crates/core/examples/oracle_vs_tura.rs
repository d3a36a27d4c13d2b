//! Exhaustive search against the swarm optimizer on tiny drops: two RSCs,
//! two users, two subchannels and three power levels.
//!
//! cargo run --release --example oracle_vs_tura -- [drops]

use scn_harm::model::network_ee;
use scn_harm::oracle::{oracle_optimum, search_size, OracleLimits};
use scn_harm::tura::{run_tura, QpsoConfig, TuraProblem};
use scn_harm::{generate_deployment, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let drops: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    let params = ScenarioConfig {
        rscs_per_group: 2,
        users: 2,
        subchannels: 2,
        // two 360 kHz subchannels cannot carry 10 Mbit/s
        min_rate_mbps: 1.0,
        ..ScenarioConfig::default()
    }
    .resolve()?;
    let limits = OracleLimits::for_params(&params);
    println!("{} grid points per drop", search_size(&params, limits.power_levels));

    for seed in 0..drops {
        let depl = generate_deployment(&params, seed)?;
        let best = oracle_optimum(&params, &depl, &limits)?;
        let problem = TuraProblem::new(&params, &depl, 0);
        let out = run_tura(&problem, &QpsoConfig { seed, ..QpsoConfig::default() }, &[])?;
        let ee = network_ee(&params, &depl, &out.allocation).sum_of_groups;
        println!(
            "drop {seed}: oracle {:.4} Mbit/J  swarm {:.4} Mbit/J  ratio {:.3}  feasible {}",
            best.ee / 1e6,
            ee / 1e6,
            ee / best.ee,
            out.evaluation.feasible
        );
    }
    Ok(())
}
