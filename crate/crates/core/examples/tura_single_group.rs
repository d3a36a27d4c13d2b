//! Solve one centralized group with the swarm optimizer and print the
//! resulting association, per-user rates and EE.
//!
//! cargo run --release --example tura_single_group -- [users] [swarm] [iters]

use std::time::Instant;

use scn_harm::model::{network_ee, InterferenceMode, RateTable};
use scn_harm::tura::{run_tura, QpsoConfig, TuraProblem};
use scn_harm::{generate_deployment, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let users = args.first().copied().unwrap_or(12);
    let cfg = QpsoConfig {
        swarm_size: args.get(1).copied().unwrap_or(40),
        max_iters: args.get(2).copied().unwrap_or(600),
        ..QpsoConfig::default()
    };
    let params = ScenarioConfig {
        users,
        ..ScenarioConfig::default()
    }
    .resolve()?;
    let depl = generate_deployment(&params, 7)?;
    let problem = TuraProblem::new(&params, &depl, 0);

    let start = Instant::now();
    let out = run_tura(&problem, &cfg, &[])?;
    let elapsed = start.elapsed();

    let rates = RateTable::compute(&params, &depl, &out.allocation, InterferenceMode::Exact);
    for k in 0..params.num_users {
        let serving = out.allocation.serving_rsc(k).map(|(_, s)| s);
        println!(
            "user {k:2}: rsrp rsc {} serving {:?} rate {:6.2} Mbit/s",
            depl.initial_rsc[k],
            serving,
            rates.user[k] / 1e6
        );
    }
    let ee = network_ee(&params, &depl, &out.allocation);
    println!(
        "EE {:.4} Mbit/J  penalty {:.3e}  iterations {}  converged {}  {:.2?}",
        ee.ratio / 1e6,
        out.evaluation.penalty,
        out.iterations,
        out.converged,
        elapsed
    );
    println!(
        "best fitness: initial {:.5} final {:.5}",
        out.trace[0],
        out.trace.last().unwrap()
    );
    Ok(())
}
