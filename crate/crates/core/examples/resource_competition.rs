//! The inter-group game on its own: every RSC is a player choosing
//! subchannel and power-level actions for its users, starting from the
//! constructive allocation. Prints the summed utility per round and the
//! per-subchannel power bounds the game hands back.
//!
//! cargo run --release --example resource_competition -- [users] [error ratio]

use scn_harm::crc::{run_crc, CrcConfig};
use scn_harm::harm::{network_metrics, polish};
use scn_harm::tura::TuraProblem;
use scn_harm::{generate_deployment, Allocation, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let users = args.next().and_then(|a| a.parse().ok()).unwrap_or(12);
    let rho = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let params = ScenarioConfig {
        groups: 6,
        rscs_per_group: 1,
        users,
        error_ratio: rho,
        ..ScenarioConfig::default()
    }
    .resolve()?;
    let depl = generate_deployment(&params, 11)?;

    // each one-RSC group starts from its own constructive allocation
    let mut start = Allocation::empty(depl.dims);
    for c in 0..depl.dims.groups {
        let problem = TuraProblem::new(&params, &depl, c);
        if let Some(a) = problem.heuristic_allocations().first() {
            start.copy_group_from(a, c);
        }
    }

    let out = run_crc(&params, &depl, &start, &CrcConfig::default())?;
    for (t, u) in out.trace.iter().enumerate() {
        println!("round {:3}  summed utility {:.4} Mbit/J", t + 1, u);
    }
    println!("converged {} after {} rounds, max regret {:.3e}", out.converged, out.iterations, out.max_regret);
    println!("selected actions {:?}", out.actions);

    let n = depl.dims.subchannels;
    for c in 0..depl.dims.groups {
        let used = out.bounds[c * n..(c + 1) * n].iter().filter(|&&b| b > 0.0).count();
        println!("group {c}: {used} of {n} subchannels bounded above zero");
    }
    let alloc = polish(&params, &depl, out.allocation, Some(&out.bounds));
    let m = network_metrics(&params, &depl, &alloc);
    println!("EE {:.4} Mbit/J  outage {:.3}", m.ee / 1e6, m.outage_prob);
    Ok(())
}
