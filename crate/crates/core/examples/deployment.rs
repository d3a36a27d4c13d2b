//! A single drop: RSC grid, user positions, pathloss and the max-RSRP
//! association every mode starts from.
//!
//! cargo run --release --example deployment -- [seed]

use scn_harm::deployment::pathloss_db;
use scn_harm::{generate_deployment, ScenarioConfig};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(1);
    let params = ScenarioConfig {
        groups: 3,
        rscs_per_group: 2,
        users: 9,
        ..ScenarioConfig::default()
    }
    .resolve()?;
    let depl = generate_deployment(&params, seed)?;
    let d = depl.dims;

    for (m, p) in depl.rsc_pos.iter().enumerate() {
        let (c, s) = d.split_rsc(m);
        println!("rsc {m} (group {c}, slot {s}) at ({:5.1}, {:5.1})", p.x, p.y);
    }
    for (k, p) in depl.user_pos.iter().enumerate() {
        let m = depl.initial_rsc[k];
        let dist = p.distance(&depl.rsc_pos[m]);
        let (c, s) = d.split_rsc(m);
        let mean_gain: f64 = (0..d.subchannels).map(|n| depl.gain(c, s, k, n)).sum::<f64>() / d.subchannels as f64;
        println!(
            "user {k} at ({:5.1}, {:5.1}) -> rsc {m}, {dist:5.1} m, LoS pathloss {:.1} dB, mean gain {:.2e}",
            p.x,
            p.y,
            pathloss_db(dist, true, 0, params.pathloss_offset_db),
            mean_gain
        );
    }
    Ok(())
}
