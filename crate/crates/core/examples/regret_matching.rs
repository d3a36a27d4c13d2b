//! Regret-matching learners on a two-player game of chicken. Prints the
//! empirical joint distribution of play, which approaches the correlated
//! equilibrium set, and checks it against every CE inequality.
//!
//! cargo run --release --example regret_matching -- [rounds]

use scn_harm::crc::{MatrixGame, RegretLearner};
use scn_harm::oracle::verify_ce;

fn main() {
    let rounds: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    // actions: 0 = dare, 1 = chicken
    let game = MatrixGame::bimatrix(&[&[0.0, 7.0], &[2.0, 6.0]], &[&[0.0, 2.0], &[7.0, 6.0]]);

    let mut learner = RegretLearner::new(&game, &[1, 1], 0.0, 42);
    for _ in 0..rounds {
        learner.step(&game);
    }

    let mut dist = vec![0.0; game.num_profiles()];
    println!("joint play after {rounds} rounds:");
    for (profile, freq) in learner.state.empirical() {
        dist[game.rank(&profile)] = freq;
        println!("  {profile:?}  {freq:.3}");
    }
    println!("max average regret {:.2e}", learner.state.max_regret());
    println!("correlated equilibrium at 1e-2: {}", verify_ce(&game, &dist, 1e-2));
}
