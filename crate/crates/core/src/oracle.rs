//! Brute-force ground truth for tiny instances and a correlated-equilibrium
//! checker for small finite games.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::crc::MatrixGame;
use crate::deployment::Deployment;
use crate::error::{invalid, Error, Result};
use crate::model::{self, InterferenceMode, Scope};
use crate::params::ScenarioParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    /// Largest number of candidate allocations the oracle will visit.
    pub max_combinations: u128,
    /// Power levels per entry; level `l` is `l·P_max/levels`.
    pub power_levels: usize,
}

impl OracleLimits {
    pub fn for_params(params: &ScenarioParams) -> Self {
        Self {
            max_combinations: 10_000_000,
            power_levels: params.power_levels,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_combinations == 0 {
            return Err(invalid("oracle.max_combinations", "must be positive"));
        }
        if self.power_levels == 0 {
            return Err(invalid("oracle.power_levels", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub allocation: Allocation,
    /// Network EE with fronthaul-capped delivery, bit/J.
    pub ee: f64,
    /// False when no grid point satisfies every constraint; the allocation
    /// is then the best infeasible one.
    pub feasible: bool,
    pub visited: u128,
}

/// Number of candidate allocations: each user is unassociated or picks an
/// RSC and a level (0 = unused) on every subchannel.
pub fn search_size(params: &ScenarioParams, levels: usize) -> u128 {
    let d = params.dims();
    let per_rsc = (levels as u128 + 1).checked_pow(d.subchannels as u32);
    let per_user = per_rsc
        .and_then(|v| v.checked_mul(d.total_rscs() as u128))
        .and_then(|v| v.checked_add(1));
    per_user
        .and_then(|u| u.checked_pow(d.users as u32))
        .unwrap_or(u128::MAX)
}

/// Exhaustive maximizer of network EE over the discrete grid, preferring
/// feasible points. Refuses instances above the budget.
pub fn oracle_optimum(params: &ScenarioParams, depl: &Deployment, limits: &OracleLimits) -> Result<OracleResult> {
    limits.validate()?;
    let size = search_size(params, limits.power_levels);
    if size > limits.max_combinations {
        return Err(Error::OracleBudget {
            size,
            budget: limits.max_combinations,
        });
    }
    let d = params.dims();
    let levels = limits.power_levels;
    let per_rsc = (levels + 1).pow(d.subchannels as u32);
    let per_user = 1 + d.total_rscs() * per_rsc;
    let level_power = |l: usize| l as f64 * params.max_tx_power / levels as f64;

    // Decodes the per-user choice index into the allocation; false when two
    // users collide on an RSC subchannel or an RSC exceeds P_max.
    let place = |alloc: &mut Allocation, tx: &mut [f64], k: usize, choice: usize| -> bool {
        if choice == 0 {
            return true;
        }
        let m = (choice - 1) / per_rsc;
        let mut code = (choice - 1) % per_rsc;
        let (c, s) = d.split_rsc(m);
        alloc.associate(c, s, k);
        for n in 0..d.subchannels {
            let l = code % (levels + 1);
            code /= levels + 1;
            if l == 0 {
                continue;
            }
            if (0..d.users).any(|j| alloc.is_active(c, s, j, n)) {
                return false;
            }
            let p = level_power(l);
            tx[m] += p;
            if tx[m] > params.max_tx_power * (1.0 + 1e-12) {
                return false;
            }
            alloc.assign(c, s, k, n, p);
        }
        true
    };

    let total = per_user.pow(d.users as u32);
    // (feasible, ee, index) ordered so the max is the answer, ties to the
    // lowest index
    let best = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut alloc = Allocation::empty(d);
            let mut tx = vec![0.0; d.total_rscs()];
            let mut rem = idx;
            for k in 0..d.users {
                if !place(&mut alloc, &mut tx, k, rem % per_user) {
                    return None;
                }
                rem /= per_user;
            }
            let report = model::check_constraints(params, depl, &alloc, Scope::Network, InterferenceMode::Exact, None);
            let ee = model::network_ee(params, depl, &alloc).sum_of_groups;
            Some((report.feasible, ee, idx, alloc))
        })
        .reduce_with(|a, b| {
            let key_a = (a.0, a.1);
            let key_b = (b.0, b.1);
            let better_b = key_b.0 > key_a.0
                || (key_b.0 == key_a.0 && (key_b.1 > key_a.1 || (key_b.1 == key_a.1 && b.2 < a.2)));
            if better_b {
                b
            } else {
                a
            }
        });
    let (feasible, ee, _, allocation) = best.expect("the all-unassociated point is always valid");
    Ok(OracleResult {
        allocation,
        ee,
        feasible,
        visited: total as u128,
    })
}

/// Projects every active power to the nearest level of the grid (at least
/// level 1), lowering levels on RSCs pushed above P_max.
pub fn project_to_grid(params: &ScenarioParams, alloc: &Allocation, levels: usize) -> Allocation {
    let d = alloc.dims;
    let step = params.max_tx_power / levels as f64;
    let mut out = alloc.clone();
    for m in 0..d.total_rscs() {
        let (c, s) = d.split_rsc(m);
        let mut entries: Vec<(usize, usize, usize)> = Vec::new();
        for k in 0..d.users {
            for n in 0..d.subchannels {
                if alloc.is_active(c, s, k, n) {
                    let i = d.entry(c, s, k, n);
                    let l = ((alloc.power[i] / step).round() as usize).clamp(1, levels);
                    entries.push((k, n, l));
                }
            }
        }
        while entries.iter().map(|e| e.2).sum::<usize>() > levels {
            let (i, _) = entries
                .iter()
                .enumerate()
                .max_by_key(|(i, e)| (e.2, std::cmp::Reverse(*i)))
                .expect("sum above cap implies entries");
            if entries[i].2 > 1 {
                entries[i].2 -= 1;
            } else {
                let (k, n, _) = entries.remove(i);
                let e = d.entry(c, s, k, n);
                out.subch[e] = false;
                out.power[e] = 0.0;
            }
        }
        for (k, n, l) in entries {
            out.power[d.entry(c, s, k, n)] = l as f64 * step;
        }
    }
    out
}

/// Checks every correlated-equilibrium inequality of `dist` (a probability
/// per joint profile, row-major) within `tol`: no player gains in
/// expectation by mapping any recommended action to another.
pub fn verify_ce(game: &MatrixGame, dist: &[f64], tol: f64) -> bool {
    assert_eq!(dist.len(), game.num_profiles());
    for c in 0..game.actions.len() {
        for rec in 0..game.actions[c] {
            for dev in 0..game.actions[c] {
                if dev == rec {
                    continue;
                }
                let mut gain = 0.0;
                for (r, &pr) in dist.iter().enumerate() {
                    if pr == 0.0 {
                        continue;
                    }
                    let mut profile = game.unrank(r);
                    if profile[c] != rec {
                        continue;
                    }
                    let here = game.payoffs[c][r];
                    profile[c] = dev;
                    gain += pr * (game.payoffs[c][game.rank(&profile)] - here);
                }
                if gain > tol {
                    return false;
                }
            }
        }
    }
    true
}
