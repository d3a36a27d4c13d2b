//! Network-level solvers: centralized TURA, the RSRP baseline, the CSC game
//! on its own, and the hybrid loop alternating per-group TURA with the CSC
//! game.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::crc::{run_crc, CrcConfig};
use crate::deployment::Deployment;
use crate::error::{invalid, Error, Result};
use crate::model::{self, InterferenceMode, RateTable};
use crate::params::ScenarioParams;
use crate::rng::{derive_seed, tag};
use crate::tura::{run_tura, QpsoConfig, TuraProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One centralized group over every RSC.
    Tura,
    /// Every RSC is its own CSC; only the game runs.
    Crc,
    /// Scenario grouping; per-group TURA alternating with the game.
    Harm,
    /// Max-RSRP association, QPSO for subchannels and power, no sleeping.
    Rura,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Tura, Mode::Crc, Mode::Harm, Mode::Rura];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Tura => "tura",
            Mode::Crc => "crc",
            Mode::Harm => "harm",
            Mode::Rura => "rura",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| invalid("mode", format!("unknown mode `{s}` (tura|crc|harm|rura)")))
    }
}

/// Scenario switches applied on top of the scenario parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFlags {
    /// RSCs without users may sleep.
    pub onoff_enabled: bool,
    pub fronthaul_limited: bool,
    /// Users may be moved off their max-RSRP RSC.
    pub traffic_control_enabled: bool,
}

impl Default for ScenarioFlags {
    fn default() -> Self {
        Self {
            onoff_enabled: true,
            fronthaul_limited: true,
            traffic_control_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmConfig {
    pub mode: Mode,
    pub max_outer_rounds: usize,
    /// Relative change of network EE between rounds that ends the loop.
    pub outer_conv_threshold: f64,
    pub flags: ScenarioFlags,
    pub crc: CrcConfig,
}

impl Default for HarmConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Harm,
            max_outer_rounds: 20,
            outer_conv_threshold: 1e-3,
            flags: ScenarioFlags::default(),
            crc: CrcConfig::default(),
        }
    }
}

impl HarmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_rounds < 1 {
            return Err(invalid("harm.max_outer_rounds", "must be at least 1"));
        }
        if !(self.outer_conv_threshold > 0.0) {
            return Err(invalid("harm.outer_conv_threshold", "must be positive"));
        }
        self.crc.validate()
    }

    /// Parameters and deployment the mode actually solves on.
    pub fn effective(&self, params: &ScenarioParams, depl: &Deployment) -> Result<(ScenarioParams, Deployment)> {
        let total = params.num_groups * params.num_rscs_per_group;
        let groups = match self.mode {
            Mode::Tura | Mode::Rura => 1,
            Mode::Crc => total,
            Mode::Harm => params.num_groups,
        };
        let mut p = params.regrouped(groups)?;
        p.sleep_enabled = params.sleep_enabled && self.flags.onoff_enabled && self.mode != Mode::Rura;
        p.fronthaul_limited = params.fronthaul_limited && self.flags.fronthaul_limited;
        Ok((p, depl.regrouped(groups)))
    }

    fn pinned(&self) -> bool {
        self.mode == Mode::Rura || !self.flags.traffic_control_enabled
    }
}

/// Per-run quality figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Delivered rate over total power, bit/J.
    pub ee: f64,
    /// Sum of per-group EE, bit/J.
    pub ee_group_sum: f64,
    pub outage_prob: f64,
    pub offload_prob: f64,
}

/// Exact-interference metrics of an allocation. Outage counts users whose
/// rate is below R_min; offloading counts users served by an RSC other than
/// their max-RSRP one.
pub fn network_metrics(params: &ScenarioParams, depl: &Deployment, alloc: &Allocation) -> Metrics {
    let d = alloc.dims;
    let ee = model::network_ee(params, depl, alloc);
    let rates = RateTable::compute(params, depl, alloc, InterferenceMode::Exact);
    let users = d.users.max(1) as f64;
    let outage = rates.user.iter().filter(|&&r| r < params.min_rate * (1.0 - model::SLACK)).count();
    let offloaded = (0..d.users)
        .filter(|&k| {
            alloc
                .serving_rsc(k)
                .is_some_and(|(c, s)| d.rsc(c, s) != depl.initial_rsc[k])
        })
        .count();
    Metrics {
        ee: ee.ratio,
        ee_group_sum: ee.sum_of_groups,
        outage_prob: outage as f64 / users,
        offload_prob: offloaded as f64 / users,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSolution {
    pub mode: Mode,
    /// Parameters the allocation was solved and is evaluated under.
    pub params: ScenarioParams,
    pub allocation: Allocation,
    /// Per-subchannel power bounds `[c][n]` the last TURA round ran under.
    pub bounds: Option<Vec<f64>>,
    /// Per-group EE, bit/J, exact interference.
    pub group_ee: Vec<f64>,
    pub metrics: Metrics,
    pub converged: bool,
    /// QPSO iterations (TURA, RURA), game rounds (CRC) or outer rounds (HARM).
    pub iterations: usize,
    /// Fitness per QPSO iteration, summed utility per game round, or
    /// network EE per outer round.
    pub trace: Vec<f64>,
}

fn solution(
    mode: Mode,
    params: ScenarioParams,
    depl: &Deployment,
    allocation: Allocation,
    bounds: Option<Vec<f64>>,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
) -> NetworkSolution {
    let d = allocation.dims;
    let rates = RateTable::compute(&params, depl, &allocation, InterferenceMode::Exact);
    let delivered = model::delivered_rates(&params, &rates);
    let power = model::power_breakdown(&params, depl, &allocation);
    let group_ee = (0..d.groups)
        .map(|c| {
            let r: f64 = (0..d.rscs_per_group).map(|s| delivered[d.rsc(c, s)]).sum();
            r / power.total_group[c]
        })
        .collect();
    let metrics = network_metrics(&params, depl, &allocation);
    NetworkSolution {
        mode,
        params,
        allocation,
        bounds,
        group_ee,
        metrics,
        converged,
        iterations,
        trace,
    }
}

/// QPSO seed of group `c` in outer round `round`; round 0 group 0 is shared
/// by centralized TURA so a one-group hybrid run repeats it exactly.
fn tura_seed(cfg: &QpsoConfig, round: usize, c: usize) -> QpsoConfig {
    let mut q = cfg.clone();
    if round > 0 || c > 0 {
        q.seed = derive_seed(cfg.seed, &[tag::HARM_ROUND, round as u64, c as u64]);
    }
    q
}

/// Best constructive allocation of every group on its own, merged.
fn heuristic_network(params: &ScenarioParams, depl: &Deployment, qpso: &QpsoConfig, pinned: bool) -> Allocation {
    let d = depl.dims;
    let mut net = Allocation::empty(d);
    for c in 0..d.groups {
        let prob = TuraProblem::new(params, depl, c).pinned(pinned);
        let best = prob
            .heuristic_allocations()
            .into_iter()
            .map(|a| {
                let f = prob.fitness(&prob.encode(&a), qpso.penalty_factor);
                (f, a)
            })
            .fold(None::<(f64, Allocation)>, |acc, (f, a)| match acc {
                Some((g, b)) if g >= f => Some((g, b)),
                _ => Some((f, a)),
            });
        if let Some((_, a)) = best {
            net.copy_group_from(&a, c);
        }
    }
    net
}

/// Closed-loop power control over a merged allocation. Groups decide
/// against believed foreign interference; once all decisions land, each
/// served user rescales its powers to reach its rate target (the minimum
/// rate, or its RSC's fair share of a tighter fronthaul cap) under the
/// interference actually present. RSC budgets and group subchannel bounds
/// are enforced by proportional scaling. Repeated until powers settle.
pub fn power_control(params: &ScenarioParams, depl: &Deployment, alloc: &mut Allocation, bounds: Option<&[f64]>) {
    let d = alloc.dims;
    let w = params.subchannel_bandwidth;
    for _ in 0..60 {
        let rates = RateTable::compute(params, depl, alloc, InterferenceMode::Exact);
        let before = alloc.power.clone();
        for m in 0..d.total_rscs() {
            let (c, s) = d.split_rsc(m);
            // (user, [(entry, power, gain over interference-plus-noise)])
            let served: Vec<(usize, Vec<(usize, f64, f64)>)> = (0..d.users)
                .filter(|&k| alloc.is_associated(c, s, k))
                .map(|k| {
                    let links = (0..d.subchannels)
                        .filter(|&n| alloc.effective_power(c, s, k, n) > 0.0)
                        .map(|n| {
                            let e = d.entry(c, s, k, n);
                            let p = alloc.power[e];
                            let sinr = (rates.entry[e] / w).exp2() - 1.0;
                            (e, p, sinr / p)
                        })
                        .collect::<Vec<_>>();
                    (k, links)
                })
                .filter(|(_, links)| !links.is_empty())
                .collect();
            if served.is_empty() {
                continue;
            }
            let cap = params.fronthaul_cap_of(m);
            if cap.is_infinite() {
                continue;
            }
            let target = params.min_rate.max(cap / served.len() as f64) * (1.0 + 0.1 * model::SLACK);
            for (_, links) in &served {
                let rate = |f: f64| -> f64 { links.iter().map(|&(_, p, g)| model::shannon_rate(w, f * p * g)).sum() };
                let total: f64 = links.iter().map(|l| l.1).sum();
                let f_max = params.max_tx_power / total;
                let f = if rate(f_max) <= target {
                    f_max
                } else {
                    let (mut lo, mut hi) = (0.0, f_max);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if rate(mid) >= target {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    hi
                };
                for &(e, p, _) in links {
                    alloc.power[e] = f * p;
                }
            }
            let spent: f64 = (0..d.users)
                .flat_map(|k| (0..d.subchannels).map(move |n| (k, n)))
                .map(|(k, n)| alloc.effective_power(c, s, k, n))
                .sum();
            if spent > params.max_tx_power {
                let scale = params.max_tx_power / spent;
                for (_, links) in &served {
                    for &(e, _, _) in links {
                        alloc.power[e] *= scale;
                    }
                }
            }
        }
        if let Some(b) = bounds {
            for c in 0..d.groups {
                for n in 0..d.subchannels {
                    let used: f64 = (0..d.rscs_per_group)
                        .flat_map(|s| (0..d.users).map(move |k| (s, k)))
                        .map(|(s, k)| alloc.effective_power(c, s, k, n))
                        .sum();
                    let bound = b[c * d.subchannels + n];
                    if used > bound {
                        for s in 0..d.rscs_per_group {
                            for k in 0..d.users {
                                alloc.power[d.entry(c, s, k, n)] *= bound / used;
                            }
                        }
                    }
                }
            }
        }
        let settled = before
            .iter()
            .zip(&alloc.power)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        if settled {
            break;
        }
    }
}

/// Power control kept only when it loses no user to outage and no EE.
pub fn polish(params: &ScenarioParams, depl: &Deployment, alloc: Allocation, bounds: Option<&[f64]>) -> Allocation {
    let mut tuned = alloc.clone();
    power_control(params, depl, &mut tuned, bounds);
    let before = network_metrics(params, depl, &alloc);
    let after = network_metrics(params, depl, &tuned);
    if after.outage_prob <= before.outage_prob && after.ee >= before.ee {
        tuned
    } else {
        alloc
    }
}

/// Solves one drop in the configured mode.
pub fn run_harm(params: &ScenarioParams, depl: &Deployment, qpso: &QpsoConfig, cfg: &HarmConfig) -> Result<NetworkSolution> {
    cfg.validate()?;
    qpso.validate()?;
    let (p, d) = cfg.effective(params, depl)?;
    p.validate()?;
    match cfg.mode {
        Mode::Tura | Mode::Rura => {
            let prob = TuraProblem::new(&p, &d, 0).pinned(cfg.pinned());
            let out = run_tura(&prob, &tura_seed(qpso, 0, 0), &[])?;
            let alloc = polish(&p, &d, out.allocation, None);
            Ok(solution(cfg.mode, p, &d, alloc, None, out.converged, out.iterations, out.trace))
        }
        Mode::Crc => {
            let start = heuristic_network(&p, &d, qpso, cfg.pinned());
            let out = run_crc(&p, &d, &start, &cfg.crc)?;
            let alloc = polish(&p, &d, out.allocation, Some(&out.bounds));
            Ok(solution(Mode::Crc, p, &d, alloc, Some(out.bounds), out.converged, out.iterations, out.trace))
        }
        Mode::Harm => hybrid(p, &d, qpso, cfg),
    }
}

fn hybrid(p: ScenarioParams, d: &Deployment, qpso: &QpsoConfig, cfg: &HarmConfig) -> Result<NetworkSolution> {
    let dims = d.dims;
    let pinned = cfg.pinned();
    let mut beliefs = heuristic_network(&p, d, qpso, pinned).effective_powers();
    let mut bounds: Option<Vec<f64>> = None;
    let mut previous: Option<Allocation> = None;
    let mut best: Option<(f64, Allocation, Option<Vec<f64>>)> = None;
    let mut trace = Vec::new();
    let mut converged = false;

    for round in 0..cfg.max_outer_rounds {
        let groups: Vec<Allocation> = (0..dims.groups)
            .into_par_iter()
            .map(|c| {
                let group_bounds = bounds.as_ref().map(|b| b.to_vec());
                let prob = TuraProblem::new(&p, d, c)
                    .pinned(pinned)
                    .with_beliefs(&beliefs)
                    .with_bounds(group_bounds);
                let warm: Vec<Allocation> = previous.iter().cloned().collect();
                run_tura(&prob, &tura_seed(qpso, round, c), &warm).map(|o| o.allocation)
            })
            .collect::<Result<_>>()?;
        let mut alloc = Allocation::empty(dims);
        for (c, g) in groups.iter().enumerate() {
            alloc.copy_group_from(g, c);
        }
        alloc = polish(&p, d, alloc, bounds.as_deref());
        let ee = model::network_ee(&p, d, &alloc).ratio;
        let last = trace.last().copied();
        trace.push(ee);
        if best.as_ref().is_none_or(|b| ee > b.0) {
            best = Some((ee, alloc.clone(), bounds.clone()));
        }
        // a single group has no opponents: the game cannot change anything
        if dims.groups == 1 {
            converged = true;
            break;
        }
        if let Some(prev) = last {
            if crate::crc::settled(prev, ee, cfg.outer_conv_threshold) {
                converged = true;
                break;
            }
        }
        let crc_cfg = CrcConfig {
            seed: derive_seed(cfg.crc.seed, &[tag::HARM_ROUND, round as u64]),
            ..cfg.crc.clone()
        };
        let game = run_crc(&p, d, &alloc, &crc_cfg)?;
        bounds = Some(game.bounds);
        beliefs = game.beliefs;
        previous = Some(alloc);
    }
    let rounds = trace.len();
    let (_, alloc, bounds) = best.expect("at least one round runs");
    Ok(solution(Mode::Harm, p, d, alloc, bounds, converged, rounds, trace))
}
