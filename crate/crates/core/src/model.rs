//! Radio and power model: interference, SINR, Shannon rates, the RSC power
//! composition with sleep and signalling overhead, energy efficiency and
//! constraint evaluation.
//!
//! Two routes compute rates. The per-target functions ([`interference`],
//! [`sinr`], [`rate`]) follow the interference sum term by term and are the
//! reference. [`RateTable`] computes every active rate at once by walking the
//! transmissions on each subchannel; it is what the solvers use, and the
//! tests pin it to the reference.

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::deployment::Deployment;
use crate::params::{Dims, ScenarioParams};

/// Which powers the inter-group interference term uses.
#[derive(Debug, Clone, Copy)]
pub enum InterferenceMode<'a> {
    /// The allocation's own powers everywhere.
    Exact,
    /// Other groups' powers replaced by a believed effective-power tensor
    /// (`[m][k][n]`, Φ·Ψ already folded in). Entries of the target's own
    /// group are ignored.
    Estimated(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Target {
    pub c: usize,
    pub s: usize,
    pub k: usize,
    pub n: usize,
}

impl Target {
    pub fn new(c: usize, s: usize, k: usize, n: usize) -> Self {
        Self { c, s, k, n }
    }
}

/// Interference seen by user `k` on subchannel `n` when served by `(c, s)`:
/// every transmission on `n` towards another user, from any RSC.
pub fn interference(
    depl: &Deployment,
    alloc: &Allocation,
    target: Target,
    mode: InterferenceMode<'_>,
) -> f64 {
    let d = alloc.dims;
    let Target { c, s: _, k, n } = target;
    let mut total = 0.0;
    for t in 0..d.groups {
        for i in 0..d.rscs_per_group {
            for j in 0..d.users {
                if j == k {
                    continue;
                }
                let p = match mode {
                    InterferenceMode::Estimated(believed) if t != c => {
                        believed[d.entry(t, i, j, n)]
                    }
                    _ => alloc.effective_power(t, i, j, n),
                };
                if p != 0.0 {
                    total += p * depl.gain(t, i, k, n);
                }
            }
        }
    }
    total
}

pub fn sinr(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    target: Target,
    mode: InterferenceMode<'_>,
) -> f64 {
    let Target { c, s, k, n } = target;
    let p = alloc.power[alloc.dims.entry(c, s, k, n)];
    if p == 0.0 {
        return 0.0;
    }
    let i = interference(depl, alloc, target, mode);
    p * depl.gain(c, s, k, n) / (i + params.noise_floor())
}

#[inline]
pub fn shannon_rate(bandwidth: f64, sinr: f64) -> f64 {
    bandwidth * (1.0 + sinr).log2()
}

pub fn rate(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    target: Target,
    mode: InterferenceMode<'_>,
) -> f64 {
    shannon_rate(
        params.subchannel_bandwidth,
        sinr(params, depl, alloc, target, mode),
    )
}

/// Sum rate of group `c`, reference route.
pub fn group_rate(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    c: usize,
    mode: InterferenceMode<'_>,
) -> f64 {
    let d = alloc.dims;
    let mut total = 0.0;
    for s in 0..d.rscs_per_group {
        for k in 0..d.users {
            if !alloc.is_associated(c, s, k) {
                continue;
            }
            for n in 0..d.subchannels {
                if alloc.is_active(c, s, k, n) {
                    total += rate(params, depl, alloc, Target::new(c, s, k, n), mode);
                }
            }
        }
    }
    total
}

/// Per-entry rates of every active transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    /// bit/s, `[m][k][n]`; zero where inactive.
    pub entry: Vec<f64>,
    /// bit/s per user, summed over all serving entries.
    pub user: Vec<f64>,
    /// bit/s per physical RSC.
    pub rsc: Vec<f64>,
}

impl RateTable {
    /// All rates of the allocation. In estimated mode each group's
    /// inter-group term comes from [`foreign_interference`].
    pub fn compute(
        params: &ScenarioParams,
        depl: &Deployment,
        alloc: &Allocation,
        mode: InterferenceMode<'_>,
    ) -> Self {
        let d = alloc.dims;
        let m_total = d.total_rscs();
        let noise = params.noise_floor();
        let w = params.subchannel_bandwidth;
        let mut entry = vec![0.0; d.num_entries()];
        let mut user = vec![0.0; d.users];
        let mut rsc = vec![0.0; m_total];

        if let InterferenceMode::Estimated(believed) = mode {
            let mut out = Self {
                entry,
                user,
                rsc,
            };
            for c in 0..d.groups {
                let foreign = foreign_interference(depl, believed, c);
                let part = Self::for_group(params, depl, alloc, c, &foreign);
                let m0 = d.rsc(c, 0);
                let m1 = m0 + d.rscs_per_group;
                let e0 = m0 * d.users * d.subchannels;
                let e1 = m1 * d.users * d.subchannels;
                out.entry[e0..e1].copy_from_slice(&part.entry[e0..e1]);
                out.rsc[m0..m1].copy_from_slice(&part.rsc[m0..m1]);
                for (u, v) in out.user.iter_mut().zip(&part.user) {
                    *u += v;
                }
            }
            return out;
        }

        // active transmissions per subchannel: (m, k, p)
        let mut active: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d.subchannels];
        for m in 0..m_total {
            for k in 0..d.users {
                let link = m * d.users + k;
                if !alloc.assoc[link] {
                    continue;
                }
                let base = link * d.subchannels;
                for (n, list) in active.iter_mut().enumerate() {
                    if alloc.subch[base + n] {
                        list.push((m, k, alloc.power[base + n]));
                    }
                }
            }
        }

        for (n, list) in active.iter().enumerate() {
            for &(m, k, p) in list {
                if p == 0.0 {
                    continue;
                }
                let mut interf = 0.0;
                for &(m2, k2, p2) in list {
                    if k2 != k {
                        interf += p2 * depl.gain_m(m2, k, n);
                    }
                }
                let g = depl.gain_m(m, k, n);
                let r = shannon_rate(w, p * g / (interf + noise));
                entry[(m * d.users + k) * d.subchannels + n] = r;
                user[k] += r;
                rsc[m] += r;
            }
        }
        Self { entry, user, rsc }
    }

    /// Rates of group `c` only, with the inter-group term supplied as a
    /// precomputed `[k][n]` interference tensor (see [`foreign_interference`]).
    /// Other groups' entries of the table stay zero.
    pub fn for_group(
        params: &ScenarioParams,
        depl: &Deployment,
        alloc: &Allocation,
        c: usize,
        foreign: &[f64],
    ) -> Self {
        let d = alloc.dims;
        let noise = params.noise_floor();
        let w = params.subchannel_bandwidth;
        let mut entry = vec![0.0; d.num_entries()];
        let mut user = vec![0.0; d.users];
        let mut rsc = vec![0.0; d.total_rscs()];
        let m0 = d.rsc(c, 0);
        let m1 = m0 + d.rscs_per_group;
        let mut active: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d.subchannels];
        for m in m0..m1 {
            for k in 0..d.users {
                let link = m * d.users + k;
                if !alloc.assoc[link] {
                    continue;
                }
                let base = link * d.subchannels;
                for (n, list) in active.iter_mut().enumerate() {
                    if alloc.subch[base + n] {
                        list.push((m, k, alloc.power[base + n]));
                    }
                }
            }
        }
        for (n, list) in active.iter().enumerate() {
            for &(m, k, p) in list {
                if p == 0.0 {
                    continue;
                }
                let mut interf = foreign[k * d.subchannels + n];
                for &(m2, k2, p2) in list {
                    if k2 != k {
                        interf += p2 * depl.gain_m(m2, k, n);
                    }
                }
                let r = shannon_rate(w, p * depl.gain_m(m, k, n) / (interf + noise));
                entry[(m * d.users + k) * d.subchannels + n] = r;
                user[k] += r;
                rsc[m] += r;
            }
        }
        Self { entry, user, rsc }
    }

    pub fn group_rate(&self, dims: &Dims, c: usize) -> f64 {
        (0..dims.rscs_per_group).map(|s| self.rsc[dims.rsc(c, s)]).sum()
    }
}

/// Inter-group interference seen by each user of group `c` on each
/// subchannel, `[k][n]`, when the other groups transmit the believed
/// effective powers `believed` (`[m][k][n]`).
pub fn foreign_interference(depl: &Deployment, believed: &[f64], c: usize) -> Vec<f64> {
    let d = depl.dims;
    let mut out = vec![0.0; d.users * d.subchannels];
    for m in 0..d.total_rscs() {
        if m / d.rscs_per_group == c {
            continue;
        }
        let mut totals = vec![0.0; d.subchannels];
        for j in 0..d.users {
            let base = (m * d.users + j) * d.subchannels;
            for n in 0..d.subchannels {
                totals[n] += believed[base + n];
            }
        }
        if totals.iter().all(|&t| t == 0.0) {
            continue;
        }
        for k in 0..d.users {
            let base = (m * d.users + k) * d.subchannels;
            for n in 0..d.subchannels {
                let foreign = totals[n] - believed[base + n];
                if foreign != 0.0 {
                    out[k * d.subchannels + n] += foreign * depl.gains[base + n];
                }
            }
        }
    }
    out
}

/// RSC power composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown {
    /// W per physical RSC
    pub tx: Vec<f64>,
    /// W per physical RSC
    pub tc_overhead: Vec<f64>,
    /// W per physical RSC (active or sleep)
    pub circuit: Vec<f64>,
    /// W per group
    pub total_group: Vec<f64>,
}

impl PowerBreakdown {
    pub fn total(&self) -> f64 {
        self.total_group.iter().sum()
    }

    pub fn rsc_total(&self, m: usize) -> f64 {
        self.tx[m] + self.tc_overhead[m] + self.circuit[m]
    }
}

/// Power per RSC: transmit power, signalling for users moved off their
/// initial RSC, and active circuit power; an RSC without users sleeps and
/// draws only the sleep circuit power (when sleeping is enabled).
pub fn power_breakdown(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
) -> PowerBreakdown {
    let d = alloc.dims;
    let m_total = d.total_rscs();
    let mut out = PowerBreakdown {
        tx: vec![0.0; m_total],
        tc_overhead: vec![0.0; m_total],
        circuit: vec![0.0; m_total],
        total_group: vec![0.0; d.groups],
    };
    for m in 0..m_total {
        let r = rsc_power(params, depl, alloc, m);
        out.tx[m] = r.tx;
        out.tc_overhead[m] = r.tc;
        out.circuit[m] = r.circuit;
        out.total_group[m / d.rscs_per_group] += r.total;
    }
    out
}

/// Total power of group `c` alone (same composition as [`power_breakdown`]).
pub fn group_power(params: &ScenarioParams, depl: &Deployment, alloc: &Allocation, c: usize) -> f64 {
    let d = alloc.dims;
    (0..d.rscs_per_group)
        .map(|s| rsc_power(params, depl, alloc, d.rsc(c, s)).total)
        .sum()
}

struct RscPower {
    tx: f64,
    tc: f64,
    circuit: f64,
    total: f64,
}

fn rsc_power(params: &ScenarioParams, depl: &Deployment, alloc: &Allocation, m: usize) -> RscPower {
    let d = alloc.dims;
    let mut users = 0usize;
    let mut tx = 0.0;
    let mut tc = 0.0;
    for k in 0..d.users {
        let link = m * d.users + k;
        if !alloc.assoc[link] {
            continue;
        }
        users += 1;
        if depl.initial_rsc[k] != m {
            tc += params.signaling_overhead;
        }
        let base = link * d.subchannels;
        for n in 0..d.subchannels {
            if alloc.subch[base + n] {
                tx += alloc.power[base + n];
            }
        }
    }
    if users > 0 || !params.sleep_enabled {
        RscPower {
            tx,
            tc,
            circuit: params.circuit_active,
            total: tx + tc + params.circuit_active,
        }
    } else {
        RscPower {
            tx,
            tc,
            circuit: params.circuit_sleep,
            total: params.circuit_sleep,
        }
    }
}

/// EE of group `c` in bit/J.
pub fn group_ee(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    c: usize,
    mode: InterferenceMode<'_>,
) -> f64 {
    let rates = RateTable::compute(params, depl, alloc, mode);
    let power = power_breakdown(params, depl, alloc);
    rates.group_rate(&alloc.dims, c) / power.total_group[c]
}

/// Network-wide EE figures, exact interference. Each RSC's delivered
/// rate is its air-interface rate capped by its fronthaul; traffic above
/// the cap never reaches the core and earns nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkEe {
    /// Sum of per-group EE, bit/J.
    pub sum_of_groups: f64,
    /// Delivered rate over total power, bit/J.
    pub ratio: f64,
    /// Air-interface rate, bit/s.
    pub total_rate: f64,
    pub delivered_rate: f64,
    pub total_power: f64,
}

/// Rate each RSC can forward, bit/s.
pub fn delivered_rates(params: &ScenarioParams, rates: &RateTable) -> Vec<f64> {
    rates
        .rsc
        .iter()
        .enumerate()
        .map(|(m, &r)| r.min(params.fronthaul_cap_of(m)))
        .collect()
}

pub fn network_ee(params: &ScenarioParams, depl: &Deployment, alloc: &Allocation) -> NetworkEe {
    let d = alloc.dims;
    let rates = RateTable::compute(params, depl, alloc, InterferenceMode::Exact);
    let power = power_breakdown(params, depl, alloc);
    let delivered = delivered_rates(params, &rates);
    let sum_of_groups = (0..d.groups)
        .map(|c| {
            let r: f64 = (0..d.rscs_per_group).map(|s| delivered[d.rsc(c, s)]).sum();
            r / power.total_group[c]
        })
        .sum();
    let delivered_rate: f64 = delivered.iter().sum();
    let total_power = power.total();
    NetworkEe {
        sum_of_groups,
        ratio: delivered_rate / total_power,
        total_rate: rates.rsc.iter().sum(),
        delivered_rate,
        total_power,
    }
}

/// Constraint scope: the whole network or one group's RSCs and users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Network,
    Group(usize),
}

/// Violation magnitudes. Binary association/assignment is enforced by the
/// [`Allocation`] type itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// W over the per-RSC transmit cap, per physical RSC.
    pub tx_excess: Vec<f64>,
    /// bit/s short of the minimum rate, per user.
    pub rate_deficit: Vec<f64>,
    /// bit/s over the fronthaul cap, per physical RSC.
    pub fronthaul_excess: Vec<f64>,
    /// Associations beyond one, per user.
    pub assoc_excess: Vec<f64>,
    /// Users beyond one per (RSC, subchannel), `[m][n]`.
    pub subch_excess: Vec<f64>,
    /// Magnitude of negative powers, summed.
    pub negative_power: f64,
    /// W over the per-subchannel group bound, `[c][n]`; empty without bounds.
    pub bound_excess: Vec<f64>,
    pub feasible: bool,
}

impl ConstraintReport {
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.tx_excess
            .iter()
            .chain(&self.rate_deficit)
            .chain(&self.fronthaul_excess)
            .chain(&self.assoc_excess)
            .chain(&self.subch_excess)
            .chain(std::iter::once(&self.negative_power))
            .chain(&self.bound_excess)
            .copied()
    }
}

/// Per-subchannel group power bounds P̄, `[c][n]` in W.
pub type PowerBounds = Vec<f64>;

pub fn check_constraints(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    scope: Scope,
    mode: InterferenceMode<'_>,
    bounds: Option<&[f64]>,
) -> ConstraintReport {
    let rates = RateTable::compute(params, depl, alloc, mode);
    check_with_rates(params, depl, alloc, &rates, scope, bounds)
}

/// Relative slack on the continuous constraints. A user at exactly the
/// minimum rate behind a fronthaul cap of an integer multiple of it is
/// feasible only at a single point, which floating point cannot hit.
pub const SLACK: f64 = 1e-9;

pub fn check_with_rates(
    params: &ScenarioParams,
    depl: &Deployment,
    alloc: &Allocation,
    rates: &RateTable,
    scope: Scope,
    bounds: Option<&[f64]>,
) -> ConstraintReport {
    let d = alloc.dims;
    let m_total = d.total_rscs();
    let in_group = |m: usize| match scope {
        Scope::Network => true,
        Scope::Group(c) => m / d.rscs_per_group == c,
    };
    let user_in_scope = |k: usize| match scope {
        Scope::Network => true,
        Scope::Group(c) => depl.home_group(k) == c,
    };

    let mut tx_excess = vec![0.0; m_total];
    let mut fronthaul_excess = vec![0.0; m_total];
    let mut subch_excess = vec![0.0; m_total * d.subchannels];
    let mut negative_power = 0.0;
    for m in 0..m_total {
        if !in_group(m) {
            continue;
        }
        let (c, s) = d.split_rsc(m);
        let mut tx = 0.0;
        for k in 0..d.users {
            for n in 0..d.subchannels {
                let p = alloc.power[d.entry(c, s, k, n)];
                if p < 0.0 {
                    negative_power += -p;
                }
                tx += alloc.effective_power(c, s, k, n);
            }
        }
        tx_excess[m] = (tx - params.max_tx_power * (1.0 + SLACK)).max(0.0);
        fronthaul_excess[m] = (rates.rsc[m] - params.fronthaul_cap_of(m) * (1.0 + SLACK)).max(0.0);
        for n in 0..d.subchannels {
            let users = (0..d.users)
                .filter(|&k| alloc.subch[d.entry(c, s, k, n)])
                .count();
            subch_excess[m * d.subchannels + n] = (users as f64 - 1.0).max(0.0);
        }
    }

    let mut rate_deficit = vec![0.0; d.users];
    let mut assoc_excess = vec![0.0; d.users];
    for k in 0..d.users {
        if !user_in_scope(k) {
            continue;
        }
        rate_deficit[k] = (params.min_rate * (1.0 - SLACK) - rates.user[k]).max(0.0);
        let count = (0..m_total)
            .filter(|&m| in_group(m) && alloc.assoc[m * d.users + k])
            .count();
        assoc_excess[k] = (count as f64 - 1.0).max(0.0);
    }

    let bound_excess = match bounds {
        None => Vec::new(),
        Some(b) => {
            let mut out = vec![0.0; d.groups * d.subchannels];
            for c in 0..d.groups {
                if let Scope::Group(only) = scope {
                    if only != c {
                        continue;
                    }
                }
                for n in 0..d.subchannels {
                    let mut used = 0.0;
                    for s in 0..d.rscs_per_group {
                        for k in 0..d.users {
                            used += alloc.effective_power(c, s, k, n);
                        }
                    }
                    out[c * d.subchannels + n] = (used - b[c * d.subchannels + n] * (1.0 + SLACK)).max(0.0);
                }
            }
            out
        }
    };

    let mut report = ConstraintReport {
        tx_excess,
        rate_deficit,
        fronthaul_excess,
        assoc_excess,
        subch_excess,
        negative_power,
        bound_excess,
        feasible: false,
    };
    let feasible = report.magnitudes().all(|v| v == 0.0);
    report.feasible = feasible;
    report
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::deployment::generate_deployment;
    use crate::params::dbm_to_watts;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn tiny_params(s: usize, k: usize, n: usize) -> ScenarioParams {
        ScenarioParams {
            num_rscs_per_group: s,
            num_users: k,
            num_subchannels: n,
            ..ScenarioParams::default()
        }
    }

    /// Random well-formed allocation touching every group.
    pub(crate) fn random_allocation(dims: Dims, seed: u64, max_power: f64) -> Allocation {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Allocation::empty(dims);
        let mut taken = vec![false; dims.total_rscs() * dims.subchannels];
        for k in 0..dims.users {
            if rng.gen_bool(0.1) {
                continue;
            }
            let m = rng.gen_range(0..dims.total_rscs());
            let (c, s) = dims.split_rsc(m);
            a.associate(c, s, k);
            for n in 0..dims.subchannels {
                if !taken[m * dims.subchannels + n] && rng.gen_bool(0.4) {
                    taken[m * dims.subchannels + n] = true;
                    a.assign(c, s, k, n, rng.gen_range(0.0..max_power));
                }
            }
        }
        a
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn lone_user_sees_no_interference() {
        let p = tiny_params(1, 1, 1);
        let depl = Deployment::from_gains(p.dims(), vec![1e-9], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.05);
        let t = Target::new(0, 0, 0, 0);
        assert_eq!(interference(&depl, &a, t, InterferenceMode::Exact), 0.0);
    }

    #[test]
    fn two_rsc_cross_term() {
        let p = tiny_params(2, 2, 1);
        let depl = Deployment::from_gains(p.dims(), vec![1.0; 4], vec![0, 1]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.1);
        a.associate(0, 1, 1);
        a.assign(0, 1, 1, 0, 0.2);
        let i0 = interference(&depl, &a, Target::new(0, 0, 0, 0), InterferenceMode::Exact);
        assert!((i0 - 0.2).abs() < 1e-15);
        let i1 = interference(&depl, &a, Target::new(0, 1, 1, 0), InterferenceMode::Exact);
        assert!((i1 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn noise_floor_and_reference_rates() {
        let p = ScenarioParams::default();
        assert!((p.noise_floor() / 1.433e-15 - 1.0).abs() < 1e-3);
        assert_eq!(shannon_rate(360e3, 0.0), 0.0);
        assert!((shannon_rate(360e3, 1.0) - 360e3).abs() < 1e-6);
        assert!((shannon_rate(360e3, 3.0) - 720e3).abs() < 1e-6);
    }

    #[test]
    fn unit_sinr_when_signal_equals_noise() {
        let p = tiny_params(1, 1, 1);
        let g = p.noise_floor() / 0.1;
        let depl = Deployment::from_gains(p.dims(), vec![g], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.1);
        let t = Target::new(0, 0, 0, 0);
        let snr = sinr(&p, &depl, &a, t, InterferenceMode::Exact);
        assert!((snr - 1.0).abs() < 1e-12);
        a.power[0] = 0.0;
        assert_eq!(sinr(&p, &depl, &a, t, InterferenceMode::Exact), 0.0);
    }

    #[test]
    fn group_rate_sums_disjoint_users() {
        let p = tiny_params(1, 2, 2);
        let nf = p.noise_floor();
        // user 0 on subchannel 0 at SINR 1, user 1 on subchannel 1 at SINR 3
        let mut gains = vec![1e-12; 4];
        gains[0] = nf / 0.1;
        gains[3] = 3.0 * nf / 0.1;
        let depl = Deployment::from_gains(p.dims(), gains, vec![0, 0]);
        let mut a = Allocation::empty(p.dims());
        assert_eq!(group_rate(&p, &depl, &a, 0, InterferenceMode::Exact), 0.0);
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.1);
        a.associate(0, 0, 1);
        a.assign(0, 0, 1, 1, 0.1);
        let r = group_rate(&p, &depl, &a, 0, InterferenceMode::Exact);
        assert!((r - 3.0 * 360e3).abs() < 1e-3, "{r}");
    }

    #[test]
    fn estimated_with_true_powers_matches_exact() {
        let params = ScenarioParams {
            num_groups: 2,
            num_rscs_per_group: 2,
            num_users: 6,
            num_subchannels: 4,
            ..ScenarioParams::default()
        };
        let depl = generate_deployment(&params, 5).unwrap();
        for seed in 0..20 {
            let a = random_allocation(params.dims(), seed, params.max_tx_power / 4.0);
            let believed = a.effective_powers();
            let d = a.dims;
            for m in 0..d.total_rscs() {
                let (c, s) = d.split_rsc(m);
                for k in 0..d.users {
                    for n in 0..d.subchannels {
                        let t = Target::new(c, s, k, n);
                        let exact = interference(&depl, &a, t, InterferenceMode::Exact);
                        let est =
                            interference(&depl, &a, t, InterferenceMode::Estimated(&believed));
                        assert!(close(exact, est));
                    }
                }
            }
            let exact = RateTable::compute(&params, &depl, &a, InterferenceMode::Exact);
            let est =
                RateTable::compute(&params, &depl, &a, InterferenceMode::Estimated(&believed));
            for (x, y) in exact.entry.iter().zip(&est.entry) {
                assert!(close(*x, *y));
            }
        }
    }

    #[test]
    fn rate_table_matches_reference() {
        let params = ScenarioParams {
            num_groups: 2,
            num_rscs_per_group: 2,
            num_users: 5,
            num_subchannels: 3,
            ..ScenarioParams::default()
        };
        let depl = generate_deployment(&params, 9).unwrap();
        for seed in 0..20 {
            let a = random_allocation(params.dims(), seed, 0.03);
            let believed = random_allocation(params.dims(), seed + 100, 0.03).effective_powers();
            for mode in [InterferenceMode::Exact, InterferenceMode::Estimated(&believed)] {
                let table = RateTable::compute(&params, &depl, &a, mode);
                let d = a.dims;
                for m in 0..d.total_rscs() {
                    let (c, s) = d.split_rsc(m);
                    for k in 0..d.users {
                        for n in 0..d.subchannels {
                            let want = if a.is_active(c, s, k, n) {
                                rate(&params, &depl, &a, Target::new(c, s, k, n), mode)
                            } else {
                                0.0
                            };
                            assert!(close(want, table.entry[d.entry(c, s, k, n)]));
                        }
                    }
                }
                for c in 0..d.groups {
                    let want = group_rate(&params, &depl, &a, c, mode);
                    assert!(close(want, table.group_rate(&d, c)));
                }
            }
            for c in 0..2 {
                let foreign = foreign_interference(&depl, &believed, c);
                let fast = RateTable::for_group(&params, &depl, &a, c, &foreign);
                let full = RateTable::compute(
                    &params,
                    &depl,
                    &a,
                    InterferenceMode::Estimated(&believed),
                );
                let d = a.dims;
                assert!(close(fast.group_rate(&d, c), full.group_rate(&d, c)));
            }
        }
    }

    #[test]
    fn idle_rsc_sleeps() {
        let p = tiny_params(2, 1, 1);
        let depl = Deployment::from_gains(p.dims(), vec![1e-9, 1e-10], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.05);
        let pb = power_breakdown(&p, &depl, &a);
        assert!((pb.rsc_total(1) - 4.3).abs() < 1e-12);
        assert_eq!(pb.tc_overhead[0], 0.0);
        assert!((pb.total() - (0.05 + 6.8 + 4.3)).abs() < 1e-12);

        let on = ScenarioParams {
            sleep_enabled: false,
            ..p.clone()
        };
        let always = power_breakdown(&on, &depl, &a);
        assert!((always.total() - pb.total() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn offloaded_user_costs_signalling() {
        let p = tiny_params(2, 1, 1);
        let depl = Deployment::from_gains(p.dims(), vec![1e-9, 1e-10], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 1, 0);
        let pb = power_breakdown(&p, &depl, &a);
        assert!((pb.tc_overhead[1] - 1.259e-3).abs() < 1e-6);
        assert!((dbm_to_watts(1.0) - pb.tc_overhead[1]).abs() < 1e-15);
    }

    #[test]
    fn ee_of_empty_allocation_is_zero() {
        let p = tiny_params(2, 2, 2);
        let depl = generate_deployment(&p, 1).unwrap();
        let a = Allocation::empty(p.dims());
        assert_eq!(group_ee(&p, &depl, &a, 0, InterferenceMode::Exact), 0.0);
        let ne = network_ee(&p, &depl, &a);
        assert_eq!(ne.ratio, 0.0);
        assert!((ne.total_power - 8.6).abs() < 1e-12);
    }

    #[test]
    fn zero_allocation_violates_only_rates() {
        let p = tiny_params(2, 2, 2);
        let depl = generate_deployment(&p, 1).unwrap();
        let a = Allocation::empty(p.dims());
        let r = check_constraints(&p, &depl, &a, Scope::Network, InterferenceMode::Exact, None);
        assert!(!r.feasible);
        assert!(r.rate_deficit.iter().all(|&v| v == p.min_rate * (1.0 - SLACK)));
        assert!(r.tx_excess.iter().all(|&v| v == 0.0));
        assert!(r.fronthaul_excess.iter().all(|&v| v == 0.0));
        assert!(r.assoc_excess.iter().all(|&v| v == 0.0));
        assert!(r.subch_excess.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tx_excess_magnitude() {
        let p = tiny_params(1, 1, 2);
        let depl = Deployment::from_gains(p.dims(), vec![1e-9; 2], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, p.max_tx_power / 2.0);
        a.assign(0, 0, 0, 1, p.max_tx_power / 2.0 + 0.01);
        let r = check_constraints(&p, &depl, &a, Scope::Network, InterferenceMode::Exact, None);
        assert!((r.tx_excess[0] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn hand_built_feasible_instance() {
        let p = ScenarioParams {
            min_rate: 1e6,
            ..tiny_params(2, 2, 2)
        };
        let g = 1e-9;
        let mut gains = vec![1e-14; 8];
        gains[p.dims().entry(0, 0, 0, 0)] = g;
        gains[p.dims().entry(0, 1, 1, 1)] = g;
        let depl = Deployment::from_gains(p.dims(), gains, vec![0, 1]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.01);
        a.associate(0, 1, 1);
        a.assign(0, 1, 1, 1, 0.01);
        assert!(a.is_well_formed());
        let bounds = vec![0.02; 2];
        let r = check_constraints(
            &p,
            &depl,
            &a,
            Scope::Network,
            InterferenceMode::Exact,
            Some(&bounds),
        );
        assert!(r.feasible, "{r:?}");
        assert!(r.magnitudes().all(|v| v == 0.0));

        let tight = vec![0.005; 2];
        let r = check_constraints(
            &p,
            &depl,
            &a,
            Scope::Network,
            InterferenceMode::Exact,
            Some(&tight),
        );
        assert!(!r.feasible);
        assert!((r.bound_excess[0] - 0.005).abs() < 1e-9);
    }

    #[test]
    fn rate_exactly_at_a_shared_cap_is_feasible() {
        // two users at exactly the minimum rate behind a cap of twice it
        let p = ScenarioParams {
            fronthaul_cap: vec![2e6],
            min_rate: 1e6,
            ..tiny_params(1, 2, 2)
        };
        let g = 1e-9;
        let depl = Deployment::from_gains(p.dims(), vec![g; 4], vec![0, 0]);
        let sinr = (p.min_rate / p.subchannel_bandwidth).exp2() - 1.0;
        let power = sinr * p.noise_floor() / g;
        let mut a = Allocation::empty(p.dims());
        for k in 0..2 {
            a.associate(0, 0, k);
            a.assign(0, 0, k, k, power);
        }
        let r = check_constraints(&p, &depl, &a, Scope::Network, InterferenceMode::Exact, None);
        assert!(r.feasible, "{r:?}");
    }

    #[test]
    fn reported_rate_is_capped_by_fronthaul() {
        let p = ScenarioParams {
            fronthaul_cap: vec![1e6],
            ..tiny_params(1, 1, 2)
        };
        let depl = Deployment::from_gains(p.dims(), vec![1e-9; 2], vec![0]);
        let mut a = Allocation::empty(p.dims());
        a.associate(0, 0, 0);
        a.assign(0, 0, 0, 0, 0.05);
        a.assign(0, 0, 0, 1, 0.05);
        let ne = network_ee(&p, &depl, &a);
        assert!(ne.total_rate > 1e6);
        assert_eq!(ne.delivered_rate, 1e6);
        assert!((ne.ratio - 1e6 / ne.total_power).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn rate_monotone_in_own_power(seed in 0u64..1000, lo in 0.0f64..0.05, extra in 0.0f64..0.05) {
            let params = ScenarioParams {
                num_groups: 2,
                num_rscs_per_group: 2,
                num_users: 4,
                num_subchannels: 2,
                ..ScenarioParams::default()
            };
            let depl = generate_deployment(&params, seed).unwrap();
            let mut a = random_allocation(params.dims(), seed, 0.05);
            let d = a.dims;
            let Some(i) = (0..d.num_entries()).find(|&i| {
                let link = i / d.subchannels;
                a.assoc[link] && a.subch[i]
            }) else { return Ok(()); };
            let n = i % d.subchannels;
            let link = i / d.subchannels;
            let (c, s) = d.split_rsc(link / d.users);
            let t = Target::new(c, s, link % d.users, n);
            a.power[i] = lo;
            let r0 = rate(&params, &depl, &a, t, InterferenceMode::Exact);
            a.power[i] = lo + extra;
            let r1 = rate(&params, &depl, &a, t, InterferenceMode::Exact);
            prop_assert!(r1 >= r0);
            prop_assert!(r0 >= 0.0);
        }
    }
}
