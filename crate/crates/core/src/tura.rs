//! Per-group joint association, subchannel and power allocation by
//! quantum-behaved particle swarm optimization.
//!
//! A position holds relaxed association values `φ[s][k]` in [0, 1], relaxed
//! assignment values `ψ[s][k][n]` in [0, 1] and powers `p[s][k][n]` in
//! [0, P_max], for the users whose home group is being solved. Fitness is
//! the estimated group EE (Mbit/J) of the decoded allocation minus
//! `α · Δ`, where Δ squares the constraint violations of the decoded
//! allocation (W, Mbit/s) and adds the binariness residuals of the raw
//! relaxed values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::deployment::Deployment;
use crate::error::{invalid, Result};
use crate::model::{self, foreign_interference, ConstraintReport, RateTable, Scope};
use crate::params::ScenarioParams;
use crate::rng::{self, tag};

const MBIT: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QpsoConfig {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub penalty_factor: f64,
    pub beta_max: f64,
    pub beta_min: f64,
    pub conv_threshold: f64,
    pub seed: u64,
}

impl Default for QpsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 40,
            max_iters: 600,
            penalty_factor: 1.5,
            beta_max: 1.2,
            beta_min: 0.5,
            conv_threshold: 1e-4,
            seed: 1,
        }
    }
}

impl QpsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 1 {
            return Err(invalid("swarm_size", "must be at least 1"));
        }
        if self.max_iters < 1 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !(self.penalty_factor > 0.0) {
            return Err(invalid("penalty_factor", "must be positive"));
        }
        if !(self.beta_min > 0.0 && self.beta_max >= self.beta_min) {
            return Err(invalid("beta", "need beta_max >= beta_min > 0"));
        }
        if !(self.conv_threshold > 0.0) {
            return Err(invalid("conv_threshold", "must be positive"));
        }
        Ok(())
    }

    /// Contraction coefficient, linear from `beta_max` at t = 0 to
    /// `beta_min` at t = T.
    pub fn beta(&self, t: usize) -> f64 {
        let big_t = self.max_iters as f64;
        (self.beta_max - self.beta_min) * (big_t - t as f64) / big_t + self.beta_min
    }
}

/// One group's optimization problem.
#[derive(Debug, Clone)]
pub struct TuraProblem<'a> {
    pub params: &'a ScenarioParams,
    pub depl: &'a Deployment,
    pub group: usize,
    /// Global indices of the group's users; position index `kk` maps to
    /// `users[kk]`.
    pub users: Vec<usize>,
    /// Inter-group interference `[k][n]`, W.
    pub foreign: Vec<f64>,
    /// Per-subchannel power bounds `[c][n]`, W.
    pub bounds: Option<Vec<f64>>,
    /// Association frozen to the max-RSRP RSC.
    pub pinned: bool,
}

/// Fitness and its parts for one position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub fitness: f64,
    /// Estimated group EE, bit/J.
    pub ee: f64,
    pub penalty: f64,
    pub feasible: bool,
    /// Whether the decoded allocation meets every constraint, regardless of
    /// how far the raw indicators are from binary.
    pub decoded_feasible: bool,
    /// Constraints the decoded allocation violates.
    pub violations: usize,
}

impl<'a> TuraProblem<'a> {
    pub fn new(params: &'a ScenarioParams, depl: &'a Deployment, group: usize) -> Self {
        let d = depl.dims;
        Self {
            params,
            depl,
            group,
            users: depl.group_users(group),
            foreign: vec![0.0; d.users * d.subchannels],
            bounds: None,
            pinned: false,
        }
    }

    /// Other groups transmit the believed effective powers (`[m][k][n]`).
    pub fn with_beliefs(mut self, believed: &[f64]) -> Self {
        self.foreign = foreign_interference(self.depl, believed, self.group);
        self
    }

    pub fn with_bounds(mut self, bounds: Option<Vec<f64>>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn pinned(mut self, pinned: bool) -> Self {
        self.pinned = pinned;
        self
    }

    fn s_count(&self) -> usize {
        self.depl.dims.rscs_per_group
    }

    fn n_count(&self) -> usize {
        self.depl.dims.subchannels
    }

    fn k_count(&self) -> usize {
        self.users.len()
    }

    fn psi_offset(&self) -> usize {
        self.s_count() * self.k_count()
    }

    fn power_offset(&self) -> usize {
        self.psi_offset() + self.s_count() * self.k_count() * self.n_count()
    }

    pub fn dimension(&self) -> usize {
        self.psi_offset() + 2 * self.s_count() * self.k_count() * self.n_count()
    }

    #[inline]
    fn phi_index(&self, s: usize, kk: usize) -> usize {
        s * self.k_count() + kk
    }

    #[inline]
    fn psi_index(&self, s: usize, kk: usize, n: usize) -> usize {
        self.psi_offset() + (s * self.k_count() + kk) * self.n_count() + n
    }

    #[inline]
    fn power_index(&self, s: usize, kk: usize, n: usize) -> usize {
        self.power_offset() + (s * self.k_count() + kk) * self.n_count() + n
    }

    /// Upper end of coordinate `i`'s box (the lower end is 0).
    pub fn upper(&self, i: usize) -> f64 {
        if i >= self.power_offset() {
            self.params.max_tx_power
        } else {
            1.0
        }
    }

    fn pinned_rsc(&self, kk: usize) -> usize {
        self.depl.dims.split_rsc(self.depl.initial_rsc[self.users[kk]]).1
    }

    /// Hard allocation of a relaxed position: per user the largest φ wins
    /// if it reaches 0.5, per (RSC, subchannel) the largest ψ wins if it
    /// reaches 0.5, ties to the lowest index; powers are masked by Φ·Ψ.
    pub fn decode(&self, x: &[f64]) -> Allocation {
        let d = self.depl.dims;
        let c = self.group;
        let mut a = Allocation::empty(d);
        for kk in 0..self.k_count() {
            let mut best = 0;
            for s in 1..self.s_count() {
                if x[self.phi_index(s, kk)] > x[self.phi_index(best, kk)] {
                    best = s;
                }
            }
            if x[self.phi_index(best, kk)] >= 0.5 {
                a.associate(c, best, self.users[kk]);
            }
        }
        for s in 0..self.s_count() {
            for n in 0..self.n_count() {
                let mut best: Option<usize> = None;
                for kk in 0..self.k_count() {
                    let v = x[self.psi_index(s, kk, n)];
                    if v >= 0.5 && best.is_none_or(|b| v > x[self.psi_index(s, b, n)]) {
                        best = Some(kk);
                    }
                }
                if let Some(kk) = best {
                    let k = self.users[kk];
                    let i = d.entry(c, s, k, n);
                    a.subch[i] = true;
                    if a.is_associated(c, s, k) {
                        a.power[i] = x[self.power_index(s, kk, n)];
                    }
                }
            }
        }
        a
    }

    /// Position whose binary part is `alloc`'s group slice.
    pub fn encode(&self, alloc: &Allocation) -> Vec<f64> {
        let d = self.depl.dims;
        let c = self.group;
        let mut x = vec![0.0; self.dimension()];
        for (kk, &k) in self.users.iter().enumerate() {
            for s in 0..self.s_count() {
                if alloc.is_associated(c, s, k) {
                    x[self.phi_index(s, kk)] = 1.0;
                }
                for n in 0..self.n_count() {
                    let i = d.entry(c, s, k, n);
                    if alloc.subch[i] {
                        x[self.psi_index(s, kk, n)] = 1.0;
                    }
                    x[self.power_index(s, kk, n)] = alloc.power[i].clamp(0.0, self.params.max_tx_power);
                }
            }
        }
        if self.pinned {
            self.pin(&mut x);
        }
        x
    }

    fn pin(&self, x: &mut [f64]) {
        for kk in 0..self.k_count() {
            let home = self.pinned_rsc(kk);
            for s in 0..self.s_count() {
                x[self.phi_index(s, kk)] = if s == home { 1.0 } else { 0.0 };
            }
        }
    }

    /// Rates of the decoded group allocation under the problem's beliefs.
    pub fn rates(&self, alloc: &Allocation) -> RateTable {
        RateTable::for_group(self.params, self.depl, alloc, self.group, &self.foreign)
    }

    /// Constraint report of the decoded group allocation.
    pub fn constraints(&self, alloc: &Allocation) -> ConstraintReport {
        let rates = self.rates(alloc);
        model::check_with_rates(
            self.params,
            self.depl,
            alloc,
            &rates,
            Scope::Group(self.group),
            self.bounds.as_deref(),
        )
    }

    /// Binariness residuals of the raw relaxed values.
    pub fn binariness(&self, x: &[f64]) -> f64 {
        x[..self.power_offset()]
            .iter()
            .map(|&v| squared(v * v - v))
            .sum()
    }

    pub fn penalty(&self, x: &[f64]) -> f64 {
        let alloc = self.decode(x);
        let report = self.constraints(&alloc);
        constraint_penalty(&report) + self.binariness(x)
    }

    pub fn evaluate(&self, x: &[f64], alpha: f64) -> Evaluation {
        let alloc = self.decode(x);
        let rates = self.rates(&alloc);
        let report = model::check_with_rates(
            self.params,
            self.depl,
            &alloc,
            &rates,
            Scope::Group(self.group),
            self.bounds.as_deref(),
        );
        let violation = constraint_penalty(&report);
        let penalty = violation + self.binariness(x);
        let power = model::group_power(self.params, self.depl, &alloc, self.group);
        let ee = rates.group_rate(&alloc.dims, self.group) / power;
        Evaluation {
            fitness: ee / MBIT - alpha * penalty,
            ee,
            penalty,
            feasible: penalty == 0.0,
            decoded_feasible: violation == 0.0,
            violations: report.magnitudes().filter(|&v| v > 0.0).count(),
        }
    }

    pub fn fitness(&self, x: &[f64], alpha: f64) -> f64 {
        self.evaluate(x, alpha).fitness
    }

    /// Constructive allocations used to seed the swarm: max-RSRP
    /// association, then (unless pinned) offloading from overloaded RSCs,
    /// spreading onto idle ones, and successive consolidations that empty lightly loaded RSCs when
    /// sleeping is allowed.
    pub fn heuristic_allocations(&self) -> Vec<Allocation> {
        if self.k_count() == 0 {
            return vec![Allocation::empty(self.depl.dims)];
        }
        let rsrp: Vec<usize> = (0..self.k_count()).map(|kk| self.pinned_rsc(kk)).collect();
        let mut plans = vec![rsrp.clone()];
        if !self.pinned {
            let offloaded = self.offload(&rsrp);
            if offloaded != rsrp {
                plans.push(offloaded.clone());
            }
            let spread = self.spread(&offloaded);
            if spread != offloaded {
                plans.push(spread);
            }
            if self.params.sleep_enabled {
                let mut plan = offloaded;
                while let Some(next) = self.consolidate_once(&plan) {
                    plans.push(next.clone());
                    plan = next;
                }
            }
        }
        let layouts = self.pool_layouts();
        let mut out = Vec::with_capacity(layouts.len() * plans.len());
        for pools in &layouts {
            for p in &plans {
                out.push(self.build(p, pools));
            }
        }
        out
    }

    /// Subchannel pool per RSC for each reuse pattern tried: RSCs sharing a
    /// pool split its subchannels, distinct pools reuse them. Clusters are
    /// grown greedily from nearest neighbours, sizes 1 (full reuse) up to
    /// the whole group (no reuse).
    fn pool_layouts(&self) -> Vec<Vec<usize>> {
        let s_count = self.s_count();
        let pos = |s: usize| self.depl.rsc_pos[self.depl.dims.rsc(self.group, s)];
        let mut sizes: Vec<usize> = vec![1, 2, 3, s_count];
        sizes.retain(|&m| m <= s_count);
        sizes.dedup();
        sizes
            .into_iter()
            .map(|m| {
                let mut pool = vec![usize::MAX; s_count];
                let mut next = 0;
                for s in 0..s_count {
                    if pool[s] != usize::MAX {
                        continue;
                    }
                    let mut near: Vec<usize> = (0..s_count).filter(|&t| pool[t] == usize::MAX).collect();
                    near.sort_by(|&a, &b| pos(s).distance(&pos(a)).total_cmp(&pos(s).distance(&pos(b))));
                    for &t in near.iter().take(m) {
                        pool[t] = next;
                    }
                    next += 1;
                }
                pool
            })
            .collect()
    }

    fn capacity(&self, s: usize) -> usize {
        let cap = self.params.fronthaul_cap_of(self.depl.dims.rsc(self.group, s));
        if cap.is_infinite() {
            usize::MAX
        } else {
            (cap / self.params.min_rate + 1e-9).floor() as usize
        }
    }

    fn link_gain(&self, kk: usize, s: usize) -> f64 {
        let m = self.depl.dims.rsc(self.group, s);
        let k = self.users[kk];
        (0..self.n_count()).map(|n| self.depl.gain_m(m, k, n)).sum()
    }

    fn loads(&self, plan: &[usize]) -> Vec<Vec<usize>> {
        let mut loads = vec![Vec::new(); self.s_count()];
        for (kk, &s) in plan.iter().enumerate() {
            loads[s].push(kk);
        }
        for (s, users) in loads.iter_mut().enumerate() {
            users.sort_by(|&a, &b| self.link_gain(b, s).total_cmp(&self.link_gain(a, s)));
        }
        loads
    }

    fn offload(&self, plan: &[usize]) -> Vec<usize> {
        let mut plan = plan.to_vec();
        let loads = self.loads(&plan);
        let mut count: Vec<usize> = loads.iter().map(Vec::len).collect();
        for (s, users) in loads.iter().enumerate() {
            let cap = self.capacity(s);
            for &kk in users.iter().skip(cap) {
                let target = (0..self.s_count())
                    .filter(|&t| t != s && count[t] < self.capacity(t))
                    .max_by(|&a, &b| self.link_gain(kk, a).total_cmp(&self.link_gain(kk, b)));
                if let Some(t) = target {
                    plan[kk] = t;
                    count[s] -= 1;
                    count[t] += 1;
                }
            }
        }
        plan
    }

    /// Wakes idle RSCs: each takes the user it hears best among those on
    /// RSCs serving two or more, when that user fits its capacity.
    fn spread(&self, plan: &[usize]) -> Vec<usize> {
        let mut plan = plan.to_vec();
        let mut count = vec![0usize; self.s_count()];
        for &s in &plan {
            count[s] += 1;
        }
        for t in 0..self.s_count() {
            if count[t] > 0 || self.capacity(t) == 0 {
                continue;
            }
            let pick = (0..plan.len())
                .filter(|&kk| count[plan[kk]] >= 2)
                .max_by(|&a, &b| self.link_gain(a, t).total_cmp(&self.link_gain(b, t)));
            if let Some(kk) = pick {
                count[plan[kk]] -= 1;
                plan[kk] = t;
                count[t] += 1;
            }
        }
        plan
    }

    fn consolidate_once(&self, plan: &[usize]) -> Option<Vec<usize>> {
        let loads = self.loads(plan);
        let mut active: Vec<usize> = (0..self.s_count()).filter(|&s| !loads[s].is_empty()).collect();
        if active.len() < 2 {
            return None;
        }
        active.sort_by_key(|&s| loads[s].len());
        for &victim in &active {
            let mut count: Vec<usize> = loads.iter().map(Vec::len).collect();
            let mut next = plan.to_vec();
            let mut placed = true;
            for &kk in &loads[victim] {
                let target = active
                    .iter()
                    .copied()
                    .filter(|&t| t != victim && count[t] < self.capacity(t))
                    .max_by(|&a, &b| self.link_gain(kk, a).total_cmp(&self.link_gain(kk, b)));
                match target {
                    Some(t) => {
                        next[kk] = t;
                        count[t] += 1;
                    }
                    None => {
                        placed = false;
                        break;
                    }
                }
            }
            if placed {
                return Some(next);
            }
        }
        None
    }

    /// Allocation for an association plan: each RSC serves its strongest
    /// users up to its fronthaul capacity and each served user gets the
    /// least equal per-subchannel power reaching its rate target. Users
    /// whose RSCs share a pool get disjoint subchannels of it (best SINR per
    /// watt first); when pools reuse subchannels, powers are refined against
    /// the resulting intra-group interference.
    fn build(&self, plan: &[usize], pools: &[usize]) -> Allocation {
        let d = self.depl.dims;
        let c = self.group;
        let n_total = self.n_count();
        let noise = self.params.noise_floor();
        let mut a = Allocation::empty(d);
        for (kk, &s) in plan.iter().enumerate() {
            a.associate(c, s, self.users[kk]);
        }

        let loads = self.loads(plan);
        let n_pools = pools.iter().max().map_or(0, |&p| p + 1);
        let mut served: Vec<(usize, usize)> = Vec::new();
        for pool in 0..n_pools {
            let mut in_pool: Vec<(usize, usize)> = Vec::new();
            for (s, users) in loads.iter().enumerate().filter(|&(s, _)| pools[s] == pool) {
                for &kk in users.iter().take(self.capacity(s)) {
                    in_pool.push((s, kk));
                }
            }
            if in_pool.len() > n_total {
                in_pool.sort_by(|a, b| self.link_gain(b.1, b.0).total_cmp(&self.link_gain(a.1, a.0)));
                in_pool.truncate(n_total);
            }
            served.extend(in_pool);
        }
        if served.is_empty() {
            return a;
        }
        let reuse = n_pools > 1;

        let gain = |s: usize, kk: usize, n: usize| self.depl.gain_m(d.rsc(c, s), self.users[kk], n);
        let snr_per_watt = |s: usize, kk: usize, n: usize| {
            gain(s, kk, n) / (self.foreign[self.users[kk] * n_total + n] + noise)
        };

        // round-robin over `who`, each taking its best remaining subchannel
        // a user's rate target: its share of a tight cap, else the minimum
        let per_rsc: Vec<usize> = (0..self.s_count()).map(|s| served.iter().filter(|u| u.0 == s).count()).collect();
        let weight = |i: usize| {
            let s = served[i].0;
            let share = self.params.fronthaul_cap_of(d.rsc(c, s)) / per_rsc[s] as f64;
            if share.is_finite() {
                self.params.min_rate.max(share)
            } else {
                self.params.min_rate
            }
        };
        // quotas proportional to rate targets, then round-robin over `who`,
        // each taking its best remaining subchannel
        let deal = |who: &[usize], chosen: &mut Vec<Vec<usize>>| {
            let total: f64 = who.iter().map(|&i| weight(i)).sum();
            let exact: Vec<f64> = who.iter().map(|&i| n_total as f64 * weight(i) / total).collect();
            let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
            let mut order: Vec<usize> = (0..who.len()).collect();
            order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
            let short = n_total - quota.iter().sum::<usize>();
            for &pos in order.iter().take(short) {
                quota[pos] += 1;
            }
            let mut free = vec![true; n_total];
            while quota.iter().any(|&q| q > 0) {
                for (pos, &i) in who.iter().enumerate() {
                    if quota[pos] == 0 {
                        continue;
                    }
                    quota[pos] -= 1;
                    let (s, kk) = served[i];
                    let pick = (0..n_total)
                        .filter(|&n| free[n])
                        .max_by(|&x, &y| snr_per_watt(s, kk, x).total_cmp(&snr_per_watt(s, kk, y)));
                    if let Some(n) = pick {
                        free[n] = false;
                        chosen[i].push(n);
                    }
                }
            }
        };
        let mut chosen: Vec<Vec<usize>> = vec![Vec::new(); served.len()];
        for pool in 0..n_pools {
            let who: Vec<usize> = (0..served.len()).filter(|&i| pools[served[i].0] == pool).collect();
            if !who.is_empty() {
                deal(&who, &mut chosen);
            }
        }

        let w = self.params.subchannel_bandwidth;
        let level = |x: f64, n: usize| match &self.bounds {
            Some(b) => x.min(b[c * n_total + n]),
            None => x,
        };
        // who transmits on each subchannel, for intra-group interference
        let mut on_sub: Vec<Vec<usize>> = vec![Vec::new(); n_total];
        for (i, subs) in chosen.iter().enumerate() {
            for &n in subs {
                on_sub[n].push(i);
            }
        }
        let p_max = self.params.max_tx_power;
        let mut x = vec![0.0; served.len()];
        let passes = if reuse { 40 } else { 1 };
        for _ in 0..passes {
            // gain over interference-plus-noise on each chosen subchannel
            let eff: Vec<Vec<f64>> = (0..served.len())
                .map(|i| {
                    let (s, kk) = served[i];
                    chosen[i]
                        .iter()
                        .map(|&n| {
                            let intra: f64 = on_sub[n]
                                .iter()
                                .filter(|&&j| j != i)
                                .map(|&j| level(x[j], n) * gain(served[j].0, kk, n))
                                .sum();
                            gain(s, kk, n) / (self.foreign[self.users[kk] * n_total + n] + intra + noise)
                        })
                        .collect()
                })
                .collect();
            let rate = |i: usize, p: f64| -> f64 {
                chosen[i]
                    .iter()
                    .zip(&eff[i])
                    .map(|(&n, &e)| model::shannon_rate(w, level(p, n) * e))
                    .sum()
            };
            // least per-subchannel power reaching `target` within `budget`
            let solve = |i: usize, target: f64, budget: f64| -> f64 {
                let x_max = budget / chosen[i].len().max(1) as f64;
                if rate(i, x_max) <= target {
                    return x_max;
                }
                let (mut lo, mut hi) = (0.0, x_max);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if rate(i, mid) >= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            };
            let mut next = vec![0.0; served.len()];
            for s in 0..self.s_count() {
                let on_rsc: Vec<usize> = (0..served.len())
                    .filter(|&j| served[j].0 == s && !chosen[j].is_empty())
                    .collect();
                if on_rsc.is_empty() {
                    continue;
                }
                let cap = self.params.fronthaul_cap_of(d.rsc(c, s));
                // the fair share of the cap, within the constraint slack
                let target = if cap.is_infinite() {
                    f64::INFINITY
                } else {
                    let share = cap / on_rsc.len() as f64;
                    self.params.min_rate.max(share) * (1.0 + 0.1 * model::SLACK)
                };
                // cheapest users first, each at the least power for its
                // target; whoever is left shares the remaining budget
                let mut need: Vec<(usize, f64)> = on_rsc
                    .iter()
                    .map(|&i| (i, solve(i, target, p_max) * chosen[i].len() as f64))
                    .collect();
                need.sort_by(|a, b| a.1.total_cmp(&b.1));
                let mut left = p_max;
                for (pos, &(i, cost)) in need.iter().enumerate() {
                    let fair = left / (need.len() - pos) as f64;
                    let spend = if cost <= left && rate(i, cost / chosen[i].len() as f64) >= target {
                        cost
                    } else {
                        fair
                    };
                    next[i] = solve(i, target, spend);
                    left -= next[i] * chosen[i].len() as f64;
                }
            }
            let moved = x.iter().zip(&next).any(|(a, b)| (a - b).abs() > 1e-12 * b.abs().max(1e-30));
            x = next;
            if !moved {
                break;
            }
        }
        for (i, &(s, kk)) in served.iter().enumerate() {
            for &n in &chosen[i] {
                a.assign(c, s, self.users[kk], n, level(x[i], n));
            }
        }
        a
    }
}

#[inline]
fn squared(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        (v * v).max(f64::MIN_POSITIVE)
    }
}

/// Squared-hinge penalty of a constraint report (W and Mbit/s units).
pub fn constraint_penalty(r: &ConstraintReport) -> f64 {
    let watts = r
        .tx_excess
        .iter()
        .chain(&r.bound_excess)
        .chain(std::iter::once(&r.negative_power))
        .map(|&v| squared(v))
        .sum::<f64>();
    let rates = r
        .rate_deficit
        .iter()
        .chain(&r.fronthaul_excess)
        .map(|&v| squared(v / MBIT))
        .sum::<f64>();
    let counts = r
        .assoc_excess
        .iter()
        .chain(&r.subch_excess)
        .map(|&v| squared(v))
        .sum::<f64>();
    watts + rates + counts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub position: Vec<f64>,
    pub fitness: f64,
    pub hist_best: Vec<f64>,
    pub hist_best_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmState {
    pub candidates: Vec<Candidate>,
    pub global_best: Vec<f64>,
    pub global_best_fitness: f64,
    /// Binary re-encoding of the best decoded allocation seen, ranked by
    /// fewest violated constraints and then fitness, with both.
    pub best_decoded: Option<(Vec<f64>, usize, f64)>,
    pub iter: usize,
}

impl SwarmState {
    fn from_positions(problem: &TuraProblem<'_>, cfg: &QpsoConfig, positions: Vec<Vec<f64>>) -> Self {
        let mut offers = Vec::new();
        let candidates: Vec<Candidate> = positions
            .into_iter()
            .map(|x| {
                let e = problem.evaluate(&x, cfg.penalty_factor);
                offers.push((x.clone(), e.violations));
                let f = e.fitness;
                Candidate {
                    hist_best: x.clone(),
                    position: x,
                    fitness: f,
                    hist_best_fitness: f,
                }
            })
            .collect();
        let mut state = Self {
            global_best: Vec::new(),
            global_best_fitness: f64::NEG_INFINITY,
            best_decoded: None,
            candidates,
            iter: 0,
        };
        for (x, v) in &offers {
            state.offer(problem, cfg, x, *v);
        }
        state.refresh_global_best();
        state
    }

    fn offer(&mut self, problem: &TuraProblem<'_>, cfg: &QpsoConfig, x: &[f64], violations: usize) {
        if self.best_decoded.as_ref().is_some_and(|(_, v, _)| violations > *v) {
            return;
        }
        let binary = problem.encode(&problem.decode(x));
        let f = problem.fitness(&binary, cfg.penalty_factor);
        let better = match &self.best_decoded {
            None => true,
            Some((_, v, b)) => violations < *v || f > *b,
        };
        if better {
            self.best_decoded = Some((binary, violations, f));
        }
    }

    fn refresh_global_best(&mut self) {
        let mut best = 0;
        for (i, cand) in self.candidates.iter().enumerate() {
            if cand.hist_best_fitness > self.candidates[best].hist_best_fitness {
                best = i;
            }
        }
        let cand = &self.candidates[best];
        if cand.hist_best_fitness > self.global_best_fitness || self.global_best.is_empty() {
            self.global_best = cand.hist_best.clone();
            self.global_best_fitness = cand.hist_best_fitness;
        }
    }

    /// Mean of the historical bests.
    pub fn mean_best(&self) -> Vec<f64> {
        let dim = self.global_best.len();
        let mut mean = vec![0.0; dim];
        for cand in &self.candidates {
            for (m, v) in mean.iter_mut().zip(&cand.hist_best) {
                *m += v;
            }
        }
        let count = self.candidates.len() as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        mean
    }

    /// Largest relative gap between a historical best and the global best;
    /// `None` while the global best is not positive.
    pub fn max_gap(&self) -> Option<f64> {
        if self.global_best_fitness <= 0.0 {
            return None;
        }
        Some(
            self.candidates
                .iter()
                .map(|c| (c.hist_best_fitness - self.global_best_fitness).abs() / self.global_best_fitness)
                .fold(0.0, f64::max),
        )
    }
}

/// Initial swarm: warm starts first, then the best constructive
/// allocations up to half the swarm, then random perturbations of those.
pub fn init_swarm(problem: &TuraProblem<'_>, cfg: &QpsoConfig, warm: &[Allocation]) -> SwarmState {
    let mut seeds: Vec<Vec<f64>> = warm.iter().map(|a| problem.encode(a)).collect();
    let mut built: Vec<(Vec<f64>, f64)> = problem
        .heuristic_allocations()
        .iter()
        .map(|a| {
            let x = problem.encode(a);
            let f = problem.fitness(&x, cfg.penalty_factor);
            (x, f)
        })
        .collect();
    // strongest first, so truncation to the swarm size keeps the best
    built.sort_by(|a, b| b.1.total_cmp(&a.1));
    let room = (cfg.swarm_size / 2).max(1).saturating_sub(seeds.len()).max(usize::from(seeds.is_empty()));
    seeds.extend(built.into_iter().take(room).map(|(x, _)| x));
    seeds.truncate(cfg.swarm_size);
    let n_seeds = seeds.len();
    let mut positions = seeds.clone();
    for i in n_seeds..cfg.swarm_size {
        let mut rng = rng::stream(cfg.seed, &[tag::QPSO_INIT, i as u64]);
        positions.push(perturb(problem, &seeds[i % n_seeds], &mut rng));
    }
    SwarmState::from_positions(problem, cfg, positions)
}

fn perturb(problem: &TuraProblem<'_>, base: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let mut x = base.to_vec();
    let (s_count, k_count, n_count) = (problem.s_count(), problem.k_count(), problem.n_count());
    let p_max = problem.params.max_tx_power;
    if !problem.pinned {
        for kk in 0..k_count {
            if rng.gen_bool(0.2) {
                let to = rng.gen_range(0..s_count);
                for s in 0..s_count {
                    x[problem.phi_index(s, kk)] = if s == to { 1.0 } else { 0.0 };
                }
            }
        }
    }
    let flip = (2.0 / n_count as f64).min(0.5);
    for s in 0..s_count {
        for n in 0..n_count {
            if rng.gen_bool(flip) {
                let pick = rng.gen_range(0..=k_count);
                for kk in 0..k_count {
                    let on = kk == pick;
                    x[problem.psi_index(s, kk, n)] = if on { 1.0 } else { 0.0 };
                    if on {
                        x[problem.power_index(s, kk, n)] = rng.gen_range(0.0..2.0 * p_max / n_count as f64);
                    }
                }
            }
        }
    }
    for kk in 0..k_count {
        for s in 0..s_count {
            for n in 0..n_count {
                let i = problem.power_index(s, kk, n);
                if x[i] > 0.0 {
                    x[i] = (x[i] * rng.gen_range(0.5..1.5)).min(p_max);
                }
            }
        }
    }
    x
}

/// One QPSO step: every candidate moves around its attractor between its
/// historical best and the global best, spread by the distance to the
/// mean historical best; bests are then updated.
pub fn evolve(problem: &TuraProblem<'_>, state: &mut SwarmState, cfg: &QpsoConfig) {
    let t = state.iter;
    let beta = cfg.beta(t);
    let mean = state.mean_best();
    let phi_end = problem.psi_offset();
    let start = if problem.pinned { phi_end } else { 0 };
    let mut offers = Vec::new();
    for (i, cand) in state.candidates.iter_mut().enumerate() {
        let mut rng = rng::stream(cfg.seed, &[tag::QPSO_EVOLVE, t as u64, i as u64]);
        for j in start..cand.position.len() {
            let lambda: f64 = rng.gen();
            let mu: f64 = 1.0 - rng.gen::<f64>();
            let eps: f64 = rng.gen();
            let sp = lambda * cand.hist_best[j] + (1.0 - lambda) * state.global_best[j];
            let spread = beta * (mean[j] - cand.position[j]).abs() * (1.0 / mu).ln();
            let v = if eps > 0.5 { sp + spread } else { sp - spread };
            cand.position[j] = v.clamp(0.0, problem.upper(j));
        }
        let e = problem.evaluate(&cand.position, cfg.penalty_factor);
        offers.push((cand.position.clone(), e.violations));
        cand.fitness = e.fitness;
        if cand.fitness > cand.hist_best_fitness {
            cand.hist_best_fitness = cand.fitness;
            cand.hist_best.clone_from(&cand.position);
        }
    }
    for (x, v) in &offers {
        state.offer(problem, cfg, x, *v);
    }
    state.refresh_global_best();
    state.iter += 1;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuraOutcome {
    pub allocation: Allocation,
    pub evaluation: Evaluation,
    /// Global-best fitness after initialization and after each iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn run_tura(
    problem: &TuraProblem<'_>,
    cfg: &QpsoConfig,
    warm: &[Allocation],
) -> Result<TuraOutcome> {
    cfg.validate()?;
    let mut state = init_swarm(problem, cfg, warm);
    let mut trace = vec![state.global_best_fitness];
    let mut converged = false;
    while state.iter < cfg.max_iters {
        evolve(problem, &mut state, cfg);
        trace.push(state.global_best_fitness);
        if state.max_gap().is_some_and(|g| g <= cfg.conv_threshold) {
            converged = true;
            break;
        }
    }
    // A feasible allocation beats any infeasible one: squared penalties
    // leave the unconstrained optimum slightly outside the feasible set, and
    // when nothing is feasible they spread shortfalls over many users.
    let chosen = match &state.best_decoded {
        Some((x, _, _)) => x,
        None => &state.global_best,
    };
    Ok(TuraOutcome {
        allocation: problem.decode(chosen),
        evaluation: problem.evaluate(chosen, cfg.penalty_factor),
        trace,
        iterations: state.iter,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deployment::generate_deployment;
    use crate::model::tests::tiny_params;
    use proptest::prelude::*;

    fn small() -> (ScenarioParams, Deployment) {
        let p = ScenarioParams {
            min_rate: 1e6,
            ..tiny_params(2, 2, 2)
        };
        let d = generate_deployment(&p, 4).unwrap();
        (p, d)
    }

    #[test]
    fn beta_schedule() {
        let cfg = QpsoConfig::default();
        assert!((cfg.beta(600) - 0.5).abs() < 1e-12);
        assert!((cfg.beta(300) - 0.85).abs() < 1e-12);
        assert!((cfg.beta(0) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn dimension_counts_group_users() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        assert_eq!(prob.dimension(), 2 * 2 + 2 * 2 * 2 * 2);
    }

    #[test]
    fn decode_rules() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        let mut x = vec![0.0; prob.dimension()];
        // user 0: φ = (0.9, 0.8) -> RSC 0 only
        x[prob.phi_index(0, 0)] = 0.9;
        x[prob.phi_index(1, 0)] = 0.8;
        // user 1: φ = (0.4, 0.3) -> unassociated
        x[prob.phi_index(0, 1)] = 0.4;
        x[prob.phi_index(1, 1)] = 0.3;
        // RSC 0, subchannel 0: ψ = (0.6, 0.6) -> user 0
        x[prob.psi_index(0, 0, 0)] = 0.6;
        x[prob.psi_index(0, 1, 0)] = 0.6;
        x[prob.power_index(0, 0, 0)] = 0.02;
        x[prob.power_index(0, 1, 0)] = 0.03;
        let a = prob.decode(&x);
        let (u0, u1) = (prob.users[0], prob.users[1]);
        assert!(a.is_associated(0, 0, u0));
        assert!(!a.is_associated(0, 1, u0));
        assert!(!a.is_associated(0, 0, u1) && !a.is_associated(0, 1, u1));
        assert!(a.subch[a.dims.entry(0, 0, u0, 0)]);
        assert!(!a.subch[a.dims.entry(0, 0, u1, 0)]);
        assert_eq!(a.power[a.dims.entry(0, 0, u0, 0)], 0.02);
        assert!(a.is_well_formed());
    }

    #[test]
    fn binary_positions_round_trip() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        for a in prob.heuristic_allocations() {
            let x = prob.encode(&a);
            assert_eq!(prob.decode(&x), a);
        }
    }

    #[test]
    fn penalty_reference_terms() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        let a = prob.heuristic_allocations().remove(0);
        let mut x = prob.encode(&a);
        assert!(prob.evaluate(&x, 1.5).feasible);
        // a half-way φ on a losing RSC leaves the decode unchanged
        let home = prob.pinned_rsc(0);
        x[prob.phi_index(1 - home, 0)] = 0.5;
        assert_eq!(prob.decode(&x), a);
        assert!((prob.penalty(&x) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn tx_excess_penalty_is_squared_watts() {
        let r = ConstraintReport {
            tx_excess: vec![0.01],
            rate_deficit: vec![0.0],
            fronthaul_excess: vec![0.0],
            assoc_excess: vec![0.0],
            subch_excess: vec![0.0],
            negative_power: 0.0,
            bound_excess: vec![],
            feasible: false,
        };
        assert!((constraint_penalty(&r) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn fitness_arithmetic() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        let x = prob.encode(&prob.heuristic_allocations()[0]);
        let e = prob.evaluate(&x, 1.5);
        assert_eq!(e.penalty, 0.0);
        assert_eq!(e.fitness, e.ee / 1e6);
        // F = η - α Δ with η = 10, Δ = 2, α = 1.5
        assert_eq!(10.0 - 1.5 * 2.0, 7.0);
    }

    #[test]
    fn identical_swarm_is_a_fixed_point() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        let x = prob.encode(&prob.heuristic_allocations()[0]);
        let cfg = QpsoConfig {
            swarm_size: 4,
            max_iters: 10,
            ..QpsoConfig::default()
        };
        let mut state = SwarmState::from_positions(&prob, &cfg, vec![x.clone(); 4]);
        evolve(&prob, &mut state, &cfg);
        for cand in &state.candidates {
            assert_eq!(cand.position, x);
        }
        assert_eq!(state.max_gap(), Some(0.0));
    }

    #[test]
    fn single_candidate_swarm_runs() {
        let (p, d) = small();
        let prob = TuraProblem::new(&p, &d, 0);
        let cfg = QpsoConfig {
            swarm_size: 1,
            max_iters: 20,
            ..QpsoConfig::default()
        };
        let state = init_swarm(&prob, &cfg, &[]);
        assert_eq!(state.mean_best(), state.candidates[0].hist_best);
        let out = run_tura(&prob, &cfg, &[]).unwrap();
        assert!(out.allocation.is_well_formed());
    }

    #[test]
    fn trace_is_monotone_and_output_well_formed() {
        let p = ScenarioParams {
            num_users: 8,
            num_subchannels: 10,
            ..ScenarioParams::default()
        };
        let d = generate_deployment(&p, 2).unwrap();
        let prob = TuraProblem::new(&p, &d, 0);
        let cfg = QpsoConfig {
            swarm_size: 10,
            max_iters: 40,
            ..QpsoConfig::default()
        };
        let out = run_tura(&prob, &cfg, &[]).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(out.allocation.is_well_formed());
        assert_eq!(out.trace.len(), out.iterations + 1);
        let again = run_tura(&prob, &cfg, &[]).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn pinned_association_stays_rsrp() {
        let p = ScenarioParams {
            num_users: 8,
            num_subchannels: 6,
            ..ScenarioParams::default()
        };
        let d = generate_deployment(&p, 3).unwrap();
        let prob = TuraProblem::new(&p, &d, 0).pinned(true);
        let cfg = QpsoConfig {
            swarm_size: 8,
            max_iters: 20,
            ..QpsoConfig::default()
        };
        let out = run_tura(&prob, &cfg, &[]).unwrap();
        for k in 0..p.num_users {
            let (c, s) = d.dims.split_rsc(d.initial_rsc[k]);
            assert!(out.allocation.is_associated(c, s, k));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn decoded_allocations_are_well_formed(seed in 0u64..500, raw in proptest::collection::vec(0.0f64..1.0, 20)) {
            let (p, _) = small();
            let d = generate_deployment(&p, seed).unwrap();
            let prob = TuraProblem::new(&p, &d, 0);
            let x: Vec<f64> = raw.iter().enumerate()
                .map(|(i, v)| v * prob.upper(i))
                .collect();
            prop_assert!(prob.decode(&x).is_well_formed());
        }
    }
}
