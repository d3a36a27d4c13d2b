//! Resource competition among CSCs as a repeated finite game, learned by
//! conditional regret matching with noisy exchange of strategy vectors.
//!
//! The learner ([`RegretLearner`]) works on any [`FiniteGame`]; the network
//! game ([`NetworkGame`]) gives each CSC a capped set of joint
//! subchannel/power-level actions over its associated users.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::deployment::Deployment;
use crate::error::{invalid, Result};
use crate::model;
use crate::params::ScenarioParams;
use crate::rng::{self, tag};

/// Choice of one user: no assignment, or `(subchannel, level)` with
/// `level` in `1..=L`.
pub type Choice = Option<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrcConfig {
    pub max_iters: usize,
    pub conv_threshold: f64,
    pub action_cap: usize,
    pub seed: u64,
}

impl Default for CrcConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            conv_threshold: 1e-4,
            action_cap: 512,
            seed: 1,
        }
    }
}

impl CrcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(invalid("crc.max_iters", "must be at least 1"));
        }
        if !(self.conv_threshold > 0.0) {
            return Err(invalid("crc.conv_threshold", "must be positive"));
        }
        if self.action_cap < 1 {
            return Err(invalid("crc.action_cap", "must be at least 1"));
        }
        Ok(())
    }
}

/// A finite normal-form game.
pub trait FiniteGame {
    fn num_players(&self) -> usize;
    fn num_actions(&self, player: usize) -> usize;
    fn utility(&self, player: usize, profile: &[usize]) -> f64;

    /// Utility of every own action against the others in `profile`.
    fn utilities_against(&self, player: usize, profile: &[usize]) -> Vec<f64> {
        let mut p = profile.to_vec();
        (0..self.num_actions(player))
            .map(|a| {
                p[player] = a;
                self.utility(player, &p)
            })
            .collect()
    }
}

/// Explicit payoff tables, one per player, indexed by the row-major rank
/// of the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGame {
    pub actions: Vec<usize>,
    pub payoffs: Vec<Vec<f64>>,
}

impl MatrixGame {
    pub fn new(actions: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Self {
        let size: usize = actions.iter().product();
        assert_eq!(payoffs.len(), actions.len());
        assert!(payoffs.iter().all(|p| p.len() == size));
        Self { actions, payoffs }
    }

    /// Two-player game from row and column payoff matrices.
    pub fn bimatrix(row: &[&[f64]], col: &[&[f64]]) -> Self {
        let a = row.len();
        let b = row[0].len();
        let flat = |m: &[&[f64]]| m.iter().flat_map(|r| r.iter().copied()).collect();
        Self::new(vec![a, b], vec![flat(row), flat(col)])
    }

    pub fn num_profiles(&self) -> usize {
        self.actions.iter().product()
    }

    pub fn rank(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, &n)| acc * n + a)
    }

    pub fn unrank(&self, mut r: usize) -> Vec<usize> {
        let mut p = vec![0; self.actions.len()];
        for (i, &n) in self.actions.iter().enumerate().rev() {
            p[i] = r % n;
            r /= n;
        }
        p
    }
}

impl FiniteGame for MatrixGame {
    fn num_players(&self) -> usize {
        self.actions.len()
    }

    fn num_actions(&self, player: usize) -> usize {
        self.actions[player]
    }

    fn utility(&self, player: usize, profile: &[usize]) -> f64 {
        self.payoffs[player][self.rank(profile)]
    }
}

/// Strategy vector after one regret-matching step: alternatives get
/// `R(played, a) / ξ`, the played action keeps the rest.
pub fn probability_update(regrets: &[f64], played: usize, xi: f64) -> Vec<f64> {
    let mut w: Vec<f64> = regrets.iter().map(|&r| r.max(0.0) / xi).collect();
    w[played] = 0.0;
    let others: f64 = w.iter().sum();
    w[played] = 1.0 - others;
    w
}

/// Normalizer keeping the played action's probability above one half.
pub fn xi_for(regrets: &[f64]) -> f64 {
    let max = regrets.iter().copied().fold(0.0, f64::max);
    (2.0 * regrets.len() as f64 * max).max(1.0)
}

/// Noisy copy of a strategy vector: each entry scaled by `1 + ρ·Δh` with
/// standard normal `Δh`, clamped at zero and renormalized.
pub fn exchange_beliefs(w: &[f64], rho: f64, rng: &mut impl Rng) -> Vec<f64> {
    if rho == 0.0 {
        return w.to_vec();
    }
    let mut out: Vec<f64> = w
        .iter()
        .map(|&v| {
            let dh: f64 = rng.sample(StandardNormal);
            (v * (1.0 + rho * dh)).max(0.0)
        })
        .collect();
    let sum: f64 = out.iter().sum();
    if sum > 0.0 {
        out.iter_mut().for_each(|v| *v /= sum);
        out
    } else {
        w.to_vec()
    }
}

/// Most probable action, ties to the lowest index.
pub fn select_action(w: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in w.iter().enumerate() {
        if v > w[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF draw from `w` with uniform `u` in [0, 1).
pub fn sample_action(w: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &v) in w.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        acc += v;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    /// Action each player used in the last round.
    pub played: Vec<usize>,
    pub probs: Vec<Vec<f64>>,
    /// Summed payoff differences, per player, keyed by played action.
    pub regret_sums: Vec<HashMap<usize, Vec<f64>>>,
    /// Realized (perceived) utility history per player.
    pub utilities: Vec<Vec<f64>>,
    pub t: usize,
    /// How often each joint profile was played.
    pub counts: HashMap<Vec<usize>, usize>,
}

impl GameState {
    pub fn new<G: FiniteGame + ?Sized>(game: &G, initial: &[usize]) -> Self {
        let n = game.num_players();
        let probs = (0..n)
            .map(|c| {
                let mut w = vec![0.0; game.num_actions(c)];
                w[initial[c]] = 1.0;
                w
            })
            .collect();
        Self {
            played: initial.to_vec(),
            probs,
            regret_sums: vec![HashMap::new(); n],
            utilities: vec![Vec::new(); n],
            t: 0,
            counts: HashMap::new(),
        }
    }

    /// Averaged regrets `max(D, 0)` of switching from `played` to each action.
    pub fn regrets(&self, player: usize, played: usize, num_actions: usize) -> Vec<f64> {
        match self.regret_sums[player].get(&played) {
            Some(row) if self.t > 0 => row.iter().map(|&d| (d / self.t as f64).max(0.0)).collect(),
            _ => vec![0.0; num_actions],
        }
    }

    pub fn max_regret(&self) -> f64 {
        if self.t == 0 {
            return 0.0;
        }
        self.regret_sums
            .iter()
            .flat_map(|rows| rows.values())
            .flat_map(|row| row.iter())
            .fold(0.0, |m, &d| m.max(d / self.t as f64))
    }

    /// Empirical joint distribution of play.
    pub fn empirical(&self) -> Vec<(Vec<usize>, f64)> {
        let total: usize = self.counts.values().sum();
        let mut out: Vec<(Vec<usize>, f64)> = self
            .counts
            .iter()
            .map(|(p, &n)| (p.clone(), n as f64 / total as f64))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Adds one round's payoff differences to the row of the played action.
pub fn regret_update(state: &mut GameState, player: usize, played: usize, counterfactual: &[f64]) {
    let realized = counterfactual[played];
    let row = state.regret_sums[player]
        .entry(played)
        .or_insert_with(|| vec![0.0; counterfactual.len()]);
    for (d, &u) in row.iter_mut().zip(counterfactual) {
        *d += u - realized;
    }
}

/// Relative utility change below threshold; a zero utility only counts as
/// settled when the next one is zero too.
pub fn settled(prev: f64, next: f64, threshold: f64) -> bool {
    if prev == 0.0 {
        next == 0.0
    } else {
        ((next - prev) / prev).abs() <= threshold
    }
}

/// Lockstep regret-matching dynamics over a [`FiniteGame`].
#[derive(Debug, Clone)]
pub struct RegretLearner {
    pub state: GameState,
    pub error_ratio: f64,
    pub seed: u64,
}

impl RegretLearner {
    pub fn new<G: FiniteGame + ?Sized>(game: &G, initial: &[usize], error_ratio: f64, seed: u64) -> Self {
        Self {
            state: GameState::new(game, initial),
            error_ratio,
            seed,
        }
    }

    /// One round: every player samples from its strategy, perceives the
    /// others through noisy strategy vectors, accumulates regrets and
    /// updates its strategy. Returns the realized utilities.
    pub fn step<G: FiniteGame + ?Sized>(&mut self, game: &G) -> Vec<f64> {
        let n = game.num_players();
        let t = self.state.t as u64;
        let draws: Vec<f64> = (0..n)
            .map(|c| rng::stream(self.seed, &[tag::CRC_SELECT, c as u64, t]).gen())
            .collect();
        let actions: Vec<usize> = (0..n)
            .map(|c| sample_action(&self.state.probs[c], draws[c]))
            .collect();

        let mut realized = vec![0.0; n];
        let mut rows = Vec::with_capacity(n);
        for c in 0..n {
            let mut perceived = actions.clone();
            for other in 0..n {
                if other == c || self.error_ratio == 0.0 {
                    continue;
                }
                let mut noise =
                    rng::stream(self.seed, &[tag::CRC_EXCHANGE, c as u64, other as u64, t]);
                let w = exchange_beliefs(&self.state.probs[other], self.error_ratio, &mut noise);
                perceived[other] = sample_action(&w, draws[other]);
            }
            let cf = game.utilities_against(c, &perceived);
            realized[c] = cf[actions[c]];
            rows.push(cf);
        }
        for (c, cf) in rows.iter().enumerate() {
            regret_update(&mut self.state, c, actions[c], cf);
        }
        self.state.t += 1;
        for c in 0..n {
            let regrets = self.state.regrets(c, actions[c], game.num_actions(c));
            self.state.probs[c] = probability_update(&regrets, actions[c], xi_for(&regrets));
            self.state.utilities[c].push(realized[c]);
        }
        *self.state.counts.entry(actions.clone()).or_insert(0) += 1;
        self.state.played = actions;
        realized
    }

    /// Strategy each player would commit to now.
    pub fn selected(&self) -> Vec<usize> {
        self.state.probs.iter().map(|w| select_action(w)).collect()
    }
}

/// Outcome of running the learner to its stop rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOutcome {
    pub selected: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Realized utilities per iteration, `[t][player]`.
    pub trace: Vec<Vec<f64>>,
    pub max_regret: f64,
}

/// Runs rounds until every player's relative utility change is at most
/// `threshold` (checked from the second round on) or `max_iters`.
pub fn learn<G: FiniteGame + ?Sized>(
    game: &G,
    initial: &[usize],
    error_ratio: f64,
    seed: u64,
    max_iters: usize,
    threshold: f64,
) -> (RegretLearner, LearnOutcome) {
    let mut learner = RegretLearner::new(game, initial, error_ratio, seed);
    let mut trace: Vec<Vec<f64>> = Vec::new();
    let mut converged = false;
    while learner.state.t < max_iters {
        let u = learner.step(game);
        if let Some(prev) = trace.last() {
            if prev.iter().zip(&u).all(|(&a, &b)| settled(a, b, threshold)) {
                trace.push(u);
                converged = true;
                break;
            }
        }
        trace.push(u);
    }
    let outcome = LearnOutcome {
        selected: learner.selected(),
        iterations: learner.state.t,
        converged,
        trace,
        max_regret: learner.state.max_regret(),
    };
    (learner, outcome)
}

/// Actions of one CSC over its associated users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub group: usize,
    /// `(s, k)` of each associated user, in RSC then user order.
    pub users: Vec<(usize, usize)>,
    pub actions: Vec<Vec<Choice>>,
    /// Index of the action derived from the initial allocation.
    pub incumbent: usize,
}

impl ActionSpace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Effective power `[m][k][n]` of action `a` added into `out`.
    pub fn add_powers(&self, params: &ScenarioParams, dims: &crate::params::Dims, a: usize, out: &mut [f64]) {
        for (&(s, k), choice) in self.users.iter().zip(&self.actions[a]) {
            if let Some((n, level)) = *choice {
                out[dims.entry(self.group, s, k, n)] += params.level_power(level);
            }
        }
    }

    /// Per-subchannel power of action `a`, W.
    pub fn subchannel_powers(&self, params: &ScenarioParams, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; params.num_subchannels];
        for choice in self.actions[a].iter().flatten() {
            out[choice.0] += params.level_power(choice.1);
        }
        out
    }
}

fn valid_action(params: &ScenarioParams, users: &[(usize, usize)], action: &[Choice]) -> bool {
    let mut power: HashMap<usize, f64> = HashMap::new();
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    for (&(s, _), choice) in users.iter().zip(action) {
        if let Some((n, level)) = *choice {
            if !used.insert((s, n)) {
                return false;
            }
            let p = power.entry(s).or_insert(0.0);
            *p += params.level_power(level);
            if *p > params.max_tx_power * (1.0 + 1e-12) {
                return false;
            }
        }
    }
    true
}

/// Action closest to an allocation: each user keeps its strongest
/// subchannel at the nearest level (at least 1); levels are lowered, then
/// users dropped, until every RSC is within its power cap.
pub fn incumbent_action(params: &ScenarioParams, alloc: &Allocation, group: usize, users: &[(usize, usize)]) -> Vec<Choice> {
    let d = alloc.dims;
    let levels = params.power_levels;
    let mut action: Vec<Choice> = users
        .iter()
        .map(|&(s, k)| {
            let mut best: Option<(usize, f64)> = None;
            for n in 0..d.subchannels {
                let p = alloc.effective_power(group, s, k, n);
                if p > 0.0 && best.is_none_or(|(_, q)| p > q) {
                    best = Some((n, p));
                }
            }
            best.map(|(n, p)| {
                let l = (p * levels as f64 / params.max_tx_power).round() as usize;
                (n, l.clamp(1, levels))
            })
        })
        .collect();
    while !valid_action(params, users, &action) {
        let worst = action
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|(_, l)| (i, l)))
            .max_by_key(|&(i, l)| (l, std::cmp::Reverse(i)));
        match worst {
            Some((i, l)) if l > 1 => action[i] = action[i].map(|(n, _)| (n, l - 1)),
            Some((i, _)) => action[i] = None,
            None => break,
        }
    }
    action
}

/// Enumerates (or samples, beyond `cap`) the actions of group `group`'s
/// associated users. The all-off action is always index 0 and the
/// incumbent derived from `alloc` is always present.
pub fn build_action_space(
    params: &ScenarioParams,
    alloc: &Allocation,
    group: usize,
    cap: usize,
    seed: u64,
) -> ActionSpace {
    let d = alloc.dims;
    let mut users = Vec::new();
    for s in 0..d.rscs_per_group {
        for k in 0..d.users {
            if alloc.is_associated(group, s, k) {
                users.push((s, k));
            }
        }
    }
    let zero: Vec<Choice> = vec![None; users.len()];
    let incumbent = incumbent_action(params, alloc, group, &users);
    let per_user = 1 + d.subchannels * params.power_levels;
    let choice_of = |i: usize| -> Choice {
        if i == 0 {
            None
        } else {
            Some(((i - 1) / params.power_levels, (i - 1) % params.power_levels + 1))
        }
    };
    let product = (per_user as f64).powi(users.len() as i32);
    let mut rng = rng::stream(seed, &[tag::ACTION_SAMPLE, group as u64]);

    let mut actions: Vec<Vec<Choice>> = Vec::new();
    if product <= (4 * cap).max(4096) as f64 {
        let total = product as usize;
        for r in 0..total {
            let mut rem = r;
            let mut a = vec![None; users.len()];
            for slot in a.iter_mut().rev() {
                *slot = choice_of(rem % per_user);
                rem /= per_user;
            }
            if valid_action(params, &users, &a) {
                actions.push(a);
            }
        }
        if actions.len() > cap {
            let mut rest: Vec<Vec<Choice>> = actions
                .into_iter()
                .filter(|a| *a != zero && *a != incumbent)
                .collect();
            rest.shuffle(&mut rng);
            actions = vec![zero.clone()];
            if incumbent != zero {
                actions.push(incumbent.clone());
            }
            let room = cap.saturating_sub(actions.len());
            actions.extend(rest.into_iter().take(room));
        }
    } else {
        actions.push(zero.clone());
        if incumbent != zero {
            actions.push(incumbent.clone());
        }
        let mut seen: HashSet<Vec<Choice>> = actions.iter().cloned().collect();
        let mut attempts = 0;
        while actions.len() < cap && attempts < 50 * cap {
            attempts += 1;
            let a: Vec<Choice> = if rng.gen_bool(0.7) {
                let mut a = incumbent.clone();
                let changes = rng.gen_range(1..=2.min(users.len()));
                for _ in 0..changes {
                    let i = rng.gen_range(0..users.len());
                    a[i] = choice_of(rng.gen_range(0..per_user));
                }
                a
            } else {
                (0..users.len())
                    .map(|_| choice_of(rng.gen_range(0..per_user)))
                    .collect()
            };
            if valid_action(params, &users, &a) && seen.insert(a.clone()) {
                actions.push(a);
            }
        }
    }
    let incumbent = actions.iter().position(|a| *a == incumbent).unwrap_or(0);
    ActionSpace {
        group,
        users,
        actions,
        incumbent,
    }
}

/// The game among CSCs: utility of CSC c is its EE (Mbit/J) with each
/// RSC's delivered rate capped by its fronthaul, other groups transmitting
/// the actions they are believed to play.
#[derive(Debug, Clone)]
pub struct NetworkGame<'a> {
    pub params: &'a ScenarioParams,
    pub depl: &'a Deployment,
    pub spaces: Vec<ActionSpace>,
    /// Association the actions are built on.
    pub base: Allocation,
}

impl<'a> NetworkGame<'a> {
    pub fn new(params: &'a ScenarioParams, depl: &'a Deployment, base: &Allocation, cfg: &CrcConfig) -> Self {
        let spaces = (0..base.dims.groups)
            .map(|c| build_action_space(params, base, c, cfg.action_cap, cfg.seed))
            .collect();
        let mut assoc_only = Allocation::empty(base.dims);
        assoc_only.assoc.clone_from(&base.assoc);
        Self {
            params,
            depl,
            spaces,
            base: assoc_only,
        }
    }

    pub fn incumbents(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.incumbent).collect()
    }

    /// Allocation implied by a joint profile.
    pub fn allocation(&self, profile: &[usize]) -> Allocation {
        let d = self.base.dims;
        let mut a = self.base.clone();
        for (space, &act) in self.spaces.iter().zip(profile) {
            for (&(s, k), choice) in space.users.iter().zip(&space.actions[act]) {
                if let Some((n, level)) = *choice {
                    a.assign(space.group, s, k, n, self.params.level_power(level));
                }
            }
        }
        debug_assert!(a.dims == d);
        a
    }

    /// Effective power tensor of a joint profile.
    pub fn powers(&self, profile: &[usize]) -> Vec<f64> {
        let d = self.base.dims;
        let mut out = vec![0.0; d.num_entries()];
        for (space, &act) in self.spaces.iter().zip(profile) {
            space.add_powers(self.params, &d, act, &mut out);
        }
        out
    }

    /// Per-subchannel power bounds `[c][n]` of a joint profile.
    pub fn bounds(&self, profile: &[usize]) -> Vec<f64> {
        self.spaces
            .iter()
            .zip(profile)
            .flat_map(|(space, &a)| space.subchannel_powers(self.params, a))
            .collect()
    }

    fn foreign(&self, c: usize, profile: &[usize]) -> Vec<f64> {
        let d = self.base.dims;
        let group_users = &self.spaces[c].users;
        let mut out = vec![0.0; d.users * d.subchannels];
        for (space, &act) in self.spaces.iter().zip(profile) {
            if space.group == c {
                continue;
            }
            for (&(s, _), choice) in space.users.iter().zip(&space.actions[act]) {
                if let Some((n, level)) = *choice {
                    let m = d.rsc(space.group, s);
                    let p = self.params.level_power(level);
                    for &(_, k) in group_users {
                        out[k * d.subchannels + n] += p * self.depl.gain_m(m, k, n);
                    }
                }
            }
        }
        out
    }

    fn action_utility(&self, c: usize, a: usize, foreign: &[f64]) -> f64 {
        let d = self.base.dims;
        let p = self.params;
        let space = &self.spaces[c];
        let noise = p.noise_floor();
        let tx: Vec<(usize, usize, usize, f64)> = space
            .users
            .iter()
            .zip(&space.actions[a])
            .filter_map(|(&(s, k), ch)| ch.map(|(n, l)| (s, k, n, p.level_power(l))))
            .collect();
        let mut rsc_rate = vec![0.0; d.rscs_per_group];
        for &(s, k, n, pw) in &tx {
            let mut interf = foreign[k * d.subchannels + n];
            for &(s2, k2, n2, p2) in &tx {
                if n2 == n && k2 != k {
                    interf += p2 * self.depl.gain(c, s2, k, n);
                }
            }
            let sinr = pw * self.depl.gain(c, s, k, n) / (interf + noise);
            rsc_rate[s] += model::shannon_rate(p.subchannel_bandwidth, sinr);
        }
        let mut delivered = 0.0;
        let mut power = 0.0;
        for (s, &rate) in rsc_rate.iter().enumerate() {
            let m = d.rsc(c, s);
            delivered += rate.min(p.fronthaul_cap_of(m));
            let users: Vec<usize> = space.users.iter().filter(|u| u.0 == s).map(|u| u.1).collect();
            if users.is_empty() && p.sleep_enabled {
                power += p.circuit_sleep;
            } else {
                let tx_s: f64 = tx.iter().filter(|t| t.0 == s).map(|t| t.3).sum();
                let moved = users.iter().filter(|&&k| self.depl.initial_rsc[k] != m).count();
                power += tx_s + moved as f64 * p.signaling_overhead + p.circuit_active;
            }
        }
        delivered / power / 1e6
    }
}

impl FiniteGame for NetworkGame<'_> {
    fn num_players(&self) -> usize {
        self.spaces.len()
    }

    fn num_actions(&self, player: usize) -> usize {
        self.spaces[player].len()
    }

    fn utility(&self, player: usize, profile: &[usize]) -> f64 {
        let foreign = self.foreign(player, profile);
        self.action_utility(player, profile[player], &foreign)
    }

    fn utilities_against(&self, player: usize, profile: &[usize]) -> Vec<f64> {
        let foreign = self.foreign(player, profile);
        (0..self.num_actions(player))
            .map(|a| self.action_utility(player, a, &foreign))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrcOutcome {
    /// Selected action per CSC.
    pub actions: Vec<usize>,
    /// Allocation implied by the selected actions.
    pub allocation: Allocation,
    /// Per-subchannel power bounds `[c][n]`, W.
    pub bounds: Vec<f64>,
    /// Effective powers of the selected actions, what other groups believe.
    pub beliefs: Vec<f64>,
    /// Sum of CSC utilities (Mbit/J) per iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_regret: f64,
}

/// Learns the CSC game starting from the actions closest to `initial`.
pub fn run_crc(
    params: &ScenarioParams,
    depl: &Deployment,
    initial: &Allocation,
    cfg: &CrcConfig,
) -> Result<CrcOutcome> {
    cfg.validate()?;
    let game = NetworkGame::new(params, depl, initial, cfg);
    let (_, out) = learn(
        &game,
        &game.incumbents(),
        params.error_ratio,
        cfg.seed,
        cfg.max_iters,
        cfg.conv_threshold,
    );
    Ok(CrcOutcome {
        allocation: game.allocation(&out.selected),
        bounds: game.bounds(&out.selected),
        beliefs: game.powers(&out.selected),
        actions: out.selected,
        trace: out.trace.iter().map(|u| u.iter().sum()).collect(),
        iterations: out.iterations,
        converged: out.converged,
        max_regret: out.max_regret,
    })
}
