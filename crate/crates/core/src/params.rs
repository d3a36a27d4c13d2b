//! Scenario parameters.
//!
//! [`ScenarioConfig`] is the human-facing form (dBm, Mbit/s, kHz) that appears
//! in spec files. [`ScenarioParams`] is the resolved, linear-SI form every
//! model computation uses. Conversion happens once, in
//! [`ScenarioConfig::resolve`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// How users are dropped into the coverage square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum UserPlacement {
    /// Uniform over the whole square.
    #[default]
    Uniform,
    /// The first `C*S` users are dropped uniformly inside distinct RSC grid
    /// cells (one per RSC), the rest uniformly over the square.
    OnePerRsc,
}

/// Group/RSC/user/subchannel counts and the flat tensor layout built on them.
///
/// Physical RSC `m` is `(c, s)` with `m = c * S + s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub groups: usize,
    pub rscs_per_group: usize,
    pub users: usize,
    pub subchannels: usize,
}

impl Dims {
    pub fn total_rscs(&self) -> usize {
        self.groups * self.rscs_per_group
    }

    #[inline]
    pub fn rsc(&self, c: usize, s: usize) -> usize {
        c * self.rscs_per_group + s
    }

    /// `(c, s)` of physical RSC `m`.
    #[inline]
    pub fn split_rsc(&self, m: usize) -> (usize, usize) {
        (m / self.rscs_per_group, m % self.rscs_per_group)
    }

    #[inline]
    pub fn link(&self, c: usize, s: usize, k: usize) -> usize {
        self.rsc(c, s) * self.users + k
    }

    #[inline]
    pub fn entry(&self, c: usize, s: usize, k: usize, n: usize) -> usize {
        self.link(c, s, k) * self.subchannels + n
    }

    pub fn num_links(&self) -> usize {
        self.total_rscs() * self.users
    }

    pub fn num_entries(&self) -> usize {
        self.num_links() * self.subchannels
    }
}

/// Resolved scenario, all quantities linear SI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub num_groups: usize,
    pub num_rscs_per_group: usize,
    pub num_users: usize,
    pub num_subchannels: usize,
    /// Hz
    pub subchannel_bandwidth: f64,
    /// W/Hz
    pub noise_psd: f64,
    /// W
    pub circuit_active: f64,
    /// W
    pub circuit_sleep: f64,
    /// W per offloaded user
    pub signaling_overhead: f64,
    /// W per RSC
    pub max_tx_power: f64,
    /// bit/s per user
    pub min_rate: f64,
    /// bit/s, one entry (shared) or one per physical RSC
    pub fronthaul_cap: Vec<f64>,
    /// m
    pub area_side: f64,
    /// m
    pub min_rsc_user_distance: f64,
    /// Wall count used by the NLoS formula; `None` counts the RSC grid lines
    /// the link crosses.
    pub num_walls: Option<u32>,
    pub all_los: bool,
    /// dB added to both pathloss formulas.
    pub pathloss_offset_db: f64,
    /// Discrete power levels per CSC for the competition game.
    pub power_levels: usize,
    /// Relative error of exchanged probability vectors.
    pub error_ratio: f64,
    pub rng_seed: u64,
    /// RSC on/off: an RSC with no users draws sleep instead of active power.
    pub sleep_enabled: bool,
    /// Fronthaul cap enforced.
    pub fronthaul_limited: bool,
    pub placement: UserPlacement,
}

impl ScenarioParams {
    pub fn dims(&self) -> Dims {
        Dims {
            groups: self.num_groups,
            rscs_per_group: self.num_rscs_per_group,
            users: self.num_users,
            subchannels: self.num_subchannels,
        }
    }

    pub fn noise_floor(&self) -> f64 {
        self.noise_psd * self.subchannel_bandwidth
    }

    /// Fronthaul cap of physical RSC `m` (bit/s); infinite when unlimited.
    pub fn fronthaul_cap_of(&self, m: usize) -> f64 {
        if !self.fronthaul_limited {
            return f64::INFINITY;
        }
        if self.fronthaul_cap.len() == 1 {
            self.fronthaul_cap[0]
        } else {
            self.fronthaul_cap[m]
        }
    }

    /// Power of level `level` (1-based) on the CSC power grid.
    pub fn level_power(&self, level: usize) -> f64 {
        level as f64 * self.max_tx_power / self.power_levels as f64
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_groups", self.num_groups),
            ("num_rscs_per_group", self.num_rscs_per_group),
            ("num_users", self.num_users),
            ("num_subchannels", self.num_subchannels),
            ("power_levels", self.power_levels),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        let positive = [
            ("subchannel_bandwidth", self.subchannel_bandwidth),
            ("noise_psd", self.noise_psd),
            ("circuit_active", self.circuit_active),
            ("circuit_sleep", self.circuit_sleep),
            ("signaling_overhead", self.signaling_overhead),
            ("max_tx_power", self.max_tx_power),
            ("min_rate", self.min_rate),
            ("area_side", self.area_side),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.min_rsc_user_distance >= 0.0) {
            return Err(invalid("min_rsc_user_distance", "must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.error_ratio) {
            return Err(invalid("error_ratio", format!("must lie in [0, 1], got {}", self.error_ratio)));
        }
        let m = self.num_groups * self.num_rscs_per_group;
        if self.fronthaul_cap.len() != 1 && self.fronthaul_cap.len() != m {
            return Err(invalid(
                "fronthaul_cap",
                format!("needs 1 or {m} entries, got {}", self.fronthaul_cap.len()),
            ));
        }
        if self.fronthaul_cap.iter().any(|&b| !(b > 0.0)) {
            return Err(invalid("fronthaul_cap", "entries must be positive"));
        }
        if self.num_walls == Some(0) {
            return Err(invalid("num_walls", "an NLoS link crosses at least one wall"));
        }
        Ok(())
    }

    /// Same deployment geometry regrouped into `groups` C-RANs.
    pub fn regrouped(&self, groups: usize) -> Result<Self> {
        let total = self.num_groups * self.num_rscs_per_group;
        if groups == 0 || total % groups != 0 {
            return Err(invalid(
                "num_groups",
                format!("{groups} groups do not evenly split {total} RSCs"),
            ));
        }
        let mut p = self.clone();
        p.num_groups = groups;
        p.num_rscs_per_group = total / groups;
        Ok(p)
    }
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioConfig::default()
            .resolve()
            .expect("built-in defaults are valid")
    }
}

/// Spec-file form of the scenario. Defaults reproduce the published
/// parameter table with six RSCs in one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub groups: usize,
    pub rscs_per_group: usize,
    pub users: usize,
    pub subchannels: usize,
    pub bandwidth_khz: f64,
    pub noise_dbm_per_hz: f64,
    pub circuit_active_w: f64,
    pub circuit_sleep_w: f64,
    pub signaling_dbm: f64,
    pub max_tx_dbm: f64,
    pub min_rate_mbps: f64,
    pub fronthaul_mbps: Vec<f64>,
    pub area_side_m: f64,
    pub min_distance_m: f64,
    pub walls: Option<u32>,
    pub all_los: bool,
    pub pathloss_offset_db: f64,
    pub power_levels: usize,
    pub error_ratio: f64,
    pub seed: u64,
    pub sleep_enabled: bool,
    pub fronthaul_limited: bool,
    pub placement: UserPlacement,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            groups: 1,
            rscs_per_group: 6,
            users: 12,
            subchannels: 50,
            bandwidth_khz: 360.0,
            noise_dbm_per_hz: -174.0,
            circuit_active_w: 6.8,
            circuit_sleep_w: 4.3,
            signaling_dbm: 1.0,
            max_tx_dbm: 20.0,
            min_rate_mbps: 10.0,
            fronthaul_mbps: vec![20.0],
            area_side_m: 90.0,
            min_distance_m: 2.0,
            walls: None,
            all_los: false,
            pathloss_offset_db: 0.0,
            power_levels: 3,
            error_ratio: 0.0,
            seed: 1,
            sleep_enabled: true,
            fronthaul_limited: true,
            placement: UserPlacement::Uniform,
        }
    }
}

impl ScenarioConfig {
    pub fn resolve(&self) -> Result<ScenarioParams> {
        let p = ScenarioParams {
            num_groups: self.groups,
            num_rscs_per_group: self.rscs_per_group,
            num_users: self.users,
            num_subchannels: self.subchannels,
            subchannel_bandwidth: self.bandwidth_khz * 1e3,
            noise_psd: dbm_to_watts(self.noise_dbm_per_hz),
            circuit_active: self.circuit_active_w,
            circuit_sleep: self.circuit_sleep_w,
            signaling_overhead: dbm_to_watts(self.signaling_dbm),
            max_tx_power: dbm_to_watts(self.max_tx_dbm),
            min_rate: self.min_rate_mbps * 1e6,
            fronthaul_cap: self.fronthaul_mbps.iter().map(|b| b * 1e6).collect(),
            area_side: self.area_side_m,
            min_rsc_user_distance: self.min_distance_m,
            num_walls: self.walls,
            all_los: self.all_los,
            pathloss_offset_db: self.pathloss_offset_db,
            power_levels: self.power_levels,
            error_ratio: self.error_ratio,
            rng_seed: self.seed,
            sleep_enabled: self.sleep_enabled,
            fronthaul_limited: self.fronthaul_limited,
            placement: self.placement,
        };
        p.validate()?;
        Ok(p)
    }
}
