//! Monte Carlo experiments: a sweep axis times a set of arms (mode plus
//! scenario switches), repeated over seeded drops.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deployment::generate_deployment;
use crate::error::{invalid, Error, Result};
use crate::harm::{run_harm, HarmConfig, Mode, ScenarioFlags};
use crate::params::ScenarioConfig;
use crate::rng::{derive_seed, tag};
use crate::tura::QpsoConfig;

/// Scenario quantities a sweep or an arm can set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Users,
    /// Same cap on every RSC, Mbit/s.
    FronthaulMbps,
    ErrorRatio,
    Groups,
    SignalingDbm,
    AreaSideM,
    MinRateMbps,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Users => "users",
            Axis::FronthaulMbps => "fronthaul_mbps",
            Axis::ErrorRatio => "error_ratio",
            Axis::Groups => "groups",
            Axis::SignalingDbm => "signaling_dbm",
            Axis::AreaSideM => "area_side_m",
            Axis::MinRateMbps => "min_rate_mbps",
        }
    }

    pub fn apply(self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(invalid("sweep", format!("{} needs a positive integer, got {v}", self.name())))
            }
        };
        match self {
            Axis::Users => cfg.users = count(value)?,
            Axis::FronthaulMbps => cfg.fronthaul_mbps = vec![value],
            Axis::ErrorRatio => cfg.error_ratio = value,
            Axis::Groups => {
                let total = cfg.groups * cfg.rscs_per_group;
                let g = count(value)?;
                if total % g != 0 {
                    return Err(invalid("sweep", format!("{g} groups do not split {total} RSCs")));
                }
                cfg.groups = g;
                cfg.rscs_per_group = total / g;
            }
            Axis::SignalingDbm => cfg.signaling_dbm = value,
            Axis::AreaSideM => cfg.area_side_m = value,
            Axis::MinRateMbps => cfg.min_rate_mbps = value,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// One compared configuration: a solver mode, scenario switches and
/// optional scenario overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arm {
    pub label: String,
    pub mode: Mode,
    #[serde(default)]
    pub flags: ScenarioFlags,
    #[serde(default)]
    pub set: BTreeMap<Axis, f64>,
}

impl Arm {
    pub fn plain(mode: Mode) -> Self {
        Self {
            label: mode.name().to_string(),
            mode,
            flags: ScenarioFlags::default(),
            set: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub drops: usize,
    #[serde(default)]
    pub traces: bool,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub qpso: QpsoConfig,
    #[serde(default)]
    pub harm: HarmConfig,
    pub sweep: Sweep,
    pub arms: Vec<Arm>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("specs always serialize")
    }

    /// Checks the spec and every scenario it expands to.
    pub fn validate(&self) -> Result<()> {
        if self.drops < 1 {
            return Err(Error::Spec("drops must be at least 1".into()));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Spec("sweep needs at least one value".into()));
        }
        if self.arms.is_empty() {
            return Err(Error::Spec("at least one arm is required".into()));
        }
        let mut labels: Vec<&str> = self.arms.iter().map(|a| a.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Spec("arm labels must be unique".into()));
        }
        self.qpso.validate()?;
        self.harm.validate()?;
        for &v in &self.sweep.values {
            for arm in &self.arms {
                self.scenario_for(v, arm)?.resolve()?;
            }
        }
        Ok(())
    }

    /// Scenario of one cell: base, then the sweep value, then the arm's
    /// overrides.
    pub fn scenario_for(&self, value: f64, arm: &Arm) -> Result<ScenarioConfig> {
        let mut cfg = self.scenario.clone();
        self.sweep.axis.apply(&mut cfg, value)?;
        for (&axis, &v) in &arm.set {
            axis.apply(&mut cfg, v)?;
        }
        Ok(cfg)
    }

    /// Seed of the deployment drawn for drop `drop`; shared by every arm
    /// and sweep value so comparisons are paired.
    pub fn drop_seed(&self, drop: usize) -> u64 {
        derive_seed(self.seed, &[tag::DROP, drop as u64])
    }
}

/// One solved (sweep value, arm, drop).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub mode: String,
    pub drop: usize,
    pub ee_bits_per_joule: f64,
    pub outage_prob: f64,
    pub offload_prob: f64,
    pub iters: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub sweep_value: f64,
    pub mode: String,
    pub drop: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropFailure {
    pub sweep_value: f64,
    pub mode: String,
    pub drop: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<Record>,
    pub traces: Vec<Trace>,
    pub failures: Vec<DropFailure>,
}

/// Mean and sample standard deviation over the drops of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sweep_value: f64,
    pub mode: String,
    pub drops: usize,
    pub ee_mean: f64,
    pub ee_std: f64,
    pub outage_mean: f64,
    pub outage_std: f64,
    pub offload_mean: f64,
    pub offload_std: f64,
    pub iters_mean: f64,
    pub iters_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-cell aggregates in sweep order, then arm order.
pub fn aggregate(spec: &ExperimentSpec, records: &[Record]) -> Vec<Aggregate> {
    let mut out = Vec::new();
    for &v in &spec.sweep.values {
        for arm in &spec.arms {
            let cell: Vec<&Record> = records
                .iter()
                .filter(|r| r.sweep_value == v && r.mode == arm.label)
                .collect();
            if cell.is_empty() {
                continue;
            }
            let col = |f: fn(&Record) -> f64| mean_std(&cell.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (ee_mean, ee_std) = col(|r| r.ee_bits_per_joule);
            let (outage_mean, outage_std) = col(|r| r.outage_prob);
            let (offload_mean, offload_std) = col(|r| r.offload_prob);
            let (iters_mean, iters_std) = col(|r| r.iters as f64);
            out.push(Aggregate {
                sweep_value: v,
                mode: arm.label.clone(),
                drops: cell.len(),
                ee_mean,
                ee_std,
                outage_mean,
                outage_std,
                offload_mean,
                offload_std,
                iters_mean,
                iters_std,
            });
        }
    }
    out
}

struct Job<'a> {
    value: f64,
    arm: &'a Arm,
    drop: usize,
}

fn run_job(spec: &ExperimentSpec, job: &Job<'_>) -> Result<(Record, Vec<f64>)> {
    let started = Instant::now();
    let params = spec.scenario_for(job.value, job.arm)?.resolve()?;
    let depl = generate_deployment(&params, spec.drop_seed(job.drop))?;
    let qpso = QpsoConfig {
        seed: derive_seed(spec.qpso.seed, &[tag::DROP, job.drop as u64]),
        ..spec.qpso.clone()
    };
    let harm = HarmConfig {
        mode: job.arm.mode,
        flags: job.arm.flags,
        crc: crate::crc::CrcConfig {
            seed: derive_seed(spec.harm.crc.seed, &[tag::DROP, job.drop as u64]),
            ..spec.harm.crc.clone()
        },
        ..spec.harm.clone()
    };
    let sol = run_harm(&params, &depl, &qpso, &harm)?;
    let record = Record {
        sweep_name: spec.sweep.axis.name().to_string(),
        sweep_value: job.value,
        mode: job.arm.label.clone(),
        drop: job.drop,
        ee_bits_per_joule: sol.metrics.ee,
        outage_prob: sol.metrics.outage_prob,
        offload_prob: sol.metrics.offload_prob,
        iters: sol.iterations,
        seconds: started.elapsed().as_secs_f64(),
    };
    Ok((record, sol.trace))
}

/// Runs every (sweep value, arm, drop). Drops run in parallel; a failed
/// drop is recorded, and only a cell whose drops all fail is an error.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let jobs: Vec<Job<'_>> = spec
        .sweep
        .values
        .iter()
        .flat_map(|&value| {
            spec.arms
                .iter()
                .flat_map(move |arm| (0..spec.drops).map(move |drop| Job { value, arm, drop }))
        })
        .collect();
    let results: Vec<Result<(Record, Vec<f64>)>> = jobs.par_iter().map(|j| run_job(spec, j)).collect();

    let mut out = ExperimentOutput {
        records: Vec::new(),
        traces: Vec::new(),
        failures: Vec::new(),
    };
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok((record, trace)) => {
                if spec.traces {
                    out.traces.push(Trace {
                        sweep_value: job.value,
                        mode: job.arm.label.clone(),
                        drop: job.drop,
                        values: trace,
                    });
                }
                out.records.push(record);
            }
            Err(e) => out.failures.push(DropFailure {
                sweep_value: job.value,
                mode: job.arm.label.clone(),
                drop: job.drop,
                error: e.to_string(),
            }),
        }
    }
    for &value in &spec.sweep.values {
        for arm in &spec.arms {
            let ok = out.records.iter().any(|r| r.sweep_value == value && r.mode == arm.label);
            if !ok {
                let last = out
                    .failures
                    .iter()
                    .rev()
                    .find(|f| f.sweep_value == value && f.mode == arm.label)
                    .map(|f| f.error.clone())
                    .unwrap_or_default();
                return Err(Error::CellFailed {
                    sweep: spec.sweep.axis.name().to_string(),
                    value,
                    arm: arm.label.clone(),
                    last,
                });
            }
        }
    }
    Ok(out)
}

/// Bundled experiment presets, one per published figure (4 to 13).
pub const PRESETS: [(&str, &str); 10] = [
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10", include_str!("../presets/fig10.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
    ("fig13", include_str!("../presets/fig13.toml")),
];

pub fn preset(name: &str) -> Result<ExperimentSpec> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Spec(format!("unknown preset `{name}`")))?;
    ExperimentSpec::from_toml(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec::from_toml(
            r#"
name = "tiny"
seed = 3
drops = 1

[scenario]
rscs_per_group = 2
users = 3
subchannels = 4
min_rate_mbps = 1.0

[qpso]
swarm_size = 6
max_iters = 10

[sweep]
axis = "users"
values = [3]

[[arms]]
label = "tura"
mode = "tura"
"#,
        )
        .unwrap()
    }

    #[test]
    fn one_cell_one_record() {
        let out = run_experiment(&tiny_spec()).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.failures.is_empty());
        let r = &out.records[0];
        assert_eq!((r.sweep_name.as_str(), r.mode.as_str(), r.drop), ("users", "tura", 0));
        assert!(r.ee_bits_per_joule.is_finite() && r.ee_bits_per_joule >= 0.0);
    }

    #[test]
    fn reruns_match() {
        let spec = tiny_spec();
        let strip = |mut o: ExperimentOutput| {
            o.records.iter_mut().for_each(|r| r.seconds = 0.0);
            o
        };
        assert_eq!(strip(run_experiment(&spec).unwrap()), strip(run_experiment(&spec).unwrap()));
    }

    #[test]
    fn spec_errors() {
        let mut s = tiny_spec();
        s.drops = 0;
        assert!(s.validate().is_err());
        let mut s = tiny_spec();
        s.sweep.values.clear();
        assert!(s.validate().is_err());
        let mut s = tiny_spec();
        s.sweep.axis = Axis::Groups;
        s.sweep.values = vec![4.0];
        assert!(s.validate().is_err());
        assert!(ExperimentSpec::from_toml("name = 1").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let s = tiny_spec();
        assert_eq!(ExperimentSpec::from_toml(&s.to_toml()).unwrap(), s);
    }

    #[test]
    fn presets_parse() {
        for (name, _) in PRESETS {
            let spec = preset(name).unwrap();
            assert_eq!(spec.name, name);
        }
        assert!(preset("fig99").is_err());
    }

    #[test]
    fn aggregates_use_sample_std() {
        let spec = tiny_spec();
        let rec = |drop, ee| Record {
            sweep_name: "users".into(),
            sweep_value: 3.0,
            mode: "tura".into(),
            drop,
            ee_bits_per_joule: ee,
            outage_prob: 0.0,
            offload_prob: 0.5,
            iters: 2,
            seconds: 0.0,
        };
        let agg = aggregate(&spec, &[rec(0, 1.0), rec(1, 3.0)]);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].drops, 2);
        assert_eq!(agg[0].ee_mean, 2.0);
        assert!((agg[0].ee_std - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(agg[0].offload_mean, 0.5);
    }
}
