//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Monte Carlo criteria run 50 drops (200 for the game-convergence
//! trend) with a lighter swarm than the library default (20 candidates, 100
//! iterations) to keep the suite in the tens of minutes on one core.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use scn_harm::crc::{MatrixGame, RegretLearner};
use scn_harm::emit::{self, Format};
use scn_harm::experiment::{run_experiment, ExperimentSpec, Record};
use scn_harm::model::network_ee;
use scn_harm::oracle::{oracle_optimum, verify_ce, OracleLimits};
use scn_harm::tura::{run_tura, QpsoConfig, TuraProblem};
use scn_harm::{generate_deployment, Deployment, ScenarioConfig, ScenarioParams};

const DROPS: usize = 50;
// Iteration counts differ by a fraction of a round between loads, so the
// game-convergence trend needs a larger sample; CRC drops are cheap.
const CRC_DROPS: usize = 200;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn tiny_params() -> ScenarioParams {
    ScenarioConfig {
        rscs_per_group: 2,
        users: 2,
        subchannels: 2,
        min_rate_mbps: 1.0,
        ..ScenarioConfig::default()
    }
    .resolve()
    .unwrap()
}

/// Shared by criteria 1 and 3: every tiny instance solved once.
struct TinyRun {
    ratio: f64,
    feasible: bool,
    elapsed: Duration,
    trace: Vec<f64>,
}

fn tiny_runs() -> Vec<TinyRun> {
    let p = tiny_params();
    let limits = OracleLimits::for_params(&p);
    (0..100u64)
        .map(|seed| {
            let d = generate_deployment(&p, seed).unwrap();
            let best = oracle_optimum(&p, &d, &limits).unwrap();
            let prob = TuraProblem::new(&p, &d, 0);
            let start = Instant::now();
            let out = run_tura(&prob, &QpsoConfig { seed, ..QpsoConfig::default() }, &[]).unwrap();
            let elapsed = start.elapsed();
            let ee = network_ee(&p, &d, &out.allocation).sum_of_groups;
            TinyRun {
                ratio: ee / best.ee,
                feasible: out.evaluation.feasible,
                elapsed,
                trace: out.trace,
            }
        })
        .collect()
}

fn oracle_dominance(runs: &[TinyRun]) -> Verdict {
    let good = runs.iter().filter(|r| r.feasible && r.ratio >= 0.95).count();
    let slowest = runs.iter().map(|r| r.elapsed).max().unwrap();
    verdict(
        good >= 90 && slowest < Duration::from_secs(5),
        format!("{good}/100 feasible at >= 0.95 of the optimum, slowest solve {slowest:.2?}"),
    )
}

fn penalty_equivalence() -> Verdict {
    let p = ScenarioConfig {
        rscs_per_group: 2,
        users: 3,
        subchannels: 3,
        min_rate_mbps: 1.0,
        ..ScenarioConfig::default()
    }
    .resolve()
    .unwrap();
    let drops: Vec<Deployment> = (0..20).map(|s| generate_deployment(&p, s).unwrap()).collect();
    let dim = TuraProblem::new(&p, &drops[0], 0).dimension();

    let zero = std::cell::Cell::new(0usize);
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (0..drops.len(), 0..4usize, proptest::collection::vec(0.0f64..1.0, dim));
    let result = runner.run(&strategy, |(drop, kind, raw)| {
        let prob = TuraProblem::new(&p, &drops[drop], 0);
        let heuristics = prob.heuristic_allocations();
        let base = prob.encode(&heuristics[(raw[0] * heuristics.len() as f64) as usize % heuristics.len()]);
        let x: Vec<f64> = (0..dim)
            .map(|j| {
                let binary = prob.upper(j) == 1.0;
                match kind {
                    // anywhere in the box
                    0 => raw[j] * prob.upper(j),
                    // binary indicators, arbitrary powers
                    1 if binary => raw[j].round(),
                    1 => raw[j] * prob.upper(j),
                    // a constructive allocation, powers rescaled
                    2 if binary => base[j],
                    2 => base[j] * (0.5 + raw[j]),
                    _ => base[j],
                }
            })
            .collect();
        let e = prob.evaluate(&x, 1.5);
        let clean = e.decoded_feasible && prob.binariness(&x) == 0.0;
        if e.penalty == 0.0 {
            zero.set(zero.get() + 1);
        }
        prop_assert_eq!(e.penalty == 0.0, clean);
        Ok(())
    });
    match result {
        Ok(()) => verdict(true, format!("10000 positions, {} with zero penalty, no violations", zero.get())),
        Err(e) => verdict(false, format!("counterexample: {e}")),
    }
}

fn monotone_traces(runs: &[TinyRun]) -> Verdict {
    let bad = runs
        .iter()
        .filter(|r| r.trace.windows(2).any(|w| w[1] < w[0]))
        .count();
    verdict(bad == 0, format!("{bad} of {} traces decrease", runs.len()))
}

fn regret_convergence() -> Verdict {
    let chicken = MatrixGame::bimatrix(&[&[0.0, 7.0], &[2.0, 6.0]], &[&[0.0, 2.0], &[7.0, 6.0]]);
    // dominance solvable, unique equilibrium at the middle actions
    let three = MatrixGame::bimatrix(
        &[&[4.0, 1.0, 0.0], &[3.0, 3.0, 1.0], &[1.0, 2.0, 2.0]],
        &[&[2.0, 3.0, 1.0], &[0.0, 4.0, 2.0], &[1.0, 1.0, 3.0]],
    );
    let diag: [&[f64]; 4] = [&[4.0, 0.0, 0.0, 0.0], &[0.0, 3.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 0.0, 1.0]];
    let coordination = MatrixGame::bimatrix(&diag, &diag);
    let games = [
        ("chicken 2x2", chicken, [1, 1]),
        ("dominance 3x3", three, [0, 0]),
        ("coordination 4x4", coordination, [3, 2]),
    ];

    let mut pass = true;
    let mut notes = Vec::new();
    for (name, game, start) in &games {
        let clock = Instant::now();
        let mut learner = RegretLearner::new(game, start, 0.0, 1);
        let mut reached = None;
        for t in 1..=2000 {
            learner.step(game);
            if learner.state.max_regret() < 1e-2 {
                reached = Some(t);
                break;
            }
        }
        let mut dist = vec![0.0; game.num_profiles()];
        for (profile, freq) in learner.state.empirical() {
            dist[game.rank(&profile)] = freq;
        }
        let ce = verify_ce(game, &dist, 1e-2);
        let elapsed = clock.elapsed();
        pass &= reached.is_some() && ce && elapsed < Duration::from_secs(10);
        notes.push(format!(
            "{name}: regret < 1e-2 at {}, CE {ce}, {elapsed:.2?}",
            reached.map_or("never".into(), |t| format!("round {t}"))
        ));
    }
    verdict(pass, notes.join("; "))
}

fn experiment(toml: &str) -> Vec<Record> {
    let spec = ExperimentSpec::from_toml(toml).unwrap();
    let out = run_experiment(&spec).unwrap();
    assert!(out.failures.is_empty(), "failed drops: {:?}", out.failures);
    out.records
}

/// Records grouped by (sweep value, arm label), ordered by drop.
fn cells(records: &[Record]) -> BTreeMap<(u64, String), Vec<Record>> {
    let mut out: BTreeMap<(u64, String), Vec<Record>> = BTreeMap::new();
    for r in records {
        out.entry((r.sweep_value.to_bits(), r.mode.clone())).or_default().push(r.clone());
    }
    for v in out.values_mut() {
        v.sort_by_key(|r| r.drop);
    }
    out
}

fn mean(rs: &[Record], f: impl Fn(&Record) -> f64) -> f64 {
    rs.iter().map(f).sum::<f64>() / rs.len() as f64
}

fn key(value: f64, arm: &str) -> (u64, String) {
    (value.to_bits(), arm.to_string())
}

fn qpso() -> &'static str {
    "[qpso]\nswarm_size = 20\nmax_iters = 100\n"
}

fn crc_iterations() -> Verdict {
    let records = experiment(&format!(
        "name = \"crc-iterations\"\nseed = 4\ndrops = {CRC_DROPS}\n\
         [scenario]\nrscs_per_group = 6\nfronthaul_mbps = [20.0]\n{}\
         [sweep]\naxis = \"users\"\nvalues = [9, 15, 21]\n\
         [[arms]]\nlabel = \"crc\"\nmode = \"crc\"\n",
        qpso()
    ));
    let c = cells(&records);
    let iters: Vec<f64> = [9.0, 15.0, 21.0].iter().map(|&k| mean(&c[&key(k, "crc")], |r| r.iters as f64)).collect();
    verdict(
        iters.windows(2).all(|w| w[0] <= w[1]),
        format!("mean iterations K=9/15/21: {:.2} / {:.2} / {:.2}", iters[0], iters[1], iters[2]),
    )
}

fn traffic_control() -> Verdict {
    let records = experiment(&format!(
        "name = \"traffic-control\"\nseed = 5\ndrops = {DROPS}\n\
         [scenario]\nrscs_per_group = 4\nfronthaul_mbps = [10.0, 10.0, 20.0, 10.0]\nplacement = \"one-per-rsc\"\n{}\
         [sweep]\naxis = \"users\"\nvalues = [4, 5, 6, 7]\n\
         [[arms]]\nlabel = \"tura\"\nmode = \"tura\"\n\
         [[arms]]\nlabel = \"rura\"\nmode = \"rura\"\n",
        qpso()
    ));
    let c = cells(&records);
    let mut pass = true;
    let mut notes = Vec::new();
    for k in [4.0, 5.0, 6.0, 7.0] {
        let t = mean(&c[&key(k, "tura")], |r| r.outage_prob);
        let r = mean(&c[&key(k, "rura")], |r| r.outage_prob);
        pass &= t <= r;
        if k == 4.0 {
            pass &= t == 0.0 && r == 0.0;
        }
        notes.push(format!("K={k}: {t:.3} vs {r:.3}"));
    }
    verdict(pass, format!("outage TURA vs RURA {}", notes.join(", ")))
}

fn onoff_benefit() -> Verdict {
    let records = experiment(&format!(
        "name = \"onoff\"\nseed = 6\ndrops = {DROPS}\n\
         [scenario]\nrscs_per_group = 6\nusers = 9\n{}\
         [sweep]\naxis = \"users\"\nvalues = [9]\n\
         [[arms]]\nlabel = \"onoff\"\nmode = \"tura\"\n\
         [[arms]]\nlabel = \"always-on\"\nmode = \"tura\"\n\
         flags = {{ onoff_enabled = false, fronthaul_limited = true, traffic_control_enabled = true }}\n",
        qpso()
    ));
    let c = cells(&records);
    let on_off = &c[&key(9.0, "onoff")];
    let always = &c[&key(9.0, "always-on")];
    let wins = on_off
        .iter()
        .zip(always)
        .filter(|(a, b)| a.ee_bits_per_joule >= b.ee_bits_per_joule)
        .count();
    let share = wins as f64 / on_off.len() as f64;
    verdict(share >= 0.8, format!("on/off EE >= always-on in {wins}/{} drops", on_off.len()))
}

/// Criteria 8 and 10 share one sweep: four modes, two fronthaul caps.
fn fronthaul_sweep() -> Vec<Record> {
    let mut arms = String::new();
    for mode in ["tura", "harm", "rura", "crc"] {
        for b in [20, 30] {
            arms += &format!("[[arms]]\nlabel = \"{mode}-b{b}\"\nmode = \"{mode}\"\nset = {{ fronthaul_mbps = {b}.0 }}\n");
        }
    }
    experiment(&format!(
        "name = \"fronthaul\"\nseed = 10\ndrops = {DROPS}\n\
         [scenario]\ngroups = 3\nrscs_per_group = 2\n{}\
         [sweep]\naxis = \"users\"\nvalues = [9, 15, 21]\n{arms}",
        qpso()
    ))
}

fn fronthaul_monotonicity(records: &[Record]) -> Verdict {
    let c = cells(records);
    let mut pass = true;
    let mut notes = Vec::new();
    for mode in ["tura", "harm", "rura", "crc"] {
        let mut row = Vec::new();
        for k in [9.0, 15.0, 21.0] {
            let lo = mean(&c[&key(k, &format!("{mode}-b20"))], |r| r.outage_prob);
            let hi = mean(&c[&key(k, &format!("{mode}-b30"))], |r| r.outage_prob);
            pass &= hi <= lo;
            row.push(format!("{hi:.3}<={lo:.3}"));
        }
        notes.push(format!("{mode} {}", row.join(" ")));
    }
    verdict(pass, format!("outage B=30 vs B=20 at K=9/15/21: {}", notes.join("; ")))
}

fn error_ratio() -> Verdict {
    let records = experiment(&format!(
        "name = \"error-ratio\"\nseed = 8\ndrops = {DROPS}\n\
         [scenario]\ngroups = 3\nrscs_per_group = 2\nusers = 12\nfronthaul_mbps = [30.0]\n{}\
         [sweep]\naxis = \"error_ratio\"\nvalues = [0.0, 0.01]\n\
         [[arms]]\nlabel = \"harm\"\nmode = \"harm\"\n",
        qpso()
    ));
    let c = cells(&records);
    let clean = mean(&c[&key(0.0, "harm")], |r| r.ee_bits_per_joule);
    let noisy = mean(&c[&key(0.01, "harm")], |r| r.ee_bits_per_joule);
    verdict(
        clean >= noisy,
        format!("mean HARM EE {:.5} (rho 0) vs {:.5} (rho 0.01) Mbit/J", clean / 1e6, noisy / 1e6),
    )
}

fn centralization(records: &[Record]) -> Verdict {
    let c = cells(records);
    let mut pass = true;
    let mut notes = Vec::new();
    for k in [9.0, 15.0] {
        let t = mean(&c[&key(k, "tura-b30")], |r| r.ee_bits_per_joule);
        let h = mean(&c[&key(k, "harm-b30")], |r| r.ee_bits_per_joule);
        pass &= t >= h;
        notes.push(format!("K={k}: {:.4} vs {:.4}", t / 1e6, h / 1e6));
    }
    verdict(pass, format!("mean EE TURA vs HARM at B=30, {} Mbit/J", notes.join(", ")))
}

fn strip_seconds_csv(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

fn strip_seconds_json(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"seconds\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn determinism() -> Verdict {
    let toml = format!(
        "name = \"rerun\"\nseed = 11\ndrops = 2\n\
         [scenario]\ngroups = 3\nrscs_per_group = 2\n{}\
         [sweep]\naxis = \"users\"\nvalues = [6, 9]\n\
         [[arms]]\nlabel = \"tura\"\nmode = \"tura\"\n\
         [[arms]]\nlabel = \"harm\"\nmode = \"harm\"\n\
         [[arms]]\nlabel = \"rura\"\nmode = \"rura\"\n\
         [[arms]]\nlabel = \"crc\"\nmode = \"crc\"\n",
        qpso()
    );
    let spec = ExperimentSpec::from_toml(&toml).unwrap();
    let root = std::env::temp_dir().join(format!("scn-harm-rerun-{}", std::process::id()));
    let mut outputs = Vec::new();
    for run in 0..2 {
        let dir = root.join(run.to_string());
        let records = run_experiment(&spec).unwrap().records;
        let csv = emit::emit(&dir, &spec, &records, Format::Csv).unwrap();
        let json = emit::emit(&dir, &spec, &records, Format::Json).unwrap();
        outputs.push((
            strip_seconds_csv(&std::fs::read_to_string(csv).unwrap()),
            strip_seconds_json(&std::fs::read_to_string(json).unwrap()),
        ));
    }
    let _ = std::fs::remove_dir_all(&root);
    let same_csv = outputs[0].0 == outputs[1].0;
    let same_json = outputs[0].1 == outputs[1].1;
    verdict(
        same_csv && same_json,
        format!("CSV identical {same_csv}, JSON identical {same_json} ({} CSV lines)", outputs[0].0.lines().count()),
    )
}

fn signaling_power() -> Verdict {
    let records = experiment(&format!(
        "name = \"signaling\"\nseed = 7\ndrops = {DROPS}\n\
         [scenario]\nrscs_per_group = 6\nusers = 12\nfronthaul_mbps = [20.0]\n{}\
         [sweep]\naxis = \"signaling_dbm\"\nvalues = [0, 1, 10, 20, 35]\n\
         [[arms]]\nlabel = \"tura\"\nmode = \"tura\"\n",
        qpso()
    ));
    let c = cells(&records);
    let offload: Vec<f64> = [0.0, 1.0, 10.0, 20.0, 35.0]
        .iter()
        .map(|&v| mean(&c[&key(v, "tura")], |r| r.offload_prob))
        .collect();
    verdict(
        offload.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "offloading at 0/1/10/20/35 dBm: {}",
            offload.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(" / ")
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, v: Verdict| {
        println!("{} criterion {n:2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    };

    let tiny = tiny_runs();
    report(1, "oracle dominance", oracle_dominance(&tiny));
    report(2, "penalty equivalence", penalty_equivalence());
    report(3, "swarm monotonicity", monotone_traces(&tiny));
    report(4, "regret convergence", regret_convergence());
    report(5, "game convergence vs users", crc_iterations());
    report(6, "traffic control", traffic_control());
    report(7, "on/off benefit", onoff_benefit());
    let sweep = fronthaul_sweep();
    report(8, "fronthaul monotonicity", fronthaul_monotonicity(&sweep));
    report(9, "error ratio", error_ratio());
    report(10, "centralization ordering", centralization(&sweep));
    report(11, "determinism", determinism());
    report(12, "signaling power", signaling_power());

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
