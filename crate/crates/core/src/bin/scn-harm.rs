use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use scn_harm::emit::{self, Format};
use scn_harm::experiment::{self, aggregate, Arm, ExperimentSpec};
use scn_harm::harm::Mode;
use scn_harm::oracle::{oracle_optimum, OracleLimits};
use scn_harm::{generate_deployment, Error, ScenarioConfig};

#[derive(Parser)]
#[command(version, about = "Small-cell C-RAN energy-efficiency simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Tura,
    Crc,
    Harm,
    Rura,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment spec (or a bundled preset) and write results.
    Run {
        specfile: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        drops: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Keep only arms of this mode (a plain arm if none match).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        preset: Option<String>,
        /// Also write per-run convergence traces.
        #[arg(long)]
        traces: bool,
    },
    /// Check a spec and print it fully resolved.
    Validate { specfile: PathBuf },
    /// Exhaustively solve a tiny scenario.
    Oracle { specfile: PathBuf },
}

/// Oracle input: a scenario, the drop to draw and the enumeration budget.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OracleSpec {
    #[serde(default = "one")]
    seed: u64,
    #[serde(default)]
    max_combinations: Option<u128>,
    #[serde(default)]
    scenario: ScenarioConfig,
}

fn one() -> u64 {
    1
}

fn code(e: &Error) -> u8 {
    match e {
        Error::Spec(_) | Error::InvalidParam { .. } => 1,
        Error::OracleBudget { .. } => 3,
        _ => 2,
    }
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Spec(format!("{}: {e}", path.display())))
}

fn load(specfile: Option<&PathBuf>, preset: Option<&str>) -> Result<ExperimentSpec, Error> {
    match (specfile, preset) {
        (_, Some(name)) => experiment::preset(name),
        (Some(path), None) => ExperimentSpec::from_toml(&read(path)?),
        (None, None) => Err(Error::Spec("give a spec file or --preset".into())),
    }
}

fn run(cmd: Cmd) -> Result<(), Error> {
    match cmd {
        Cmd::Run {
            specfile,
            out,
            format,
            drops,
            seed,
            mode,
            preset,
            traces,
        } => {
            let mut spec = load(specfile.as_ref(), preset.as_deref())?;
            if let Some(d) = drops {
                spec.drops = d;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(m) = mode {
                let m = match m {
                    ModeArg::Tura => Mode::Tura,
                    ModeArg::Crc => Mode::Crc,
                    ModeArg::Harm => Mode::Harm,
                    ModeArg::Rura => Mode::Rura,
                };
                spec.arms.retain(|a| a.mode == m);
                if spec.arms.is_empty() {
                    spec.arms.push(Arm::plain(m));
                }
            }
            spec.traces |= traces;
            spec.validate()?;
            let result = experiment::run_experiment(&spec)?;
            for f in &result.failures {
                eprintln!("drop failed: {}={} {} drop {}: {}", spec.sweep.axis.name(), f.sweep_value, f.mode, f.drop, f.error);
            }
            let fmt = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            let path = emit::emit(&out, &spec, &result.records, fmt)?;
            if spec.traces {
                emit::emit_traces(&out, &result.traces)?;
            }
            println!("{:>10} {:<18} {:>5} {:>14} {:>10} {:>10} {:>9}", spec.sweep.axis.name(), "arm", "drops", "EE Mbit/J", "outage", "offload", "iters");
            for a in aggregate(&spec, &result.records) {
                println!(
                    "{:>10} {:<18} {:>5} {:>7.4}±{:<6.4} {:>10.3} {:>10.3} {:>9.1}",
                    a.sweep_value,
                    a.mode,
                    a.drops,
                    a.ee_mean / 1e6,
                    a.ee_std / 1e6,
                    a.outage_mean,
                    a.offload_mean,
                    a.iters_mean
                );
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Cmd::Validate { specfile } => {
            let spec = ExperimentSpec::from_toml(&read(&specfile)?)?;
            print!("{}", spec.to_toml());
            Ok(())
        }
        Cmd::Oracle { specfile } => {
            let spec: OracleSpec = toml::from_str(&read(&specfile)?).map_err(|e| Error::Spec(e.to_string()))?;
            let params = spec.scenario.resolve()?;
            let mut limits = OracleLimits::for_params(&params);
            if let Some(m) = spec.max_combinations {
                limits.max_combinations = m;
            }
            let depl = generate_deployment(&params, spec.seed)?;
            let r = oracle_optimum(&params, &depl, &limits)?;
            println!("visited {}", r.visited);
            println!("feasible {}", r.feasible);
            println!("ee_bits_per_joule {}", r.ee);
            let d = r.allocation.dims;
            for k in 0..d.users {
                match r.allocation.serving_rsc(k) {
                    Some((c, s)) => {
                        let subs: Vec<String> = (0..d.subchannels)
                            .filter(|&n| r.allocation.is_active(c, s, k, n))
                            .map(|n| format!("{n}@{:.4}W", r.allocation.effective_power(c, s, k, n)))
                            .collect();
                        println!("user {k}: rsc {} [{}]", d.rsc(c, s), subs.join(" "));
                    }
                    None => println!("user {k}: unassociated"),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are input errors, like a bad spec
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(code(&e))
        }
    }
}
