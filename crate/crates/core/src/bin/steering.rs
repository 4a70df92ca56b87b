use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use steering::analysis::{BoundParams, SignificanceMode};
use steering::apparatus::{BobApparatus, DeadTimeModel};
use steering::io::{error_json, load_config, write_threshold_csv};
use steering::montecarlo::ExperimentConfig;
use steering::qubit::make_mub_triad;
use steering::runs::{eta_grid, run_analyze, run_bound, run_oracle, run_simulate, run_threshold, OracleParams};
use steering::{Error, Result};

#[derive(Parser)]
#[command(name = "steering", version, about = "Simulate and analyze detection-loophole-free steering tests")]
struct Cli {
    /// RNG seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Expected Bob-conclusive events per setting (overrides the config file).
    #[arg(long, global = true)]
    events_per_setting: Option<u64>,
    #[arg(long, global = true, default_value = "quadrature", value_parser = parse_mode)]
    significance_mode: SignificanceMode,
    #[arg(long, global = true, default_value = "exponential", value_parser = parse_dead_time)]
    dead_time_model: DeadTimeModel,
    /// Output file (or directory for `simulate`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

fn parse_mode(s: &str) -> std::result::Result<SignificanceMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_dead_time(s: &str) -> std::result::Result<DeadTimeModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Clone, Copy)]
struct BoundArgs {
    /// Bob's detector-efficiency ratio max/min.
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_w: f64,
    /// Largest |b_i . b_j| among Bob's directions.
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_eps: f64,
}

impl From<BoundArgs> for BoundParams {
    fn from(a: BoundArgs) -> Self {
        BoundParams { w: a.w, sigma_w: a.sigma_w, epsilon: a.epsilon, sigma_eps: a.sigma_eps }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate count tables; writes counts.csv and manifest.json into --out.
    Simulate {
        /// Experiment config JSON. Without it, a Werner-state run on the X/Y/Z axes is built from the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(short = 'n', long, default_value_t = 3)]
        settings: usize,
        #[arg(long, default_value_t = 0.9678)]
        visibility: f64,
        #[arg(long, default_value_t = 0.6175)]
        heralding: f64,
        /// Use the lab analyzer model (w = 1.0115, 1-t = 1e-5, double clicks) instead of an ideal one.
        #[arg(long)]
        lab_apparatus: bool,
    },
    /// Estimate S_N, the corrected bound and the violation significance from a counts CSV.
    Analyze {
        tables: PathBuf,
        #[command(flatten)]
        bound: BoundArgs,
        /// Use only the first N tables.
        #[arg(short = 'n', long)]
        settings: Option<usize>,
    },
    /// Print the corrected bound and its uncertainty.
    Bound {
        #[command(flatten)]
        bound: BoundArgs,
        #[arg(short = 'n', long)]
        settings: usize,
    },
    /// Write the minimal Werner visibility against heralding efficiency as CSV.
    Threshold {
        #[arg(short = 'n', long)]
        settings: usize,
        #[arg(long, default_value_t = 0.3)]
        eta_start: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_stop: f64,
        #[arg(long, default_value_t = 0.01)]
        eta_step: f64,
    },
    /// Check the corrected bound against brute-force local-hidden-state searches.
    Oracle {
        #[arg(short = 'n', long, default_value_t = 3)]
        settings: usize,
        #[arg(long, default_value_t = 1.0115)]
        w: f64,
        #[arg(long, default_value_t = 0.0134)]
        epsilon: f64,
        /// Beam-displacer transmission.
        #[arg(long, default_value_t = 0.99999)]
        t: f64,
        #[arg(long, default_value_t = 10_000)]
        models: usize,
    },
}

fn output(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate { config, settings, visibility, heralding, lab_apparatus } => {
            let mut cfg = match config {
                Some(path) => load_config(path)?,
                None => {
                    let set = make_mub_triad().truncated(settings)?;
                    let mut cfg = ExperimentConfig::werner(set, visibility, heralding, 1_000_000, 1)?;
                    if lab_apparatus {
                        cfg.bob = BobApparatus::lab_replica();
                    }
                    cfg
                }
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(events) = cli.events_per_setting {
                cfg.events_per_setting = events;
            }
            cfg.dead_time_model = cli.dead_time_model;
            let dir = out.unwrap_or(Path::new("."));
            let result = run_simulate(&cfg, dir)?;
            eprintln!("wrote {} and {}", result.counts_path.display(), result.manifest_path.display());
        }
        Command::Analyze { tables, bound, settings } => {
            let report = run_analyze(&tables, bound.into(), settings, cli.significance_mode, cli.dead_time_model)?;
            emit_json(out, &report)?;
        }
        Command::Bound { bound, settings } => emit_json(out, &run_bound(bound.into(), settings)?)?,
        Command::Threshold { settings, eta_start, eta_stop, eta_step } => {
            let rows = run_threshold(settings, &eta_grid(eta_start, eta_stop, eta_step)?)?;
            write_threshold_csv(output(out)?, &rows)?;
        }
        Command::Oracle { settings, w, epsilon, t, models } => {
            let params = OracleParams { n: settings, w, epsilon, t, n_models: models, seed: cli.seed.unwrap_or(1) };
            emit_json(out, &run_oracle(params)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            println!("{}", serde_json::to_string_pretty(&error_json(&err)).expect("error JSON serializes"));
            ExitCode::FAILURE
        }
    }
}
