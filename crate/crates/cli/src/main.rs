use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use risgroup_cli::config::{ConstantsMode, ExperimentConfig, Format, Settings};
use risgroup_cli::{experiments, selftest};

#[derive(Parser, Debug)]
#[command(name = "risgroup", version, about = "Rate and optimal group size for RIS element grouping")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo rate and upper bound at one group size
    Rate,
    /// Closed-form upper bound and its coefficients at one group size
    Bound,
    /// Optimal group size by brute force and by the Lambert-W closed form
    Optimize,
    /// Rate vs B or K_prime, or optimum vs P_dbm or T_c
    Sweep,
    /// Power-law fit of the Gamma ratio z(B)
    FitZ,
    /// Moment-identity and Lambert W checks
    Selftest,
}

/// Flags mirror the config-file keys; a flag wins over the file.
#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat TOML config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Number of RIS elements
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Group size
    #[arg(long, global = true)]
    b: Option<usize>,
    /// Coherence block length in symbols
    #[arg(long, global = true)]
    tc: Option<usize>,
    /// Data transmit power, dBm
    #[arg(long, global = true, allow_negative_numbers = true)]
    p_dbm: Option<f64>,
    /// Pilot power, dBm
    #[arg(long, global = true, allow_negative_numbers = true)]
    ptr_dbm: Option<f64>,
    /// Receiver noise power, dBm
    #[arg(long, global = true, allow_negative_numbers = true)]
    noise_dbm: Option<f64>,
    /// Source-RIS distance, m
    #[arg(long, global = true)]
    d0: Option<f64>,
    /// Source-destination horizontal distance, m
    #[arg(long, global = true)]
    d: Option<f64>,
    /// Destination offset from the source-RIS line, m
    #[arg(long, global = true)]
    dv: Option<f64>,
    /// Path loss at 1 m, dB
    #[arg(long, global = true, allow_negative_numbers = true)]
    c0_db: Option<f64>,
    #[arg(long, global = true)]
    alpha_direct: Option<f64>,
    #[arg(long, global = true)]
    alpha_cascaded: Option<f64>,
    /// Monte-Carlo trials per point (default 10000; selftest uses 100000 draws)
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// VAR=START:STOP:STEP or VAR=V1,V2,..., VAR in {B, K_prime, P_dbm, T_c}
    #[arg(long, global = true, allow_hyphen_values = true)]
    sweep: Option<String>,
    /// Add the On-Off baseline columns to rate output
    #[arg(long, global = true)]
    onoff: bool,
    /// Add perfect-CSI rate columns to rate output
    #[arg(long, global = true)]
    perfect_csi: bool,
    /// Closed-form constants: published values or a fresh fit
    #[arg(long, global = true, value_enum)]
    constants: Option<ConstantsMode>,
    /// Upper end of the z(B) fit range
    #[arg(long, global = true)]
    b_max: Option<usize>,
    /// Worker threads for Monte-Carlo trials
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

impl Opts {
    fn settings(&self) -> Settings {
        Settings {
            k: self.k,
            b: self.b,
            tc: self.tc,
            p_dbm: self.p_dbm,
            ptr_dbm: self.ptr_dbm,
            noise_dbm: self.noise_dbm,
            d0: self.d0,
            d: self.d,
            dv: self.dv,
            c0_db: self.c0_db,
            alpha_direct: self.alpha_direct,
            alpha_cascaded: self.alpha_cascaded,
            trials: self.trials,
            seed: self.seed,
            sweep: self.sweep.clone(),
            onoff: self.onoff.then_some(true),
            perfect_csi: self.perfect_csi.then_some(true),
            constants: self.constants,
            b_max: self.b_max,
            workers: self.workers,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.opts.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let cfg = ExperimentConfig::resolve(file.overlay(cli.opts.settings()))?;
    let table = match cli.command {
        Command::Rate => experiments::rate_point(&cfg)?,
        Command::Bound => experiments::bound_point(&cfg)?,
        Command::Optimize => experiments::optimize_point(&cfg)?,
        Command::Sweep => experiments::run_sweep(&cfg)?,
        Command::FitZ => experiments::fit_z_table(&cfg)?,
        Command::Selftest => {
            let params = cfg.scenario.params(1)?;
            let draws = cli.opts.trials.unwrap_or(selftest::MOMENT_DRAWS);
            let outcomes = experiments::with_workers(cfg.workers, || {
                selftest::run(params.beta_d(), params.beta_l(), draws, cfg.seed)
            })??;
            let mut ok = true;
            for o in &outcomes {
                println!("{} {}", if o.passed { "PASS" } else { "FAIL" }, o.label);
                ok &= o.passed;
            }
            return Ok(ok);
        }
    };
    table
        .emit(cfg.format, cfg.out.as_deref())
        .context("emitting results")?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
