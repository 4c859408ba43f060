//! Experiment drivers behind the CLI subcommands. Each returns a [`Table`]
//! so the same rows can be written as CSV or JSON lines.

use anyhow::{bail, Context, Result};

use risgroup_core::optimizer::{
    fit_z_power, optimal_group_alt_form, optimal_group_brute_force, optimal_group_closed_form,
    ExponentMode,
};
use risgroup_core::rate::{
    bound_coefficients, mc_achievable_rate, mc_onoff_rate, mc_perfect_csi_rate, rate_upper_bound,
};
use risgroup_core::{GroupSizeResult, GroupingConstants, SystemParams};

use crate::config::{ConstantsMode, ExperimentConfig, SweepVar};
use crate::output::{Cell, Table};

/// Runs `f` on a rayon pool of `workers` threads (the global pool when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn grouping_constants(cfg: &ExperimentConfig) -> Result<GroupingConstants> {
    Ok(match cfg.constants {
        ConstantsMode::Published => GroupingConstants::PUBLISHED,
        ConstantsMode::Fitted => GroupingConstants::fitted(cfg.b_max)?,
    })
}

fn rate_header(cfg: &ExperimentConfig) -> Vec<&'static str> {
    let mut header = vec!["B", "K_prime", "pilot_overhead", "mc_rate", "mc_stderr", "upper_bound"];
    if cfg.onoff {
        header.extend(["onoff_rate", "onoff_stderr"]);
    }
    if cfg.perfect_csi {
        header.extend(["perfect_rate", "perfect_stderr"]);
    }
    header.push("skipped");
    header
}

fn rate_row(cfg: &ExperimentConfig, params: &SystemParams, width: usize) -> Result<Vec<Cell>> {
    let k_prime = params.k_prime();
    let mut row: Vec<Cell> = vec![params.b().into(), k_prime.into(), params.pilot_overhead().into()];
    if params.prefactor() <= 0.0 {
        row.resize(width - 1, Cell::Empty);
        row.push(true.into());
        return Ok(row);
    }
    let mc = mc_achievable_rate(params, cfg.trials, cfg.seed)?;
    row.extend([mc.rate.into(), mc.stderr.into(), rate_upper_bound(params)?.into()]);
    if cfg.onoff {
        let on = mc_onoff_rate(params, k_prime, cfg.trials, cfg.seed)?;
        row.extend([on.rate.into(), on.stderr.into()]);
    }
    if cfg.perfect_csi {
        let perfect = mc_perfect_csi_rate(params, cfg.trials, cfg.seed)?;
        row.extend([perfect.rate.into(), perfect.stderr.into()]);
    }
    row.push(false.into());
    Ok(row)
}

/// Rate versus `B` or `K'`.
///
/// A `K'` grid point maps to `B = floor(K / K')`; the emitted `K_prime`
/// column is the subgroup count that group size actually yields, and the
/// On-Off baseline switches on that many elements.
pub fn run_rate_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let Some(sweep) = &cfg.sweep else {
        bail!("rate sweep needs --sweep B=... or --sweep K_prime=...");
    };
    let header = rate_header(cfg);
    let width = header.len();
    let mut table = Table::new(header);
    for &value in &sweep.values {
        let b = match sweep.var {
            SweepVar::GroupSize => value as usize,
            SweepVar::Subgroups => cfg.scenario.k / value as usize,
            _ => bail!("rate sweep runs over B or K_prime, not {}", sweep.var.column()),
        };
        let params = cfg
            .scenario
            .params(b)
            .with_context(|| format!("{} = {value}", sweep.var.column()))?;
        table.push(rate_row(cfg, &params, width)?);
    }
    Ok(table)
}

/// Brute-force and closed-form optimum versus `P` or `T_c`.
pub fn run_optimum_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let Some(sweep) = &cfg.sweep else {
        bail!("optimum sweep needs --sweep P_dbm=... or --sweep T_c=...");
    };
    let consts = grouping_constants(cfg)?;
    let base = cfg.scenario.params(1)?;
    let mut table = Table::new(vec![
        "sweep_value",
        "b_star_brute",
        "b_star_closed",
        "rbar_brute",
        "rbar_closed",
        "rbar_ratio",
        "skipped",
    ]);
    for &value in &sweep.values {
        let params = match sweep.var {
            SweepVar::Power => base.with_power(value)?,
            SweepVar::Coherence => base.with_coherence(value as usize)?,
            _ => bail!("optimum sweep runs over P_dbm or T_c, not {}", sweep.var.column()),
        };
        let value_cell = match sweep.var {
            SweepVar::Coherence => Cell::from(value as usize),
            _ => Cell::from(value),
        };
        match (
            optimal_group_brute_force(&params),
            optimal_group_closed_form(&params, &consts),
        ) {
            (Ok(brute), Ok(closed)) => table.push(vec![
                value_cell,
                brute.b_star.into(),
                closed.b_star.into(),
                brute.rate_bound.into(),
                closed.rate_bound.into(),
                (closed.rate_bound / brute.rate_bound).into(),
                false.into(),
            ]),
            (brute, closed) => {
                log::warn!(
                    "skipping {} = {value}: {}",
                    sweep.var.column(),
                    brute.err().or(closed.err()).map(|e| e.to_string()).unwrap_or_default()
                );
                let mut row = vec![value_cell];
                row.resize(6, Cell::Empty);
                row.push(true.into());
                table.push(row);
            }
        }
    }
    Ok(table)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Table> {
    let Some(sweep) = &cfg.sweep else {
        bail!("`sweep` needs --sweep VAR=START:STOP:STEP");
    };
    with_workers(cfg.workers, || match sweep.var {
        SweepVar::GroupSize | SweepVar::Subgroups => run_rate_sweep(cfg),
        SweepVar::Power | SweepVar::Coherence => run_optimum_sweep(cfg),
    })?
}

/// Single operating point at `cfg.b`, same columns as the rate sweep.
pub fn rate_point(cfg: &ExperimentConfig) -> Result<Table> {
    let params = cfg.scenario.params(cfg.b)?;
    let header = rate_header(cfg);
    let width = header.len();
    let mut table = Table::new(header);
    let row = with_workers(cfg.workers, || rate_row(cfg, &params, width))??;
    table.push(row);
    Ok(table)
}

pub fn bound_point(cfg: &ExperimentConfig) -> Result<Table> {
    let params = cfg.scenario.params(cfg.b)?;
    let coeffs = bound_coefficients(params.b(), params.beta_d(), params.beta_l())?;
    let mut table = Table::new(vec![
        "B",
        "K_prime",
        "pilot_overhead",
        "prefactor",
        "z",
        "xi1",
        "xi2",
        "upper_bound",
    ]);
    table.push(vec![
        params.b().into(),
        params.k_prime().into(),
        params.pilot_overhead().into(),
        params.prefactor().into(),
        coeffs.z.into(),
        coeffs.xi1.into(),
        coeffs.xi2.into(),
        rate_upper_bound(&params)?.into(),
    ]);
    Ok(table)
}

pub fn optimize_point(cfg: &ExperimentConfig) -> Result<Table> {
    let params = cfg.scenario.params(1)?;
    let consts = grouping_constants(cfg)?;
    let results: [GroupSizeResult; 3] = [
        optimal_group_brute_force(&params)?,
        optimal_group_closed_form(&params, &consts)?,
        optimal_group_alt_form(&params, &consts)?,
    ];
    let mut table = Table::new(vec!["method", "b_star", "k_prime", "rate_bound"]);
    for r in results {
        table.push(vec![
            r.method.name().into(),
            r.b_star.into(),
            r.k_prime.into(),
            r.rate_bound.into(),
        ]);
    }
    Ok(table)
}

/// Power-law fits of `z(B)` over `1..=b_max`, with the closed-form constants
/// each fit implies.
pub fn fit_z_table(cfg: &ExperimentConfig) -> Result<Table> {
    let mut table = Table::new(vec!["mode", "b_max", "kappa", "eta", "residual", "c", "zeta"]);
    for (name, mode) in [("free", ExponentMode::Free), ("sqrt", ExponentMode::Fixed(0.5))] {
        let fit = fit_z_power(cfg.b_max, mode)?;
        let consts = GroupingConstants::from_fit(&fit);
        table.push(vec![
            name.into(),
            cfg.b_max.into(),
            fit.kappa.into(),
            fit.eta.into(),
            fit.residual.into(),
            consts.c.into(),
            consts.zeta.into(),
        ]);
    }
    Ok(table)
}
