//! Achievable rate with pilot overhead, by Monte-Carlo simulation and through
//! the closed-form upper bound.
//!
//! The simulated rate is `(1 - (K'+1)/T_c) * E[log2(1 + gamma |a|^2)]` with
//! `a = sqrt(beta_d) h_d + sqrt(beta_l) phi^T v'` and `phi` designed from LS
//! estimates. The bound moves the expectation inside the logarithm and
//! replaces the estimated phases with perfect ones, which leaves
//! `E|a|^2 = xi1 K'^2 + xi2 K' + beta_d`.
//!
//! Monte-Carlo trials are seeded by `(master_seed, trial_index)` through
//! independent ChaCha streams and reduced in index order, so a result does
//! not depend on how many rayon workers evaluated it.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamforming::{estimated_phases, onoff_config, optimal_phases, PhaseConfig, PhaseMode};
use crate::channel::sample_channels;
use crate::error::{Error, Result};
use crate::estimation::{ls_estimate, pilot_matrix, simulate_pilots_with, PilotSchedule};
use crate::linkbudget::{prefactor, SystemParams};
use crate::special::half_gamma_ratio;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// bits/s/Hz
    pub rate: f64,
    /// Standard error of `rate`, prefactor included.
    pub stderr: f64,
    pub trials: usize,
    pub prefactor: f64,
}

/// Independent random stream for one Monte-Carlo trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Receive SNR `gamma |sqrt(beta_d) h_d + sqrt(beta_l) sum_i phi_i c_i|^2`.
///
/// `c` is the grouped channel for [`PhaseMode::Grouped`] and the leading
/// individual coefficients for [`PhaseMode::OnOff`].
pub fn instantaneous_snr(
    realization: &crate::channel::ChannelRealization,
    config: &PhaseConfig,
    params: &SystemParams,
) -> Result<f64> {
    let cascade = match config.mode {
        PhaseMode::Grouped => {
            let grouped = realization.v_grouped().ok_or(Error::Ungrouped)?;
            if grouped.len() != config.len() {
                return Err(Error::DimensionMismatch {
                    what: "grouped phase configuration",
                    expected: grouped.len(),
                    found: config.len(),
                });
            }
            grouped
        }
        PhaseMode::OnOff => {
            if config.is_empty() || config.len() > realization.k() {
                return Err(Error::DimensionMismatch {
                    what: "On-Off phase configuration",
                    expected: realization.k(),
                    found: config.len(),
                });
            }
            &realization.v()[..config.len()]
        }
    };
    Ok(snr_of(realization.h_d(), cascade, &config.coefficients, params))
}

fn snr_of(h_d: Complex64, cascade: &[Complex64], phases: &[Complex64], params: &SystemParams) -> f64 {
    let reflected: Complex64 = phases.iter().zip(cascade).map(|(p, v)| p * v).sum();
    let amplitude = params.beta_d().sqrt() * h_d + params.beta_l().sqrt() * reflected;
    params.gamma() * amplitude.norm_sqr()
}

/// Which phase design a simulated trial uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Csi {
    /// Phases from the LS estimates of the pilot phase.
    Estimated,
    /// Phases from the true channel; no pilots are simulated.
    Perfect,
}

/// Monte-Carlo rate of the grouped scheme with LS-estimated phases.
pub fn mc_achievable_rate(params: &SystemParams, trials: usize, master_seed: u64) -> Result<RateResult> {
    mc_grouped_rate(params, Csi::Estimated, trials, master_seed)
}

/// Monte-Carlo rate of the grouped scheme, same overhead, perfect phases.
pub fn mc_perfect_csi_rate(params: &SystemParams, trials: usize, master_seed: u64) -> Result<RateResult> {
    mc_grouped_rate(params, Csi::Perfect, trials, master_seed)
}

pub fn mc_grouped_rate(
    params: &SystemParams,
    csi: Csi,
    trials: usize,
    master_seed: u64,
) -> Result<RateResult> {
    let k_prime = params.k_prime();
    let b = params.b();
    let schedule = pilot_matrix(k_prime)?;
    run_trials(k_prime, params.tc(), trials, |trial| {
        let mut rng = trial_rng(master_seed, trial as u64);
        let mut realization = sample_channels(params.k(), &mut rng)?;
        realization.group(b)?;
        let grouped = realization.v_grouped().ok_or(Error::Ungrouped)?;
        let config = match csi {
            Csi::Perfect => optimal_phases(realization.h_d(), grouped)?,
            Csi::Estimated => {
                let est = estimate(realization.h_d(), grouped, &schedule, params, &mut rng)?;
                estimated_phases(&est)?
            }
        };
        instantaneous_snr(&realization, &config, params)
    })
}

/// Monte-Carlo rate of the On-Off baseline with `k_on` elements switched on.
///
/// The on-elements are the first `k_on` by index. Their individual cascaded
/// channels are estimated with the same DFT-LS protocol, so the pilot
/// overhead is `k_on + 1`, equal to grouping with `K' = k_on`.
pub fn mc_onoff_rate(
    params: &SystemParams,
    k_on: usize,
    trials: usize,
    master_seed: u64,
) -> Result<RateResult> {
    if k_on == 0 || k_on > params.k() {
        return Err(Error::invalid(
            "K_on",
            format!("number of active elements must lie in 1..={}, got {k_on}", params.k()),
        ));
    }
    let schedule = pilot_matrix(k_on)?;
    run_trials(k_on, params.tc(), trials, |trial| {
        let mut rng = trial_rng(master_seed, trial as u64);
        let realization = sample_channels(params.k(), &mut rng)?;
        let on = &realization.v()[..k_on];
        let est = estimate(realization.h_d(), on, &schedule, params, &mut rng)?;
        let config = onoff_config(est.h_d_hat, &est.v_grouped_hat)?;
        instantaneous_snr(&realization, &config, params)
    })
}

fn estimate(
    h_d: Complex64,
    cascade: &[Complex64],
    schedule: &PilotSchedule,
    params: &SystemParams,
    rng: &mut ChaCha8Rng,
) -> Result<crate::estimation::ChannelEstimate> {
    let obs = simulate_pilots_with(h_d, cascade, schedule, params, rng)?;
    ls_estimate(&obs, schedule, params)
}

fn run_trials<F>(estimated: usize, tc: usize, trials: usize, snr: F) -> Result<RateResult>
where
    F: Fn(usize) -> Result<f64> + Sync,
{
    if trials == 0 {
        return Err(Error::invalid("trials", "need at least one Monte-Carlo trial"));
    }
    let pre = prefactor(estimated, tc);
    if pre < 0.0 {
        return Err(Error::Infeasible {
            pilot_symbols: estimated + 1,
            tc,
        });
    }
    if pre == 0.0 {
        return Ok(RateResult {
            rate: 0.0,
            stderr: 0.0,
            trials,
            prefactor: 0.0,
        });
    }
    let logs = (0..trials)
        .into_par_iter()
        .map(|t| snr(t).map(|s| s.ln_1p() / std::f64::consts::LN_2))
        .collect::<Result<Vec<f64>>>()?;
    Ok(summarize(&logs, pre))
}

fn summarize(logs: &[f64], prefactor: f64) -> RateResult {
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let stderr = if logs.len() > 1 {
        let var = logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    RateResult {
        rate: prefactor * mean,
        stderr: prefactor * stderr,
        trials: logs.len(),
        prefactor,
    }
}

/// Coefficients of the bound's quadratic in `K'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCoefficients {
    pub z: f64,
    /// `beta_l z^2`
    pub xi1: f64,
    /// `beta_l (B - z^2) + sqrt(pi beta_d beta_l) z`
    pub xi2: f64,
}

/// `sqrt(pi) Gamma(B + 1/2) / (2 Gamma(B))`.
pub fn z_ratio(b: usize) -> Result<f64> {
    half_gamma_ratio(b)
}

pub fn bound_coefficients(b: usize, beta_d: f64, beta_l: f64) -> Result<BoundCoefficients> {
    if !(beta_d.is_finite() && beta_d >= 0.0) {
        return Err(Error::invalid("beta_d", format!("gain must be non-negative, got {beta_d}")));
    }
    if !(beta_l.is_finite() && beta_l > 0.0) {
        return Err(Error::invalid("beta_l", format!("gain must be positive, got {beta_l}")));
    }
    let z = z_ratio(b)?;
    Ok(BoundCoefficients {
        z,
        xi1: beta_l * z * z,
        xi2: beta_l * (b as f64 - z * z) + (std::f64::consts::PI * beta_d * beta_l).sqrt() * z,
    })
}

/// `E|a|^2` under perfect phases: `xi1 K'^2 + xi2 K' + beta_d`.
pub fn mean_combined_power(params: &SystemParams) -> Result<f64> {
    let coeffs = bound_coefficients(params.b(), params.beta_d(), params.beta_l())?;
    let kp = params.k_prime() as f64;
    Ok(coeffs.xi1 * kp * kp + coeffs.xi2 * kp + params.beta_d())
}

/// Closed-form upper bound on the achievable rate.
pub fn rate_upper_bound(params: &SystemParams) -> Result<f64> {
    params.ensure_feasible()?;
    let power = mean_combined_power(params)?;
    Ok(params.prefactor() * (params.gamma() * power).ln_1p() / std::f64::consts::LN_2)
}
