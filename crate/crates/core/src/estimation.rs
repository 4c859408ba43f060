//! Uplink pilot protocol and least-squares estimation of the composite
//! direct and grouped cascaded channels.
//!
//! The destination sends `T_p = K' + 1` unit pilots. During pilot `m` the
//! RIS subgroups apply row `m` of a DFT matrix, so the stacked observation is
//! `y = sqrt(P_tr) * F * c + n` where `c = [sqrt(beta_d) h_d, sqrt(beta_l) v']`
//! and `F` is the `T_p x T_p` DFT. Since `F^H F = T_p I`, the LS solution is
//! the scaled conjugate-transpose product.
//!
//! Estimates keep the `sqrt(beta)` factors. Phase design only ever uses
//! argument ratios, in which those positive scalings cancel.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_normal, ChannelRealization};
use crate::error::{Error, Result};
use crate::linkbudget::SystemParams;

/// DFT reflection schedule. Column 0 multiplies the direct path and is all
/// ones; columns `1..=K'` are the subgroup phase shifts per pilot symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSchedule {
    t_p: usize,
    // row-major, t_p x t_p
    matrix: Vec<Complex64>,
}

impl PilotSchedule {
    pub fn t_p(&self) -> usize {
        self.t_p
    }

    pub fn k_prime(&self) -> usize {
        self.t_p - 1
    }

    pub fn entry(&self, m: usize, k: usize) -> Complex64 {
        self.matrix[m * self.t_p + k]
    }

    /// Pilot `m`: direct-path weight followed by the `K'` RIS coefficients.
    pub fn row(&self, m: usize) -> &[Complex64] {
        &self.matrix[m * self.t_p..(m + 1) * self.t_p]
    }
}

/// Builds the `(K'+1)`-point DFT schedule, entry `(m, k) = exp(-j 2 pi m k / (K'+1))`.
pub fn pilot_matrix(k_prime: usize) -> Result<PilotSchedule> {
    if k_prime == 0 {
        return Err(Error::invalid("K'", "need at least one RIS subgroup to estimate"));
    }
    let t_p = k_prime + 1;
    let mut matrix = Vec::with_capacity(t_p * t_p);
    for m in 0..t_p {
        for k in 0..t_p {
            // reduce the index product first so the angle stays exact for large T_p
            let idx = (m * k) % t_p;
            let theta = -2.0 * PI * idx as f64 / t_p as f64;
            matrix.push(Complex64::from_polar(1.0, theta));
        }
    }
    Ok(PilotSchedule { t_p, matrix })
}

/// Received pilot samples at the source.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    pub y: Vec<Complex64>,
}

/// LS estimates of `sqrt(beta_d) h_d` and `sqrt(beta_l) v'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h_d_hat: Complex64,
    pub v_grouped_hat: Vec<Complex64>,
}

impl ChannelEstimate {
    pub fn k_prime(&self) -> usize {
        self.v_grouped_hat.len()
    }

    /// Multiplies every entry by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        ChannelEstimate {
            h_d_hat: self.h_d_hat * scale,
            v_grouped_hat: self.v_grouped_hat.iter().map(|v| v * scale).collect(),
        }
    }
}

/// Pilot phase for the grouped realization.
pub fn simulate_pilots<R: Rng + ?Sized>(
    realization: &ChannelRealization,
    schedule: &PilotSchedule,
    params: &SystemParams,
    rng: &mut R,
) -> Result<PilotObservation> {
    let grouped = realization.v_grouped().ok_or(Error::Ungrouped)?;
    simulate_pilots_with(realization.h_d(), grouped, schedule, params, rng)
}

/// Pilot phase for an arbitrary cascaded vector, e.g. the individual
/// coefficients of the switched-on elements in the On-Off scheme.
///
/// Draws one `CN(0, sigma^2)` noise sample per pilot, in pilot order.
pub fn simulate_pilots_with<R: Rng + ?Sized>(
    h_d: Complex64,
    cascade: &[Complex64],
    schedule: &PilotSchedule,
    params: &SystemParams,
    rng: &mut R,
) -> Result<PilotObservation> {
    if cascade.len() != schedule.k_prime() {
        return Err(Error::DimensionMismatch {
            what: "cascaded channel",
            expected: schedule.k_prime(),
            found: cascade.len(),
        });
    }
    let amp = params.p_tr().sqrt();
    let direct = params.beta_d().sqrt() * h_d;
    let ris_gain = params.beta_l().sqrt();
    let sigma = params.noise_power().sqrt();
    let y = (0..schedule.t_p())
        .map(|m| {
            let row = schedule.row(m);
            let reflected: Complex64 = row[1..].iter().zip(cascade).map(|(p, v)| p * v).sum();
            let clean = amp * (row[0] * direct + ris_gain * reflected);
            clean + sigma * complex_normal(rng)
        })
        .collect();
    Ok(PilotObservation { y })
}

/// `(1 / (T_p sqrt(P_tr))) F^H y`, split into direct and cascaded parts.
///
/// Each entry carries independent `CN(0, sigma^2 / (T_p P_tr))` error.
pub fn ls_estimate(
    obs: &PilotObservation,
    schedule: &PilotSchedule,
    params: &SystemParams,
) -> Result<ChannelEstimate> {
    let t_p = schedule.t_p();
    if obs.y.len() != t_p {
        return Err(Error::DimensionMismatch {
            what: "pilot observation",
            expected: t_p,
            found: obs.y.len(),
        });
    }
    let scale = 1.0 / (t_p as f64 * params.p_tr().sqrt());
    let mut est = vec![Complex64::new(0.0, 0.0); t_p];
    for (m, y) in obs.y.iter().enumerate() {
        for (e, f) in est.iter_mut().zip(schedule.row(m)) {
            *e += f.conj() * y;
        }
    }
    let mut est = est.into_iter().map(|e| e * scale);
    let h_d_hat = est.next().expect("T_p >= 2");
    Ok(ChannelEstimate {
        h_d_hat,
        v_grouped_hat: est.collect(),
    })
}
