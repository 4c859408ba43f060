//! RIS phase configurations.
//!
//! Each coefficient rotates its cascaded term onto the direct path:
//! `phi_i = exp(j arg(h_d / v_i))`. With perfect CSI the received amplitude
//! is then `sqrt(beta_d)|h_d| + sqrt(beta_l) sum |v_i|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// One coefficient per subgroup of `B` elements.
    Grouped,
    /// Coefficients for the first `K'` individual elements; the rest do not reflect.
    OnOff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    pub coefficients: Vec<Complex64>,
    pub mode: PhaseMode,
}

impl PhaseConfig {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// `exp(j arg(reference / v))`; a zero `v` has no phase and maps to 1.
fn align(reference: Complex64, v: Complex64) -> Complex64 {
    if v == Complex64::new(0.0, 0.0) || !v.is_finite() {
        log::debug!("cascaded coefficient {v} has no usable phase, using 1");
        return Complex64::new(1.0, 0.0);
    }
    // arg(0) = 0, so a vanishing reference still aligns all terms coherently
    Complex64::from_polar(1.0, reference.arg() - v.arg())
}

fn aligned(
    reference: Complex64,
    cascade: &[Complex64],
    mode: PhaseMode,
) -> Result<PhaseConfig> {
    if cascade.is_empty() {
        return Err(Error::invalid("K'", "phase configuration needs at least one coefficient"));
    }
    Ok(PhaseConfig {
        coefficients: cascade.iter().map(|v| align(reference, *v)).collect(),
        mode,
    })
}

/// Perfect-CSI phases for the grouped channel.
pub fn optimal_phases(h_d: Complex64, v_grouped: &[Complex64]) -> Result<PhaseConfig> {
    aligned(h_d, v_grouped, PhaseMode::Grouped)
}

/// Phases computed from LS estimates.
pub fn estimated_phases(est: &ChannelEstimate) -> Result<PhaseConfig> {
    aligned(est.h_d_hat, &est.v_grouped_hat, PhaseMode::Grouped)
}

/// On-Off configuration from the estimates of the switched-on elements.
pub fn onoff_config(h_d_hat: Complex64, v_hat_on: &[Complex64]) -> Result<PhaseConfig> {
    aligned(h_d_hat, v_hat_on, PhaseMode::OnOff)
}
