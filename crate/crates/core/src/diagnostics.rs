//! Monte-Carlo checks of the moment identities behind the rate bound, plus a
//! residual scan of the Lambert W solver. Used by the CLI `selftest`.

use rayon::prelude::*;

use crate::beamforming::optimal_phases;
use crate::channel::sample_channels;
use crate::error::{Error, Result};
use crate::rate::{bound_coefficients, trial_rng};
use crate::special::lambert_w0;

/// One simulated mean compared with its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCheck {
    pub name: &'static str,
    pub simulated: f64,
    pub stderr: f64,
    pub expected: f64,
}

impl MomentCheck {
    /// Distance from the closed form in standard errors.
    pub fn z_score(&self) -> f64 {
        if self.stderr == 0.0 {
            if self.simulated == self.expected { 0.0 } else { f64::INFINITY }
        } else {
            (self.simulated - self.expected).abs() / self.stderr
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score() <= sigmas
    }
}

fn mean_and_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Simulates `draws` surfaces of `K' B` elements and compares
///
/// - `E|v'_i|^2 = B`
/// - `E|v'_i| = z`
/// - `E[(sum_i |v'_i|)^2] = K' B + K'(K'-1) z^2`
/// - `E[|h_d| sum_i |v'_i|] = (sqrt(pi)/2) K' z`
/// - `E|sqrt(beta_d) h_d + sqrt(beta_l) phi^T v'|^2 = xi1 K'^2 + xi2 K' + beta_d` under perfect phases
///
/// The first two use the per-draw average over the `K'` subgroups.
pub fn moment_identities(
    b: usize,
    k_prime: usize,
    beta_d: f64,
    beta_l: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<MomentCheck>> {
    if draws < 2 {
        return Err(Error::invalid("draws", "need at least two draws for a standard error"));
    }
    if k_prime == 0 {
        return Err(Error::invalid("K'", "need at least one subgroup"));
    }
    let coeffs = bound_coefficients(b, beta_d, beta_l)?;
    let k = k_prime * b;
    let kp = k_prime as f64;

    let samples = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let mut r = sample_channels(k, &mut rng)?;
            let vg = r.group(b)?.to_vec();
            let power = vg.iter().map(|v| v.norm_sqr()).sum::<f64>() / kp;
            let sum_abs: f64 = vg.iter().map(|v| v.norm()).sum();
            let phases = optimal_phases(r.h_d(), &vg)?;
            let reflected: num_complex::Complex64 =
                phases.coefficients.iter().zip(&vg).map(|(p, v)| p * v).sum();
            let combined = (beta_d.sqrt() * r.h_d() + beta_l.sqrt() * reflected).norm_sqr();
            Ok([power, sum_abs / kp, sum_abs * sum_abs, r.h_d().norm() * sum_abs, combined])
        })
        .collect::<Result<Vec<[f64; 5]>>>()?;

    let z = coeffs.z;
    let expected = [
        ("E|v'|^2", b as f64),
        ("E|v'|", z),
        ("E(sum|v'|)^2", kp * b as f64 + kp * (kp - 1.0) * z * z),
        ("E|h_d|sum|v'|", 0.5 * std::f64::consts::PI.sqrt() * kp * z),
        ("E|a|^2", coeffs.xi1 * kp * kp + coeffs.xi2 * kp + beta_d),
    ];
    Ok(expected
        .iter()
        .enumerate()
        .map(|(j, (name, want))| {
            let (simulated, stderr) = mean_and_stderr(samples.iter().map(move |s| s[j]));
            MomentCheck {
                name,
                simulated,
                stderr,
                expected: *want,
            }
        })
        .collect())
}

/// Largest `|W(x) e^W(x) - x| / max(1, x)` over a log grid of `points`
/// abscissae from `10^lo_exp` to `10^hi_exp`.
pub fn lambert_worst_residual(lo_exp: f64, hi_exp: f64, points: usize) -> Result<(f64, f64)> {
    if points < 2 || hi_exp.is_nan() || lo_exp.is_nan() || hi_exp <= lo_exp {
        return Err(Error::invalid("grid", "need at least two points over a non-empty range"));
    }
    let mut worst = (0.0, 0.0);
    for i in 0..points {
        let x = 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (points - 1) as f64);
        let w = lambert_w0(x)?;
        let scaled = (w * w.exp() - x).abs() / x.max(1.0);
        if scaled > worst.1 {
            worst = (x, scaled);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_for_small_groups() {
        for (b, kp) in [(1usize, 4usize), (4, 16)] {
            let checks = moment_identities(b, kp, 1.3e-9, 2.96e-8, 20_000, 17).unwrap();
            assert_eq!(checks.len(), 5);
            for c in &checks {
                assert!(c.within(4.0), "B={b} K'={kp} {c:?}");
            }
        }
        assert!(moment_identities(2, 0, 1.0, 1.0, 100, 1).is_err());
        assert!(moment_identities(2, 3, 1.0, 1.0, 1, 1).is_err());
    }

    #[test]
    fn lambert_scan() {
        let (_, worst) = lambert_worst_residual(-6.0, 12.0, 500).unwrap();
        assert!(worst <= 1e-12);
        assert!(lambert_worst_residual(1.0, 1.0, 10).is_err());
    }
}
