//! `selftest`: moment identities of the rate bound and the Lambert W residual scan.

use anyhow::Result;

use risgroup_core::diagnostics::{lambert_worst_residual, moment_identities};

pub const MOMENT_DRAWS: usize = 100_000;
pub const SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub passed: bool,
}

/// Runs every check; `draws` Monte-Carlo surfaces per `(B, K')` pair.
pub fn run(beta_d: f64, beta_l: f64, draws: usize, seed: u64) -> Result<Vec<Outcome>> {
    let mut outcomes = Vec::new();
    for b in [1usize, 2, 4, 8] {
        for k_prime in [1usize, 4, 16] {
            for check in moment_identities(b, k_prime, beta_d, beta_l, draws, seed)? {
                outcomes.push(Outcome {
                    label: format!(
                        "moment {:<14} B={b:<2} K'={k_prime:<2} sim={:.6e} exp={:.6e} ({:.2} se)",
                        check.name,
                        check.simulated,
                        check.expected,
                        check.z_score()
                    ),
                    passed: check.within(SIGMAS),
                });
            }
        }
    }
    let (x, worst) = lambert_worst_residual(-6.0, 12.0, 1801)?;
    outcomes.push(Outcome {
        label: format!("lambert residual over [1e-6, 1e12]: worst {worst:.2e} at x={x:.3e}"),
        passed: worst <= 1e-12,
    });
    Ok(outcomes)
}
