//! Shared fixtures for the criterion benches.

use risgroup_core::{Scenario, SystemParams};

/// Default scenario (K = 360, T_c = 900, 0 dBm) at group size `b`.
pub fn default_params(b: usize) -> SystemParams {
    Scenario::default()
        .params(b)
        .expect("default scenario is valid for 1 <= b <= 360")
}
