//! Analysis toolkit for RIS element grouping.
//!
//! Neighbouring elements of a reconfigurable intelligent surface share one
//! phase shift, which shrinks the least-squares pilot overhead from `K + 1`
//! to `K' + 1` symbols at the cost of passive beamforming resolution. This
//! crate simulates that trade-off end to end (Rayleigh fading, DFT pilot
//! schedule, LS estimation, phase alignment), evaluates the closed-form rate
//! upper bound, and locates the rate-maximising group size either by brute
//! force or through the Lambert-W closed form.
//!
//! Module map:
//!
//! - [`linkbudget`]: dB conversions, path loss, [`SystemParams`].
//! - [`channel`]: fading draws, grouping, analytical group moments.
//! - [`estimation`]: DFT pilot schedule and LS estimator.
//! - [`beamforming`]: phase configurations (grouped and On-Off).
//! - [`rate`]: Monte-Carlo achievable rate and the closed-form upper bound.
//! - [`optimizer`]: optimal group size, power-law fit of the Gamma ratio.
//! - [`special`]: Gamma-function ratio and the principal Lambert W branch.
//! - [`diagnostics`]: Monte-Carlo checks of the bound's moment identities.

pub mod beamforming;
pub mod channel;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod linkbudget;
pub mod optimizer;
pub mod rate;
pub mod special;

pub use num_complex::Complex64;

pub use beamforming::{PhaseConfig, PhaseMode};
pub use channel::{ChannelRealization, GroupMoments};
pub use error::{Error, Result};
pub use estimation::{ChannelEstimate, PilotObservation, PilotSchedule};
pub use linkbudget::{Geometry, PathLossModel, Scenario, SystemParams};
pub use optimizer::{GroupSizeResult, GroupingConstants, Method, PowerFit};
pub use rate::{BoundCoefficients, RateResult};
