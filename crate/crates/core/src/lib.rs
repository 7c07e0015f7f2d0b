//! Sum-rate maximization for RIS-aided Gaussian MIMO broadcast channels.
//!
//! The broadcast sum rate is computed on the dual multiple-access channel,
//! where the covariances and the RIS phases are optimized alternately:
//! covariances by dual decomposition with cyclic water-filling
//! ([`covariance`]), phases element by element in closed form ([`ris`]),
//! coupled by [`ao`]. [`channel`] synthesizes geometry-based Rician channels
//! and [`harness`] runs Monte Carlo scenarios over them.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32`, `f64`); the
//! aliases below fix it to `f64`.

// `!(x > 0)` is how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao;
pub mod channel;
pub mod check;
pub mod complexity;
pub mod covariance;
pub mod error;
pub mod harness;
pub mod instance;
pub mod linalg;
pub mod ris;
pub mod rng;
pub mod scalar;

#[cfg(test)]
mod testutil;

pub use ao::{alternating_optimize, alternating_optimize_from, AoOptions, AoReport, InitialPhases};
pub use channel::{compose_effective_channel, sample_channels, ChannelSet, RisPhases, SystemGeometry, UserPlacement};
pub use complexity::{complexity_estimate, MulCounter};
pub use covariance::{dual_bisection, dual_mac_sum_rate, CovarianceSet};
pub use error::{Error, Result};
pub use ris::{build_subproblem, optimal_phase, sweep_all_phases, PhaseSubproblem};
pub use scalar::{Real, C};

pub type ChannelSet64 = ChannelSet<f64>;
pub type ChannelSet32 = ChannelSet<f32>;
pub type RisPhases64 = RisPhases<f64>;
pub type CovarianceSet64 = CovarianceSet<f64>;
pub type AoOptions64 = AoOptions<f64>;
pub type AoReport64 = AoReport<f64>;
pub type AoReport32 = AoReport<f32>;
pub type PhaseSubproblem64 = PhaseSubproblem<f64>;
pub type CMat64 = linalg::CMat<f64>;
