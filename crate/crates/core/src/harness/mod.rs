//! Scenario configuration and the Monte Carlo runner behind the CLI.

pub mod config;
pub mod placement;
pub mod runner;

pub use config::{LinkMode, ScenarioConfig};
pub use placement::sample_user_positions;
pub use runner::{run_scenario, RunRecord, ScenarioOutcome};
