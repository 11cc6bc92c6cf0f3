//! Simulation harness for bootstrap calibration experiments: data
//! generators, TOML scenario configuration, the scenario runner, CSV/JSON
//! reports, the built-in scenario registry and the `bootlab` CLI.

pub mod cli;
pub mod config;
pub mod distribution;
pub mod error;
pub mod registry;
pub mod report;
pub mod runner;

pub use config::ScenarioConfig;
pub use error::{HarnessError, Result};
pub use registry::Profile;
pub use runner::{run_double_bootstrap_stacked, run_kernel_test_scenario, run_scenario, ScenarioReport};
