//! Experiment runner behind the `qsg` binary.

pub mod config;
pub mod runner;

pub use config::{
    default_teams, load_config, validate_config, Overrides, RawConfig, RunConfig, Scenario, TeamEntry, TeamSpec,
};
pub use runner::{render_csv, render_summary, run_scenario, simulate, RunReport, TeamReport, CSV_HEADER};
