//! Simulation engine for a repeated two-basement sabotage game played by
//! classical teams and entanglement-assisted (Bell / W state) teams, under
//! ideal, standard-channel and calibration-profile noise.
//!
//! Module map:
//!
//! - [`qstate`]: dense statevectors, density matrices, outcome tables, seeded RNG streams
//! - [`circuit`]: gates, Bell/W preparation circuits, shot execution
//! - [`channel`]: Kraus channels, the sabotage operator, noise profiles
//! - [`strategy`]: classical, measurement-based quantum, and HAH teams
//! - [`game`]: defense assignment, scoring, matches, resource evolution
//! - [`analysis`]: statistics, exact expected utility, stationarity and best-response search
//! - [`cli`]: scenario configuration and the experiment runner behind `qsg run`

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod game;
pub mod qstate;
pub mod strategy;

pub use error::{FieldIssue, QsgError, Result};
