//! Scenario runner for the accelerated-observer Gaussian-channel toolkit.
//!
//! The library side of the `rindler` binary: config parsing and validation
//! ([`config`]), built-in presets ([`scenarios`]), the per-point physics
//! pipeline ([`pipeline`]), the content-addressed result cache ([`cache`]),
//! and sweep execution with CSV output ([`runner`]).

pub mod cache;
pub mod config;
pub mod pipeline;
pub mod runner;
pub mod scenarios;

pub use config::{ConfigError, Preset, ScenarioConfig};
pub use pipeline::{ChannelOutcome, GridPoint, PipelineError, PointRecord};
pub use runner::{run_scenario, RunError, RunOptions, RunOutcome};
