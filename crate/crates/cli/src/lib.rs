//! Batch runner for two-state-vector scenarios.
//!
//! A scenario is a TOML file naming a `kind` and its parameters. [`run`]
//! turns a parsed config into a [`ScenarioReport`], and [`render`] prints it
//! as text, CSV or JSON lines.

pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, read_config, validate, ConfigError, ScenarioConfig, ScenarioKind};
pub use report::{emit_report, render, Format, Rendered, ScenarioReport};
pub use run::run;
