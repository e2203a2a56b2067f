//! Configuration, output formats and the CLI commands.

pub mod commands;
pub mod config;
pub mod format;
pub mod output;

pub use commands::{
    cmd_clique, cmd_compare, cmd_equilibrium, cmd_gradcheck, cmd_simulate, ExitStatus, RunContext,
};
pub use config::{parse_config, Experiment, ExperimentConfig, Model};
pub use format::{fmt_f64, to_json};
