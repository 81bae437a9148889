//! Command-line layer: configuration, file formats and subcommands.

pub mod commands;
pub mod config;
pub mod io;

pub use commands::{cmd_experiment, cmd_fit, cmd_prox_curve, cmd_simulate, Status};
pub use config::{parse_config, ProxCurveConfig, RunConfig};
pub use io::{read_series_csv, write_series_csv};
