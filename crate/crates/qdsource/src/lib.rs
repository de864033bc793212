//! Standard-library companion to `qdsource-core`: TOML configuration, CSV
//! and JSON file formats, parallel sweeps, and the `qdsource` command line.

pub mod config;
pub mod engine;
pub mod error;
pub mod output;
pub mod sweep;

pub use config::{load, load_config, Overrides, RawConfig, RunConfig};
pub use error::{AppError, Result};
