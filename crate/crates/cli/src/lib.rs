//! Command-line front end for the hybrid subword NER taggers: corpus and
//! tokenizer analysis, training, prediction, evaluation and tokenizer ×
//! architecture comparison grids.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod kv;
pub mod pipeline;
pub mod report;

pub use commands::{run, Cli, Command};
pub use error::{CliError, Result};
