// SPDX-License-Identifier: Apache-2.0
//! Command-line front end: configuration handling and the run modes that
//! emit CSV tables with a JSON manifest.

pub mod config;
pub mod error;
pub mod run;

pub use config::{Mode, RunConfig};
pub use error::CliError;
pub use run::{run, Options, RunSummary};
