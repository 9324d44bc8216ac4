//! File formats, cavity benchmark sweeps and the `qobs` command line for
//! [`qobs_core`].
//!
//! - [`format`]: JSON system files.
//! - [`scenario`] and [`sweep`]: scenario presets and thermal-noise sweeps
//!   comparing the observer designs.
//! - [`report`]: CSV tables, plot data and the metadata sidecar.
//! - [`check`] and [`design`]: the `check` and `design` subcommands.
//! - [`cli`]: argument parsing and exit codes.

pub mod check;
pub mod cli;
pub mod design;
pub mod error;
pub mod format;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
