//! Configuration files, parallel sweeps, CSV and trace output for `mtm-core`.

pub mod config;
pub mod error;
pub mod harness;
pub mod table;
pub mod trace;

pub use config::Config;
pub use error::{Result, SimError};
pub use harness::{run_connectivity, run_single, run_sweep, ConnectivityRow, RunOutput, SweepOutput};
pub use mtm_core;
