//! Batch experiments for the reconciliation library: efficiency sweeps,
//! efficiency calibration, the Cascade baseline and key-length budgets.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_alist_check, cmd_calibrate, cmd_cascade, cmd_keybudget, cmd_sweep, CSV_HEADER,
};
pub use config::ExperimentConfig;
