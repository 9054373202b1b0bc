//! Experiment harness behind the `vocdm` binary.
//!
//! A run is described by an [`ExperimentConfig`] (TOML, with CLI overrides),
//! executed on a fixed-size worker pool and emitted as [`ResultRecord`]s in
//! CSV or JSON. Output is byte-identical for any worker count.

pub mod config;
pub mod experiments;
pub mod record;
pub mod verify;

pub use config::{
    ChannelConfig, Covariance, Detector, ExperimentConfig, ExperimentKind, OutputFormat, SchemeConfig,
};
pub use experiments::{
    run_ber_sweep, run_diversity_scan, run_experiment, run_papr_ccdf, run_papr_table, with_workers,
};
pub use record::{to_bytes, wilson_bounds, wilson_interval, write_records, ResultRecord};
pub use verify::{run_verify, run_verify_with, VerifyOptions, VerifyReport};
