//! Monte Carlo runs, configuration and file output.

pub mod config;
pub mod output;
pub mod sim;

pub use config::{ConfigValues, ExperimentConfig, InitSpec, InitialState, OutputFormat, RunMode};
pub use sim::{
    assert_s_identity, measure_t0, run_experiment, run_replication, RunSummary, SIdentityCheck,
    T0Summary, TraceRecord, ViolationCounts,
};
