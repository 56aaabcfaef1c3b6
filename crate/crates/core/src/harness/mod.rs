//! Experiment configuration, streaming logs, summaries and the exact
//! discrete mode.

mod config;
mod log;
mod oracle;
mod summary;

pub use config::{ChecksConfig, ExperimentConfig, ObjectiveConfig, Transform};
pub use log::{
    run_experiment, run_experiment_to, status_name, tally, CheckTally, Footer, Header, IterationRecord, LogLine,
    RunLog, LOG_VERSION,
};
pub use oracle::{run_oracle, OracleLog, OracleRecord};
pub use summary::{quantile_path, summarize, CheckRate, QuantileRow, Summary};
