//! Reproducible experiments on top of `sgkink-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, Result};
pub use experiments::run_experiment;
pub use report::{write_report, Check, Report, Table};
