//! Config-driven sweeps, figure presets and validation reports.

pub mod config;
pub mod presets;
pub mod report;
pub mod sweep;

use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::montecarlo::MonteCarloError;

pub use config::{parse_config, parse_config_str, ConfigError, Output, PowerRange, SweepConfig};
pub use presets::{figure_preset, preset, preset_names, FIGURES};
pub use report::{validation_report, Tolerances, ValidationReport};
pub use sweep::{evaluate, read_csv, run_sweep, write_csv, Metric, SweepOutcome, SweepRow};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{scenario_id}{}: {what}: {source}", p_db.map_or_else(String::new, |p| format!(" at p = {p} dB")))]
    Numeric {
        scenario_id: String,
        p_db: Option<f64>,
        what: &'static str,
        #[source]
        source: AnalyticError,
    },
    #[error("{scenario_id}: {source}")]
    MonteCarlo {
        scenario_id: String,
        #[source]
        source: MonteCarloError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl ExperimentError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Numeric { .. } => EXIT_NUMERIC,
            ExperimentError::MonteCarlo { source, .. } => match source {
                MonteCarloError::InvalidRun { .. } | MonteCarloError::Scenario(_) => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
            ExperimentError::Config(_) | ExperimentError::Io { .. } | ExperimentError::Csv(_) => {
                EXIT_CONFIG
            }
        }
    }
}
