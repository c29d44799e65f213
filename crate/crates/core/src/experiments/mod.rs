//! Simulation protocols, verification suites and their file outputs.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::agent::ExplorationAbort;

mod config;
mod output;
mod sims;
pub mod suite;
pub mod svg;

pub use config::{ExperimentConfig, GeometrySelection, GridSpec, OracleSpec};
pub use sims::{run_sim1, run_sim2, BinStat, GridPoint, GridResult, Sim1Result};
pub use suite::{run_check_suite, run_oracle_suite};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Numerical(#[from] crate::Error),
    #[error(transparent)]
    Aborted(#[from] Box<ExplorationAbort>),
    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },
}

impl ExperimentError {
    /// Process exit code: 1 check failure, 2 configuration or I/O, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ChecksFailed { .. } => 1,
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) | Self::Aborted(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// One row of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passes when `statistic <= threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    /// Passes when `statistic > threshold`.
    pub fn above(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic > threshold,
        }
    }

    /// Passes when `statistic < threshold`.
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
        }
    }

    /// Passes when `statistic >= threshold`.
    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic >= threshold,
        }
    }

    /// A check that could not be evaluated.
    pub fn errored(name: impl Into<String>, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic: f64::NAN,
            threshold,
            pass: false,
        }
    }
}

/// Rows of a suite run, in registration order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// `Ok` when every check passed.
    pub fn into_result(self) -> Result<Self, ExperimentError> {
        let failed = self.failures().count();
        if failed == 0 {
            Ok(self)
        } else {
            Err(ExperimentError::ChecksFailed {
                failed,
                total: self.checks.len(),
            })
        }
    }
}
