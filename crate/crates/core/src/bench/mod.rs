//! Experiment harness: JSON configs, repeated seeded runs, CSV output and
//! percentile summaries.

mod config;
mod runner;
mod summary;

pub use config::{
    AlgorithmConfig, AlgorithmName, BudgetConfig, ExperimentConfig, OracleConfig, OracleModeName,
    ProblemConfig, ProblemName,
};
pub use runner::{
    initial_point, run_experiment, run_repeat, write_raw_csv, ExperimentOutput, RepeatRun,
    RAW_HEADER,
};
pub use summary::{
    checkpoints, nearest_rank, summarize, write_summary_csv, SummaryRow, SUMMARY_HEADER,
};

use std::fmt::Write as _;

use crate::error::Result;
use crate::theory::TheoreticalBounds;

/// `key=value` report of all deterministic constants.
pub fn bounds_command(
    sigma: f64,
    lipschitz: f64,
    n: usize,
    m: usize,
    eta: f64,
    initial_gap: f64,
) -> Result<String> {
    let b = TheoreticalBounds::compute(sigma, lipschitz, n, m, eta, initial_gap)?;
    let mut out = String::new();
    writeln!(out, "{b}").expect("writing to a String cannot fail");
    Ok(out)
}
