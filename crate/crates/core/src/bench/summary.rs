use std::io::Write;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

pub const SUMMARY_HEADER: &str = "checkpoint_queries,median_f,p30_f,p70_f,median_elapsed_seconds";

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub checkpoint_queries: u64,
    pub median_f: f64,
    pub p30_f: f64,
    pub p70_f: f64,
    pub median_elapsed_seconds: f64,
}

/// Nearest-rank percentile: the smallest sample whose rank reaches
/// `percent` of the sample count. `sorted` must be ascending.
pub fn nearest_rank(sorted: &[f64], percent: u32) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::invalid("percentile of an empty sample"));
    }
    if percent == 0 || percent > 100 {
        return Err(Error::invalid(format!(
            "percent must lie in 1..=100, got {percent}"
        )));
    }
    let n = sorted.len();
    let rank = (percent as usize * n).div_ceil(100).max(1);
    Ok(sorted[rank - 1])
}

/// Powers of two from 1 up to and including `limit`.
pub fn checkpoints(limit: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |c| c.checked_mul(2))
        .take_while(|&c| c <= limit.max(1))
        .collect()
}

fn value_at(trajectory: &Trajectory, checkpoint: u64) -> (f64, f64) {
    let upto = trajectory
        .records
        .partition_point(|r| r.cumulative_queries <= checkpoint);
    match upto.checked_sub(1).map(|i| &trajectory.records[i]) {
        Some(r) => (r.f_value, r.elapsed_seconds),
        None => (trajectory.initial_value, 0.0),
    }
}

/// Per checkpoint, takes each run's last value at or before the checkpoint
/// (its starting value if it had not finished an iteration yet) and reports
/// the 30/50/70 nearest-rank percentiles.
pub fn summarize(runs: &[Trajectory], checkpoints: &[u64]) -> Result<Vec<SummaryRow>> {
    if runs.is_empty() {
        return Err(Error::invalid("nothing to summarize"));
    }
    checkpoints
        .iter()
        .map(|&c| {
            let (mut fs, mut ts): (Vec<f64>, Vec<f64>) =
                runs.iter().map(|t| value_at(t, c)).unzip();
            fs.sort_by(f64::total_cmp);
            ts.sort_by(f64::total_cmp);
            Ok(SummaryRow {
                checkpoint_queries: c,
                median_f: nearest_rank(&fs, 50)?,
                p30_f: nearest_rank(&fs, 30)?,
                p70_f: nearest_rank(&fs, 70)?,
                median_elapsed_seconds: nearest_rank(&ts, 50)?,
            })
        })
        .collect()
}

/// Writes `# key=value` preamble lines, then the header and rows.
pub fn write_summary_csv<W: Write>(
    mut out: W,
    preamble: &[(String, String)],
    rows: &[SummaryRow],
) -> Result<()> {
    for (k, v) in preamble {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.checkpoint_queries, r.median_f, r.p30_f, r.p70_f, r.median_elapsed_seconds
        )?;
    }
    Ok(())
}
