use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{AlgorithmName, ExperimentConfig, ProblemName};
use super::summary::{checkpoints, summarize, write_summary_csv, SummaryRow};
use crate::baselines::{nelder_mead_run, NelderMeadConfig};
use crate::blockcd::{blockcd_run, BlockCdConfig};
use crate::error::Result;
use crate::objective::{make_quadratic, make_rosenbrock, Objective};
use crate::oracle::{ComparisonOracle, OracleMode};
use crate::seed;
use crate::trajectory::Trajectory;

pub const RAW_HEADER: &str =
    "algorithm,problem,n,m,oracle_mode,repeat,iteration,cumulative_queries,elapsed_seconds,f_value,step_norm";

const INITIAL_POINT_STREAM: u64 = 0x4958_3030;
const ALGORITHM_STREAM: u64 = 0x414c_474f;

#[derive(Clone, Debug)]
pub struct RepeatRun {
    pub repeat: u32,
    pub trajectory: Trajectory,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub raw_path: PathBuf,
    pub summary_path: PathBuf,
    pub runs: Vec<RepeatRun>,
    pub summary: Vec<SummaryRow>,
}

/// Uniform point in `[-2, 2]^n`.
pub fn initial_point(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-2.0..=2.0)).collect()
}

fn build_objective(cfg: &ExperimentConfig) -> Result<Objective> {
    match cfg.problem.name {
        ProblemName::Quadratic => make_quadratic(cfg.problem.n, cfg.problem.seed),
        ProblemName::Rosenbrock => make_rosenbrock(cfg.problem.n),
    }
}

/// Runs repeat `repeat` of an experiment.
pub fn run_repeat(
    cfg: &ExperimentConfig,
    objective: &Objective,
    mode: OracleMode,
    repeat: u32,
) -> Result<Trajectory> {
    let n = cfg.problem.n;
    let x0 = initial_point(
        n,
        seed::derive(&[cfg.problem.seed, u64::from(repeat), INITIAL_POINT_STREAM]),
    );
    let oracle = ComparisonOracle::new(
        objective.clone(),
        mode,
        seed::derive(&[cfg.oracle.seed, u64::from(repeat)]),
    );
    let master_seed = seed::derive(&[cfg.problem.seed, u64::from(repeat), ALGORITHM_STREAM]);
    let alg = &cfg.algorithm;
    let budget = &cfg.budget;
    match alg.name {
        AlgorithmName::BlockCd => {
            let config = BlockCdConfig {
                m: alg.m.unwrap_or(n),
                eta: alg.eta.unwrap_or(1e-3),
                delta: alg.delta,
                max_iterations: budget.max_iterations,
                max_queries: budget.max_queries,
                target_gap: budget.target_gap,
                master_seed,
                workers: alg.workers,
            };
            blockcd_run(&oracle, objective, &config, &x0)
        }
        AlgorithmName::NelderMead => {
            let config = NelderMeadConfig {
                max_iterations: budget.max_iterations,
                max_queries: budget.max_queries,
                delta: alg.delta,
                master_seed,
                ..NelderMeadConfig::default()
            };
            nelder_mead_run(&oracle, objective, &config, &x0)
        }
    }
}

/// Raw per-iteration rows for all repeats.
pub fn write_raw_csv<W: Write>(
    mut out: W,
    cfg: &ExperimentConfig,
    runs: &[RepeatRun],
) -> Result<()> {
    writeln!(out, "{RAW_HEADER}")?;
    let m = match cfg.algorithm.name {
        AlgorithmName::BlockCd => cfg.algorithm.m.map(|m| m.to_string()).unwrap_or_default(),
        AlgorithmName::NelderMead => String::new(),
    };
    for run in runs {
        for r in &run.trajectory.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                cfg.algorithm.name.as_str(),
                cfg.problem.name.as_str(),
                cfg.problem.n,
                m,
                cfg.oracle.mode.as_str(),
                run.repeat,
                r.iteration,
                r.cumulative_queries,
                r.elapsed_seconds,
                r.f_value,
                r.step_norm
            )?;
        }
    }
    Ok(())
}

fn summary_path(raw: &Path) -> PathBuf {
    let stem = raw
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match raw.extension() {
        Some(ext) => format!("{stem}_summary.{}", ext.to_string_lossy()),
        None => format!("{stem}_summary"),
    };
    raw.with_file_name(name)
}

fn preamble(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    let mut p = vec![
        (
            "algorithm".to_string(),
            cfg.algorithm.name.as_str().to_string(),
        ),
        ("problem".into(), cfg.problem.name.as_str().into()),
        ("n".into(), cfg.problem.n.to_string()),
    ];
    if let Some(m) = cfg.algorithm.m {
        p.push(("m".into(), m.to_string()));
    }
    if let Some(eta) = cfg.algorithm.eta {
        p.push(("eta".into(), eta.to_string()));
    }
    p.push(("delta".into(), cfg.algorithm.delta.to_string()));
    p.push(("oracle_mode".into(), cfg.oracle.mode.as_str().into()));
    for (key, value) in [
        ("kappa", cfg.oracle.kappa),
        ("mu", cfg.oracle.mu),
        ("delta0", cfg.oracle.delta0),
    ] {
        if let Some(v) = value {
            p.push((key.into(), v.to_string()));
        }
    }
    p.push(("repeats".into(), cfg.repeats.to_string()));
    if let Some(q) = cfg.budget.max_queries {
        p.push(("max_queries".into(), q.to_string()));
    }
    p
}

/// Runs every repeat, writes the raw CSV to `output_path` and the summary
/// next to it as `<stem>_summary.<ext>`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let objective = build_objective(cfg)?;
    let mode = cfg.oracle_mode()?;

    let raw_path = PathBuf::from(&cfg.output_path);
    let summary_path = summary_path(&raw_path);
    // Open outputs first so an unwritable path fails before any work.
    let raw_file = File::create(&raw_path)?;
    let summary_file = File::create(&summary_path)?;

    let runs = (0..cfg.repeats)
        .map(|repeat| {
            run_repeat(cfg, &objective, mode, repeat)
                .map(|trajectory| RepeatRun { repeat, trajectory })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut raw = BufWriter::new(raw_file);
    write_raw_csv(&mut raw, cfg, &runs)?;
    raw.flush()?;

    let limit = cfg.budget.max_queries.unwrap_or_else(|| {
        runs.iter()
            .map(|r| r.trajectory.total_queries())
            .max()
            .unwrap_or(1)
    });
    let trajectories: Vec<Trajectory> = runs.iter().map(|r| r.trajectory.clone()).collect();
    let summary = summarize(&trajectories, &checkpoints(limit))?;
    let mut out = BufWriter::new(summary_file);
    write_summary_csv(&mut out, &preamble(cfg), &summary)?;
    out.flush()?;

    Ok(ExperimentOutput {
        raw_path,
        summary_path,
        runs,
        summary,
    })
}
