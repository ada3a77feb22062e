//! Randomized block coordinate descent driven by comparisons.
//!
//! Each iteration samples `m` of the `n` coordinates uniformly without
//! replacement, line-searches every sampled axis from the current point to
//! accuracy `eta / 2` (the direction-estimate step, run on a worker pool),
//! assembles the per-axis minimizers into a direction `d`, then line-searches
//! along `d / |d|` to accuracy `eta` and moves there.
//!
//! With `m = n` and the iterate near a minimizer, `d` approximates the
//! diagonally scaled Newton direction `-diag(H)^-1 g`. With `m = 1` the
//! method reduces to one-coordinate-at-a-time search.
//!
//! All randomness (coordinate subsets and stochastic oracle streams) is keyed
//! by `(master_seed, iteration, coordinate)`, so a run is reproducible bit
//! for bit whatever the worker count.

use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::line_search::{line_search, point_along};
use crate::objective::Objective;
use crate::oracle::ComparisonOracle;
use crate::parallel::WorkerPool;
use crate::seed;
use crate::trajectory::{IterationRecord, Trajectory};

pub const DEFAULT_MAX_QUERIES: u64 = 1_000_000;

const SAMPLING_STREAM: u64 = 0x5a4d_504c;
const SEARCH_STEP_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockCdConfig {
    /// Coordinates per iteration, `1 <= m <= n`.
    pub m: usize,
    /// Line-search accuracy.
    pub eta: f64,
    /// Per-comparison confidence; 1.0 means single raw queries.
    pub delta: f64,
    pub max_iterations: Option<u64>,
    pub max_queries: Option<u64>,
    /// Stop once `f(x_t) - f* <= target_gap`. Requires a known optimum.
    pub target_gap: Option<f64>,
    pub master_seed: u64,
    pub workers: usize,
}

impl BlockCdConfig {
    pub fn new(m: usize, eta: f64) -> Self {
        Self {
            m,
            eta,
            delta: 1.0,
            max_iterations: None,
            max_queries: Some(DEFAULT_MAX_QUERIES),
            target_gap: None,
            master_seed: 0,
            workers: 1,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_max_iterations(mut self, iterations: u64) -> Self {
        self.max_iterations = Some(iterations);
        self
    }

    pub fn with_max_queries(mut self, queries: Option<u64>) -> Self {
        self.max_queries = queries;
        self
    }

    pub fn with_target_gap(mut self, gap: f64) -> Self {
        self.target_gap = Some(gap);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m == 0 || self.m > n {
            return Err(Error::invalid(format!(
                "m must lie in [1, {n}], got {}",
                self.m
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1], got {}",
                self.delta
            )));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if matches!(self.max_iterations, Some(0)) || matches!(self.max_queries, Some(0)) {
            return Err(Error::invalid(
                "iteration and query budgets must be positive",
            ));
        }
        if let Some(g) = self.target_gap {
            if g.is_nan() || g <= 0.0 {
                return Err(Error::invalid(format!(
                    "target_gap must be positive, got {g}"
                )));
            }
        }
        if self.max_iterations.is_none() && self.max_queries.is_none() && self.target_gap.is_none()
        {
            return Err(Error::invalid(
                "at least one stopping criterion is required",
            ));
        }
        Ok(())
    }
}

/// Uniform size-`m` subset of `0..n`, returned in ascending order.
pub fn sample_coordinates<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "cannot sample {m} of {n} coordinates"
        )));
    }
    let mut picked = index::sample(rng, n, m).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Direction-estimate step.
///
/// Line-searches each axis in `coords` from `x` to accuracy `eta / 2` and
/// returns the vector of per-axis steps. If every step is exactly zero, the
/// first (smallest) sampled coordinate is set to `eta / 2`. Axis `i` draws
/// oracle noise from the stream keyed `(seed, i)`.
pub fn direction_estimate(
    oracle: &ComparisonOracle,
    x: &[f64],
    coords: &[usize],
    eta: f64,
    delta: f64,
    pool: &WorkerPool,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = x.len();
    let first = *coords
        .first()
        .ok_or_else(|| Error::invalid("coordinate set is empty"))?;
    if let Some(&bad) = coords.iter().find(|&&i| i >= n) {
        return Err(Error::invalid(format!(
            "coordinate {bad} out of range for n={n}"
        )));
    }
    let steps = pool.map(coords, |&i| {
        let mut axis = vec![0.0; n];
        axis[i] = 1.0;
        let mut stream = oracle.stream(seed::derive(&[seed, i as u64]));
        line_search(&mut stream, x, &axis, 0.5 * eta, delta).map(|r| r.alpha)
    });
    let mut d = vec![0.0; n];
    for (&i, step) in coords.iter().zip(steps) {
        d[i] = step?;
    }
    if d.iter().all(|&v| v == 0.0) {
        d[first] = 0.5 * eta;
    }
    Ok(d)
}

/// `d / |d|`.
pub fn unit_direction(d: &[f64]) -> Result<Vec<f64>> {
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::invalid(
            "search direction must be nonzero and finite",
        ));
    }
    Ok(d.iter().map(|v| v / norm).collect())
}

/// Search step: line search along `d / |d|` to accuracy `eta`.
pub fn search_step(
    oracle: &ComparisonOracle,
    x: &[f64],
    d: &[f64],
    eta: f64,
    delta: f64,
    seed: u64,
) -> Result<f64> {
    let unit = unit_direction(d)?;
    let mut stream = oracle.stream(seed::derive(&[seed, SEARCH_STEP_STREAM]));
    Ok(line_search(&mut stream, x, &unit, eta, delta)?.alpha)
}

struct LimitGuard<'a> {
    oracle: &'a ComparisonOracle,
    previous: Option<u64>,
}

impl Drop for LimitGuard<'_> {
    fn drop(&mut self) {
        self.oracle.set_query_limit(self.previous);
    }
}

/// Runs block coordinate descent from `x0`.
///
/// `objective` is only used to record `f(x_t)` and to evaluate the
/// `target_gap` stop; the iterates depend on the oracle alone. Running out
/// of query budget mid-iteration ends the run at the last completed iterate.
pub fn blockcd_run(
    oracle: &ComparisonOracle,
    objective: &Objective,
    config: &BlockCdConfig,
    x0: &[f64],
) -> Result<Trajectory> {
    let n = oracle.dimension();
    config.validate(n)?;
    objective.check_dimension(x0)?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    let optimum =
        match config.target_gap {
            Some(_) => Some(objective.optimum_value().ok_or_else(|| {
                Error::invalid("target_gap needs an objective with a known optimum")
            })?),
            None => None,
        };
    let pool = WorkerPool::new(config.workers)?;

    let start_queries = oracle.ledger_count();
    let _guard = LimitGuard {
        oracle,
        previous: oracle.ledger().limit(),
    };
    if let Some(budget) = config.max_queries {
        let limit = start_queries.saturating_add(budget);
        oracle.set_query_limit(Some(
            oracle.ledger().limit().map_or(limit, |l| l.min(limit)),
        ));
    }

    let clock = Instant::now();
    let initial_value = objective.evaluate(x0)?;
    let mut x = x0.to_vec();
    let mut f = initial_value;
    let mut records = Vec::new();

    for t in 1u64.. {
        if config.max_iterations.is_some_and(|max| t > max) {
            break;
        }
        if let (Some(gap), Some(fstar)) = (config.target_gap, optimum) {
            if f - fstar <= gap {
                break;
            }
        }
        let iter_seed = seed::derive(&[config.master_seed, t]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[iter_seed, SAMPLING_STREAM]));
        let coords = sample_coordinates(n, config.m, &mut rng)?;

        let step = direction_estimate(
            oracle,
            &x,
            &coords,
            config.eta,
            config.delta,
            &pool,
            iter_seed,
        )
        .and_then(|d| {
            let unit = unit_direction(&d)?;
            let beta = search_step(oracle, &x, &d, config.eta, config.delta, iter_seed)?;
            Ok((unit, beta))
        });
        let (unit, beta) = match step {
            Ok(s) => s,
            Err(Error::BudgetExhausted) => break,
            Err(e) => return Err(e),
        };

        x = point_along(&x, &unit, beta);
        f = objective.evaluate(&x)?;
        records.push(IterationRecord {
            iteration: t,
            cumulative_queries: oracle.ledger_count() - start_queries,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            f_value: f,
            step_norm: beta.abs(),
        });
    }

    Ok(Trajectory {
        initial_value,
        records,
        final_point: x,
    })
}
