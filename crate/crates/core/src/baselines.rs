//! Nelder–Mead simplex search where every decision is an oracle comparison.
//!
//! Standard coefficients: reflection 1, expansion 2, contraction 1/2,
//! shrink 1/2. Vertices are re-ranked after every move with a merge sort
//! over oracle comparisons, and every comparison is charged to the ledger.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::oracle::{Comparator, ComparisonOracle, OracleStream, Sign};
use crate::seed;
use crate::trajectory::{IterationRecord, Trajectory};

const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadConfig {
    pub max_iterations: Option<u64>,
    pub max_queries: Option<u64>,
    /// Per-comparison confidence; 1.0 means single raw queries.
    pub delta: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    pub master_seed: u64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            max_iterations: None,
            max_queries: Some(crate::blockcd::DEFAULT_MAX_QUERIES),
            delta: 1.0,
            initial_step: 1.0,
            master_seed: 0,
        }
    }
}

/// `n + 1` vertices kept in best-to-worst order.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    /// `x0` plus `x0 + h e_i` for every axis, unranked.
    pub fn axis_aligned(x0: &[f64], h: f64) -> Self {
        let mut vertices = vec![x0.to_vec()];
        for i in 0..x0.len() {
            let mut v = x0.to_vec();
            v[i] += h;
            vertices.push(v);
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn best(&self) -> &[f64] {
        &self.vertices[0]
    }

    /// Orders vertices best to worst.
    pub fn rank<C: Comparator>(&mut self, cmp: &mut Ranker<'_, C>) -> Result<()> {
        let vertices = std::mem::take(&mut self.vertices);
        self.vertices = merge_sort(vertices, cmp)?;
        Ok(())
    }

    /// Pulls every non-best vertex halfway towards the best one.
    pub fn shrink(&mut self) {
        let (best, rest) = self
            .vertices
            .split_first_mut()
            .expect("simplex is never empty");
        for v in rest {
            for (vi, bi) in v.iter_mut().zip(best.iter()) {
                *vi = bi + SHRINK * (*vi - bi);
            }
        }
    }

    fn centroid_without_worst(&self) -> Vec<f64> {
        let n = self.vertices.len() - 1;
        let mut c = vec![0.0; n];
        for v in &self.vertices[..n] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        c.iter_mut().for_each(|ci| *ci /= n as f64);
        c
    }
}

/// Comparison helper with a fixed confidence level.
pub struct Ranker<'a, C> {
    cmp: &'a mut C,
    delta: f64,
}

impl<'a, C: Comparator> Ranker<'a, C> {
    pub fn new(cmp: &'a mut C, delta: f64) -> Self {
        Self { cmp, delta }
    }

    /// `f(a) < f(b)`.
    pub fn better(&mut self, a: &[f64], b: &[f64]) -> Result<bool> {
        Ok(self.cmp.robust_compare(b, a, self.delta)? == Sign::Minus)
    }
}

fn merge_sort<C: Comparator>(
    mut items: Vec<Vec<f64>>,
    cmp: &mut Ranker<'_, C>,
) -> Result<Vec<Vec<f64>>> {
    if items.len() <= 1 {
        return Ok(items);
    }
    let right = items.split_off(items.len() / 2);
    let left = merge_sort(items, cmp)?;
    let right = merge_sort(right, cmp)?;
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut left = left.into_iter().peekable();
    let mut right = right.into_iter().peekable();
    while let (Some(l), Some(r)) = (left.peek(), right.peek()) {
        // Stable: take from the right only on a strict win.
        if cmp.better(r, l)? {
            out.push(right.next().unwrap());
        } else {
            out.push(left.next().unwrap());
        }
    }
    out.extend(left);
    out.extend(right);
    Ok(out)
}

fn affine(base: &[f64], towards: &[f64], t: f64) -> Vec<f64> {
    base.iter()
        .zip(towards)
        .map(|(b, p)| b + t * (p - b))
        .collect()
}

/// One move of the simplex. Returns `Err(BudgetExhausted)` untouched so the
/// caller can discard the partial iteration.
fn step<C: Comparator>(simplex: &mut Simplex, cmp: &mut Ranker<'_, C>) -> Result<()> {
    let n = simplex.vertices.len() - 1;
    let centroid = simplex.centroid_without_worst();
    let best = simplex.vertices[0].clone();
    let second_worst = simplex.vertices[n - 1].clone();
    let worst = simplex.vertices[n].clone();

    // x_r = c + rho (c - x_worst)
    let reflected = affine(&centroid, &worst, -REFLECTION);
    let accepted = if cmp.better(&reflected, &best)? {
        let expanded = affine(&centroid, &reflected, EXPANSION);
        Some(if cmp.better(&expanded, &reflected)? {
            expanded
        } else {
            reflected
        })
    } else if cmp.better(&reflected, &second_worst)? {
        Some(reflected)
    } else if cmp.better(&reflected, &worst)? {
        let outside = affine(&centroid, &reflected, CONTRACTION);
        (!cmp.better(&reflected, &outside)?).then_some(outside)
    } else {
        let inside = affine(&centroid, &worst, CONTRACTION);
        cmp.better(&inside, &worst)?.then_some(inside)
    };

    match accepted {
        Some(v) => simplex.vertices[n] = v,
        None => simplex.shrink(),
    }
    simplex.rank(cmp)
}

/// Runs Nelder–Mead from `x0`; records the best vertex's true value.
pub fn nelder_mead_run(
    oracle: &ComparisonOracle,
    objective: &Objective,
    config: &NelderMeadConfig,
    x0: &[f64],
) -> Result<Trajectory> {
    let n = oracle.dimension();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x0.len(),
        });
    }
    objective.check_dimension(x0)?;
    if !(config.delta > 0.0 && config.delta <= 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1], got {}",
            config.delta
        )));
    }
    if !(config.initial_step > 0.0 && config.initial_step.is_finite()) {
        return Err(Error::invalid("initial simplex step must be positive"));
    }
    if config.max_iterations.is_none() && config.max_queries.is_none() {
        return Err(Error::invalid(
            "at least one stopping criterion is required",
        ));
    }

    let start_queries = oracle.ledger_count();
    let previous_limit = oracle.ledger().limit();
    if let Some(budget) = config.max_queries {
        let limit = start_queries.saturating_add(budget);
        oracle.set_query_limit(Some(previous_limit.map_or(limit, |l| l.min(limit))));
    }
    let result = run_inner(oracle, objective, config, x0, start_queries);
    oracle.set_query_limit(previous_limit);
    result
}

fn run_inner(
    oracle: &ComparisonOracle,
    objective: &Objective,
    config: &NelderMeadConfig,
    x0: &[f64],
    start_queries: u64,
) -> Result<Trajectory> {
    let clock = Instant::now();
    let initial_value = objective.evaluate(x0)?;
    let mut stream: OracleStream<'_> = oracle.stream(seed::derive(&[config.master_seed, 0x4e4d]));
    let mut ranker = Ranker::new(&mut stream, config.delta);

    let mut simplex = Simplex::axis_aligned(x0, config.initial_step);
    let mut records = Vec::new();
    match simplex.rank(&mut ranker) {
        Ok(()) => {}
        Err(Error::BudgetExhausted) => {
            return Ok(Trajectory {
                initial_value,
                records,
                final_point: x0.to_vec(),
            });
        }
        Err(e) => return Err(e),
    }

    let mut best = simplex.best().to_vec();
    for t in 1u64.. {
        if config.max_iterations.is_some_and(|max| t > max) {
            break;
        }
        let mut candidate = simplex.clone();
        match step(&mut candidate, &mut ranker) {
            Ok(()) => simplex = candidate,
            Err(Error::BudgetExhausted) => break,
            Err(e) => return Err(e),
        }
        let moved = simplex
            .best()
            .iter()
            .zip(&best)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        best = simplex.best().to_vec();
        records.push(IterationRecord {
            iteration: t,
            cumulative_queries: oracle.ledger_count() - start_queries,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
            f_value: objective.evaluate(&best)?,
            step_norm: moved,
        });
    }
    Ok(Trajectory {
        initial_value,
        records,
        final_point: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_quadratic, make_rosenbrock};
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ranking_matches_true_values() {
        let q = make_quadratic(4, 8).unwrap();
        let o = ComparisonOracle::deterministic(q.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x0: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut s = Simplex::axis_aligned(&x0, rng.gen_range(0.1..2.0));
            let mut stream = o.stream(0);
            s.rank(&mut Ranker::new(&mut stream, 1.0)).unwrap();
            assert_eq!(s.vertices().len(), 5);
            let vals: Vec<f64> = s
                .vertices()
                .iter()
                .map(|v| q.evaluate(v).unwrap())
                .collect();
            assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
        }
    }

    #[test]
    fn shrink_halves_towards_best() {
        let mut s = Simplex {
            vertices: vec![vec![1.0, 1.0], vec![3.0, 1.0], vec![1.0, -3.0]],
        };
        s.shrink();
        assert_eq!(
            s.vertices(),
            &[vec![1.0, 1.0], vec![2.0, 1.0], vec![1.0, -1.0]]
        );
    }

    #[test]
    fn best_value_never_worsens_on_quadratic() {
        let q = Objective::quadratic(DMatrix::identity(2, 2)).unwrap();
        let o = ComparisonOracle::deterministic(q.clone());
        let cfg = NelderMeadConfig {
            max_iterations: Some(200),
            ..Default::default()
        };
        let t = nelder_mead_run(&o, &q, &cfg, &[1.0, 1.0]).unwrap();
        assert_eq!(t.records.len(), 200);
        assert_eq!(t.monotonicity_violations(), 0);
        assert!(t.final_value() < 1e-8, "{}", t.final_value());
    }

    #[test]
    fn improves_two_dimensional_rosenbrock() {
        let r = make_rosenbrock(2).unwrap();
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x0 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let o = ComparisonOracle::deterministic(r.clone());
            let cfg = NelderMeadConfig {
                max_iterations: Some(500),
                ..Default::default()
            };
            let t = nelder_mead_run(&o, &r, &cfg, &x0).unwrap();
            assert!(t.final_value() < t.initial_value, "seed {seed}");
            assert_eq!(t.monotonicity_violations(), 0);
        }
    }

    #[test]
    fn respects_query_budget() {
        let q = make_quadratic(5, 1).unwrap();
        let o = ComparisonOracle::deterministic(q.clone());
        let cfg = NelderMeadConfig {
            max_queries: Some(300),
            ..Default::default()
        };
        let t = nelder_mead_run(&o, &q, &cfg, &[1.0; 5]).unwrap();
        assert!(o.ledger_count() <= 300);
        assert!(t.total_queries() <= 300);
        assert!(!t.records.is_empty());
        assert_eq!(o.ledger().limit(), None);
    }

    #[test]
    fn rejects_bad_config() {
        let q = make_quadratic(2, 1).unwrap();
        let o = ComparisonOracle::deterministic(q.clone());
        let none = NelderMeadConfig {
            max_queries: None,
            ..Default::default()
        };
        assert!(nelder_mead_run(&o, &q, &none, &[1.0, 1.0]).is_err());
        assert!(nelder_mead_run(&o, &q, &NelderMeadConfig::default(), &[1.0]).is_err());
    }
}
