//! Pairwise-comparison oracles and the repeated-querying amplifier.
//!
//! An oracle answers `sign(f(y) - f(x))`, either exactly or, in stochastic
//! mode, correctly with probability
//! `1/2 + min(delta0, mu * |f(y) - f(x)|^(kappa - 1))`.
//!
//! Every answer is charged to a shared atomic [`QueryLedger`]. Stochastic
//! outcomes are drawn from a counter-based stream: the `j`-th answer of the
//! stream keyed `k` is a pure function of `(seed, k, j)`, so work split over
//! threads replays identically as long as each task owns its stream key.

use std::ops::Neg;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::seed;

/// Cap on the number of doubling rounds in [`repeated_query`]. At the cap the
/// loop has spent about `2^60` tosses, so in practice a query budget fires
/// long before it.
pub const MAX_ROUNDS: u32 = 60;

/// Stream key used by the oracle's own [`ComparisonOracle::compare`].
const SHARED_STREAM: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    /// Sign of `diff`, with ties mapped to `Plus`.
    pub fn of(diff: f64) -> Self {
        if diff < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StochasticParams {
    kappa: f64,
    mu: f64,
    delta0: f64,
}

impl StochasticParams {
    pub fn new(kappa: f64, mu: f64, delta0: f64) -> Result<Self> {
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be >= 1, got {kappa}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("mu must be > 0, got {mu}")));
        }
        if !(delta0 > 0.0 && delta0 <= 0.5) {
            return Err(Error::invalid(format!(
                "delta0 must lie in (0, 1/2], got {delta0}"
            )));
        }
        if kappa == 1.0 && mu > delta0 {
            return Err(Error::invalid("kappa = 1 requires mu <= delta0"));
        }
        Ok(Self { kappa, mu, delta0 })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    /// Probability that the oracle reports the true sign for a given gap.
    pub fn correct_probability(&self, gap: f64) -> f64 {
        0.5 + self.delta0.min(self.mu * gap.abs().powf(self.kappa - 1.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleMode {
    Deterministic,
    Stochastic(StochasticParams),
}

/// Atomic count of oracle invocations, with an optional ceiling.
#[derive(Debug)]
pub struct QueryLedger {
    count: AtomicU64,
    limit: AtomicU64,
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self {
            count: AtomicU64::new(0),
            limit: AtomicU64::new(u64::MAX),
        }
    }
}

impl QueryLedger {
    pub fn count(&self) -> u64 {
        self.count.load(Ordering::SeqCst)
    }

    pub fn limit(&self) -> Option<u64> {
        match self.limit.load(Ordering::SeqCst) {
            u64::MAX => None,
            l => Some(l),
        }
    }

    fn set_limit(&self, limit: Option<u64>) {
        self.limit
            .store(limit.unwrap_or(u64::MAX), Ordering::SeqCst);
    }

    /// Charges one query, or fails without charging if the ceiling is hit.
    fn charge(&self) -> Result<()> {
        let limit = self.limit.load(Ordering::SeqCst);
        self.count
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |c| {
                (c < limit).then_some(c + 1)
            })
            .map(|_| ())
            .map_err(|_| Error::BudgetExhausted)
    }
}

/// Anything that can answer comparison queries.
///
/// `compare` returns `sign(f(y) - f(x))` subject to the oracle's noise
/// model. `robust_compare` amplifies a noisy comparison to confidence
/// `1 - delta`; with `delta >= 1` or a deterministic oracle it is a single
/// plain query.
pub trait Comparator {
    fn dimension(&self) -> usize;
    fn is_deterministic(&self) -> bool;
    fn compare(&mut self, x: &[f64], y: &[f64]) -> Result<Sign>;

    /// Queries issued through this comparator so far.
    fn queries_issued(&self) -> u64;

    fn robust_compare(&mut self, x: &[f64], y: &[f64], delta: f64) -> Result<Sign> {
        if delta.is_nan() || delta <= 0.0 {
            return Err(Error::invalid(format!(
                "delta must be positive, got {delta}"
            )));
        }
        if self.is_deterministic() || delta >= 1.0 {
            return self.compare(x, y);
        }
        repeated_query(|| self.compare(x, y), delta)
    }
}

/// Sign oracle over an [`Objective`].
#[derive(Debug)]
pub struct ComparisonOracle {
    objective: Objective,
    mode: OracleMode,
    seed: u64,
    ledger: QueryLedger,
    shared_index: AtomicU64,
}

impl ComparisonOracle {
    pub fn deterministic(objective: Objective) -> Self {
        Self::new(objective, OracleMode::Deterministic, 0)
    }

    pub fn stochastic(objective: Objective, params: StochasticParams, seed: u64) -> Self {
        Self::new(objective, OracleMode::Stochastic(params), seed)
    }

    pub fn new(objective: Objective, mode: OracleMode, seed: u64) -> Self {
        Self {
            objective,
            mode,
            seed,
            ledger: QueryLedger::default(),
            shared_index: AtomicU64::new(0),
        }
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    pub fn mode(&self) -> OracleMode {
        self.mode
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.mode, OracleMode::Deterministic)
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn ledger_count(&self) -> u64 {
        self.ledger.count()
    }

    /// Sets an absolute ceiling on the ledger count. Queries past it fail
    /// with [`Error::BudgetExhausted`] and are not charged.
    pub fn set_query_limit(&self, limit: Option<u64>) {
        self.ledger.set_limit(limit);
    }

    /// A comparator with its own outcome stream.
    ///
    /// Streams share the ledger but never each other's randomness.
    pub fn stream(&self, key: u64) -> OracleStream<'_> {
        OracleStream {
            oracle: self,
            key,
            next_index: 0,
        }
    }

    /// One query on the oracle's shared stream; the outcome index is
    /// reserved atomically.
    pub fn compare(&self, x: &[f64], y: &[f64]) -> Result<Sign> {
        self.answer(x, y, SHARED_STREAM, || {
            self.shared_index.fetch_add(1, Ordering::SeqCst)
        })
    }

    pub fn robust_compare(&self, x: &[f64], y: &[f64], delta: f64) -> Result<Sign> {
        let mut shared = SharedComparator(self);
        shared.robust_compare(x, y, delta)
    }

    fn answer(
        &self,
        x: &[f64],
        y: &[f64],
        stream: u64,
        index: impl FnOnce() -> u64,
    ) -> Result<Sign> {
        self.objective.check_dimension(x)?;
        self.objective.check_dimension(y)?;
        self.ledger.charge()?;
        let fx = self.objective.evaluate(x)?;
        let fy = self.objective.evaluate(y)?;
        let truth = Sign::of(fy - fx);
        match self.mode {
            OracleMode::Deterministic => Ok(truth),
            OracleMode::Stochastic(params) => {
                let p = params.correct_probability(fy - fx);
                let u = seed::uniform(self.seed, stream, index());
                Ok(if u < p { truth } else { -truth })
            }
        }
    }
}

struct SharedComparator<'a>(&'a ComparisonOracle);

impl Comparator for SharedComparator<'_> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn is_deterministic(&self) -> bool {
        self.0.is_deterministic()
    }

    fn compare(&mut self, x: &[f64], y: &[f64]) -> Result<Sign> {
        self.0.compare(x, y)
    }

    fn queries_issued(&self) -> u64 {
        self.0.ledger_count()
    }
}

/// A keyed view of an oracle; see [`ComparisonOracle::stream`].
#[derive(Debug)]
pub struct OracleStream<'a> {
    oracle: &'a ComparisonOracle,
    key: u64,
    next_index: u64,
}

impl OracleStream<'_> {
    pub fn key(&self) -> u64 {
        self.key
    }
}

impl Comparator for OracleStream<'_> {
    fn dimension(&self) -> usize {
        self.oracle.dimension()
    }

    fn is_deterministic(&self) -> bool {
        self.oracle.is_deterministic()
    }

    fn compare(&mut self, x: &[f64], y: &[f64]) -> Result<Sign> {
        let index = self.next_index;
        let sign = self.oracle.answer(x, y, self.key, || index)?;
        self.next_index += 1;
        Ok(sign)
    }

    fn queries_issued(&self) -> u64 {
        self.next_index
    }
}

/// Repeated querying with doubling batches.
///
/// Starts with one toss. At round `k` (after `2^k` tosses in total) forms
/// `p_k`, the fraction of `Plus` outcomes, and the radius
/// `r_k = sqrt((k + 1) log(2/delta) / 2^k)`. Stops as soon as `1/2` falls
/// outside `[p_k - r_k, p_k + r_k]`, otherwise tosses as many times again.
/// Returns `Minus` if `p_k + r_k <= 1/2`, `Plus` otherwise.
pub fn repeated_query<F>(toss: F, delta: f64) -> Result<Sign>
where
    F: FnMut() -> Result<Sign>,
{
    repeated_query_capped(toss, delta, MAX_ROUNDS)
}

pub(crate) fn repeated_query_capped<F>(mut toss: F, delta: f64, max_rounds: u32) -> Result<Sign>
where
    F: FnMut() -> Result<Sign>,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let log_term = (2.0 / delta).ln();
    let mut plus = u64::from(toss()? == Sign::Plus);
    let mut total = 1u64;
    let mut batch = 1u64;
    for k in 0..max_rounds {
        let p_k = plus as f64 / total as f64;
        let radius = ((k + 1) as f64 * log_term / 2f64.powi(k as i32)).sqrt();
        let lo = p_k - radius;
        let hi = p_k + radius;
        if !(lo <= 0.5 && 0.5 <= hi) {
            return Ok(if hi <= 0.5 { Sign::Minus } else { Sign::Plus });
        }
        for _ in 0..batch {
            plus += u64::from(toss()? == Sign::Plus);
        }
        total += batch;
        batch *= 2;
    }
    Err(Error::Inconclusive { rounds: max_rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn sq_norm(n: usize) -> Objective {
        Objective::quadratic(DMatrix::identity(n, n)).unwrap()
    }

    /// Oracle over `f(x) = x_0` so the gap between `0` and `g` is exactly `g`.
    fn linear() -> Objective {
        Objective::from_fn(1, |x| x[0]).unwrap()
    }

    #[test]
    fn deterministic_examples() {
        let o = ComparisonOracle::deterministic(sq_norm(2));
        assert_eq!(o.compare(&[1.0, 0.0], &[2.0, 0.0]).unwrap(), Sign::Plus);
        assert_eq!(o.compare(&[2.0, 0.0], &[1.0, 0.0]).unwrap(), Sign::Minus);
        assert_eq!(
            o.compare(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            Sign::Plus,
            "tie maps to +1"
        );
        assert_eq!(o.ledger_count(), 3);
    }

    #[test]
    fn ledger_counts() {
        let o = ComparisonOracle::deterministic(sq_norm(2));
        assert_eq!(o.ledger_count(), 0);
        for _ in 0..3 {
            o.compare(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        }
        assert_eq!(o.ledger_count(), 3);
        assert!(matches!(
            o.compare(&[0.0], &[1.0, 1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(o.ledger_count(), 3, "rejected queries are not charged");
    }

    #[test]
    fn robust_compare_short_circuits_when_deterministic() {
        let o = ComparisonOracle::deterministic(sq_norm(2));
        assert_eq!(
            o.robust_compare(&[1.0, 0.0], &[2.0, 0.0], 0.1).unwrap(),
            Sign::Plus
        );
        assert_eq!(o.ledger_count(), 1);
    }

    #[test]
    fn robust_compare_charges_every_toss() {
        let params = StochasticParams::new(1.0, 0.2, 0.2).unwrap();
        let o = ComparisonOracle::stochastic(linear(), params, 3);
        let mut tosses = 0u64;
        let mut s = o.stream(11);
        let sign = repeated_query(
            || {
                tosses += 1;
                s.compare(&[0.0], &[1.0])
            },
            0.05,
        )
        .unwrap();
        assert_eq!(sign, Sign::Plus);
        // Tosses come in doubling batches: 1, 1, 2, 4, ... so the total is 2^k.
        assert!(tosses.is_power_of_two());
        assert_eq!(o.ledger_count(), tosses);
        let before = o.ledger_count();
        o.stream(12).robust_compare(&[0.0], &[1.0], 0.05).unwrap();
        assert!((o.ledger_count() - before).is_power_of_two());
    }

    #[test]
    fn stochastic_correct_probability() {
        let p = StochasticParams::new(2.0, 0.01, 0.3).unwrap();
        assert!((p.correct_probability(10.0) - 0.6).abs() < 1e-15);
        assert!((p.correct_probability(1e3) - 0.8).abs() < 1e-15);
        let p1 = StochasticParams::new(1.0, 0.1, 0.3).unwrap();
        assert!((p1.correct_probability(0.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn stochastic_params_validation() {
        assert!(StochasticParams::new(0.5, 0.1, 0.3).is_err());
        assert!(StochasticParams::new(2.0, 0.0, 0.3).is_err());
        assert!(StochasticParams::new(2.0, 0.1, 0.6).is_err());
        assert!(StochasticParams::new(1.0, 0.4, 0.3).is_err());
        assert!(StochasticParams::new(1.0, 0.3, 0.3).is_ok());
    }

    fn empirical_correct(params: StochasticParams, gap: f64, trials: u64, seed: u64) -> f64 {
        let o = ComparisonOracle::stochastic(linear(), params, seed);
        let mut s = o.stream(0);
        let hits = (0..trials)
            .filter(|_| s.compare(&[0.0], &[gap]).unwrap() == Sign::Plus)
            .count();
        hits as f64 / trials as f64
    }

    #[test]
    fn stochastic_frequency_example() {
        // 1/2 + min(0.3, 0.01 * 30) = 0.8 for a gap of 30 with kappa = 2.
        let params = StochasticParams::new(2.0, 0.01, 0.3).unwrap();
        let freq = empirical_correct(params, 30.0, 100_000, 9);
        assert!((freq - 0.8).abs() <= 0.005, "freq {freq}");
    }

    #[test]
    fn stochastic_frequency_grid_within_three_standard_errors() {
        let trials = 100_000u64;
        for &kappa in &[1.0, 2.0] {
            let params = StochasticParams::new(kappa, 0.01, 0.3).unwrap();
            for &gap in &[1e-3, 1.0, 1e3] {
                let p = params.correct_probability(gap);
                let freq = empirical_correct(params, gap, trials, 17);
                let se = (p * (1.0 - p) / trials as f64).sqrt();
                assert!(
                    (freq - p).abs() <= 3.0 * se,
                    "kappa {kappa} gap {gap}: {freq} vs {p}"
                );
            }
        }
    }

    #[test]
    fn kappa_one_is_invariant_under_monotone_transforms() {
        let params = StochasticParams::new(1.0, 0.1, 0.3).unwrap();
        let f = ComparisonOracle::stochastic(sq_norm(2), params, 5);
        let g = ComparisonOracle::stochastic(
            Objective::from_fn(2, |x| 2.0 * (x[0] * x[0] + x[1] * x[1]) + 1.0).unwrap(),
            params,
            5,
        );
        let (mut sf, mut sg) = (f.stream(1), g.stream(1));
        for j in 0..2000 {
            let x = [(j as f64 * 0.37).sin(), (j as f64 * 0.11).cos()];
            let y = [(j as f64 * 0.73).cos(), (j as f64 * 0.29).sin()];
            assert_eq!(sf.compare(&x, &y).unwrap(), sg.compare(&x, &y).unwrap());
        }
    }

    #[test]
    fn streams_are_reproducible_and_independent() {
        let params = StochasticParams::new(2.0, 0.01, 0.3).unwrap();
        let o = ComparisonOracle::stochastic(linear(), params, 1);
        let draw = |key| {
            let mut s = o.stream(key);
            (0..256)
                .map(|_| s.compare(&[0.0], &[5.0]).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
        assert_ne!(draw(4), draw(5));
    }

    #[test]
    fn deterministic_mode_is_antisymmetric() {
        let o = ComparisonOracle::deterministic(sq_norm(3));
        for j in 0..500 {
            let t = j as f64;
            let x = [t.sin(), (2.0 * t).cos(), 0.3 * t.cos()];
            let y = [(3.0 * t).cos(), t.cos(), 0.1];
            let fx = o.objective().evaluate(&x).unwrap();
            let fy = o.objective().evaluate(&y).unwrap();
            if fx != fy {
                assert_eq!(o.compare(&x, &y).unwrap(), -o.compare(&y, &x).unwrap());
            }
        }
    }

    #[test]
    fn query_limit_stops_charging() {
        let o = ComparisonOracle::deterministic(sq_norm(1));
        o.set_query_limit(Some(2));
        assert!(o.compare(&[0.0], &[1.0]).is_ok());
        assert!(o.compare(&[0.0], &[1.0]).is_ok());
        assert!(matches!(
            o.compare(&[0.0], &[1.0]),
            Err(Error::BudgetExhausted)
        ));
        assert_eq!(o.ledger_count(), 2);
    }

    #[test]
    fn repeated_query_rejects_bad_delta() {
        assert!(repeated_query(|| Ok(Sign::Plus), 0.0).is_err());
        assert!(repeated_query(|| Ok(Sign::Plus), 1.0).is_err());
    }

    #[test]
    fn repeated_query_on_a_fair_coin_is_inconclusive_or_budgeted() {
        // A fair coin with a budget: the loop must stop on the budget.
        let params = StochasticParams::new(2.0, 0.01, 0.3).unwrap();
        let o = ComparisonOracle::stochastic(linear(), params, 2);
        o.set_query_limit(Some(10_000));
        let r = o.stream(0).robust_compare(&[0.0], &[0.0], 0.05);
        assert!(matches!(r, Err(Error::BudgetExhausted)));
    }

    #[test]
    fn repeated_query_round_cap_on_balanced_coin() {
        // An exactly balanced stream keeps 1/2 inside every interval.
        let mut flip = false;
        let r = repeated_query_capped(
            || {
                flip = !flip;
                Ok(if flip { Sign::Plus } else { Sign::Minus })
            },
            0.5,
            12,
        );
        assert!(matches!(r, Err(Error::Inconclusive { rounds: 12 })));
    }

    #[test]
    fn repeated_query_error_rate() {
        for &(p_correct, delta) in &[(0.6, 0.05), (0.7, 0.05), (0.9, 0.01)] {
            let mu = p_correct - 0.5;
            let params = StochasticParams::new(1.0, mu, mu).unwrap();
            let o = ComparisonOracle::stochastic(linear(), params, 99);
            let trials = 400u64;
            let wrong = (0..trials)
                .filter(|&t| {
                    o.stream(t).robust_compare(&[0.0], &[1.0], delta).unwrap() != Sign::Plus
                })
                .count();
            let rate = wrong as f64 / trials as f64;
            assert!(rate <= delta + 0.01, "p {p_correct} delta {delta}: {rate}");
        }
    }
}
