//! Closed-form convergence constants and query budgets for block coordinate
//! descent, plus an enumeration checker for the descent-lemma constant.
//!
//! For `f` that is `sigma`-strongly convex with `L`-Lipschitz gradient:
//!
//! * `gamma = (sigma/L)/53 * ((1 - sqrt(1 - sigma/L)) / (1 + sqrt(1 - sigma/L)))^2`
//! * `epsilon = 8 n L^2 / sigma * (1 + n/(m gamma)) * eta^2`
//! * `T0 = ceil(n/(m gamma) * ln(gap0 * (1 + n/(m gamma)) / epsilon))`
//! * `K0 = 2 log2(2^10 L gap0 / (sigma^2 eta^2))` queries per line search
//!
//! After `T0` iterations the expected gap is at most `epsilon`, using at most
//! `T0 * K0 * (m + 1)` deterministic queries.

use std::fmt;

use itertools::Itertools;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest subset count accepted by exhaustive enumeration.
pub const MAX_EXHAUSTIVE_SUBSETS: u128 = 1_000_000;

/// Lower bound on the descent-lemma expectation.
pub const LEMMA_CONSTANT: f64 = 1.0 / 53.0;

fn check_constants(sigma: f64, lipschitz: f64) -> Result<()> {
    if !(sigma > 0.0 && lipschitz.is_finite() && sigma <= lipschitz) {
        return Err(Error::invalid(format!(
            "need 0 < sigma <= L, got sigma={sigma}, L={lipschitz}"
        )));
    }
    Ok(())
}

fn check_block(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::invalid(format!(
            "need 1 <= m <= n, got n={n}, m={m}"
        )));
    }
    Ok(())
}

pub fn gamma(sigma: f64, lipschitz: f64) -> Result<f64> {
    check_constants(sigma, lipschitz)?;
    let ratio = sigma / lipschitz;
    let s = (1.0 - ratio).max(0.0).sqrt();
    Ok(ratio / 53.0 * ((1.0 - s) / (1.0 + s)).powi(2))
}

pub fn epsilon_bound(n: usize, m: usize, sigma: f64, lipschitz: f64, eta: f64) -> Result<f64> {
    check_block(n, m)?;
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    let g = gamma(sigma, lipschitz)?;
    let n_f = n as f64;
    Ok(8.0 * n_f * lipschitz * lipschitz / sigma * (1.0 + n_f / (m as f64 * g)) * eta * eta)
}

/// Sufficient iteration count; clamps to 1 when the log argument is <= 1.
pub fn t0(n: usize, m: usize, gamma: f64, initial_gap: f64, epsilon: f64) -> Result<u64> {
    check_block(n, m)?;
    if !(gamma > 0.0 && initial_gap > 0.0 && epsilon > 0.0) {
        return Err(Error::invalid(
            "gamma, initial gap and epsilon must be positive",
        ));
    }
    let ratio = n as f64 / (m as f64 * gamma);
    let arg = initial_gap * (1.0 + ratio) / epsilon;
    if arg <= 1.0 {
        return Ok(1);
    }
    Ok(((ratio * arg.ln()).ceil() as u64).max(1))
}

/// Sufficient queries for one line search to accuracy `eta / 2`.
pub fn k0(lipschitz: f64, sigma: f64, eta: f64, initial_gap: f64) -> Result<f64> {
    if !(lipschitz > 0.0 && sigma > 0.0 && eta > 0.0 && initial_gap > 0.0) {
        return Err(Error::invalid(
            "L, sigma, eta and initial gap must be positive",
        ));
    }
    Ok(2.0 * (1024.0 * lipschitz * initial_gap / (sigma * sigma * eta * eta)).log2())
}

/// Query bound for repeated querying on a coin with correct-sign
/// probability `p` at confidence `1 - delta`.
pub fn repeated_query_bound(p: f64, delta: f64) -> Result<f64> {
    if !(p > 0.5 && p <= 1.0) {
        return Err(Error::invalid(format!("p must lie in (1/2, 1], got {p}")));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 2), got {delta}"
        )));
    }
    let base = (2.0 / delta).ln() / (4.0 * (p - 0.5).powi(2));
    Ok(base * base.log2())
}

/// Rate constant for [`stochastic_rate_bound`]: `c1` for `kappa = 1`, `c2`
/// otherwise.
pub fn stochastic_rate_bound(
    n: usize,
    m: usize,
    queries: u64,
    kappa: f64,
    constant: f64,
) -> Result<f64> {
    check_block(n, m)?;
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be >= 1, got {kappa}")));
    }
    let n_f = n as f64;
    let q = queries as f64;
    if kappa == 1.0 {
        if n < 2 {
            return Err(Error::invalid("the kappa = 1 rate needs n >= 2"));
        }
        Ok((-(constant / n_f.ln()) * (q / n_f).sqrt()).exp())
    } else {
        if queries == 0 {
            return Err(Error::invalid(
                "the kappa > 1 rate needs at least one query",
            ));
        }
        Ok(constant * n_f * n_f / m as f64 * (n_f / q).powf(1.0 / (2.0 * kappa - 2.0)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LemmaMode {
    Exhaustive,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaEstimate {
    /// `E[Z^2]`; exactly 1 up to rounding in exhaustive mode.
    pub z_sq_mean: f64,
    /// `E[Z^2 [Z - 1/2]_+^2 / (Z + 1/2)^2]`.
    pub value: f64,
    /// Standard error of `value`; zero in exhaustive mode.
    pub std_error: f64,
    pub subsets: u64,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `Z = sqrt(n/m) |g_I| / |g|` for a uniformly random size-`m` index set
/// `I`. Returns moments of `Z^2` and of the lemma integrand.
pub fn lemma_z_moments(gradient: &[f64], m: usize, mode: LemmaMode) -> Result<LemmaEstimate> {
    let n = gradient.len();
    check_block(n, m)?;
    let sq: Vec<f64> = gradient.iter().map(|g| g * g).collect();
    let total: f64 = sq.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::invalid("gradient must be nonzero and finite"));
    }
    let scale = n as f64 / m as f64 / total;
    let integrand = |z_sq: f64| {
        let z = z_sq.sqrt();
        let excess = (z - 0.5).max(0.0);
        z_sq * excess * excess / ((z + 0.5) * (z + 0.5))
    };
    let sample = |subset: &[usize]| scale * subset.iter().map(|&i| sq[i]).sum::<f64>();

    match mode {
        LemmaMode::Exhaustive => {
            let count = binomial(n, m);
            if count > MAX_EXHAUSTIVE_SUBSETS {
                return Err(Error::invalid(format!(
                    "C({n},{m}) = {count} subsets exceeds the exhaustive limit"
                )));
            }
            let (mut z_acc, mut v_acc) = (0.0, 0.0);
            for subset in (0..n).combinations(m) {
                let z_sq = sample(&subset);
                z_acc += z_sq;
                v_acc += integrand(z_sq);
            }
            let k = count as f64;
            Ok(LemmaEstimate {
                z_sq_mean: z_acc / k,
                value: v_acc / k,
                std_error: 0.0,
                subsets: count as u64,
            })
        }
        LemmaMode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::invalid(
                    "Monte Carlo mode needs at least two samples",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut z_acc, mut v_acc, mut v_sq) = (0.0, 0.0, 0.0);
            for _ in 0..samples {
                let subset = index::sample(&mut rng, n, m).into_vec();
                let z_sq = sample(&subset);
                let v = integrand(z_sq);
                z_acc += z_sq;
                v_acc += v;
                v_sq += v * v;
            }
            let k = samples as f64;
            let mean = v_acc / k;
            let var = (v_sq / k - mean * mean).max(0.0) * k / (k - 1.0);
            Ok(LemmaEstimate {
                z_sq_mean: z_acc / k,
                value: mean,
                std_error: (var / k).sqrt(),
                subsets: samples,
            })
        }
    }
}

pub fn lemma_z_expectation(gradient: &[f64], m: usize, mode: LemmaMode) -> Result<f64> {
    lemma_z_moments(gradient, m, mode).map(|e| e.value)
}

/// All deterministic-oracle constants for one problem instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoreticalBounds {
    pub sigma: f64,
    pub lipschitz: f64,
    pub n: usize,
    pub m: usize,
    pub eta: f64,
    pub initial_gap: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub t0: u64,
    pub k0: f64,
    /// `t0 * k0 * (m + 1)`.
    pub deterministic_budget: f64,
}

impl TheoreticalBounds {
    pub fn compute(
        sigma: f64,
        lipschitz: f64,
        n: usize,
        m: usize,
        eta: f64,
        initial_gap: f64,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be positive, got {eta}")));
        }
        if !(initial_gap > 0.0 && initial_gap.is_finite()) {
            return Err(Error::invalid(format!(
                "initial gap must be positive, got {initial_gap}"
            )));
        }
        let gamma = gamma(sigma, lipschitz)?;
        let epsilon = epsilon_bound(n, m, sigma, lipschitz, eta)?;
        let t0 = t0(n, m, gamma, initial_gap, epsilon)?;
        let k0 = k0(lipschitz, sigma, eta, initial_gap)?;
        Ok(Self {
            sigma,
            lipschitz,
            n,
            m,
            eta,
            initial_gap,
            gamma,
            epsilon,
            t0,
            k0,
            deterministic_budget: t0 as f64 * k0 * (m as f64 + 1.0),
        })
    }
}

impl fmt::Display for TheoreticalBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gamma={:.6}", self.gamma)?;
        writeln!(f, "epsilon={:.6e}", self.epsilon)?;
        writeln!(f, "t0={}", self.t0)?;
        writeln!(f, "k0={:.6}", self.k0)?;
        write!(f, "deterministic_budget={:.6e}", self.deterministic_budget)
    }
}
