//! One-dimensional minimization along a direction using only comparisons.
//!
//! The search keeps an incumbent step `alpha` (initially 0) and a bracket
//! `[lo, hi]` around it:
//!
//! 1. probe `alpha = +1` and `alpha = -1` against the start point and pin
//!    the side that does not improve to 0;
//! 2. double each free endpoint while it still improves on the start point;
//! 3. bisect: try the midpoint towards `hi`, then towards `lo`, moving the
//!    incumbent on a strict win and otherwise pulling both endpoints in.
//!
//! The incumbent only moves on a comparison win, so with a deterministic
//! oracle `f(x + alpha d) <= f(x)` always holds.

use crate::error::{Error, Result};
use crate::oracle::{Comparator, Sign};

/// Doubling stops with [`Error::UnboundedDescent`] once `|alpha| > 2^60`.
pub const MAX_DOUBLINGS: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSearchResult {
    pub alpha: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub queries_used: u64,
}

/// Bracket snapshot after each bisection step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct BracketState {
    pub lo: f64,
    pub alpha: f64,
    pub hi: f64,
}

/// `x + alpha * d`.
pub fn point_along(x: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect()
}

/// Minimizes `g(alpha) = f(x + alpha d)` to bracket width `tol`.
///
/// Every comparison goes through `robust_compare` with confidence `delta`;
/// `delta = 1.0` issues plain single queries.
pub fn line_search<C: Comparator>(
    oracle: &mut C,
    x: &[f64],
    d: &[f64],
    tol: f64,
    delta: f64,
) -> Result<LineSearchResult> {
    search(oracle, x, d, tol, delta, |_| {})
}

pub(crate) fn search<C, F>(
    oracle: &mut C,
    x: &[f64],
    d: &[f64],
    tol: f64,
    delta: f64,
    mut observe: F,
) -> Result<LineSearchResult>
where
    C: Comparator,
    F: FnMut(&BracketState),
{
    if x.len() != oracle.dimension() {
        return Err(Error::DimensionMismatch {
            expected: oracle.dimension(),
            found: x.len(),
        });
    }
    if d.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: d.len(),
        });
    }
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("line search direction must be nonzero"));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }

    let start_queries = oracle.queries_issued();
    let at = |alpha: f64| point_along(x, d, alpha);
    // `improves(a, b)` is true when f(x + b d) < f(x + a d).
    let mut improves = |from: f64, to: f64| -> Result<bool> {
        Ok(oracle.robust_compare(&at(from), &at(to), delta)? == Sign::Minus)
    };

    let mut alpha = 0.0f64;
    let mut hi = 1.0f64;
    let mut lo = -1.0f64;

    // Step 1: orientation.
    let up = improves(0.0, hi)?;
    let down = improves(0.0, lo)?;
    let double_lo = match (up, down) {
        (false, true) => {
            hi = 0.0;
            true
        }
        (true, false) => {
            lo = 0.0;
            true
        }
        // Both improve: only possible under noise. Expand the + side only.
        (true, true) => false,
        (false, false) => true,
    };

    // Step 2: expansion. A zero endpoint is already pinned.
    if hi != 0.0 {
        hi = expand(hi, &mut improves)?;
    }
    if double_lo && lo != 0.0 {
        lo = expand(lo, &mut improves)?;
    }

    // Step 3: bisection.
    observe(&BracketState { lo, alpha, hi });
    while hi - lo > tol {
        let mid_hi = 0.5 * (alpha + hi);
        let mid_lo = 0.5 * (alpha + lo);
        if mid_hi == alpha && mid_lo == alpha {
            // Bracket is below floating-point resolution around alpha.
            break;
        }
        if mid_hi != alpha && improves(alpha, mid_hi)? {
            lo = alpha;
            alpha = mid_hi;
        } else if mid_lo != alpha && improves(alpha, mid_lo)? {
            hi = alpha;
            alpha = mid_lo;
        } else {
            lo = mid_lo;
            hi = mid_hi;
        }
        observe(&BracketState { lo, alpha, hi });
    }

    Ok(LineSearchResult {
        alpha,
        bracket_lo: lo,
        bracket_hi: hi,
        queries_used: oracle.queries_issued() - start_queries,
    })
}

fn expand<F>(mut end: f64, improves: &mut F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<bool>,
{
    let cap = 2f64.powi(MAX_DOUBLINGS as i32);
    while improves(0.0, end)? {
        end *= 2.0;
        if end.abs() > cap {
            return Err(Error::UnboundedDescent {
                max_doublings: MAX_DOUBLINGS,
            });
        }
    }
    Ok(end)
}
