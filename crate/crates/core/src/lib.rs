//! Derivative-free optimization through a pairwise-comparison oracle.
//!
//! Optimizers in this crate never see function values. They only learn the
//! sign of `f(y) - f(x)` for point pairs they choose, either exactly
//! (deterministic oracle) or with a gap-dependent error rate (stochastic
//! oracle). The crate provides:
//!
//! * [`objective`]: quadratic and Rosenbrock benchmark functions with their
//!   analytic constants,
//! * [`oracle`]: the comparison oracles, query accounting and the
//!   repeated-querying amplifier for noisy comparisons,
//! * [`line_search`]: a bracketing/bisection line search driven by comparisons,
//! * [`blockcd`]: randomized block coordinate descent whose direction-estimate
//!   step runs its coordinate searches in parallel,
//! * [`baselines`]: a comparison-only Nelder–Mead simplex method,
//! * [`theory`]: closed-form convergence constants and query budgets,
//! * [`bench`]: the experiment harness behind the `pcopt` binary.

pub mod baselines;
pub mod bench;
pub mod blockcd;
pub mod error;
pub mod line_search;
pub mod objective;
pub mod oracle;
pub mod parallel;
pub mod seed;
pub mod theory;
pub mod trajectory;

pub use error::{Error, Result};
pub use objective::Objective;
pub use oracle::{Comparator, ComparisonOracle, OracleMode, Sign, StochasticParams};
pub use trajectory::{IterationRecord, Trajectory};
