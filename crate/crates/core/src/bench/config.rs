use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{OracleMode, StochasticParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemName {
    Quadratic,
    Rosenbrock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleModeName {
    Deterministic,
    Stochastic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgorithmName {
    #[serde(rename = "blockcd")]
    BlockCd,
    #[serde(rename = "nelder-mead")]
    NelderMead,
}

impl ProblemName {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemName::Quadratic => "quadratic",
            ProblemName::Rosenbrock => "rosenbrock",
        }
    }
}

impl OracleModeName {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleModeName::Deterministic => "deterministic",
            OracleModeName::Stochastic => "stochastic",
        }
    }
}

impl AlgorithmName {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmName::BlockCd => "blockcd",
            AlgorithmName::NelderMead => "nelder-mead",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: ProblemName,
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub mode: OracleModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub name: AlgorithmName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Per-comparison confidence; defaults to 1.0 (single raw queries).
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

fn default_delta() -> f64 {
    1.0
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_queries: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub oracle: OracleConfig,
    pub algorithm: AlgorithmConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    pub repeats: u32,
    pub output_path: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Replaces the problem and oracle seeds.
    pub fn override_seed(&mut self, seed: u64) {
        self.problem.seed = seed;
        self.oracle.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::Config(format!("{key}: {why}")));
        let n = self.problem.n;
        match self.problem.name {
            ProblemName::Quadratic if n < 1 => {
                return bad("problem.n", format!("must be >= 1, got {n}"))
            }
            ProblemName::Rosenbrock if n < 2 => {
                return bad("problem.n", format!("rosenbrock needs n >= 2, got {n}"))
            }
            _ => {}
        }
        if self.repeats < 1 {
            return bad("repeats", "must be >= 1".into());
        }
        if self.output_path.is_empty() {
            return bad("output_path", "must not be empty".into());
        }
        if self.oracle.mode == OracleModeName::Stochastic {
            for (key, value) in [
                ("oracle.kappa", self.oracle.kappa),
                ("oracle.mu", self.oracle.mu),
                ("oracle.delta0", self.oracle.delta0),
            ] {
                if value.is_none() {
                    return bad(key, "required for stochastic mode".into());
                }
            }
        }
        if let Err(Error::InvalidArgument(why)) = self.oracle_mode() {
            return bad("oracle", why);
        }
        let alg = &self.algorithm;
        if !(alg.delta > 0.0 && alg.delta <= 1.0) {
            return bad(
                "algorithm.delta",
                format!("must lie in (0, 1], got {}", alg.delta),
            );
        }
        if alg.workers < 1 {
            return bad("algorithm.workers", "must be >= 1".into());
        }
        if alg.name == AlgorithmName::BlockCd {
            match alg.m {
                None => return bad("algorithm.m", "required for blockcd".into()),
                Some(m) if m < 1 || m > n => {
                    return bad("algorithm.m", format!("must lie in [1, {n}], got {m}"))
                }
                _ => {}
            }
            match alg.eta {
                None => return bad("algorithm.eta", "required for blockcd".into()),
                Some(eta) if !(eta > 0.0 && eta.is_finite()) => {
                    return bad("algorithm.eta", format!("must be positive, got {eta}"))
                }
                _ => {}
            }
        }
        let b = &self.budget;
        if b.max_queries == Some(0) {
            return bad("budget.max_queries", "must be positive".into());
        }
        if b.max_iterations == Some(0) {
            return bad("budget.max_iterations", "must be positive".into());
        }
        if let Some(g) = b.target_gap {
            if g.is_nan() || g <= 0.0 {
                return bad("budget.target_gap", format!("must be positive, got {g}"));
            }
        }
        if b.max_queries.is_none() && b.max_iterations.is_none() && b.target_gap.is_none() {
            return bad(
                "budget",
                "needs at least one of max_queries, max_iterations, target_gap".into(),
            );
        }
        Ok(())
    }

    pub fn oracle_mode(&self) -> Result<OracleMode> {
        match self.oracle.mode {
            OracleModeName::Deterministic => Ok(OracleMode::Deterministic),
            OracleModeName::Stochastic => {
                let (Some(kappa), Some(mu), Some(delta0)) =
                    (self.oracle.kappa, self.oracle.mu, self.oracle.delta0)
                else {
                    return Err(Error::invalid("stochastic mode needs kappa, mu and delta0"));
                };
                Ok(OracleMode::Stochastic(StochasticParams::new(
                    kappa, mu, delta0,
                )?))
            }
        }
    }
}
