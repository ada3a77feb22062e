//! Benchmark objectives and their analytic constants.
//!
//! Optimizers never evaluate an [`Objective`] themselves; it is consumed by
//! the comparison oracle and by metric recording.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    /// `f(x) = x^T A x` with `A` symmetric positive definite.
    Quadratic(Arc<DMatrix<f64>>),
    Rosenbrock,
    Custom(Arc<EvalFn>),
}

/// Strong-convexity and smoothness constants `(sigma, L)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexityConstants {
    pub sigma: f64,
    pub lipschitz: f64,
}

impl ConvexityConstants {
    pub fn new(sigma: f64, lipschitz: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && lipschitz.is_finite() && sigma <= lipschitz) {
            return Err(Error::invalid(format!(
                "convexity constants require 0 < sigma <= L, got sigma={sigma}, L={lipschitz}"
            )));
        }
        Ok(Self { sigma, lipschitz })
    }
}

/// An n-dimensional objective with optional known optimum and constants.
///
/// Cheap to clone; immutable after construction.
#[derive(Clone)]
pub struct Objective {
    dimension: usize,
    kind: Kind,
    name: &'static str,
    optimum_value: Option<f64>,
    optimum_point: Option<Vec<f64>>,
    convexity: Option<ConvexityConstants>,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("optimum_value", &self.optimum_value)
            .field("convexity", &self.convexity)
            .finish()
    }
}

impl Objective {
    /// Wraps an arbitrary function. Used mostly for tests and examples.
    pub fn from_fn<F>(dimension: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dimension == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        Ok(Self {
            dimension,
            kind: Kind::Custom(Arc::new(f)),
            name: "custom",
            optimum_value: None,
            optimum_point: None,
            convexity: None,
        })
    }

    /// `f(x) = x^T A x` for a given symmetric positive definite `A`.
    ///
    /// The constants are `(2 lambda_min(A), 2 lambda_max(A))` and the optimum
    /// is the origin.
    pub fn quadratic(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::invalid(
                "quadratic form needs a non-empty square matrix",
            ));
        }
        if (&matrix - matrix.transpose()).amax() > 1e-12 * matrix.amax().max(1.0) {
            return Err(Error::invalid("quadratic form matrix must be symmetric"));
        }
        let eig = SymmetricEigen::new(matrix.clone()).eigenvalues;
        let lo = eig.min();
        let hi = eig.max();
        if lo <= 0.0 {
            return Err(Error::invalid(
                "quadratic form matrix must be positive definite",
            ));
        }
        Ok(Self {
            dimension: n,
            kind: Kind::Quadratic(Arc::new(matrix)),
            name: "quadratic",
            optimum_value: Some(0.0),
            optimum_point: Some(vec![0.0; n]),
            convexity: Some(ConvexityConstants::new(2.0 * lo, 2.0 * hi)?),
        })
    }

    /// Attaches a known optimum. The value must match `f(point)`.
    pub fn with_optimum(mut self, value: f64, point: Vec<f64>) -> Result<Self> {
        self.check_dimension(&point)?;
        let at = self.evaluate(&point)?;
        if (at - value).abs() > 1e-12 * value.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "optimum value {value} disagrees with f(optimum) = {at}"
            )));
        }
        self.optimum_value = Some(value);
        self.optimum_point = Some(point);
        Ok(self)
    }

    pub fn with_convexity(mut self, sigma: f64, lipschitz: f64) -> Result<Self> {
        self.convexity = Some(ConvexityConstants::new(sigma, lipschitz)?);
        Ok(self)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn optimum_value(&self) -> Option<f64> {
        self.optimum_value
    }

    pub fn optimum_point(&self) -> Option<&[f64]> {
        self.optimum_point.as_deref()
    }

    pub fn convexity(&self) -> Option<ConvexityConstants> {
        self.convexity
    }

    /// The matrix `A` of a quadratic objective.
    pub fn quadratic_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Quadratic(a) => Some(a),
            _ => None,
        }
    }

    /// Analytic gradient, available for quadratics and Rosenbrock.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Quadratic(a) => Some(
                (0..self.dimension)
                    .map(|i| 2.0 * row_dot(a, i, x))
                    .collect(),
            ),
            Kind::Rosenbrock => {
                let n = x.len();
                let mut g = vec![0.0; n];
                for i in 0..n - 1 {
                    let t = x[i + 1] - x[i] * x[i];
                    g[i] += -2.0 * (1.0 - x[i]) - 400.0 * x[i] * t;
                    g[i + 1] += 200.0 * t;
                }
                Some(g)
            }
            Kind::Custom(_) => None,
        }
    }

    /// Diagonal of the Hessian, available for quadratics and Rosenbrock.
    pub fn hessian_diagonal(&self, x: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::Quadratic(a) => Some((0..self.dimension).map(|i| 2.0 * a[(i, i)]).collect()),
            Kind::Rosenbrock => {
                let n = x.len();
                let mut h = vec![0.0; n];
                for i in 0..n - 1 {
                    h[i] += 2.0 - 400.0 * (x[i + 1] - 3.0 * x[i] * x[i]);
                    h[i + 1] += 200.0;
                }
                Some(h)
            }
            Kind::Custom(_) => None,
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dimension(x)?;
        let v = match &self.kind {
            Kind::Quadratic(a) => quadratic_form(a, x),
            Kind::Rosenbrock => x
                .windows(2)
                .map(|w| (1.0 - w[0]).powi(2) + 100.0 * (w[1] - w[0] * w[0]).powi(2))
                .sum(),
            Kind::Custom(f) => f(x),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteEvaluation)
        }
    }

    pub fn check_dimension(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        Ok(())
    }
}

fn row_dot(a: &DMatrix<f64>, i: usize, x: &[f64]) -> f64 {
    // A is symmetric, so column i doubles as row i and is contiguous.
    a.column(i).iter().zip(x).map(|(a, b)| a * b).sum()
}

fn quadratic_form(a: &DMatrix<f64>, x: &[f64]) -> f64 {
    (0..x.len()).map(|j| x[j] * row_dot(a, j, x)).sum()
}

/// Random quadratic `x^T A x` with `A = B^T B / n + I`, `B` standard normal.
pub fn make_quadratic(n: usize, seed: u64) -> Result<Objective> {
    if n == 0 {
        return Err(Error::invalid("quadratic dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let mut a = b.transpose() * &b / n as f64 + DMatrix::identity(n, n);
    // Symmetrize exactly so row and column access agree bit for bit.
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Objective::quadratic(a)
}

/// `sum_{i<n} (1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2`, minimum 0 at all-ones.
pub fn make_rosenbrock(n: usize) -> Result<Objective> {
    if n < 2 {
        return Err(Error::invalid(format!("rosenbrock needs n >= 2, got {n}")));
    }
    Ok(Objective {
        dimension: n,
        kind: Kind::Rosenbrock,
        name: "rosenbrock",
        optimum_value: Some(0.0),
        optimum_point: Some(vec![1.0; n]),
        convexity: None,
    })
}
