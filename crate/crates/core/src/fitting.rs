//! Least-squares gene weighting and regression quality metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fitted multi-gene weights: a bias term plus one weight per gene column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    /// Bias term (coefficient of the all-ones column).
    pub w0: f64,
    /// One weight per gene, in design-column order.
    pub w: Vec<f64>,
}

impl WeightVector {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Regression quality on one sample: RMSE in target units and the
/// coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub rmse: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FitError {
    /// The decomposition could not produce finite weights.
    #[error("ill-conditioned least-squares system")]
    IllConditioned,
    /// All targets equal: the total sum of squares vanishes.
    #[error("degenerate target: zero variance")]
    DegenerateTarget,
}

/// Iteration cap for the SVD. Evolved genes can produce design columns so
/// badly scaled that the decomposition never converges; such systems are
/// reported as ill-conditioned and the caller assigns the worst fitness.
const SVD_MAX_ITERATIONS: usize = 1024;

/// Minimum-norm least squares via singular value decomposition.
///
/// `design` must carry a leading all-ones column; evolved genes frequently
/// duplicate, so the system is solved rank-tolerantly with the cutoff
/// `max(n, cols) * eps * max_column_norm`.
pub fn least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<WeightVector, FitError> {
    let (n, cols) = design.shape();
    assert!(n >= 1 && cols >= 1, "empty design matrix");
    assert_eq!(n, y.len(), "design/target row mismatch");

    let max_col_norm = (0..cols)
        .map(|j| design.column(j).norm())
        .fold(0.0_f64, f64::max);
    if !max_col_norm.is_finite() {
        return Err(FitError::IllConditioned);
    }
    let tol = n.max(cols) as f64 * f64::EPSILON * max_col_norm;

    let svd = design
        .clone()
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(FitError::IllConditioned)?;
    let solution = svd.solve(y, tol).map_err(|_| FitError::IllConditioned)?;
    if !solution.iter().all(|v| v.is_finite()) {
        return Err(FitError::IllConditioned);
    }
    Ok(WeightVector {
        w0: solution[0],
        w: solution.iter().skip(1).copied().collect(),
    })
}

/// Root mean squared error.
pub fn rmse(y: &[f64], yhat: &[f64]) -> f64 {
    assert_eq!(y.len(), yhat.len(), "length mismatch");
    assert!(!y.is_empty(), "rmse of empty sample");
    let ss: f64 = y
        .iter()
        .zip(yhat.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (ss / y.len() as f64).sqrt()
}

/// Coefficient of determination, with the mean taken over the same sample
/// being scored.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64, FitError> {
    assert_eq!(y.len(), yhat.len(), "length mismatch");
    assert!(y.len() >= 2, "r-squared needs at least two points");
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss_tot == 0.0 {
        return Err(FitError::DegenerateTarget);
    }
    let ss_res: f64 = y
        .iter()
        .zip(yhat.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Convenience wrapper computing both metrics at once.
pub fn fit_metrics(y: &[f64], yhat: &[f64]) -> Result<FitMetrics, FitError> {
    Ok(FitMetrics {
        rmse: rmse(y, yhat),
        r2: r_squared(y, yhat)?,
    })
}
