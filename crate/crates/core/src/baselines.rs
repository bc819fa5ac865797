//! Classical polynomial regression baselines: linear, interactions,
//! pure-quadratic, and quadratic term sets fitted by least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataio::Dataset;
use crate::fitting::{self, FitError, FitMetrics};

/// The four regression families. Inputs are used unscaled; least squares
/// is affine-equivariant, so the fit quality is unaffected and the
/// coefficients stay interpretable in natural units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Linear,
    Interactions,
    PureQuadratic,
    Quadratic,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::Linear,
        BaselineKind::Interactions,
        BaselineKind::PureQuadratic,
        BaselineKind::Quadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Linear => "Linear",
            BaselineKind::Interactions => "Interactions",
            BaselineKind::PureQuadratic => "Pure quadratic",
            BaselineKind::Quadratic => "Quadratic",
        }
    }

    pub fn characteristics(self) -> &'static str {
        match self {
            BaselineKind::Linear => "intercept and linear terms",
            BaselineKind::Interactions => {
                "intercept, linear terms and all products of pairs of distinct predictors"
            }
            BaselineKind::PureQuadratic => "intercept, linear terms, and squared terms",
            BaselineKind::Quadratic => "intercept, linear terms, interactions, and squared terms",
        }
    }

    fn includes_interactions(self) -> bool {
        matches!(self, BaselineKind::Interactions | BaselineKind::Quadratic)
    }

    fn includes_squares(self) -> bool {
        matches!(self, BaselineKind::PureQuadratic | BaselineKind::Quadratic)
    }

    /// Number of design columns for `d` predictors.
    pub fn term_count(self, d: usize) -> usize {
        let mut count = 1 + d;
        if self.includes_interactions() {
            count += d * (d - 1) / 2;
        }
        if self.includes_squares() {
            count += d;
        }
        count
    }
}

/// A fitted baseline: coefficients in design-column order plus
/// human-readable term descriptors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineModel {
    pub kind: BaselineKind,
    pub coefficients: Vec<f64>,
    pub terms: Vec<String>,
}

/// Term descriptors in design-column order: intercept, linear terms,
/// pair products (i < j, lexicographic), then squares.
pub fn term_descriptors(names: &[String], kind: BaselineKind) -> Vec<String> {
    let mut terms = vec![String::from("1")];
    terms.extend(names.iter().cloned());
    if kind.includes_interactions() {
        for i in 0..names.len() {
            for j in (i + 1)..names.len() {
                terms.push(format!("{}*{}", names[i], names[j]));
            }
        }
    }
    if kind.includes_squares() {
        for name in names {
            terms.push(format!("{name}^2"));
        }
    }
    terms
}

fn design_columns(columns: &[Vec<f64>], kind: BaselineKind) -> Vec<Vec<f64>> {
    let n = columns[0].len();
    let d = columns.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(kind.term_count(d));
    cols.push(vec![1.0; n]);
    for col in columns {
        cols.push(col.clone());
    }
    if kind.includes_interactions() {
        for i in 0..d {
            for j in (i + 1)..d {
                cols.push(
                    columns[i]
                        .iter()
                        .zip(columns[j].iter())
                        .map(|(a, b)| a * b)
                        .collect(),
                );
            }
        }
    }
    if kind.includes_squares() {
        for col in columns {
            cols.push(col.iter().map(|v| v * v).collect());
        }
    }
    cols
}

/// Builds the design matrix for a dataset and term family. Column order is
/// intercept, linear, pairs (i < j) in lexicographic order, then squares.
pub fn build_design(dataset: &Dataset, kind: BaselineKind) -> DMatrix<f64> {
    let cols = design_columns(dataset.input_columns(), kind);
    let n = dataset.n_rows();
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Fits a baseline by least squares and scores it on the same dataset,
/// mirroring the whole-dataset training protocol of the reference
/// comparison.
pub fn fit_baseline(
    dataset: &Dataset,
    kind: BaselineKind,
) -> Result<(BaselineModel, FitMetrics), FitError> {
    let design = build_design(dataset, kind);
    let y = DVector::from_column_slice(dataset.target());
    let weights = fitting::least_squares(&design, &y)?;
    let mut coefficients = vec![weights.w0];
    coefficients.extend_from_slice(&weights.w);
    let model = BaselineModel {
        kind,
        coefficients,
        terms: term_descriptors(dataset.input_names(), kind),
    };
    let yhat = predict_baseline(&model, dataset);
    let metrics = fitting::fit_metrics(dataset.target(), &yhat)?;
    Ok((model, metrics))
}

/// Applies a fitted baseline to a dataset.
pub fn predict_baseline(model: &BaselineModel, dataset: &Dataset) -> Vec<f64> {
    let design = build_design(dataset, model.kind);
    assert_eq!(
        design.ncols(),
        model.coefficients.len(),
        "coefficient count does not match design"
    );
    let fitted = design * DVector::from_column_slice(&model.coefficients);
    fitted.iter().copied().collect()
}
