//! Full-batch gradient training for logistic regression and a linear SVM.
//!
//! Columns that are constant over the training rows are pinned at weight
//! zero: their contribution is indistinguishable from the bias. This makes
//! a design with an extra all-ones column train to exactly the same margin
//! as the design without it.

use serde::{Deserialize, Serialize};

use super::{sigmoid, varying_columns, ModelFamily, ModelSpec};
use crate::encoding::FeatureVector;

const GRADIENT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub family: ModelFamily,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

fn active_margin(weights: &[f64], bias: f64, active: &[usize], row: &[f64]) -> f64 {
    bias + active.iter().map(|&j| weights[j] * row[j]).sum::<f64>()
}

/// Runs `max_iter` steps of `w -= lr * grad`, where `residual` maps a row's
/// (margin, label) to the per-row loss derivative with respect to the margin.
/// Stops early once the full gradient norm drops below the tolerance.
fn descend<F>(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool], dim: usize, residual: F) -> (Vec<f64>, f64)
where
    F: Fn(f64, bool) -> f64,
{
    let active = varying_columns(rows);
    let n = rows.len() as f64;
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let mut grad = vec![0.0; dim];
    for _ in 0..spec.max_iter {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for (row, &y) in rows.iter().zip(labels) {
            let r = residual(active_margin(&weights, bias, &active, row), y);
            if r == 0.0 {
                continue;
            }
            grad_bias += r;
            for &j in &active {
                grad[j] += r * row[j];
            }
        }
        grad_bias /= n;
        let mut norm_sq = grad_bias * grad_bias;
        for &j in &active {
            grad[j] = grad[j] / n + spec.regularization * weights[j];
            norm_sq += grad[j] * grad[j];
        }
        if norm_sq.sqrt() < GRADIENT_TOLERANCE {
            break;
        }
        bias -= spec.learning_rate * grad_bias;
        for &j in &active {
            weights[j] -= spec.learning_rate * grad[j];
        }
    }
    (weights, bias)
}

/// L2-regularized log loss, zero-initialized.
pub(crate) fn fit_logistic(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool], dim: usize) -> LinearModel {
    let (weights, bias) = descend(spec, rows, labels, dim, |margin, y| {
        sigmoid(margin) - if y { 1.0 } else { 0.0 }
    });
    LinearModel {
        family: ModelFamily::Lgr,
        weights,
        bias,
    }
}

/// L2-regularized hinge loss via subgradient steps.
pub(crate) fn fit_svm(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool], dim: usize) -> LinearModel {
    let (weights, bias) = descend(spec, rows, labels, dim, |margin, y| {
        let sign = if y { 1.0 } else { -1.0 };
        if sign * margin < 1.0 {
            -sign
        } else {
            0.0
        }
    });
    LinearModel {
        family: ModelFamily::Svm,
        weights,
        bias,
    }
}
