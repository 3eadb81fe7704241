//! Second-order gradient boosting on log loss.
//!
//! Each round fits a regression tree to the gradient and hessian of the log
//! loss at the current margins, with leaf weights `-G / (H + lambda)`, and
//! adds it scaled by the learning rate.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::forest::tree_rng;
use super::tree::{grow, Criterion, NodeStats, Tree};
use super::{sigmoid, varying_columns, ModelSpec};
use crate::encoding::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedTrees {
    pub dimension: usize,
    pub base_margin: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl BoostedTrees {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.base_margin + self.trees.iter().map(|t| self.learning_rate * t.predict(x)).sum::<f64>()
    }

    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

#[derive(Clone, Copy, Default)]
pub(crate) struct GradHess {
    grad: f64,
    hess: f64,
}

impl NodeStats for GradHess {
    fn add(&mut self, o: &Self) {
        self.grad += o.grad;
        self.hess += o.hess;
    }

    fn sub(&self, o: &Self) -> Self {
        GradHess {
            grad: self.grad - o.grad,
            hess: self.hess - o.hess,
        }
    }
}

struct LogLossGain<'a> {
    stats: &'a [GradHess],
    lambda: f64,
    min_child_weight: f64,
    features: &'a [usize],
}

impl LogLossGain<'_> {
    fn score(&self, s: &GradHess) -> f64 {
        s.grad * s.grad / (s.hess + self.lambda)
    }
}

impl Criterion for LogLossGain<'_> {
    type Stats = GradHess;

    fn row_stats(&self, row: usize) -> GradHess {
        self.stats[row]
    }

    fn gain(&self, parent: &GradHess, left: &GradHess, right: &GradHess) -> Option<f64> {
        if left.hess < self.min_child_weight || right.hess < self.min_child_weight {
            return None;
        }
        Some(0.5 * (self.score(left) + self.score(right) - self.score(parent)))
    }

    fn leaf_value(&self, s: &GradHess) -> f64 {
        -s.grad / (s.hess + self.lambda)
    }

    fn is_terminal(&self, s: &GradHess, _: usize) -> bool {
        s.hess < 2.0 * self.min_child_weight
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        self.features.to_vec()
    }
}

pub(crate) fn fit(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool], dim: usize) -> BoostedTrees {
    let features = varying_columns(rows);
    let n = rows.len();
    let mut model = BoostedTrees {
        dimension: dim,
        base_margin: 0.0,
        learning_rate: spec.learning_rate,
        trees: Vec::with_capacity(spec.tree_count),
    };
    let mut margins = vec![model.base_margin; n];
    let per_round = ((n as f64 * spec.subsample).floor() as usize).clamp(1, n);
    for round in 0..spec.tree_count {
        let stats: Vec<GradHess> = margins
            .iter()
            .zip(labels)
            .map(|(&m, &y)| {
                let p = sigmoid(m);
                GradHess {
                    grad: p - if y { 1.0 } else { 0.0 },
                    hess: (p * (1.0 - p)).max(1e-16),
                }
            })
            .collect();
        let sample: Vec<usize> = if per_round == n {
            (0..n).collect()
        } else {
            let mut rng = tree_rng(spec.seed, round as u64);
            let mut s = index::sample(&mut rng, n, per_round).into_vec();
            s.sort_unstable();
            s
        };
        let mut crit = LogLossGain {
            stats: &stats,
            lambda: spec.regularization,
            min_child_weight: spec.min_child_weight,
            features: &features,
        };
        let tree = grow(&mut crit, rows, sample, spec.max_depth);
        for (m, row) in margins.iter_mut().zip(rows) {
            *m += spec.learning_rate * tree.predict(row);
        }
        model.trees.push(tree);
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::{fit as fit_model, ModelFamily, TrainedModel};

    #[test]
    fn boosting_reduces_training_log_loss() {
        let x: Vec<FeatureVector> = (0..30).map(|i| FeatureVector(vec![(i % 3) as f64, (i % 5) as f64])).collect();
        let y: Vec<bool> = (0..30).map(|i| i % 3 == 0 || i % 5 == 4).collect();
        let log_loss = |m: &TrainedModel| -> f64 {
            x.iter()
                .zip(&y)
                .map(|(r, &t)| {
                    let p = m.predict_score(r).unwrap();
                    -if t { p.ln() } else { (1.0 - p).ln() }
                })
                .sum::<f64>()
                / x.len() as f64
        };
        let mut spec = ModelSpec::new(ModelFamily::Gbt);
        spec.tree_count = 5;
        let short = fit_model(&spec, &x, &y).unwrap();
        spec.tree_count = 100;
        let long = fit_model(&spec, &x, &y).unwrap();
        assert!(log_loss(&short) < std::f64::consts::LN_2);
        assert!(log_loss(&long) < log_loss(&short));
        for (r, &t) in x.iter().zip(&y) {
            assert_eq!(long.predict(r).unwrap(), t);
        }
    }

    #[test]
    fn subsampling_is_seeded() {
        let x: Vec<FeatureVector> = (0..40).map(|i| FeatureVector(vec![(i % 4) as f64, (i % 7) as f64])).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 4 >= 2).collect();
        let mut spec = ModelSpec::new(ModelFamily::Gbt);
        spec.subsample = 0.5;
        let a = fit_model(&spec, &x, &y).unwrap();
        assert_eq!(a, fit_model(&spec, &x, &y).unwrap());
        assert_ne!(a, fit_model(&spec.clone().with_seed(3), &x, &y).unwrap());
    }
}
