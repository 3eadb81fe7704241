//! Binary classifiers with a shared fit/predict contract.
//!
//! All four families return a score in `[0, 1]` for the hateful class and
//! predict hateful when the score is at least 0.5. Fitting is a pure
//! function of the spec (seed included), the rows and the labels.

mod boost;
mod forest;
mod linear;
mod persist;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::FeatureVector;

pub use boost::BoostedTrees;
pub use forest::Forest;
pub use linear::LinearModel;
pub use persist::{load_model, save_model, PersistError, FORMAT_TAG, FORMAT_VERSION};
pub use tree::{Node, Tree};

/// Scores at or above this are predicted hateful.
pub const DECISION_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    /// Logistic regression.
    Lgr,
    /// Linear SVM.
    Svm,
    /// Random forest.
    Rforest,
    /// Gradient boosted trees on log loss.
    Gbt,
}

impl ModelFamily {
    /// Report order.
    pub const ALL: [ModelFamily; 4] = [Self::Lgr, Self::Rforest, Self::Svm, Self::Gbt];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lgr => "lgr",
            Self::Svm => "svm",
            Self::Rforest => "rforest",
            Self::Gbt => "gbt",
        }
    }

    pub fn is_tree_based(self) -> bool {
        matches!(self, Self::Rforest | Self::Gbt)
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model family `{0}`")]
pub struct UnknownModel(pub String);

impl FromStr for ModelFamily {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lgr" => Ok(Self::Lgr),
            "svm" => Ok(Self::Svm),
            "rforest" => Ok(Self::Rforest),
            "gbt" | "xgb" | "xgb-style-gbt" => Ok(Self::Gbt),
            other => Err(UnknownModel(other.to_string())),
        }
    }
}

/// Model family plus hyperparameters. Fields not used by a family are
/// ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Gradient steps for the linear families.
    pub max_iter: usize,
    /// Step size (linear) or shrinkage (gbt).
    pub learning_rate: f64,
    /// L2 strength on weights (linear, bias excluded) or leaf-weight L2 (gbt).
    pub regularization: f64,
    /// Trees (rforest) or boosting rounds (gbt).
    pub tree_count: usize,
    pub max_depth: usize,
    /// Row fraction per boosting round.
    pub subsample: f64,
    /// Minimum hessian sum per gbt child.
    pub min_child_weight: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        let base = ModelSpec {
            family,
            max_iter: 1000,
            learning_rate: 0.1,
            regularization: 0.0,
            tree_count: 100,
            max_depth: 8,
            subsample: 1.0,
            min_child_weight: 1.0,
            seed: 0,
        };
        match family {
            ModelFamily::Lgr | ModelFamily::Rforest => base,
            ModelFamily::Svm => ModelSpec {
                regularization: 1e-3,
                ..base
            },
            ModelFamily::Gbt => ModelSpec {
                max_depth: 3,
                regularization: 1.0,
                ..base
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |what: &str| Err(ClassifierError::InvalidSpec(what.to_string()));
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        if self.tree_count < 1 {
            return bad("tree_count must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return bad("regularization must be non-negative");
        }
        if self.max_depth < 1 {
            return bad("max_depth must be at least 1");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if self.min_child_weight.is_nan() || self.min_child_weight < 0.0 {
            return bad("min_child_weight must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training labels contain a single class")]
    SingleClassTrainingSet,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Linear(LinearModel),
    Forest(Forest),
    Boosted(BoostedTrees),
}

impl TrainedModel {
    pub fn family(&self) -> ModelFamily {
        match self {
            Self::Linear(m) => m.family,
            Self::Forest(_) => ModelFamily::Rforest,
            Self::Boosted(_) => ModelFamily::Gbt,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Linear(m) => m.weights.len(),
            Self::Forest(m) => m.dimension,
            Self::Boosted(m) => m.dimension,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), ClassifierError> {
        if x.len() != self.dimension() {
            return Err(ClassifierError::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Probability-like score for the hateful class.
    pub fn predict_score(&self, x: &[f64]) -> Result<f64, ClassifierError> {
        self.check_dim(x)?;
        Ok(match self {
            Self::Linear(m) => m.score(x),
            Self::Forest(m) => m.score(x),
            Self::Boosted(m) => m.score(x),
        })
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool, ClassifierError> {
        self.predict_score(x).map(score_to_label)
    }
}

pub fn score_to_label(score: f64) -> bool {
    score >= DECISION_THRESHOLD
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Indices of columns that take more than one value over `rows`.
pub(crate) fn varying_columns(rows: &[FeatureVector]) -> Vec<usize> {
    let dim = rows.first().map_or(0, |r| r.len());
    (0..dim)
        .filter(|&j| {
            let first = rows[0][j];
            rows.iter().any(|r| r[j] != first)
        })
        .collect()
}

fn check_training_set(rows: &[FeatureVector], labels: &[bool]) -> Result<usize, ClassifierError> {
    if rows.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if rows.len() != labels.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: rows.len(),
            actual: labels.len(),
        });
    }
    let dim = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != dim) {
        return Err(ClassifierError::DimensionMismatch {
            expected: dim,
            actual: r.len(),
        });
    }
    if labels.iter().all(|&y| y) || labels.iter().all(|&y| !y) {
        return Err(ClassifierError::SingleClassTrainingSet);
    }
    Ok(dim)
}

/// Fits a model. Deterministic in `(spec, rows, labels)`.
pub fn fit(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool]) -> Result<TrainedModel, ClassifierError> {
    spec.validate()?;
    let dim = check_training_set(rows, labels)?;
    Ok(match spec.family {
        ModelFamily::Lgr => TrainedModel::Linear(linear::fit_logistic(spec, rows, labels, dim)),
        ModelFamily::Svm => TrainedModel::Linear(linear::fit_svm(spec, rows, labels, dim)),
        ModelFamily::Rforest => TrainedModel::Forest(forest::fit(spec, rows, labels, dim)),
        ModelFamily::Gbt => TrainedModel::Boosted(boost::fit(spec, rows, labels, dim)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[&[f64]]) -> Vec<FeatureVector> {
        v.iter().map(|r| FeatureVector(r.to_vec())).collect()
    }

    #[test]
    fn lgr_separable_pair() {
        let m = fit(&ModelSpec::new(ModelFamily::Lgr), &rows(&[&[0.0], &[1.0]]), &[false, true]).unwrap();
        assert!(m.predict(&[1.0]).unwrap());
        assert!(!m.predict(&[0.0]).unwrap());
    }

    #[test]
    fn lgr_constant_feature_matches_class_rate() {
        // Intercept-only MLE: sigmoid(b) equals the positive rate, 3/4.
        let x = rows(&[&[1.0], &[1.0], &[1.0], &[1.0]]);
        let m = fit(&ModelSpec::new(ModelFamily::Lgr), &x, &[true, true, true, false]).unwrap();
        let closed_form = 3.0 / 4.0;
        assert!((m.predict_score(&[1.0]).unwrap() - closed_form).abs() < 1e-3);
    }

    #[test]
    fn fit_is_bitwise_deterministic() {
        let x = rows(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]]);
        let y = [false, true, true, false, false];
        for family in ModelFamily::ALL {
            let spec = ModelSpec::new(family);
            assert_eq!(fit(&spec, &x, &y).unwrap(), fit(&spec, &x, &y).unwrap(), "{family}");
        }
    }

    #[test]
    fn zero_models_score_one_half() {
        let lin = TrainedModel::Linear(LinearModel {
            family: ModelFamily::Lgr,
            weights: vec![0.0; 3],
            bias: 0.0,
        });
        assert_eq!(lin.predict_score(&[4.0, -2.0, 9.0]).unwrap(), 0.5);
        let gbt = TrainedModel::Boosted(BoostedTrees {
            dimension: 2,
            base_margin: 0.0,
            learning_rate: 0.1,
            trees: vec![],
        });
        assert_eq!(gbt.predict_score(&[1.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn unanimous_forest_scores_one() {
        let forest = TrainedModel::Forest(Forest {
            dimension: 1,
            trees: vec![Tree::leaf(1.0), Tree::leaf(0.75), Tree::leaf(0.5)],
        });
        assert_eq!(forest.predict_score(&[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn threshold_tie_is_positive() {
        assert!(score_to_label(0.75));
        assert!(score_to_label(0.5));
        assert!(!score_to_label(0.25));
    }

    #[test]
    fn training_set_errors() {
        let spec = ModelSpec::new(ModelFamily::Lgr);
        assert_eq!(fit(&spec, &[], &[]), Err(ClassifierError::EmptyTrainingSet));
        assert_eq!(
            fit(&spec, &rows(&[&[0.0], &[1.0]]), &[true, true]),
            Err(ClassifierError::SingleClassTrainingSet)
        );
        assert!(matches!(
            fit(&spec, &rows(&[&[0.0], &[1.0, 2.0]]), &[true, false]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
        let m = fit(&spec, &rows(&[&[0.0], &[1.0]]), &[false, true]).unwrap();
        assert_eq!(
            m.predict(&[0.0, 1.0]),
            Err(ClassifierError::DimensionMismatch { expected: 1, actual: 2 })
        );
    }

    #[test]
    fn spec_validation() {
        let mut spec = ModelSpec::new(ModelFamily::Gbt);
        spec.tree_count = 0;
        assert!(matches!(spec.validate(), Err(ClassifierError::InvalidSpec(_))));
        let mut spec = ModelSpec::new(ModelFamily::Lgr);
        spec.learning_rate = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn model_family_aliases() {
        assert_eq!("xgb".parse::<ModelFamily>().unwrap(), ModelFamily::Gbt);
        assert_eq!("xgb-style-gbt".parse::<ModelFamily>().unwrap(), ModelFamily::Gbt);
        assert!("knn".parse::<ModelFamily>().is_err());
    }
}
