//! Stratified k-fold splitting and macro-averaged binary metrics.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("k must be at least 2, got {0}")]
    KTooSmall(usize),
    #[error("class {class} has {count} members, fewer than k = {k}")]
    ClassTooSmall { class: &'static str, count: usize, k: usize },
    #[error("prediction and gold lengths differ ({pred} vs {gold})")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("aggregation needs at least 2 folds, got {0}")]
    TooFewFolds(usize),
}

/// Fold index per item.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FoldAssignment {
    k: usize,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, item: usize) -> usize {
        self.folds[item]
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    /// Stable hash of the assignment, for checking that runs share splits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.hash(&mut h);
        h.finish()
    }
}

/// Shuffles each class with its own seeded stream and deals members
/// round-robin into folds. The deal continues across classes, so fold sizes
/// differ by at most one as well as per-class counts.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    if k < 2 {
        return Err(EvalError::KTooSmall(k));
    }
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for (stream, class) in [(0u64, true), (1, false)] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(EvalError::ClassTooSmall {
                class: if class { "hate" } else { "nohate" },
                count: members.len(),
                k,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, folds })
}

/// Binary confusion counts, positive class = hateful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same outcomes seen with the negative class as positive.
    pub fn transposed(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn confusion(pred: &[bool], gold: &[bool]) -> Result<ConfusionMatrix, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let mut cm = ConfusionMatrix::default();
    for (&p, &g) in pred.iter().zip(gold) {
        match (p, g) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 of the positive class; 0/0 is 0.
fn positive_class(cm: &ConfusionMatrix) -> MetricSet {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    MetricSet { precision, recall, f1 }
}

/// Unweighted mean over the two classes of precision, recall and F1.
pub fn macro_metrics(cm: &ConfusionMatrix) -> Result<MetricSet, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let pos = positive_class(cm);
    let neg = positive_class(&cm.transposed());
    Ok(MetricSet {
        precision: (pos.precision + neg.precision) / 2.0,
        recall: (pos.recall + neg.recall) / 2.0,
        f1: (pos.f1 + neg.f1) / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdKind {
    /// Divisor n.
    #[default]
    Population,
    /// Divisor n - 1.
    Sample,
}

fn summarize(values: &[f64], kind: StdKind) -> Summary {
    let n = values.len() as f64;
    // Shifted by the first value so identical inputs give that value back exactly.
    let shift = values[0];
    let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let divisor = match kind {
        StdKind::Population => n,
        StdKind::Sample => n - 1.0,
    };
    Summary {
        mean,
        std: (ss / divisor).sqrt(),
    }
}

pub fn aggregate(per_fold: &[MetricSet], kind: StdKind) -> Result<Aggregate, EvalError> {
    if per_fold.len() < 2 {
        return Err(EvalError::TooFewFolds(per_fold.len()));
    }
    let column = |f: fn(&MetricSet) -> f64| per_fold.iter().map(f).collect::<Vec<_>>();
    Ok(Aggregate {
        precision: summarize(&column(|m| m.precision), kind),
        recall: summarize(&column(|m| m.recall), kind),
        f1: summarize(&column(|m| m.f1), kind),
    })
}
