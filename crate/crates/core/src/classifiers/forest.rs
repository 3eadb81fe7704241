//! Bagged gini trees with per-split feature subsampling.
//!
//! Tree `t` draws its bootstrap sample and feature subsets from a ChaCha
//! stream keyed by `(seed, t)`, so trees can be grown in any order or in
//! parallel with identical results. Features are sampled from the columns
//! that vary over the training rows.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Criterion, NodeStats, Tree};
use super::{score_to_label, varying_columns, ModelSpec};
use crate::encoding::FeatureVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub dimension: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Fraction of trees whose leaf votes hateful.
    pub(crate) fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| score_to_label(t.predict(x))).count();
        votes as f64 / self.trees.len() as f64
    }
}

#[derive(Clone, Copy, Default)]
pub(crate) struct ClassCounts {
    total: u64,
    positive: u64,
}

impl NodeStats for ClassCounts {
    fn add(&mut self, o: &Self) {
        self.total += o.total;
        self.positive += o.positive;
    }

    fn sub(&self, o: &Self) -> Self {
        ClassCounts {
            total: self.total - o.total,
            positive: self.positive - o.positive,
        }
    }
}

fn gini(c: &ClassCounts) -> f64 {
    if c.total == 0 {
        return 0.0;
    }
    let p = c.positive as f64 / c.total as f64;
    2.0 * p * (1.0 - p)
}

struct Gini<'a> {
    labels: &'a [bool],
    pool: &'a [usize],
    per_split: usize,
    rng: ChaCha8Rng,
}

impl Criterion for Gini<'_> {
    type Stats = ClassCounts;

    fn row_stats(&self, row: usize) -> ClassCounts {
        ClassCounts {
            total: 1,
            positive: self.labels[row] as u64,
        }
    }

    fn gain(&self, parent: &ClassCounts, left: &ClassCounts, right: &ClassCounts) -> Option<f64> {
        if left.total == 0 || right.total == 0 {
            return None;
        }
        let n = parent.total as f64;
        let children = (left.total as f64 * gini(left) + right.total as f64 * gini(right)) / n;
        Some(gini(parent) - children)
    }

    fn leaf_value(&self, s: &ClassCounts) -> f64 {
        s.positive as f64 / s.total as f64
    }

    fn is_terminal(&self, s: &ClassCounts, _: usize) -> bool {
        s.positive == 0 || s.positive == s.total
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let mut picked: Vec<usize> = index::sample(&mut self.rng, self.pool.len(), self.per_split)
            .into_iter()
            .map(|i| self.pool[i])
            .collect();
        picked.sort_unstable();
        picked
    }
}

pub(crate) fn tree_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn fit(spec: &ModelSpec, rows: &[FeatureVector], labels: &[bool], dim: usize) -> Forest {
    let pool = varying_columns(rows);
    let per_split = ((pool.len() as f64).sqrt().floor() as usize).max(1).min(pool.len());
    let n = rows.len();
    let trees = (0..spec.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(spec.seed, t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut crit = Gini {
                labels,
                pool: &pool,
                per_split,
                rng,
            };
            grow(&mut crit, rows, sample, spec.max_depth)
        })
        .collect();
    Forest { dimension: dim, trees }
}
