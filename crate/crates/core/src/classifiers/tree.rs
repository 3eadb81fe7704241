//! Depth-limited binary decision trees shared by the forest and the booster.
//!
//! Split search scans candidate features in ascending index order and
//! thresholds in ascending order, replacing the incumbent only on a strictly
//! larger gain. Equal gains therefore resolve to the lowest feature index,
//! then the lowest threshold. Columns with a single value in a node offer no
//! threshold and are never chosen.

use serde::{Deserialize, Serialize};

use crate::encoding::FeatureVector;

/// Gains within this margin of the incumbent count as ties.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Node {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Flat node arena, root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Tree {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, idx: usize) -> usize {
            match t.nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(t, left).max(walk(t, right)),
            }
        }
        walk(self, 0)
    }
}

/// Additive per-row sufficient statistics of a node.
pub(crate) trait NodeStats: Copy + Default {
    fn add(&mut self, other: &Self);
    fn sub(&self, other: &Self) -> Self;
}

/// Scoring rules for a tree learner.
pub(crate) trait Criterion {
    type Stats: NodeStats;

    fn row_stats(&self, row: usize) -> Self::Stats;

    /// `None` when the split violates a child constraint.
    fn gain(&self, parent: &Self::Stats, left: &Self::Stats, right: &Self::Stats) -> Option<f64>;

    fn leaf_value(&self, stats: &Self::Stats) -> f64;

    /// Nodes that should not be split regardless of gain.
    fn is_terminal(&self, stats: &Self::Stats, n_rows: usize) -> bool;

    /// Candidate features for the next split, ascending.
    fn candidate_features(&mut self) -> Vec<usize>;
}

struct Split {
    feature: usize,
    threshold: f64,
}

fn total<C: Criterion>(crit: &C, rows: &[usize]) -> C::Stats {
    let mut s = C::Stats::default();
    for &r in rows {
        s.add(&crit.row_stats(r));
    }
    s
}

fn best_split<C: Criterion>(crit: &C, x: &[FeatureVector], rows: &[usize], features: &[usize], parent: &C::Stats) -> Option<Split> {
    let mut best: Option<(f64, Split)> = None;
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
    for &f in features {
        order.clear();
        order.extend(rows.iter().map(|&r| (x[r][f], r)));
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut left = C::Stats::default();
        for i in 0..order.len() - 1 {
            left.add(&crit.row_stats(order[i].1));
            let (v, next) = (order[i].0, order[i + 1].0);
            if v == next {
                continue;
            }
            let right = parent.sub(&left);
            let Some(gain) = crit.gain(parent, &left, &right) else {
                continue;
            };
            let incumbent = best.as_ref().map_or(GAIN_EPSILON, |(g, _)| g + GAIN_EPSILON);
            if gain > incumbent {
                best = Some((
                    gain,
                    Split {
                        feature: f,
                        threshold: v + (next - v) / 2.0,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Grows a tree over `rows` (indices into `x`, repeats allowed) depth-first,
/// left child before right.
pub(crate) fn grow<C: Criterion>(crit: &mut C, x: &[FeatureVector], rows: Vec<usize>, max_depth: usize) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    grow_node(crit, x, rows, 0, max_depth, &mut tree);
    tree
}

fn grow_node<C: Criterion>(
    crit: &mut C,
    x: &[FeatureVector],
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    tree: &mut Tree,
) -> usize {
    let idx = tree.nodes.len();
    let stats = total(crit, &rows);
    tree.nodes.push(Node::Leaf {
        value: crit.leaf_value(&stats),
    });
    if depth >= max_depth || rows.len() < 2 || crit.is_terminal(&stats, rows.len()) {
        return idx;
    }
    let features = crit.candidate_features();
    let Some(split) = best_split(crit, x, &rows, &features, &stats) else {
        return idx;
    };
    let (l_rows, r_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x[r][split.feature] <= split.threshold);
    let left = grow_node(crit, x, l_rows, depth + 1, max_depth, tree);
    let right = grow_node(crit, x, r_rows, depth + 1, max_depth, tree);
    tree.nodes[idx] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    idx
}
