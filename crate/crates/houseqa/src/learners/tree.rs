//! CART machinery shared by the decision tree, the random forest, and (in
//! regression form) the boosted trees.
//!
//! Split statistics are aggregated per distinct feature value before any
//! cut is scored, and Gini stats are pure integer counts. Together with the
//! (lower feature, lower threshold) tie rule this makes retraining exactly
//! mirror-symmetric when a binary column is inverted: the same tree comes
//! back with left/right swapped, bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gini impurity of a binary label distribution: 1 - p0^2 - p1^2.
pub fn gini(count0: usize, count1: usize) -> Result<f64> {
    let n = count0 + count1;
    if n == 0 {
        return Err(Error::EmptyInput("gini of zero counts"));
    }
    let p0 = count0 as f64 / n as f64;
    let p1 = count1 as f64 / n as f64;
    Ok(1.0 - p0 * p0 - p1 * p1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Columnar view of a training set used by the tree builders.
pub(crate) struct TreeData<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [u8],
}

impl TreeData<'_> {
    fn counts(&self, indices: &[usize]) -> (usize, usize) {
        let ones = indices.iter().filter(|&&i| self.labels[i] == 1).count();
        (indices.len() - ones, ones)
    }
}

/// Scans one feature: groups node rows by distinct value (ascending) and
/// yields `(threshold, left_count0, left_count1)` for every midpoint cut.
fn scan_feature_counts(
    data: &TreeData,
    indices: &[usize],
    feature: usize,
) -> Vec<(f64, usize, usize)> {
    let mut vals: Vec<(f64, u8)> = indices
        .iter()
        .map(|&i| (data.rows[i][feature], data.labels[i]))
        .collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

    let mut cuts = Vec::new();
    let mut left0 = 0usize;
    let mut left1 = 0usize;
    let mut i = 0;
    while i < vals.len() {
        let v = vals[i].0;
        let mut g0 = 0usize;
        let mut g1 = 0usize;
        while i < vals.len() && vals[i].0 == v {
            if vals[i].1 == 1 {
                g1 += 1;
            } else {
                g0 += 1;
            }
            i += 1;
        }
        left0 += g0;
        left1 += g1;
        if i < vals.len() {
            let threshold = (v + vals[i].0) / 2.0;
            cuts.push((threshold, left0, left1));
        }
    }
    cuts
}

/// Best split of the node rows over `candidate_features`: the (feature,
/// threshold) pair maximizing weighted Gini decrease, ties broken by lower
/// feature index then lower threshold.
///
/// With `allow_zero_decrease` a valid partition is returned even when no
/// cut improves impurity (needed to carve XOR-like structure); the public
/// contract ([`best_split`]) filters those out.
pub(crate) fn best_split_impl(
    data: &TreeData,
    indices: &[usize],
    candidate_features: &[usize],
    allow_zero_decrease: bool,
) -> Option<SplitChoice> {
    let (c0, c1) = data.counts(indices);
    if c0 == 0 || c1 == 0 {
        return None;
    }
    let n = indices.len() as f64;
    let parent = gini(c0, c1).expect("node is nonempty");

    let mut best: Option<SplitChoice> = None;
    for &feature in candidate_features {
        for (threshold, l0, l1) in scan_feature_counts(data, indices, feature) {
            let (r0, r1) = (c0 - l0, c1 - l1);
            let nl = (l0 + l1) as f64;
            let nr = (r0 + r1) as f64;
            let weighted = nl * gini(l0, l1).expect("left nonempty")
                + nr * gini(r0, r1).expect("right nonempty");
            let decrease = parent - weighted / n;
            // Strict improvement keeps the first (lowest feature, lowest
            // threshold) candidate on ties.
            if best.map(|b| decrease > b.decrease).unwrap_or(true) {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    decrease,
                });
            }
        }
    }
    match best {
        Some(b) if allow_zero_decrease || b.decrease > 1e-12 => Some(b),
        _ => None,
    }
}

/// Public split search: `None` when no cut reduces impurity.
pub fn best_split(
    rows: &[Vec<f64>],
    labels: &[u8],
    candidate_features: &[usize],
) -> Option<SplitChoice> {
    if rows.is_empty() {
        return None;
    }
    let data = TreeData { rows, labels };
    let indices: Vec<usize> = (0..rows.len()).collect();
    best_split_impl(&data, &indices, candidate_features, false)
}

/// One node of a fitted classification tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        label: u8,
        /// Fraction of training rows at this leaf with label 1.
        prob_one: f64,
        samples: usize,
        gini: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        samples: usize,
        gini: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf_for(&self, x: &[f64]) -> (&u8, f64) {
        match self {
            TreeNode::Leaf {
                label, prob_one, ..
            } => (label, *prob_one),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                if x[*feature] <= *threshold {
                    left.leaf_for(x)
                } else {
                    right.leaf_for(x)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Root split feature, if the tree is not a stump.
    pub fn root_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split { feature, .. } => Some(*feature),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

/// Picks the candidate features for one node; the forest passes a sampler,
/// the plain tree uses every feature.
pub(crate) trait FeaturePicker {
    fn pick(&self, node_indices: &[usize], num_features: usize) -> Vec<usize>;
}

pub(crate) struct AllFeatures;

impl FeaturePicker for AllFeatures {
    fn pick(&self, _node: &[usize], num_features: usize) -> Vec<usize> {
        (0..num_features).collect()
    }
}

/// Recursive CART. Splits while the node is impure (even at zero Gini
/// decrease, so structure like XOR still gets carved), stopping at
/// max_depth, min_samples_split, purity, or no valid cut. Leaves take the
/// majority label, ties to 0.
pub(crate) fn build_cart(
    data: &TreeData,
    indices: &[usize],
    depth: usize,
    params: &CartParams,
    picker: &dyn FeaturePicker,
    num_features: usize,
) -> TreeNode {
    let (c0, c1) = data.counts(indices);
    let node_gini = gini(c0, c1).expect("node is nonempty");
    let make_leaf = || TreeNode::Leaf {
        label: u8::from(c1 > c0),
        prob_one: c1 as f64 / (c0 + c1) as f64,
        samples: indices.len(),
        gini: node_gini,
    };

    let depth_ok = params.max_depth.map(|m| depth < m).unwrap_or(true);
    if c0 == 0 || c1 == 0 || !depth_ok || indices.len() < params.min_samples_split {
        return make_leaf();
    }
    let candidates = picker.pick(indices, num_features);
    let Some(split) = best_split_impl(data, indices, &candidates, true) else {
        return make_leaf();
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| data.rows[i][split.feature] <= split.threshold);
    let left = build_cart(data, &left_idx, depth + 1, params, picker, num_features);
    let right = build_cart(data, &right_idx, depth + 1, params, picker, num_features);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        samples: indices.len(),
        gini: node_gini,
        left: Box::new(left),
        right: Box::new(right),
    }
}
