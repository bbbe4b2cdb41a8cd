//! Gradient-boosted regression trees on logistic loss with second-order
//! (Newton) leaf weights and L2-regularized gains.
//!
//! Split gains are scored from per-value-group gradient/hessian sums, so a
//! retrain with one binary column inverted reproduces the mirrored trees
//! exactly (see the note in `tree.rs`).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RegNode {
    Leaf {
        weight: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RegNode>,
        right: Box<RegNode>,
    },
}

impl RegNode {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            RegNode::Leaf { weight } => *weight,
            RegNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.value(x)
                } else {
                    right.value(x)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_score: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegNode>,
    pub arity: usize,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Per-sample logistic loss on the logit scale.
pub(crate) fn logistic_loss(logit: f64, y: f64) -> f64 {
    let p = sigmoid(logit).clamp(1e-12, 1.0 - 1e-12);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// First and second derivatives of the logistic loss wrt the logit; these
/// are the per-round gradients boosted against.
pub(crate) fn logistic_grad_hess(logit: f64, y: f64) -> (f64, f64) {
    let p = sigmoid(logit);
    (p - y, p * (1.0 - p))
}

struct GradData<'a> {
    rows: &'a [Vec<f64>],
    grad: &'a [f64],
    hess: &'a [f64],
}

fn node_sums(data: &GradData, indices: &[usize]) -> (f64, f64) {
    let mut g = 0.0;
    let mut h = 0.0;
    for &i in indices {
        g += data.grad[i];
        h += data.hess[i];
    }
    (g, h)
}

fn leaf_weight(g: f64, h: f64, lambda: f64) -> f64 {
    -g / (h + lambda)
}

fn gain_term(g: f64, h: f64, lambda: f64) -> f64 {
    g * g / (h + lambda)
}

/// Best split by second-order gain. Group sums per distinct value are kept
/// raw (summed in node row order) and only combined across groups at each
/// cut, in ascending then descending passes.
fn best_reg_split(
    data: &GradData,
    indices: &[usize],
    lambda: f64,
    parent_g: f64,
    parent_h: f64,
) -> Option<(usize, f64, f64)> {
    let arity = data.rows[indices[0]].len();
    let parent_term = gain_term(parent_g, parent_h, lambda);

    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..arity {
        let mut vals: Vec<(f64, f64, f64)> = indices
            .iter()
            .map(|&i| (data.rows[i][feature], data.grad[i], data.hess[i]))
            .collect();
        vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));

        // Per-group sums in sorted (stable) order.
        let mut groups: Vec<(f64, f64, f64)> = Vec::new();
        let mut i = 0;
        while i < vals.len() {
            let v = vals[i].0;
            let mut g = 0.0;
            let mut h = 0.0;
            while i < vals.len() && vals[i].0 == v {
                g += vals[i].1;
                h += vals[i].2;
                i += 1;
            }
            groups.push((v, g, h));
        }
        if groups.len() < 2 {
            continue;
        }

        // Prefix sums ascending, suffix sums descending: each side of a cut
        // is an independent accumulation.
        let mut prefix = Vec::with_capacity(groups.len());
        let mut acc = (0.0f64, 0.0f64);
        for &(_, g, h) in &groups {
            acc = (acc.0 + g, acc.1 + h);
            prefix.push(acc);
        }
        let mut suffix = vec![(0.0f64, 0.0f64); groups.len()];
        let mut acc = (0.0f64, 0.0f64);
        for (k, &(_, g, h)) in groups.iter().enumerate().rev() {
            acc = (acc.0 + g, acc.1 + h);
            suffix[k] = acc;
        }

        for cut in 0..groups.len() - 1 {
            let threshold = (groups[cut].0 + groups[cut + 1].0) / 2.0;
            let (gl, hl) = prefix[cut];
            let (gr, hr) = suffix[cut + 1];
            let gain = gain_term(gl, hl, lambda) + gain_term(gr, hr, lambda) - parent_term;
            if best.map(|(_, _, bg)| gain > bg).unwrap_or(true) {
                best = Some((feature, threshold, gain));
            }
        }
    }
    best.filter(|&(_, _, gain)| gain > 1e-12)
}

fn build_reg_tree(data: &GradData, indices: &[usize], depth: usize, params: &GbtParams) -> RegNode {
    let (g, h) = node_sums(data, indices);
    if depth >= params.max_depth || indices.len() < 2 {
        return RegNode::Leaf {
            weight: leaf_weight(g, h, params.lambda),
        };
    }
    let Some((feature, threshold, _)) = best_reg_split(data, indices, params.lambda, g, h) else {
        return RegNode::Leaf {
            weight: leaf_weight(g, h, params.lambda),
        };
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| data.rows[i][feature] <= threshold);
    RegNode::Split {
        feature,
        threshold,
        left: Box::new(build_reg_tree(data, &left_idx, depth + 1, params)),
        right: Box::new(build_reg_tree(data, &right_idx, depth + 1, params)),
    }
}

pub(crate) fn fit_gbt(rows: &[Vec<f64>], labels: &[u8], params: &GbtParams) -> GbtModel {
    let n = rows.len();
    let arity = rows.first().map(|r| r.len()).unwrap_or(0);
    let mean = labels.iter().map(|&y| y as f64).sum::<f64>() / n as f64;
    let p0 = mean.clamp(1e-6, 1.0 - 1e-6);
    let base_score = (p0 / (1.0 - p0)).ln();

    let mut logits = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.rounds);
    let indices: Vec<usize> = (0..n).collect();
    for _ in 0..params.rounds {
        let mut grad = Vec::with_capacity(n);
        let mut hess = Vec::with_capacity(n);
        for (i, &y) in labels.iter().enumerate() {
            let (g, h) = logistic_grad_hess(logits[i], y as f64);
            grad.push(g);
            hess.push(h);
        }
        let data = GradData {
            rows,
            grad: &grad,
            hess: &hess,
        };
        let tree = build_reg_tree(&data, &indices, 0, params);
        for (i, row) in rows.iter().enumerate() {
            logits[i] += params.learning_rate * tree.value(row);
        }
        trees.push(tree);
    }
    GbtModel {
        base_score,
        learning_rate: params.learning_rate,
        trees,
        arity,
    }
}

impl GbtModel {
    pub fn decision_logit(&self, x: &[f64]) -> f64 {
        let mut z = self.base_score;
        for tree in &self.trees {
            z += self.learning_rate * tree.value(x);
        }
        z
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision_logit(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rounds_predicts_the_base_rate() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let labels = vec![1, 1, 1, 0, 0, 0, 0, 0, 0, 0];
        let params = GbtParams {
            rounds: 0,
            ..Default::default()
        };
        let model = fit_gbt(&rows, &labels, &params);
        for row in &rows {
            assert!((model.predict_proba(row) - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn learns_a_threshold_rule() {
        let rows: Vec<Vec<f64>> = (0..60).map(|i| vec![(i % 6) as f64, 1.0]).collect();
        let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 6 >= 3)).collect();
        let model = fit_gbt(&rows, &labels, &GbtParams::default());
        for (x, &y) in rows.iter().zip(&labels) {
            assert_eq!(u8::from(model.predict_proba(x) >= 0.5), y, "x = {x:?}");
        }
    }

    #[test]
    fn per_round_gradients_match_finite_differences() {
        let eps = 1e-5;
        for (logit, y) in [(0.3, 1.0), (-1.2, 0.0), (2.5, 1.0), (0.0, 0.0)] {
            let (g, h) = logistic_grad_hess(logit, y);
            let num_g =
                (logistic_loss(logit + eps, y) - logistic_loss(logit - eps, y)) / (2.0 * eps);
            let num_h = (logistic_grad_hess(logit + eps, y).0
                - logistic_grad_hess(logit - eps, y).0)
                / (2.0 * eps);
            assert!((g - num_g).abs() / num_g.abs().max(1.0) < 1e-6);
            assert!((h - num_h).abs() / num_h.abs().max(1.0) < 1e-6);
        }
    }
}
