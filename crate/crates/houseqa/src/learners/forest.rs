//! Random forest: bootstrap-sampled CART trees with per-split feature
//! subsampling, majority vote across trees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng;

use super::tree::{build_cart, CartParams, FeaturePicker, TreeData, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for RfParams {
    fn default() -> Self {
        RfParams {
            n_trees: 1000,
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub arity: usize,
}

/// Per-split feature sampler. The stream is keyed by (tree seed, hash of the
/// node's row multiset) rather than by visit order, so the identical node in
/// a retrain with a mirrored binary column draws the identical candidates.
struct SampledFeatures {
    tree_seed: u64,
    k: usize,
}

impl FeaturePicker for SampledFeatures {
    fn pick(&self, node_indices: &[usize], num_features: usize) -> Vec<usize> {
        let mut draws = rng::stream(
            self.tree_seed,
            &[0x6665_6174, rng::hash_indices(node_indices)],
        );
        let mut pool: Vec<usize> = (0..num_features).collect();
        let k = self.k.min(num_features);
        for i in 0..k {
            let j = draws.gen_range(i..num_features);
            pool.swap(i, j);
        }
        let mut chosen = pool[..k].to_vec();
        chosen.sort_unstable();
        chosen
    }
}

/// Trains trees in parallel; per-tree seeds are derived from `seed`, so the
/// result is identical to a serial run.
pub(crate) fn fit_forest(
    rows: &[Vec<f64>],
    labels: &[u8],
    params: &RfParams,
    seed: u64,
) -> ForestModel {
    let arity = rows.first().map(|r| r.len()).unwrap_or(0);
    let k = (arity as f64).sqrt().ceil() as usize;
    let n = rows.len();
    let cart = CartParams {
        max_depth: params.max_depth,
        min_samples_split: params.min_samples_split,
    };
    let trees: Vec<TreeNode> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let tree_seed = rng::mix(seed, &[0x7472_6565, t as u64]);
            let mut draws = rng::stream(tree_seed, &[0x626f_6f74]);
            let bootstrap: Vec<usize> = (0..n).map(|_| draws.gen_range(0..n)).collect();
            let picker = SampledFeatures { tree_seed, k };
            let data = TreeData { rows, labels };
            build_cart(&data, &bootstrap, 0, &cart, &picker, arity)
        })
        .collect();
    ForestModel { trees, arity }
}

impl ForestModel {
    /// Fraction of trees voting 1.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let ones = self
            .trees
            .iter()
            .filter(|t| *t.leaf_for(x).0 == 1)
            .count();
        ones as f64 / self.trees.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<u8>) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 5) as f64, f64::from(i % 2 == 0), (i % 3) as f64])
            .collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 2 == 0)).collect();
        (rows, labels)
    }

    #[test]
    fn forest_learns_an_easy_rule_and_is_deterministic() {
        let (rows, labels) = toy();
        let params = RfParams {
            n_trees: 31,
            ..Default::default()
        };
        let a = fit_forest(&rows, &labels, &params, 7);
        let b = fit_forest(&rows, &labels, &params, 7);
        assert_eq!(a, b);
        for (x, &y) in rows.iter().zip(&labels) {
            assert_eq!(u8::from(a.predict_proba(x) >= 0.5), y);
        }
    }

    #[test]
    fn parallel_equals_serial() {
        let (rows, labels) = toy();
        let params = RfParams {
            n_trees: 16,
            ..Default::default()
        };
        let parallel = fit_forest(&rows, &labels, &params, 3);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = pool.install(|| fit_forest(&rows, &labels, &params, 3));
        assert_eq!(parallel, serial);
    }
}
