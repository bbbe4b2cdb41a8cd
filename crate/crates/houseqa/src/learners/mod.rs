//! The seven classifier families behind the central answer model, all built
//! from scratch: decision tree, random forest, gradient-boosted trees,
//! logistic regression, linear SVM, RBF SVM, and a small neural network.
//!
//! Everything is deterministic given (data, hyperparameters, seed), and
//! models serialize to JSON with exact predict round-trips.

mod forest;
mod gbt;
mod linear;
mod mlp;
mod svm;
mod tree;

pub use forest::{ForestModel, RfParams};
pub use gbt::{GbtModel, GbtParams};
pub use linear::{LinearModel, LinearSvmParams, LrParams, Standardizer};
pub use mlp::{MlpModel, MlpParams};
pub use svm::{RbfSvmModel, RbfSvmParams};
pub use tree::{best_split, gini, CartParams, SplitChoice, TreeNode};

// Shared by in-crate callers that need the loss/gradient internals
// (finite-difference checks in the acceptance suite).
pub(crate) use gbt::{logistic_grad_hess, logistic_loss};
pub(crate) use linear::lr_loss_grad;
pub(crate) use mlp::{mlp_loss_grad, param_count as mlp_param_count};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labeled training rows with a uniform feature arity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new() -> Self {
        Dataset::default()
    }

    pub fn from_rows(rows: Vec<(Vec<f64>, u8)>) -> Result<Self> {
        let mut ds = Dataset::new();
        for (x, y) in rows {
            ds.push(x, y)?;
        }
        Ok(ds)
    }

    pub fn push(&mut self, x: Vec<f64>, y: u8) -> Result<()> {
        if y > 1 {
            return Err(Error::Validation(format!("label {y} is not binary")));
        }
        if let Some(first) = self.rows.first() {
            if first.len() != x.len() {
                return Err(Error::WrongArity {
                    expected: first.len(),
                    got: x.len(),
                });
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite feature value".into()));
        }
        self.rows.push(x);
        self.labels.push(y);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.rows.first().map(|r| r.len()).unwrap_or(0)
    }

    /// Rows at `indices`, as a new dataset.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Copy with column `feature` mapped through `f` (used by permutation
    /// importance and the inversion checks).
    pub fn with_column_mapped(&self, feature: usize, f: impl Fn(f64) -> f64) -> Dataset {
        let mut out = self.clone();
        for row in &mut out.rows {
            row[feature] = f(row[feature]);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CamAlgo {
    Dt,
    Rf,
    Gbt,
    Lr,
    SvmLinear,
    SvmRbf,
    Mlp,
}

impl CamAlgo {
    pub const ALL: [CamAlgo; 7] = [
        CamAlgo::Dt,
        CamAlgo::Rf,
        CamAlgo::Gbt,
        CamAlgo::Lr,
        CamAlgo::SvmLinear,
        CamAlgo::SvmRbf,
        CamAlgo::Mlp,
    ];
}

impl std::fmt::Display for CamAlgo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CamAlgo::Dt => "dt",
            CamAlgo::Rf => "rf",
            CamAlgo::Gbt => "gbt",
            CamAlgo::Lr => "lr",
            CamAlgo::SvmLinear => "svm_linear",
            CamAlgo::SvmRbf => "svm_rbf",
            CamAlgo::Mlp => "mlp",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for CamAlgo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dt" => Ok(CamAlgo::Dt),
            "rf" => Ok(CamAlgo::Rf),
            "gbt" | "xgb" | "xg" => Ok(CamAlgo::Gbt),
            "lr" => Ok(CamAlgo::Lr),
            "svm_linear" | "svm-l" => Ok(CamAlgo::SvmLinear),
            "svm_rbf" | "svm" => Ok(CamAlgo::SvmRbf),
            "mlp" | "nn" => Ok(CamAlgo::Mlp),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Hyperparameters for every family, with pinned reproducible defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CamHyper {
    pub dt: CartParams,
    pub rf: RfParams,
    pub gbt: GbtParams,
    pub lr: LrParams,
    pub svm_linear: LinearSvmParams,
    pub svm_rbf: RbfSvmParams,
    pub mlp: MlpParams,
}

/// A fitted central answer model: algorithm tag plus fitted parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "snake_case")]
pub enum CamModel {
    Dt { tree: TreeNode, arity: usize },
    Rf(ForestModel),
    Gbt(GbtModel),
    Lr(LinearModel),
    SvmLinear(LinearModel),
    SvmRbf { model: RbfSvmModel, arity: usize },
    Mlp { model: MlpModel, arity: usize },
}

impl CamModel {
    pub fn algo(&self) -> CamAlgo {
        match self {
            CamModel::Dt { .. } => CamAlgo::Dt,
            CamModel::Rf(_) => CamAlgo::Rf,
            CamModel::Gbt(_) => CamAlgo::Gbt,
            CamModel::Lr(_) => CamAlgo::Lr,
            CamModel::SvmLinear(_) => CamAlgo::SvmLinear,
            CamModel::SvmRbf { .. } => CamAlgo::SvmRbf,
            CamModel::Mlp { .. } => CamAlgo::Mlp,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            CamModel::Dt { arity, .. } => *arity,
            CamModel::Rf(m) => m.arity,
            CamModel::Gbt(m) => m.arity,
            CamModel::Lr(m) | CamModel::SvmLinear(m) => m.weights.len(),
            CamModel::SvmRbf { arity, .. } => *arity,
            CamModel::Mlp { arity, .. } => *arity,
        }
    }

    fn check_arity(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(Error::WrongArity {
                expected: self.arity(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Score in [0, 1]; margin-based learners map through the logistic.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.check_arity(x)?;
        Ok(match self {
            CamModel::Dt { tree, .. } => tree.leaf_for(x).1,
            CamModel::Rf(m) => m.predict_proba(x),
            CamModel::Gbt(m) => m.predict_proba(x),
            CamModel::Lr(m) | CamModel::SvmLinear(m) => m.predict_proba(x),
            CamModel::SvmRbf { model, .. } => model.predict_proba(x),
            CamModel::Mlp { model, .. } => model.predict_proba(x),
        })
    }

    /// Hard answer. Score-based learners threshold at 0.5; the decision
    /// tree answers with its leaf's majority label (ties there go to 0).
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        self.check_arity(x)?;
        Ok(match self {
            CamModel::Dt { tree, .. } => *tree.leaf_for(x).0,
            other => u8::from(other.predict_proba(x)? >= 0.5),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Trains one model family. Deterministic given `(ds, hyper, seed)`.
pub fn fit(algo: CamAlgo, ds: &Dataset, hyper: &CamHyper, seed: u64) -> Result<CamModel> {
    if ds.is_empty() {
        return Err(Error::EmptyInput("training dataset"));
    }
    if ds.labels.iter().any(|&y| y > 1) {
        return Err(Error::Validation("labels must be binary".into()));
    }
    let arity = ds.arity();
    if ds.rows.iter().any(|r| r.len() != arity) {
        return Err(Error::Validation("dataset arity is not uniform".into()));
    }
    Ok(match algo {
        CamAlgo::Dt => CamModel::Dt {
            tree: fit_decision_tree(ds, &hyper.dt),
            arity,
        },
        CamAlgo::Rf => CamModel::Rf(forest::fit_forest(&ds.rows, &ds.labels, &hyper.rf, seed)),
        CamAlgo::Gbt => CamModel::Gbt(gbt::fit_gbt(&ds.rows, &ds.labels, &hyper.gbt)),
        CamAlgo::Lr => CamModel::Lr(linear::fit_logistic(&ds.rows, &ds.labels, &hyper.lr)),
        CamAlgo::SvmLinear => CamModel::SvmLinear(linear::fit_linear_svm(
            &ds.rows,
            &ds.labels,
            &hyper.svm_linear,
        )),
        CamAlgo::SvmRbf => CamModel::SvmRbf {
            model: svm::fit_rbf_svm(&ds.rows, &ds.labels, &hyper.svm_rbf),
            arity,
        },
        CamAlgo::Mlp => CamModel::Mlp {
            model: mlp::fit_mlp(&ds.rows, &ds.labels, &hyper.mlp, seed),
            arity,
        },
    })
}

/// Plain CART over all features.
pub fn fit_decision_tree(ds: &Dataset, params: &CartParams) -> TreeNode {
    let data = tree::TreeData {
        rows: &ds.rows,
        labels: &ds.labels,
    };
    let indices: Vec<usize> = (0..ds.len()).collect();
    tree::build_cart(
        &data,
        &indices,
        0,
        params,
        &tree::AllFeatures,
        ds.arity(),
    )
}

/// Training-set accuracy of a fitted model.
pub fn training_accuracy(model: &CamModel, ds: &Dataset) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in ds.rows.iter().zip(&ds.labels) {
        if model.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    /// The four XOR cells over (s1, s2) embedded at columns 2 and 3 of a
    /// 5-wide row, with noise columns 0, 1, 4.
    pub(crate) fn xor_dataset(n: usize, seed: u64) -> Dataset {
        let mut draws = rng::stream(seed, &[0x786f_72]);
        let mut ds = Dataset::new();
        for _ in 0..n {
            let s1 = draws.gen_range(0..2u8);
            let s2 = draws.gen_range(0..2u8);
            let o = draws.gen_range(0..40) as f64;
            let r = draws.gen_range(0..8) as f64;
            let s3 = draws.gen_range(0..2u8) as f64;
            ds.push(vec![o, r, s1 as f64, s2 as f64, s3], s1 ^ s2)
                .unwrap();
        }
        ds
    }

    #[test]
    fn dt_fits_four_row_xor_exactly() {
        let ds = Dataset::from_rows(vec![
            (vec![0.0, 0.0], 0),
            (vec![0.0, 1.0], 1),
            (vec![1.0, 0.0], 1),
            (vec![1.0, 1.0], 0),
        ])
        .unwrap();
        let model = fit(CamAlgo::Dt, &ds, &CamHyper::default(), 0).unwrap();
        assert_eq!(training_accuracy(&model, &ds).unwrap(), 1.0);
        if let CamModel::Dt { tree, .. } = &model {
            assert!(tree.depth() >= 2);
        }
    }

    #[test]
    fn lr_on_duplicated_xor_stays_linear_bounded() {
        // Best linear separator classifies at most 3 of the 4 XOR cells.
        let mut rows = Vec::new();
        for _ in 0..25 {
            rows.push((vec![0.0, 0.0], 0));
            rows.push((vec![0.0, 1.0], 1));
            rows.push((vec![1.0, 0.0], 1));
            rows.push((vec![1.0, 1.0], 0));
        }
        let ds = Dataset::from_rows(rows).unwrap();
        let model = fit(CamAlgo::Lr, &ds, &CamHyper::default(), 0).unwrap();
        assert!(training_accuracy(&model, &ds).unwrap() <= 0.75);
    }

    #[test]
    fn one_class_datasets_give_constant_models() {
        let rows: Vec<(Vec<f64>, u8)> = (0..12).map(|i| (vec![i as f64, 1.0], 1)).collect();
        let ds = Dataset::from_rows(rows).unwrap();
        for algo in CamAlgo::ALL {
            let model = fit(algo, &ds, &CamHyper::default(), 0).unwrap();
            for x in &ds.rows {
                assert_eq!(model.predict(x).unwrap(), 1, "{algo} broke on one-class");
            }
        }
    }

    #[test]
    fn fit_rejects_bad_datasets() {
        let empty = Dataset::new();
        assert!(fit(CamAlgo::Dt, &empty, &CamHyper::default(), 0).is_err());
        let mut ds = Dataset::new();
        ds.push(vec![1.0], 1).unwrap();
        assert!(ds.push(vec![1.0, 2.0], 0).is_err());
        assert!(ds.push(vec![f64::NAN], 0).is_err());
        assert!(ds.push(vec![1.0], 2).is_err());
    }

    #[test]
    fn dt_training_accuracy_is_one_on_consistent_data() {
        // Consistent by construction: y is a fixed pseudo-random function of
        // the feature tuple.
        for trial in 0..20u64 {
            let mut draws = rng::stream(trial, &[1]);
            let mut ds = Dataset::new();
            for _ in 0..120 {
                let a = draws.gen_range(0..6) as f64;
                let b = draws.gen_range(0..4) as f64;
                let c = draws.gen_range(0..2) as f64;
                let y = (rng::mix(99, &[a as u64, b as u64, c as u64]) & 1) as u8;
                ds.push(vec![a, b, c], y).unwrap();
            }
            // Deduplicate conflicting rows introduced by collisions: the label
            // function is deterministic in x, so there are none.
            let model = fit(CamAlgo::Dt, &ds, &CamHyper::default(), 0).unwrap();
            assert_eq!(training_accuracy(&model, &ds).unwrap(), 1.0, "trial {trial}");
        }
    }

    #[test]
    fn nonlinear_beats_linear_on_xor_generated_data() {
        let train = xor_dataset(400, 0);
        let test = xor_dataset(400, 1);
        let hyper = CamHyper::default();
        let mut accuracy = |algo: CamAlgo| -> f64 {
            let model = fit(algo, &train, &hyper, 0).unwrap();
            let correct = test
                .rows
                .iter()
                .zip(&test.labels)
                .filter(|(x, &y)| model.predict(x).unwrap() == y)
                .count();
            correct as f64 / test.len() as f64
        };
        assert!(accuracy(CamAlgo::Dt) >= 0.99);
        assert!(accuracy(CamAlgo::Gbt) >= 0.99);
        assert!(accuracy(CamAlgo::Lr) <= 0.78);
        assert!(accuracy(CamAlgo::SvmLinear) <= 0.78);
    }

    /// Retrain-and-compare oracle: flipping one binary column in the training
    /// data (and the probe) must leave tree-family predictions identical.
    #[test]
    fn tree_family_is_invariant_to_binary_column_inversion() {
        let hyper = CamHyper {
            rf: RfParams {
                n_trees: 64,
                ..Default::default()
            },
            ..Default::default()
        };
        for seed in 0..3u64 {
            let ds = xor_dataset(150, seed);
            let flipped = ds.with_column_mapped(3, |v| 1.0 - v);
            let probe = xor_dataset(80, seed + 100);
            let probe_flipped = probe.with_column_mapped(3, |v| 1.0 - v);
            for algo in [CamAlgo::Dt, CamAlgo::Rf, CamAlgo::Gbt] {
                let base = fit(algo, &ds, &hyper, 7).unwrap();
                let mirrored = fit(algo, &flipped, &hyper, 7).unwrap();
                for (x, xf) in probe.rows.iter().zip(&probe_flipped.rows) {
                    assert_eq!(
                        base.predict(x).unwrap(),
                        mirrored.predict(xf).unwrap(),
                        "{algo} not inversion-invariant (seed {seed})"
                    );
                }
            }
        }
    }

    #[test]
    fn fits_are_deterministic_across_runs() {
        let ds = xor_dataset(100, 5);
        let probe = xor_dataset(40, 6);
        let hyper = CamHyper {
            rf: RfParams {
                n_trees: 32,
                ..Default::default()
            },
            ..Default::default()
        };
        for algo in CamAlgo::ALL {
            let a = fit(algo, &ds, &hyper, 11).unwrap();
            let b = fit(algo, &ds, &hyper, 11).unwrap();
            for x in &probe.rows {
                assert_eq!(
                    a.predict_proba(x).unwrap(),
                    b.predict_proba(x).unwrap(),
                    "{algo} fit twice disagrees"
                );
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let ds = xor_dataset(80, 2);
        let probe = xor_dataset(30, 3);
        let hyper = CamHyper {
            rf: RfParams {
                n_trees: 16,
                ..Default::default()
            },
            ..Default::default()
        };
        for algo in CamAlgo::ALL {
            let model = fit(algo, &ds, &hyper, 4).unwrap();
            let back = CamModel::from_json(&model.to_json().unwrap()).unwrap();
            assert_eq!(back.algo(), algo);
            for x in &probe.rows {
                assert_eq!(
                    model.predict_proba(x).unwrap(),
                    back.predict_proba(x).unwrap()
                );
            }
        }
    }

    #[test]
    fn predict_checks_arity() {
        let ds = xor_dataset(50, 8);
        let model = fit(CamAlgo::Dt, &ds, &CamHyper::default(), 0).unwrap();
        assert!(model.predict(&[1.0, 2.0]).is_err());
        assert_eq!(model.arity(), 5);
    }

    #[test]
    fn gbt_zero_rounds_scores_base_rate() {
        let ds = xor_dataset(100, 9);
        let hyper = CamHyper {
            gbt: GbtParams {
                rounds: 0,
                ..Default::default()
            },
            ..Default::default()
        };
        let model = fit(CamAlgo::Gbt, &ds, &hyper, 0).unwrap();
        let rate = ds.labels.iter().map(|&y| y as f64).sum::<f64>() / ds.len() as f64;
        for x in ds.rows.iter().take(5) {
            assert!((model.predict_proba(x).unwrap() - rate).abs() < 1e-9);
        }
    }
}
