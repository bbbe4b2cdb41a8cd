//! RBF-kernel SVM trained with a deterministic SMO variant.
//!
//! First-choice multiplier: sweep all rows for KKT violations; second
//! choice: the index maximizing |E1 - E2| (ties to the lower index). No
//! random selection anywhere, so fits replay exactly.

use serde::{Deserialize, Serialize};

use super::gbt::sigmoid;
use super::linear::Standardizer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfSvmParams {
    /// Box constraint.
    pub c: f64,
    /// KKT violation tolerance.
    pub tolerance: f64,
    /// Full sweeps without any update before stopping.
    pub max_passes: usize,
    /// Hard cap on sweeps.
    pub max_sweeps: usize,
}

impl Default for RbfSvmParams {
    fn default() -> Self {
        RbfSvmParams {
            c: 1.0,
            tolerance: 1e-3,
            max_passes: 5,
            max_sweeps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbfSvmModel {
    /// Support vectors in standardized coordinates.
    pub support: Vec<Vec<f64>>,
    /// alpha_i * y_i per support vector.
    pub coeffs: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub standardizer: Standardizer,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// gamma = 1 / (d * var), var over all entries of the (standardized)
/// training matrix.
fn scale_gamma(xs: &[Vec<f64>]) -> f64 {
    let d = xs[0].len();
    let n = (xs.len() * d) as f64;
    let mean: f64 = xs.iter().flatten().sum::<f64>() / n;
    let var: f64 = xs.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (d as f64 * var)
    } else {
        1.0 / d as f64
    }
}

pub(crate) fn fit_rbf_svm(rows: &[Vec<f64>], labels: &[u8], params: &RbfSvmParams) -> RbfSvmModel {
    let standardizer = Standardizer::fit(rows);
    let xs = standardizer.transform_all(rows);
    let n = xs.len();
    let ys: Vec<f64> = labels.iter().map(|&y| if y == 1 { 1.0 } else { -1.0 }).collect();

    // One-class data: no dual problem to solve, answer with a constant sign.
    if labels.iter().all(|&y| y == 1) || labels.iter().all(|&y| y == 0) {
        return RbfSvmModel {
            support: Vec::new(),
            coeffs: Vec::new(),
            bias: ys[0],
            gamma: 1.0,
            standardizer,
        };
    }

    let gamma = scale_gamma(&xs);
    let kernel: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| rbf(gamma, &xs[i], &xs[j])).collect())
        .collect();

    let mut alpha = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let decision = |alpha: &[f64], bias: f64, k: usize| -> f64 {
        let mut s = bias;
        for i in 0..n {
            if alpha[i] > 0.0 {
                s += alpha[i] * ys[i] * kernel[i][k];
            }
        }
        s
    };

    let mut quiet_passes = 0;
    let mut sweeps = 0;
    while quiet_passes < params.max_passes && sweeps < params.max_sweeps {
        sweeps += 1;
        let mut changed = 0;
        for i in 0..n {
            let e_i = decision(&alpha, bias, i) - ys[i];
            let violates = (ys[i] * e_i < -params.tolerance && alpha[i] < params.c)
                || (ys[i] * e_i > params.tolerance && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            // Second choice: max |E_i - E_j|, ties to lower j.
            let mut j_best = usize::MAX;
            let mut gap_best = -1.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let gap = (e_i - (decision(&alpha, bias, j) - ys[j])).abs();
                if gap > gap_best {
                    gap_best = gap;
                    j_best = j;
                }
            }
            let j = j_best;
            let e_j = decision(&alpha, bias, j) - ys[j];

            let (alpha_i_old, alpha_j_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if ys[i] != ys[j] {
                (
                    (alpha[j] - alpha[i]).max(0.0),
                    (params.c + alpha[j] - alpha[i]).min(params.c),
                )
            } else {
                (
                    (alpha[i] + alpha[j] - params.c).max(0.0),
                    (alpha[i] + alpha[j]).min(params.c),
                )
            };
            if lo >= hi {
                continue;
            }
            let eta = 2.0 * kernel[i][j] - kernel[i][i] - kernel[j][j];
            if eta >= 0.0 {
                continue;
            }
            let mut alpha_j = alpha_j_old - ys[j] * (e_i - e_j) / eta;
            alpha_j = alpha_j.clamp(lo, hi);
            if (alpha_j - alpha_j_old).abs() < 1e-5 {
                continue;
            }
            let alpha_i = alpha_i_old + ys[i] * ys[j] * (alpha_j_old - alpha_j);
            alpha[i] = alpha_i;
            alpha[j] = alpha_j;

            let b1 = bias
                - e_i
                - ys[i] * (alpha_i - alpha_i_old) * kernel[i][i]
                - ys[j] * (alpha_j - alpha_j_old) * kernel[i][j];
            let b2 = bias
                - e_j
                - ys[i] * (alpha_i - alpha_i_old) * kernel[i][j]
                - ys[j] * (alpha_j - alpha_j_old) * kernel[j][j];
            bias = if alpha_i > 0.0 && alpha_i < params.c {
                b1
            } else if alpha_j > 0.0 && alpha_j < params.c {
                b2
            } else {
                (b1 + b2) / 2.0
            };
            changed += 1;
        }
        if changed == 0 {
            quiet_passes += 1;
        } else {
            quiet_passes = 0;
        }
    }

    let mut support = Vec::new();
    let mut coeffs = Vec::new();
    for i in 0..n {
        if alpha[i] > 0.0 {
            support.push(xs[i].clone());
            coeffs.push(alpha[i] * ys[i]);
        }
    }
    RbfSvmModel {
        support,
        coeffs,
        bias,
        gamma,
        standardizer,
    }
}

impl RbfSvmModel {
    pub fn decision(&self, x_raw: &[f64]) -> f64 {
        let x = self.standardizer.transform(x_raw);
        let mut s = self.bias;
        for (sv, c) in self.support.iter().zip(&self.coeffs) {
            s += c * rbf(self.gamma, sv, &x);
        }
        s
    }

    pub fn predict_proba(&self, x_raw: &[f64]) -> f64 {
        sigmoid(self.decision(x_raw))
    }
}
