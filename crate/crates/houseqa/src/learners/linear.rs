//! Linear models: logistic regression (full-batch gradient descent) and a
//! linear SVM (hinge + L2, deterministic subgradient schedule).
//!
//! Inputs are standardized per feature at fit time; the transform is stored
//! in the model so prediction works on raw feature vectors.

use serde::{Deserialize, Serialize};

use super::gbt::sigmoid;

/// Per-feature affine transform fitted on the training matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map(|r| r.len()).unwrap_or(0);
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for row in rows {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for row in rows {
            for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    pub fn transform_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop when the gradient's max-norm falls below this.
    pub tolerance: f64,
    /// L2 penalty on the weights (bias excluded).
    pub l2: f64,
}

impl Default for LrParams {
    fn default() -> Self {
        LrParams {
            learning_rate: 0.5,
            max_iters: 5000,
            tolerance: 1e-7,
            l2: 0.0,
        }
    }
}

/// Weights plus bias over standardized inputs; doubles as the linear-SVM
/// parameterization (margins pass through the logistic map for scores).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
}

impl LinearModel {
    pub fn decision(&self, x_raw: &[f64]) -> f64 {
        let x = self.standardizer.transform(x_raw);
        self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict_proba(&self, x_raw: &[f64]) -> f64 {
        sigmoid(self.decision(x_raw))
    }
}

/// Mean binary cross-entropy and its gradient wrt (weights, bias) at `w`.
/// `params` is laid out as [w_0..w_{d-1}, bias]. The trainer steps against
/// exactly this gradient, so finite-difference checks exercise the real
/// training path.
pub(crate) fn lr_loss_grad(
    params: &[f64],
    rows: &[Vec<f64>],
    labels: &[u8],
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = params.len() - 1;
    let n = rows.len() as f64;
    let (weights, bias) = (&params[..d], params[d]);
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (row, &y) in rows.iter().zip(labels) {
        let z = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
        let p = sigmoid(z);
        let pc = p.clamp(1e-12, 1.0 - 1e-12);
        let yf = y as f64;
        loss += -(yf * pc.ln() + (1.0 - yf) * (1.0 - pc).ln());
        let err = p - yf;
        for (g, &v) in grad[..d].iter_mut().zip(row) {
            *g += err * v;
        }
        grad[d] += err;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    if l2 > 0.0 {
        for (g, &w) in grad[..d].iter_mut().zip(weights) {
            *g += l2 * w;
        }
        loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    }
    (loss, grad)
}

pub(crate) fn fit_logistic(rows: &[Vec<f64>], labels: &[u8], params: &LrParams) -> LinearModel {
    let standardizer = Standardizer::fit(rows);
    let xs = standardizer.transform_all(rows);
    let d = xs.first().map(|r| r.len()).unwrap_or(0);
    let mut theta = vec![0.0; d + 1];
    for _ in 0..params.max_iters {
        let (_, grad) = lr_loss_grad(&theta, &xs, labels, params.l2);
        let max_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= params.learning_rate * g;
        }
        if max_norm < params.tolerance {
            break;
        }
    }
    LinearModel {
        weights: theta[..d].to_vec(),
        bias: theta[d],
        standardizer,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmParams {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for LinearSvmParams {
    fn default() -> Self {
        LinearSvmParams {
            lambda: 0.01,
            epochs: 500,
        }
    }
}

/// Full-batch subgradient descent on the regularized hinge loss with the
/// schedule eta_t = 1 / (lambda * t); no sampling, so fully deterministic.
pub(crate) fn fit_linear_svm(
    rows: &[Vec<f64>],
    labels: &[u8],
    params: &LinearSvmParams,
) -> LinearModel {
    let standardizer = Standardizer::fit(rows);
    let xs = standardizer.transform_all(rows);
    let d = xs.first().map(|r| r.len()).unwrap_or(0);
    let n = xs.len() as f64;
    let ys: Vec<f64> = labels.iter().map(|&y| if y == 1 { 1.0 } else { -1.0 }).collect();

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    for t in 1..=params.epochs {
        let eta = 1.0 / (params.lambda * t as f64);
        let mut gw = vec![0.0; d];
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(&ys) {
            let margin = y * (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b);
            if margin < 1.0 {
                for (g, &xi) in gw.iter_mut().zip(x) {
                    *g -= y * xi;
                }
                gb -= y;
            }
        }
        for (wi, g) in w.iter_mut().zip(&gw) {
            *wi -= eta * (params.lambda * *wi + g / n);
        }
        b -= eta * (gb / n);
    }
    LinearModel {
        weights: w,
        bias: b,
        standardizer,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linearly_separable() -> (Vec<Vec<f64>>, Vec<u8>) {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 10) as f64, ((i * 7) % 5) as f64])
            .collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] >= 5.0)).collect();
        (rows, labels)
    }

    #[test]
    fn logistic_fits_separable_data() {
        let (rows, labels) = linearly_separable();
        let model = fit_logistic(&rows, &labels, &LrParams::default());
        for (x, &y) in rows.iter().zip(&labels) {
            assert_eq!(u8::from(model.predict_proba(x) >= 0.5), y);
        }
    }

    #[test]
    fn linear_svm_fits_separable_data() {
        let (rows, labels) = linearly_separable();
        let model = fit_linear_svm(&rows, &labels, &LinearSvmParams::default());
        for (x, &y) in rows.iter().zip(&labels) {
            assert_eq!(u8::from(model.predict_proba(x) >= 0.5), y);
        }
    }

    #[test]
    fn lr_gradient_matches_finite_differences() {
        let rows = vec![
            vec![0.5, -1.0, 2.0],
            vec![-0.3, 0.8, 1.0],
            vec![1.5, 0.1, -0.7],
            vec![0.0, -0.4, 0.3],
        ];
        let labels = vec![1, 0, 1, 0];
        let theta = vec![0.2, -0.5, 0.9, 0.1];
        let (_, grad) = lr_loss_grad(&theta, &rows, &labels, 0.1);
        let eps = 1e-6;
        for k in 0..theta.len() {
            let mut plus = theta.clone();
            plus[k] += eps;
            let mut minus = theta.clone();
            minus[k] -= eps;
            let num = (lr_loss_grad(&plus, &rows, &labels, 0.1).0
                - lr_loss_grad(&minus, &rows, &labels, 0.1).0)
                / (2.0 * eps);
            let denom = num.abs().max(grad[k].abs()).max(1.0);
            assert!(
                (grad[k] - num).abs() / denom < 1e-4,
                "param {k}: analytic {} vs numeric {num}",
                grad[k]
            );
        }
    }
}
