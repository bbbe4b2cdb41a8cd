//! Small feed-forward network: input -> 16 -> 8 -> 1 with ReLU hidden
//! activations and a terminal sigmoid, trained on binary cross-entropy by
//! full-batch gradient descent with a fixed learning rate.
//!
//! Parameters live in one flat vector (layout below) so the trainer and the
//! finite-difference checks share a single loss/gradient function.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gbt::sigmoid;
use super::linear::Standardizer;
use crate::rng;

pub const HIDDEN1: usize = 16;
pub const HIDDEN2: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        MlpParams {
            learning_rate: 0.05,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// Flat parameters: [W1 (16 x d, row-major), b1 (16), W2 (8 x 16), b2 (8),
    /// W3 (1 x 8), b3 (1)].
    pub params: Vec<f64>,
    pub input_dim: usize,
    pub standardizer: Standardizer,
}

pub(crate) fn param_count(d: usize) -> usize {
    HIDDEN1 * d + HIDDEN1 + HIDDEN2 * HIDDEN1 + HIDDEN2 + HIDDEN2 + 1
}

struct Views<'a> {
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: &'a [f64],
    w3: &'a [f64],
    b3: f64,
}

fn views(params: &[f64], d: usize) -> Views<'_> {
    let mut at = 0;
    let mut take = |len: usize| {
        let s = &params[at..at + len];
        at += len;
        s
    };
    Views {
        w1: take(HIDDEN1 * d),
        b1: take(HIDDEN1),
        w2: take(HIDDEN2 * HIDDEN1),
        b2: take(HIDDEN2),
        w3: take(HIDDEN2),
        b3: take(1)[0],
    }
}

fn forward(v: &Views, x: &[f64], d: usize) -> ([f64; HIDDEN1], [f64; HIDDEN2], f64) {
    let mut h1 = [0.0; HIDDEN1];
    for (i, h) in h1.iter_mut().enumerate() {
        let mut z = v.b1[i];
        for (j, &xj) in x.iter().enumerate().take(d) {
            z += v.w1[i * d + j] * xj;
        }
        *h = z.max(0.0);
    }
    let mut h2 = [0.0; HIDDEN2];
    for (i, h) in h2.iter_mut().enumerate() {
        let mut z = v.b2[i];
        for (j, &hj) in h1.iter().enumerate() {
            z += v.w2[i * HIDDEN1 + j] * hj;
        }
        *h = z.max(0.0);
    }
    let mut z = v.b3;
    for (j, &hj) in h2.iter().enumerate() {
        z += v.w3[j] * hj;
    }
    (h1, h2, z)
}

/// Mean BCE loss and full gradient over the batch at `params`.
pub(crate) fn mlp_loss_grad(
    params: &[f64],
    d: usize,
    rows: &[Vec<f64>],
    labels: &[u8],
) -> (f64, Vec<f64>) {
    let v = views(params, d);
    let n = rows.len() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    let (w1_at, b1_at) = (0, HIDDEN1 * d);
    let w2_at = b1_at + HIDDEN1;
    let b2_at = w2_at + HIDDEN2 * HIDDEN1;
    let w3_at = b2_at + HIDDEN2;
    let b3_at = w3_at + HIDDEN2;

    for (x, &y) in rows.iter().zip(labels) {
        let (h1, h2, z) = forward(&v, x, d);
        let p = sigmoid(z);
        let pc = p.clamp(1e-12, 1.0 - 1e-12);
        let yf = y as f64;
        loss += -(yf * pc.ln() + (1.0 - yf) * (1.0 - pc).ln());

        // dL/dz for sigmoid+BCE.
        let dz = (p - yf) / n;
        grad[b3_at] += dz;
        let mut dh2 = [0.0; HIDDEN2];
        for j in 0..HIDDEN2 {
            grad[w3_at + j] += dz * h2[j];
            dh2[j] = dz * v.w3[j] * if h2[j] > 0.0 { 1.0 } else { 0.0 };
        }
        let mut dh1 = [0.0; HIDDEN1];
        for i in 0..HIDDEN2 {
            if dh2[i] == 0.0 {
                continue;
            }
            grad[b2_at + i] += dh2[i];
            for j in 0..HIDDEN1 {
                grad[w2_at + i * HIDDEN1 + j] += dh2[i] * h1[j];
                dh1[j] += dh2[i] * v.w2[i * HIDDEN1 + j];
            }
        }
        for i in 0..HIDDEN1 {
            let di = dh1[i] * if h1[i] > 0.0 { 1.0 } else { 0.0 };
            if di == 0.0 {
                continue;
            }
            grad[b1_at + i] += di;
            for (j, &xj) in x.iter().enumerate().take(d) {
                grad[w1_at + i * d + j] += di * xj;
            }
        }
    }
    (loss / n, grad)
}

pub(crate) fn fit_mlp(rows: &[Vec<f64>], labels: &[u8], params: &MlpParams, seed: u64) -> MlpModel {
    let standardizer = Standardizer::fit(rows);
    let xs = standardizer.transform_all(rows);
    let d = xs.first().map(|r| r.len()).unwrap_or(0);

    let mut draws = rng::stream(seed, &[0x6d6c_7000]);
    let mut theta = vec![0.0; param_count(d)];
    let mut at = 0;
    for (fan_in, count) in [
        (d, HIDDEN1 * d),
        (d, HIDDEN1),
        (HIDDEN1, HIDDEN2 * HIDDEN1),
        (HIDDEN1, HIDDEN2),
        (HIDDEN2, HIDDEN2),
        (HIDDEN2, 1),
    ] {
        let a = 1.0 / (fan_in.max(1) as f64).sqrt();
        for t in theta[at..at + count].iter_mut() {
            *t = draws.gen_range(-a..a);
        }
        at += count;
    }

    for _ in 0..params.epochs {
        let (_, grad) = mlp_loss_grad(&theta, d, &xs, labels);
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= params.learning_rate * g;
        }
    }
    MlpModel {
        params: theta,
        input_dim: d,
        standardizer,
    }
}

impl MlpModel {
    pub fn predict_proba(&self, x_raw: &[f64]) -> f64 {
        let x = self.standardizer.transform(x_raw);
        let v = views(&self.params, self.input_dim);
        let (_, _, z) = forward(&v, &x, self.input_dim);
        sigmoid(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_strictly_inside_unit_interval() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 4) as f64]).collect();
        let labels: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
        let model = fit_mlp(&rows, &labels, &MlpParams::default(), 0);
        for x in rows.iter().chain([vec![100.0, -3.0]].iter()) {
            let p = model.predict_proba(x);
            assert!(p > 0.0 && p < 1.0, "p = {p}");
        }
    }

    #[test]
    fn learns_a_simple_rule() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 8) as f64, 1.0]).collect();
        let labels: Vec<u8> = (0..40).map(|i| u8::from(i % 8 >= 4)).collect();
        let model = fit_mlp(&rows, &labels, &MlpParams::default(), 1);
        let correct = rows
            .iter()
            .zip(&labels)
            .filter(|(x, &y)| u8::from(model.predict_proba(x) >= 0.5) == y)
            .count();
        assert!(correct >= 38, "{correct}/40");
    }

    #[test]
    fn backprop_matches_finite_differences() {
        let d = 3;
        let rows = vec![
            vec![0.4, -1.2, 0.7],
            vec![-0.9, 0.3, 1.5],
            vec![1.1, 0.0, -0.6],
        ];
        let labels = vec![1, 0, 1];
        let mut draws = rng::stream(9, &[1]);
        let theta: Vec<f64> = (0..param_count(d)).map(|_| draws.gen_range(-0.5..0.5)).collect();
        let (_, grad) = mlp_loss_grad(&theta, d, &rows, &labels);
        let eps = 1e-6;
        for k in 0..theta.len() {
            let mut plus = theta.clone();
            plus[k] += eps;
            let mut minus = theta.clone();
            minus[k] -= eps;
            let num = (mlp_loss_grad(&plus, d, &rows, &labels).0
                - mlp_loss_grad(&minus, d, &rows, &labels).0)
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
