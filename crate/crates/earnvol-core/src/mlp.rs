//! A two-layer perceptron regressor trained by mini-batch gradient descent
//! with manual backpropagation, plus finite-difference gradient checking.
//!
//! Training is single-threaded and fully seeded so repeated runs are
//! bit-identical. The activation is a rectifier; the hidden width defaults to
//! 512 but is a plain field.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum MlpError {
    #[error("empty training set")]
    EmptyTrain,
    #[error("empty validation set")]
    EmptyVal,
    #[error("rows must share one width")]
    RaggedDesign,
    #[error("targets length does not match rows")]
    TargetMismatch,
    #[error("non-finite entry in inputs or targets")]
    NonFinite,
    #[error("hidden width must be positive")]
    ZeroHidden,
}

/// Gradient-descent settings. Defaults: learning rate 1e-4, batch size 32,
/// at most 10 epochs with early-stopping patience 3, seed 2021.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 1e-4, batch_size: 32, max_epochs: 10, seed: 2021, patience: 3 }
    }
}

/// `y = w2 . relu(W1 x + b1) + b2`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MlpModel {
    /// hidden x input, row per hidden unit.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpModel {
    /// Seeded uniform initialization in `±sqrt(6 / (fan_in + fan_out))`,
    /// biases zero.
    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> MlpModel {
        let bound1 = libm::sqrt(6.0 / (input + hidden) as f64);
        let bound2 = libm::sqrt(6.0 / (hidden + 1) as f64);
        let w1 = (0..hidden)
            .map(|_| (0..input).map(|_| rng.random_range(-bound1..=bound1)).collect())
            .collect();
        let w2 = (0..hidden).map(|_| rng.random_range(-bound2..=bound2)).collect();
        MlpModel { w1, b1: vec![0.0; hidden], w2, b2: 0.0 }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.first().map(Vec::len).unwrap_or(0)
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.len()
    }

    fn hidden_pre(&self, x: &[f64], out: &mut [f64]) {
        for (h, row) in self.w1.iter().enumerate() {
            out[h] = self.b1[h] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut pre = vec![0.0; self.hidden_dim()];
        self.hidden_pre(x, &mut pre);
        let mut out = self.b2;
        for (z, w) in pre.iter().zip(&self.w2) {
            if *z > 0.0 {
                out += w * z;
            }
        }
        out
    }

    pub fn params_finite(&self) -> bool {
        self.w1.iter().flatten().chain(&self.b1).chain(&self.w2).all(|v| v.is_finite())
            && self.b2.is_finite()
    }
}

struct Gradients {
    w1: Vec<Vec<f64>>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl Gradients {
    fn zeros(input: usize, hidden: usize) -> Self {
        Gradients {
            w1: vec![vec![0.0; input]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }
}

/// Accumulates the gradient of the squared error `(predict(x) - y)^2`.
fn accumulate(model: &MlpModel, x: &[f64], y: f64, grads: &mut Gradients) {
    let hidden = model.hidden_dim();
    let mut pre = vec![0.0; hidden];
    model.hidden_pre(x, &mut pre);
    let mut out = model.b2;
    for (z, w) in pre.iter().zip(&model.w2) {
        if *z > 0.0 {
            out += w * z;
        }
    }
    let delta = 2.0 * (out - y);
    grads.b2 += delta;
    for (h, z) in pre.iter().enumerate().take(hidden) {
        let act = if *z > 0.0 { *z } else { 0.0 };
        grads.w2[h] += delta * act;
        if *z > 0.0 {
            let dh = delta * model.w2[h];
            grads.b1[h] += dh;
            for (g, v) in grads.w1[h].iter_mut().zip(x) {
                *g += dh * v;
            }
        }
    }
}

fn val_mse(model: &MlpModel, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(row, t)| {
            let e = model.predict(row) - t;
            e * e
        })
        .sum();
    sum / x.len() as f64
}

#[derive(Clone, Debug)]
pub struct TrainedMlp {
    pub model: MlpModel,
    pub best_val_mse: f64,
    pub epochs_run: usize,
}

/// Trains with mini-batch gradient descent on mean squared error, keeping the
/// parameters from the epoch with the lowest validation MSE (the untrained
/// initialization counts as epoch zero). Stops early after `patience`
/// non-improving epochs.
pub fn mlp_train(
    x_train: &[Vec<f64>],
    y_train: &[f64],
    x_val: &[Vec<f64>],
    y_val: &[f64],
    hidden: usize,
    config: &TrainConfig,
) -> Result<TrainedMlp, MlpError> {
    if x_train.is_empty() {
        return Err(MlpError::EmptyTrain);
    }
    if x_val.is_empty() {
        return Err(MlpError::EmptyVal);
    }
    if hidden == 0 {
        return Err(MlpError::ZeroHidden);
    }
    let input = x_train[0].len();
    if x_train.iter().chain(x_val).any(|row| row.len() != input) {
        return Err(MlpError::RaggedDesign);
    }
    if y_train.len() != x_train.len() || y_val.len() != x_val.len() {
        return Err(MlpError::TargetMismatch);
    }
    if x_train.iter().chain(x_val).flatten().chain(y_train).chain(y_val).any(|v| !v.is_finite()) {
        return Err(MlpError::NonFinite);
    }

    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::init(input, hidden, &mut rng);
    let mut best = model.clone();
    let mut best_mse = val_mse(&model, x_val, y_val);
    let mut stale = 0usize;
    let mut epochs_run = 0usize;
    let mut order: Vec<usize> = (0..x_train.len()).collect();

    for _epoch in 0..config.max_epochs {
        epochs_run += 1;
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            let mut grads = Gradients::zeros(input, hidden);
            for &i in batch {
                accumulate(&model, &x_train[i], y_train[i], &mut grads);
            }
            let step = config.learning_rate / batch.len() as f64;
            for (row, grow) in model.w1.iter_mut().zip(&grads.w1) {
                for (w, g) in row.iter_mut().zip(grow) {
                    *w -= step * g;
                }
            }
            for (b, g) in model.b1.iter_mut().zip(&grads.b1) {
                *b -= step * g;
            }
            for (w, g) in model.w2.iter_mut().zip(&grads.w2) {
                *w -= step * g;
            }
            model.b2 -= step * grads.b2;
        }
        let mse = val_mse(&model, x_val, y_val);
        if mse < best_mse {
            best_mse = mse;
            best = model.clone();
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    Ok(TrainedMlp { model: best, best_val_mse: best_mse, epochs_run })
}

/// Compares the analytic gradient of the squared error against central
/// finite differences for every parameter, returning the maximum relative
/// discrepancy. Matching zeros count as zero error.
pub fn gradient_check(model: &MlpModel, x: &[f64], y: f64, epsilon: f64) -> f64 {
    let hidden = model.hidden_dim();
    let input = model.input_dim();
    let mut grads = Gradients::zeros(input, hidden);
    accumulate(model, x, y, &mut grads);

    let loss = |m: &MlpModel| {
        let e = m.predict(x) - y;
        e * e
    };
    let mut worst = 0.0f64;
    let mut check = |analytic: f64, bump: &mut dyn FnMut(&mut MlpModel, f64)| {
        let mut plus = model.clone();
        bump(&mut plus, epsilon);
        let mut minus = model.clone();
        bump(&mut minus, -epsilon);
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * epsilon);
        let denom = libm::fabs(analytic) + libm::fabs(numeric);
        let rel = if denom == 0.0 {
            0.0
        } else {
            libm::fabs(analytic - numeric) / denom.max(1e-8)
        };
        worst = worst.max(rel);
    };

    for h in 0..hidden {
        for i in 0..input {
            check(grads.w1[h][i], &mut |m, e| m.w1[h][i] += e);
        }
        check(grads.b1[h], &mut |m, e| m.b1[h] += e);
        check(grads.w2[h], &mut |m, e| m.w2[h] += e);
    }
    check(grads.b2, &mut |m, e| m.b2 += e);
    worst
}
