//! A small fully connected regressor trained by minibatch gradient descent,
//! with an optional per-batch augmentation hook applied before each forward
//! pass.
//!
//! Everything is double precision and single threaded; given a seed, training
//! is bitwise reproducible. The returned model is the best epoch by
//! validation MSE.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::anchor::AnchorAssignment;
use crate::augment::{ada_minibatch, cmixup_minibatch, mixup_minibatch, GammaPrior};
use crate::data::{CenteredDataset, DataMatrix, TargetVector};
use crate::error::{Error, Result};
use crate::rng::rng_for_stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    ReLU,
    Sigmoid,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::ReLU => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output.
    fn grad_from_output(self, a: f64) -> f64 {
        match self {
            Activation::ReLU => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam {
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_adam_eps")]
        epsilon: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_adam_eps() -> f64 {
    1e-8
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: default_beta1(),
            beta2: default_beta2(),
            epsilon: default_adam_eps(),
        }
    }
}

/// Per-batch augmentation applied before the forward pass.
#[derive(Debug, Clone)]
pub enum AugmentationHook {
    None,
    /// Scaled anchor transform with one gamma per batch; the assignment
    /// covers the full training set and is restricted to each batch's rows.
    Ada {
        prior: GammaPrior,
        assignment: AnchorAssignment,
    },
    CMixup {
        bandwidth: f64,
        beta_param: f64,
    },
    Mixup {
        beta_param: f64,
    },
}

impl AugmentationHook {
    /// Applies the hook to one batch. `batch_indices` are the rows of the
    /// full training set that make up the batch. Batches of a single row are
    /// passed through unchanged by the pairwise mixers.
    fn apply(
        &self,
        bx: DataMatrix,
        by: TargetVector,
        batch_indices: &[usize],
        rng: &mut impl Rng,
    ) -> Result<(DataMatrix, TargetVector)> {
        match self {
            AugmentationHook::None => Ok((bx, by)),
            AugmentationHook::Ada { prior, assignment } => {
                let batch_assignment = assignment.select(batch_indices)?;
                let out = ada_minibatch(&bx, &by, &batch_assignment, prior, rng)?;
                Ok((out.x, out.y))
            }
            AugmentationHook::CMixup {
                bandwidth,
                beta_param,
            } => {
                if bx.n() < 2 {
                    return Ok((bx, by));
                }
                let out = cmixup_minibatch(&bx, &by, *bandwidth, *beta_param, rng)?;
                Ok((out.x, out.y))
            }
            AugmentationHook::Mixup { beta_param } => {
                if bx.n() < 2 {
                    return Ok((bx, by));
                }
                let out = mixup_minibatch(&bx, &by, *beta_param, rng)?;
                Ok((out.x, out.y))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MlpConfig {
    /// Hidden layer widths; the output layer is a single linear unit.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub hook: AugmentationHook,
}

impl MlpConfig {
    pub fn new(hidden: Vec<usize>, seed: u64) -> Self {
        Self {
            hidden,
            activation: Activation::ReLU,
            learning_rate: 0.01,
            epochs: 100,
            batch_size: 16,
            optimizer: OptimizerKind::adam(),
            seed,
            hook: AugmentationHook::None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidConfig("hidden widths must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Report of one training run. `final_val_mse` is the validation MSE of the
/// returned (best-epoch) model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss_curve: Vec<f64>,
    pub final_val_mse: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub wall_time: f64,
}

/// Fully connected network: hidden layers with one activation, linear output.
#[derive(Debug, Clone)]
pub struct Mlp {
    weights: Vec<Array2<f64>>, // layer l: (out, in)
    biases: Vec<Array1<f64>>,
    activation: Activation,
}

struct Gradients {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
}

impl Mlp {
    /// Glorot-uniform initialization (`+-sqrt(6 / (fan_in + fan_out))`),
    /// zero biases.
    pub fn new_seeded(
        input_dim: usize,
        hidden: &[usize],
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let mut weights = Vec::with_capacity(sizes.len() - 1);
        let mut biases = Vec::with_capacity(sizes.len() - 1);
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let w = Array2::from_shape_fn((fan_out, fan_in), |_| {
                rng.random_range(-limit..limit)
            });
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Self {
            weights,
            biases,
            activation,
        }
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    /// Identity-free constructor for tests: explicit weights and biases.
    pub fn from_parts(
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
        activation: Activation,
    ) -> Self {
        assert_eq!(weights.len(), biases.len());
        Self {
            weights,
            biases,
            activation,
        }
    }

    /// Activations per layer, input included. The final entry is the (L, 1)
    /// linear output.
    fn forward(&self, x: ArrayView2<'_, f64>) -> Vec<Array2<f64>> {
        let last = self.weights.len() - 1;
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.weights.len() + 1);
        acts.push(x.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(self.biases.iter()).enumerate() {
            let z = acts[l].dot(&w.t()) + b;
            let a = if l == last {
                z
            } else {
                z.mapv(|v| self.activation.apply(v))
            };
            acts.push(a);
        }
        acts
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Array1<f64> {
        let acts = self.forward(x);
        acts.last().expect("forward output").column(0).to_owned()
    }

    pub fn predict_targets(&self, x: &DataMatrix) -> Result<TargetVector> {
        let out = self.predict(x.view());
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mlp prediction"));
        }
        TargetVector::new(out)
    }

    /// Mean squared error of the predictions on `(x, y)`.
    pub fn loss(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
        let pred = self.predict(x);
        let diff = &pred - &y;
        diff.dot(&diff) / y.len() as f64
    }

    /// Loss and analytic parameter gradients for one batch.
    fn loss_and_grad(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> (f64, Gradients) {
        let batch = y.len() as f64;
        let acts = self.forward(x);
        let pred = acts.last().expect("forward output").column(0).to_owned();
        let diff = &pred - &y;
        let loss = diff.dot(&diff) / batch;

        let n_layers = self.weights.len();
        let mut gw: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        let mut gb: Vec<Array1<f64>> = Vec::with_capacity(n_layers);
        for w in &self.weights {
            gw.push(Array2::zeros(w.raw_dim()));
        }
        for b in &self.biases {
            gb.push(Array1::zeros(b.raw_dim()));
        }

        // delta at the linear output: dL/dout, shape (L, 1)
        let mut delta = diff
            .mapv(|v| 2.0 * v / batch)
            .insert_axis(Axis(1));
        for l in (0..n_layers).rev() {
            gw[l] = delta.t().dot(&acts[l]);
            gb[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                let back = delta.dot(&self.weights[l]);
                let grad_mask = acts[l].mapv(|a| self.activation.grad_from_output(a));
                delta = back * grad_mask;
            }
        }
        (
            loss,
            Gradients {
                weights: gw,
                biases: gb,
            },
        )
    }

    /// Flattened copy of all parameters (weights layer by layer, row major,
    /// then biases layer by layer). Used by gradient checks and bindings.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for w in &self.weights {
            out.extend(w.iter());
        }
        for b in &self.biases {
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) {
        let mut it = params.iter();
        for w in &mut self.weights {
            for v in w.iter_mut() {
                *v = *it.next().expect("enough parameters");
            }
        }
        for b in &mut self.biases {
            for v in b.iter_mut() {
                *v = *it.next().expect("enough parameters");
            }
        }
        assert!(it.next().is_none(), "too many parameters");
    }

    /// Analytic gradient in the same flat layout as [`Mlp::params_flat`].
    pub fn grad_flat(&self, x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> (f64, Vec<f64>) {
        let (loss, g) = self.loss_and_grad(x, y);
        let mut out = Vec::new();
        for w in &g.weights {
            out.extend(w.iter());
        }
        for b in &g.biases {
            out.extend(b.iter());
        }
        (loss, out)
    }
}

enum OptimizerState {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        t: u64,
        m_w: Vec<Array2<f64>>,
        v_w: Vec<Array2<f64>>,
        m_b: Vec<Array1<f64>>,
        v_b: Vec<Array1<f64>>,
    },
}

impl OptimizerState {
    fn new(kind: OptimizerKind, mlp: &Mlp) -> Self {
        match kind {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::Adam {
                beta1,
                beta2,
                epsilon,
            } => OptimizerState::Adam {
                beta1,
                beta2,
                epsilon,
                t: 0,
                m_w: mlp.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
                v_w: mlp.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
                m_b: mlp.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
                v_b: mlp.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            },
        }
    }

    fn step(&mut self, mlp: &mut Mlp, grads: &Gradients, lr: f64) {
        match self {
            OptimizerState::Sgd => {
                for (w, g) in mlp.weights.iter_mut().zip(&grads.weights) {
                    *w -= &(lr * g);
                }
                for (b, g) in mlp.biases.iter_mut().zip(&grads.biases) {
                    *b -= &(lr * g);
                }
            }
            OptimizerState::Adam {
                beta1,
                beta2,
                epsilon,
                t,
                m_w,
                v_w,
                m_b,
                v_b,
            } => {
                *t += 1;
                let bc1 = 1.0 - beta1.powi(*t as i32);
                let bc2 = 1.0 - beta2.powi(*t as i32);
                for l in 0..mlp.weights.len() {
                    m_w[l] = &m_w[l] * *beta1 + &(&grads.weights[l] * (1.0 - *beta1));
                    v_w[l] = &v_w[l] * *beta2
                        + &(grads.weights[l].mapv(|g| g * g) * (1.0 - *beta2));
                    let update = (&m_w[l] / bc1)
                        / ((v_w[l].mapv(f64::sqrt) / bc2.sqrt()) + *epsilon);
                    mlp.weights[l] -= &(lr * &update);

                    m_b[l] = &m_b[l] * *beta1 + &(&grads.biases[l] * (1.0 - *beta1));
                    v_b[l] =
                        &v_b[l] * *beta2 + &(grads.biases[l].mapv(|g| g * g) * (1.0 - *beta2));
                    let update_b = (&m_b[l] / bc1)
                        / ((v_b[l].mapv(f64::sqrt) / bc2.sqrt()) + *epsilon);
                    mlp.biases[l] -= &(lr * &update_b);
                }
            }
        }
    }
}

/// Trains an MLP on `train`, selecting the best epoch by MSE on `val`.
///
/// Per epoch: a seeded shuffle, minibatches in shuffle order, the
/// augmentation hook applied to each batch before its forward pass, then a
/// gradient step. Aborts with [`Error::TrainingDiverged`] when a batch loss
/// or the validation MSE stops being finite.
pub fn mlp_train(
    cfg: &MlpConfig,
    train: &CenteredDataset,
    val: &CenteredDataset,
) -> Result<(Mlp, TrainReport)> {
    cfg.validate()?;
    if train.d() != val.d() {
        return Err(Error::DimensionMismatch {
            context: "train/val features",
            expected: train.d(),
            actual: val.d(),
        });
    }
    if let AugmentationHook::Ada { assignment, .. } = &cfg.hook {
        if assignment.n() != train.n() {
            return Err(Error::DimensionMismatch {
                context: "hook assignment rows",
                expected: train.n(),
                actual: assignment.n(),
            });
        }
    }

    let start = Instant::now();
    let mut init_rng = rng_for_stream(cfg.seed, 0);
    let mut shuffle_rng = rng_for_stream(cfg.seed, 1);
    let mut hook_rng = rng_for_stream(cfg.seed, 2);

    let mut mlp = Mlp::new_seeded(train.d(), &cfg.hidden, cfg.activation, &mut init_rng);
    let mut opt = OptimizerState::new(cfg.optimizer, &mlp);

    let n = train.n();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, Mlp)> = None;

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut loss_rows = 0usize;
        for batch_indices in indices.chunks(cfg.batch_size) {
            let bx = train.x.select_rows(batch_indices);
            let by = train.y.select(batch_indices);
            let (bx, by) = cfg.hook.apply(bx, by, batch_indices, &mut hook_rng)?;
            let (loss, grads) = mlp.loss_and_grad(bx.view(), by.view());
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged { epoch });
            }
            opt.step(&mut mlp, &grads, cfg.learning_rate);
            loss_sum += loss * by.len() as f64;
            loss_rows += by.len();
        }
        curve.push(loss_sum / loss_rows as f64);

        let val_mse = mlp.loss(val.x.view(), val.y.view());
        if !val_mse.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        let improved = match &best {
            None => true,
            Some((b, _, _)) => val_mse < *b,
        };
        if improved {
            best = Some((val_mse, epoch, mlp.clone()));
        }
    }

    let (final_val_mse, best_epoch, model) = best.expect("at least one epoch");
    Ok((
        model,
        TrainReport {
            train_loss_curve: curve,
            final_val_mse,
            best_epoch,
            epochs_run: cfg.epochs,
            wall_time: start.elapsed().as_secs_f64(),
        },
    ))
}
