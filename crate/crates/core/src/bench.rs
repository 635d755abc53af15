//! Experiment runner: builds datasets, applies an augmentation method,
//! trains a model per seed and aggregates metrics into a persisted,
//! hash-stamped results file. Also hyperparameter sweeps and plot-ready CSV
//! emission.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::anchor::AnchorAssignment;
use crate::augment::{augment_dataset_offline, gamma_grid, GammaPrior};
use crate::data::{center_dataset, DataMatrix, TargetVector};
use crate::datagen::{gen_cosine, gen_linear_scm, CosineConfig, LinearScmConfig};
use crate::error::{Error, Result};
use crate::ingest::DatasetDescriptor;
use crate::metrics::{metrics, Metrics};
use crate::mlp::{mlp_train, Activation, AugmentationHook, MlpConfig, OptimizerKind};
use crate::partition::{equal_size_bins, equal_width_bins, kmeans, KMeansConfig};
use crate::rng::derive_seed;
use crate::solver::{fit_ols, fit_ridge};

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    Cosine {
        n: usize,
        x_lo: f64,
        x_hi: f64,
        #[serde(default = "default_freq")]
        angular_freq: f64,
        #[serde(default)]
        noise_sd: f64,
        #[serde(default)]
        grid: bool,
    },
    LinearScm {
        n: usize,
        d: usize,
        #[serde(default = "default_scm_q")]
        q: usize,
        #[serde(default = "default_shift")]
        anchor_shift_strength: f64,
        #[serde(default = "default_scm_noise")]
        noise_sd: f64,
    },
    Csv {
        descriptor: PathBuf,
    },
}

fn default_freq() -> f64 {
    1.0
}
fn default_scm_q() -> usize {
    3
}
fn default_shift() -> f64 {
    1.0
}
fn default_scm_noise() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionKind {
    Kmeans,
    EqualWidth,
    EqualSize,
}

impl Default for PartitionKind {
    fn default() -> Self {
        PartitionKind::Kmeans
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterOn {
    X,
    Xy,
}

impl Default for ClusterOn {
    fn default() -> Self {
        ClusterOn::X
    }
}

/// Anchor-augmentation settings. With `n_aug` set, the training set is
/// expanded offline over a gamma grid of that length; without it, one gamma
/// per minibatch is drawn from the uniform prior on `[1/alpha, alpha]`
/// (MLP models only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaSpec {
    pub alpha: f64,
    pub q: usize,
    #[serde(default)]
    pub partition: PartitionKind,
    /// Feature column used by the binning partitions.
    #[serde(default)]
    pub feature: usize,
    /// Cluster on the features alone (default) or on features plus target.
    #[serde(default)]
    pub cluster_on: ClusterOn,
    /// Offline augmentations per sample (even, >= 2). None = per minibatch.
    #[serde(default)]
    pub n_aug: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    None,
    Ada(AdaSpec),
    Cmixup {
        #[serde(default = "default_bandwidth")]
        bandwidth: f64,
        #[serde(default = "default_beta")]
        beta_param: f64,
    },
    Mixup {
        #[serde(default = "default_beta")]
        beta_param: f64,
    },
}

fn default_bandwidth() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Ols,
    Ridge {
        lambda: f64,
    },
    Mlp {
        hidden: Vec<usize>,
        #[serde(default = "default_activation")]
        activation: Activation,
        learning_rate: f64,
        epochs: usize,
        batch_size: usize,
        #[serde(default = "default_optimizer")]
        optimizer: OptimizerKind,
    },
}

fn default_activation() -> Activation {
    Activation::ReLU
}
fn default_optimizer() -> OptimizerKind {
    OptimizerKind::adam()
}

/// Validation/test sizes for the synthetic datasets (CSV datasets carry
/// their own split in the descriptor).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSpec {
    pub val_n: usize,
    pub test_n: usize,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self {
            val_n: 200,
            test_n: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub method: MethodSpec,
    pub model: ModelSpec,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub eval: EvalSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        // descriptor paths resolve relative to the config file
        if let DatasetSpec::Csv { descriptor } = &mut cfg.dataset {
            if descriptor.is_relative() {
                if let Some(dir) = path.parent() {
                    *descriptor = dir.join(&*descriptor);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must be non-empty".into()));
        }
        let is_mlp = matches!(self.model, ModelSpec::Mlp { .. });
        match &self.method {
            MethodSpec::Ada(ada) => {
                if !(ada.alpha > 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "ada alpha must be > 1, got {}",
                        ada.alpha
                    )));
                }
                if ada.q == 0 {
                    return Err(Error::InvalidConfig("ada q must be >= 1".into()));
                }
                if let Some(k) = ada.n_aug {
                    if k < 2 || k % 2 != 0 {
                        return Err(Error::InvalidConfig(format!(
                            "ada n_aug must be even and >= 2, got {k}"
                        )));
                    }
                } else if !is_mlp {
                    return Err(Error::InvalidConfig(
                        "per-minibatch ada requires an mlp model; set n_aug for offline augmentation"
                            .into(),
                    ));
                }
            }
            MethodSpec::Cmixup { .. } | MethodSpec::Mixup { .. } if !is_mlp => {
                return Err(Error::InvalidConfig(
                    "mixup-style methods operate on minibatches and require an mlp model".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:016x}", fnv1a64(&json))
    }
}

fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------
// results
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub diverged: bool,
    pub metrics: Option<Metrics>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds_used: usize,
    pub mse_mean: f64,
    pub mse_sd: f64,
    pub rmse_mean: f64,
    pub rmse_sd: f64,
    pub mape_mean: Option<f64>,
    pub mape_sd: Option<f64>,
}

/// One augmented point of a 1-D dataset, for scatter plots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterRow {
    pub source_index: usize,
    pub group: usize,
    pub gamma: f64,
    pub x: f64,
    pub y: f64,
    pub x_aug: f64,
    pub y_aug: f64,
}

/// Test-set prediction of a trained model on a 1-D dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitPoint {
    pub seed: u64,
    pub x: f64,
    pub truth: f64,
    pub pred: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub per_seed: Vec<SeedOutcome>,
    pub aggregate: Option<Aggregate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<Vec<ScatterRow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_points: Option<Vec<FitPoint>>,
    pub wall_time: f64,
}

impl ExperimentResult {
    pub fn all_diverged(&self) -> bool {
        self.per_seed.iter().all(|s| s.diverged)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    /// Loads a results file and verifies that the stored hash matches the
    /// embedded config, catching hand-edited or mixed-up files.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let result: ExperimentResult = serde_json::from_str(&text)?;
        let computed = result.config.hash();
        if computed != result.config_hash {
            return Err(Error::ConfigHashMismatch {
                path: path.display().to_string(),
                stored: result.config_hash.clone(),
                computed,
            });
        }
        Ok(result)
    }
}

// ---------------------------------------------------------------------------
// dataset materialization
// ---------------------------------------------------------------------------

struct SplitData {
    train_x: DataMatrix,
    train_y: TargetVector,
    val_x: DataMatrix,
    val_y: TargetVector,
    test_x: DataMatrix,
    test_y: TargetVector,
}

fn materialize(cfg: &ExperimentConfig, seed: u64) -> Result<SplitData> {
    match &cfg.dataset {
        DatasetSpec::Cosine {
            n,
            x_lo,
            x_hi,
            angular_freq,
            noise_sd,
            grid,
        } => {
            let make = |count: usize, stream: u64, grid: bool| {
                gen_cosine(&CosineConfig {
                    n: count,
                    x_lo: *x_lo,
                    x_hi: *x_hi,
                    angular_freq: *angular_freq,
                    noise_sd: *noise_sd,
                    grid,
                    seed: derive_seed(seed, stream),
                })
            };
            let (train_x, train_y) = make(*n, 10, *grid)?;
            // held-out draws are always random, independent of the grid flag
            let (val_x, val_y) = make(cfg.eval.val_n, 11, false)?;
            let (test_x, test_y) = make(cfg.eval.test_n, 12, false)?;
            Ok(SplitData {
                train_x,
                train_y,
                val_x,
                val_y,
                test_x,
                test_y,
            })
        }
        DatasetSpec::LinearScm {
            n,
            d,
            q,
            anchor_shift_strength,
            noise_sd,
        } => {
            // one generator call so every split shares the same ground truth
            let total = n + cfg.eval.val_n + cfg.eval.test_n;
            let data = gen_linear_scm(&LinearScmConfig {
                n: total,
                d: *d,
                q: *q,
                anchor_shift_strength: *anchor_shift_strength,
                noise_sd: *noise_sd,
                seed: derive_seed(seed, 10),
            })?;
            let train_idx: Vec<usize> = (0..*n).collect();
            let val_idx: Vec<usize> = (*n..n + cfg.eval.val_n).collect();
            let test_idx: Vec<usize> = (n + cfg.eval.val_n..total).collect();
            Ok(SplitData {
                train_x: data.x.select_rows(&train_idx),
                train_y: data.y.select(&train_idx),
                val_x: data.x.select_rows(&val_idx),
                val_y: data.y.select(&val_idx),
                test_x: data.x.select_rows(&test_idx),
                test_y: data.y.select(&test_idx),
            })
        }
        DatasetSpec::Csv { descriptor } => {
            let desc = DatasetDescriptor::load(descriptor)?;
            let (train, val, test) = desc.load_splits(Some(seed))?;
            Ok(SplitData {
                train_x: train.x,
                train_y: train.y,
                val_x: val.x,
                val_y: val.y,
                test_x: test.x,
                test_y: test.y,
            })
        }
    }
}

/// Builds the anchor assignment for the training split per the ada settings.
fn build_partition(
    ada: &AdaSpec,
    train_x: &DataMatrix,
    train_y: &TargetVector,
    seed: u64,
) -> Result<AnchorAssignment> {
    let cluster_input: DataMatrix = match ada.cluster_on {
        ClusterOn::X => train_x.clone(),
        ClusterOn::Xy => {
            let n = train_x.n();
            let d = train_x.d();
            let mut m = Array2::<f64>::zeros((n, d + 1));
            m.slice_mut(ndarray::s![.., ..d]).assign(train_x.values());
            m.slice_mut(ndarray::s![.., d]).assign(train_y.values());
            DataMatrix::new(m)?
        }
    };
    match ada.partition {
        PartitionKind::Kmeans => {
            let result = kmeans(
                &cluster_input,
                &KMeansConfig::new(ada.q, derive_seed(seed, 20)),
            )?;
            Ok(result.assignment)
        }
        PartitionKind::EqualWidth => {
            let col = cluster_input.column(ada.feature)?;
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(Error::InvalidConfig(
                    "equal-width binning needs a non-constant feature".into(),
                ));
            }
            equal_width_bins(col.view(), ada.q, lo, hi)
        }
        PartitionKind::EqualSize => {
            let col = cluster_input.column(ada.feature)?;
            equal_size_bins(col.view(), ada.q)
        }
    }
}

/// Train/test materialization for the `fit` CLI command: the experiment's
/// dataset for one seed, validation split ignored.
pub fn materialize_for_fit(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(DataMatrix, TargetVector, DataMatrix, TargetVector)> {
    let data = materialize(cfg, seed)?;
    Ok((data.train_x, data.train_y, data.test_x, data.test_y))
}

/// Anchor partition for the `fit` CLI command.
pub fn partition_for_fit(
    ada: &AdaSpec,
    train_x: &DataMatrix,
    train_y: &TargetVector,
    seed: u64,
) -> Result<AnchorAssignment> {
    build_partition(ada, train_x, train_y, seed)
}

// ---------------------------------------------------------------------------
// single-seed execution
// ---------------------------------------------------------------------------

struct SeedRun {
    outcome: SeedOutcome,
    scatter: Option<Vec<ScatterRow>>,
    fit_points: Option<Vec<FitPoint>>,
}

fn scatter_rows(
    x: &DataMatrix,
    y: &TargetVector,
    assignment: &AnchorAssignment,
    alpha: f64,
    n_aug: usize,
    feature: usize,
) -> Result<Vec<ScatterRow>> {
    let grid = gamma_grid(alpha, n_aug)?;
    let pi = crate::anchor::ProjectionOperator::for_assignment(assignment);
    let mut rows = Vec::with_capacity(x.n() * grid.len());
    for &gamma in grid.values() {
        let (xa, ya) = crate::augment::ada_transform(x, y, &pi, gamma)?;
        for i in 0..x.n() {
            rows.push(ScatterRow {
                source_index: i,
                group: assignment.labels()[i],
                gamma,
                x: x.values()[[i, feature]],
                y: y.values()[i],
                x_aug: xa.values()[[i, feature]],
                y_aug: ya.values()[i],
            });
        }
    }
    Ok(rows)
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, want_scatter: bool) -> Result<SeedRun> {
    let start = Instant::now();
    let data = materialize(cfg, seed)?;

    // method preparation on the training split
    let assignment = match &cfg.method {
        MethodSpec::Ada(ada) => Some(build_partition(
            ada,
            &data.train_x,
            &data.train_y,
            seed,
        )?),
        _ => None,
    };

    let mut scatter = None;
    let (train_x, train_y) = match &cfg.method {
        MethodSpec::Ada(ada) if ada.n_aug.is_some() => {
            let n_aug = ada.n_aug.expect("checked");
            let assignment = assignment.as_ref().expect("ada assignment");
            if want_scatter && data.train_x.d() == 1 {
                scatter = Some(scatter_rows(
                    &data.train_x,
                    &data.train_y,
                    assignment,
                    ada.alpha,
                    n_aug,
                    0,
                )?);
            }
            let grid = gamma_grid(ada.alpha, n_aug)?;
            augment_dataset_offline(&data.train_x, &data.train_y, assignment, &grid)?
        }
        _ => (data.train_x.clone(), data.train_y.clone()),
    };

    // model fitting and test prediction (raw target scale)
    let pred = match &cfg.model {
        ModelSpec::Ols => {
            let m = fit_ols(&train_x, &train_y)?;
            m.predict(&data.test_x)?
        }
        ModelSpec::Ridge { lambda } => {
            let m = fit_ridge(&train_x, &train_y, *lambda)?;
            m.predict(&data.test_x)?
        }
        ModelSpec::Mlp {
            hidden,
            activation,
            learning_rate,
            epochs,
            batch_size,
            optimizer,
        } => {
            let hook = match &cfg.method {
                MethodSpec::Ada(ada) if ada.n_aug.is_none() => AugmentationHook::Ada {
                    prior: GammaPrior::uniform(ada.alpha)?,
                    assignment: assignment.clone().expect("ada assignment"),
                },
                MethodSpec::Cmixup {
                    bandwidth,
                    beta_param,
                } => AugmentationHook::CMixup {
                    bandwidth: *bandwidth,
                    beta_param: *beta_param,
                },
                MethodSpec::Mixup { beta_param } => AugmentationHook::Mixup {
                    beta_param: *beta_param,
                },
                _ => AugmentationHook::None,
            };
            let mlp_cfg = MlpConfig {
                hidden: hidden.clone(),
                activation: *activation,
                learning_rate: *learning_rate,
                epochs: *epochs,
                batch_size: *batch_size,
                optimizer: *optimizer,
                seed: derive_seed(seed, 30),
                hook,
            };
            let train = center_dataset(&train_x, &train_y)?;
            let val = train.center_other(&data.val_x, &data.val_y)?;
            match mlp_train(&mlp_cfg, &train, &val) {
                Ok((model, _report)) => {
                    let test_centered = train.center_other(&data.test_x, &data.test_y)?;
                    let centered_pred = model.predict(test_centered.x.view());
                    TargetVector::new(centered_pred + train.y_mean)?
                }
                Err(Error::TrainingDiverged { .. }) => {
                    return Ok(SeedRun {
                        outcome: SeedOutcome {
                            seed,
                            diverged: true,
                            metrics: None,
                            wall_time: start.elapsed().as_secs_f64(),
                        },
                        scatter: None,
                        fit_points: None,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    };

    let m = metrics(&pred, &data.test_y)?;
    let fit_points = if data.test_x.d() == 1 {
        Some(
            (0..data.test_x.n())
                .map(|i| FitPoint {
                    seed,
                    x: data.test_x.values()[[i, 0]],
                    truth: data.test_y.values()[i],
                    pred: pred.values()[i],
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(SeedRun {
        outcome: SeedOutcome {
            seed,
            diverged: false,
            metrics: Some(m),
            wall_time: start.elapsed().as_secs_f64(),
        },
        scatter,
        fit_points,
    })
}

// ---------------------------------------------------------------------------
// experiment driver
// ---------------------------------------------------------------------------

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the experiment over all configured seeds (up to `threads` seeds in
/// parallel; each seed is internally single threaded, so results do not
/// depend on the thread count).
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResult> {
    cfg.validate()?;
    let start = Instant::now();
    let n_seeds = cfg.seeds.len();
    let mut runs: Vec<Option<Result<SeedRun>>> = Vec::new();
    runs.resize_with(n_seeds, || None);

    if threads <= 1 || n_seeds == 1 {
        for (i, &seed) in cfg.seeds.iter().enumerate() {
            runs[i] = Some(run_seed(cfg, seed, i == 0));
        }
    } else {
        let next = AtomicUsize::new(0);
        let slots = Mutex::new(&mut runs);
        std::thread::scope(|scope| {
            for _ in 0..threads.min(n_seeds) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= n_seeds {
                        break;
                    }
                    let out = run_seed(cfg, cfg.seeds[i], i == 0);
                    slots.lock().expect("result slots")[i] = Some(out);
                });
            }
        });
    }

    let mut per_seed = Vec::with_capacity(n_seeds);
    let mut scatter = None;
    let mut fit_points: Vec<FitPoint> = Vec::new();
    for slot in runs {
        let run = slot.expect("all seeds executed")?;
        per_seed.push(run.outcome);
        if scatter.is_none() {
            scatter = run.scatter;
        }
        if let Some(points) = run.fit_points {
            fit_points.extend(points);
        }
    }

    let finished: Vec<&SeedOutcome> = per_seed.iter().filter(|s| !s.diverged).collect();
    let aggregate = if finished.is_empty() {
        None
    } else {
        let mses: Vec<f64> = finished
            .iter()
            .map(|s| s.metrics.as_ref().expect("finished seed").mse)
            .collect();
        let rmses: Vec<f64> = finished
            .iter()
            .map(|s| s.metrics.as_ref().expect("finished seed").rmse)
            .collect();
        let mapes: Option<Vec<f64>> = finished
            .iter()
            .map(|s| s.metrics.as_ref().expect("finished seed").mape)
            .collect();
        let (mse_mean, mse_sd) = mean_sd(&mses);
        let (rmse_mean, rmse_sd) = mean_sd(&rmses);
        let (mape_mean, mape_sd) = match mapes {
            Some(m) => {
                let (a, b) = mean_sd(&m);
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        Some(Aggregate {
            seeds_used: finished.len(),
            mse_mean,
            mse_sd,
            rmse_mean,
            rmse_sd,
            mape_mean,
            mape_sd,
        })
    };

    Ok(ExperimentResult {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        per_seed,
        aggregate,
        sweep_parameter: None,
        sweep_value: None,
        scatter,
        fit_points: if fit_points.is_empty() {
            None
        } else {
            Some(fit_points)
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    Q,
    NAug,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Q => "q",
            SweepParameter::NAug => "n_aug",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "alpha" => Ok(SweepParameter::Alpha),
            "q" => Ok(SweepParameter::Q),
            "n_aug" | "n-aug" => Ok(SweepParameter::NAug),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep parameter {other:?} (expected alpha, q or n_aug)"
            ))),
        }
    }
}

fn with_sweep_value(
    cfg: &ExperimentConfig,
    param: SweepParameter,
    value: f64,
) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    let MethodSpec::Ada(ada) = &mut out.method else {
        return Err(Error::InvalidConfig(
            "sweeps adjust ada parameters; the config must use method.ada".into(),
        ));
    };
    match param {
        SweepParameter::Alpha => ada.alpha = value,
        SweepParameter::Q => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "q sweep values must be positive integers, got {value}"
                )));
            }
            ada.q = value as usize;
        }
        SweepParameter::NAug => {
            if value < 2.0 || value.fract() != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "n_aug sweep values must be integers >= 2, got {value}"
                )));
            }
            ada.n_aug = Some(value as usize);
        }
    }
    out.validate()?;
    Ok(out)
}

/// One experiment per value of the swept parameter.
pub fn sweep(
    cfg: &ExperimentConfig,
    param: SweepParameter,
    values: &[f64],
    threads: usize,
) -> Result<Vec<ExperimentResult>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let mut results = Vec::with_capacity(values.len());
    for &value in values {
        let run_cfg = with_sweep_value(cfg, param, value)?;
        let mut result = run_experiment(&run_cfg, threads)?;
        result.sweep_parameter = Some(param.name().to_string());
        result.sweep_value = Some(value);
        results.push(result);
    }
    Ok(results)
}

/// Long-format sweep CSV with the exact header
/// `parameter,value,seed,metric,metric_value`.
pub fn sweep_csv(results: &[ExperimentResult]) -> String {
    let mut out = String::from("parameter,value,seed,metric,metric_value\n");
    for r in results {
        let param = r.sweep_parameter.as_deref().unwrap_or("value");
        let value = r.sweep_value.unwrap_or(f64::NAN);
        for s in &r.per_seed {
            let Some(m) = &s.metrics else { continue };
            for (name, v) in [("mse", Some(m.mse)), ("rmse", Some(m.rmse)), ("mape", m.mape)] {
                if let Some(v) = v {
                    out.push_str(&format!("{param},{value},{},{name},{v}\n", s.seed));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// plot-ready CSV
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    FitCurve,
    AugmentedScatter,
    SweepLines,
}

impl PlotKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fit_curve" | "fit-curve" => Ok(PlotKind::FitCurve),
            "augmented_scatter" | "augmented-scatter" => Ok(PlotKind::AugmentedScatter),
            "sweep_lines" | "sweep-lines" => Ok(PlotKind::SweepLines),
            other => Err(Error::InvalidConfig(format!(
                "unknown plot kind {other:?} (expected fit-curve, augmented-scatter or sweep-lines)"
            ))),
        }
    }
}

/// Formats a float in plain decimal notation, preserving round-trip
/// precision (shortest representation, same as Rust's float Display).
fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Turns persisted results into a plot-ready long-format CSV.
pub fn emit_plot_points(result_files: &[PathBuf], kind: PlotKind) -> Result<String> {
    let results: Vec<ExperimentResult> = result_files
        .iter()
        .map(|p| ExperimentResult::load(p))
        .collect::<Result<_>>()?;
    match kind {
        PlotKind::AugmentedScatter => {
            let mut out = String::from("source_index,group,gamma,x,y,x_aug,y_aug\n");
            let mut any = false;
            for r in &results {
                if let Some(rows) = &r.scatter {
                    any = true;
                    for s in rows {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            s.source_index,
                            s.group,
                            fmt(s.gamma),
                            fmt(s.x),
                            fmt(s.y),
                            fmt(s.x_aug),
                            fmt(s.y_aug)
                        ));
                    }
                }
            }
            if !any {
                return Err(Error::InvalidConfig(
                    "no augmented points in the given results; run an offline ada \
                     experiment on a 1-D dataset"
                        .into(),
                ));
            }
            Ok(out)
        }
        PlotKind::FitCurve => {
            let mut out = String::from("seed,x,truth,pred\n");
            let mut any = false;
            for r in &results {
                if let Some(points) = &r.fit_points {
                    any = true;
                    for p in points {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            p.seed,
                            fmt(p.x),
                            fmt(p.truth),
                            fmt(p.pred)
                        ));
                    }
                }
            }
            if !any {
                return Err(Error::InvalidConfig(
                    "no stored predictions in the given results; fit curves need a \
                     1-D dataset"
                        .into(),
                ));
            }
            Ok(out)
        }
        PlotKind::SweepLines => {
            let mut out = String::from("parameter,value,metric,mean,sd\n");
            let mut any = false;
            for r in &results {
                let (Some(param), Some(value), Some(agg)) =
                    (&r.sweep_parameter, r.sweep_value, &r.aggregate)
                else {
                    continue;
                };
                any = true;
                out.push_str(&format!(
                    "{param},{},mse,{},{}\n",
                    fmt(value),
                    fmt(agg.mse_mean),
                    fmt(agg.mse_sd)
                ));
                out.push_str(&format!(
                    "{param},{},rmse,{},{}\n",
                    fmt(value),
                    fmt(agg.rmse_mean),
                    fmt(agg.rmse_sd)
                ));
                if let (Some(m), Some(sd)) = (agg.mape_mean, agg.mape_sd) {
                    out.push_str(&format!(
                        "{param},{},mape,{},{}\n",
                        fmt(value),
                        fmt(m),
                        fmt(sd)
                    ));
                }
            }
            if !any {
                return Err(Error::InvalidConfig(
                    "no sweep results among the given files; run `sweep` first".into(),
                ));
            }
            Ok(out)
        }
    }
}
