//! Anchor data augmentation and anchor regression for tabular regression.
//!
//! The library turns a partition of the training samples (from k-means or
//! binning) into an anchor projection operator, and uses it to
//!
//! * solve anchor regression in closed form by transforming the data and
//!   running ordinary least squares on it,
//! * generate augmented samples that move each point along the ray through
//!   its group centroid, with a gamma parameter controlling contraction or
//!   expansion, per minibatch or offline over a gamma grid,
//! * train a small MLP whose minibatches are augmented on the fly, and
//! * run reproducible benchmark experiments from config files via the
//!   `anchor-aug` CLI.
//!
//! Mixup and C-Mixup minibatch augmentation are included as baselines.
//!
//! All arithmetic is double precision and every randomized component is
//! driven by explicit 64-bit seeds, so runs are bitwise reproducible.

pub mod anchor;
pub mod augment;
pub mod bench;
pub mod data;
pub mod datagen;
pub mod error;
pub mod ingest;
mod linalg;
pub mod metrics;
pub mod mlp;
pub mod partition;
pub mod rng;
pub mod solver;

pub use anchor::{
    build_anchor_matrix, project_group_mean, projection_dense, AnchorAssignment, AnchorMatrix,
    ProjectionOperator,
};
pub use augment::{
    ada_minibatch, ada_transform, ar_transform, augment_dataset_offline, cmixup_minibatch,
    gamma_grid, mixup_minibatch, sample_gamma, AugmentedBatch, GammaGrid, GammaPrior,
    GammaPriorKind,
};
pub use data::{center_dataset, CenteredDataset, DataMatrix, TargetVector};
pub use error::{Error, ErrorCategory, Result};
pub use metrics::{metrics, Metrics};
pub use mlp::{mlp_train, Activation, AugmentationHook, Mlp, MlpConfig, OptimizerKind, TrainReport};
pub use partition::{equal_size_bins, equal_width_bins, kmeans, KMeansConfig, KMeansResult};
pub use solver::{anchor_loss, fit_anchor_regression, fit_ols, fit_ridge, LinearModel};
