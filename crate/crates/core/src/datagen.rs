//! Seeded synthetic data generators.
//!
//! Gaussian noise is drawn with `rand_distr::Normal` (ziggurat method) from a
//! ChaCha8 stream, so identical seeds give bitwise-identical datasets on
//! every platform.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, TargetVector};
use crate::error::{Error, Result};
use crate::rng::rng_for_stream;

/// 1-D cosine model: `y = cos(angular_freq * x) + eps`,
/// `eps ~ N(0, noise_sd^2)`, with `x` either equidistant on `[x_lo, x_hi]`
/// (endpoints included) or drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CosineConfig {
    pub n: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub angular_freq: f64,
    pub noise_sd: f64,
    pub grid: bool,
    pub seed: u64,
}

impl CosineConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("cosine data needs n >= 1".into()));
        }
        if !(self.x_hi > self.x_lo) {
            return Err(Error::InvalidConfig(format!(
                "cosine data needs x_hi > x_lo, got [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise_sd must be >= 0, got {}",
                self.noise_sd
            )));
        }
        Ok(())
    }
}

/// Generates the cosine dataset. Draw order: all x values (uniform mode
/// only), then all noise terms; the noiseless path consumes no randomness.
pub fn gen_cosine(cfg: &CosineConfig) -> Result<(DataMatrix, TargetVector)> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = rng_for_stream(cfg.seed, 0);
    let xs: Vec<f64> = if cfg.grid {
        if n == 1 {
            vec![cfg.x_lo]
        } else {
            (0..n)
                .map(|i| cfg.x_lo + (cfg.x_hi - cfg.x_lo) * i as f64 / (n - 1) as f64)
                .collect()
        }
    } else {
        (0..n)
            .map(|_| rng.random_range(cfg.x_lo..cfg.x_hi))
            .collect()
    };
    let mut ys: Vec<f64> = xs.iter().map(|&x| (cfg.angular_freq * x).cos()).collect();
    if cfg.noise_sd > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_sd).expect("validated noise_sd");
        for y in ys.iter_mut() {
            *y += normal.sample(&mut rng);
        }
    }
    Ok((DataMatrix::from_column(xs)?, TargetVector::from_vec(ys)?))
}

/// Linear model with latent anchor groups: group r shifts the mean of x by
/// `anchor_shift_strength * mu_r` for a seeded unit vector `mu_r`, and
/// `y = x . coef + eps`. Ground truth is returned for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScmConfig {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub anchor_shift_strength: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for LinearScmConfig {
    fn default() -> Self {
        Self {
            n: 100,
            d: 5,
            q: 3,
            anchor_shift_strength: 1.0,
            noise_sd: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearScmData {
    pub x: DataMatrix,
    pub y: TargetVector,
    pub true_coef: Array1<f64>,
    pub anchor_labels: Vec<usize>,
}

pub fn gen_linear_scm(cfg: &LinearScmConfig) -> Result<LinearScmData> {
    if cfg.n == 0 || cfg.d == 0 || cfg.q == 0 {
        return Err(Error::InvalidConfig(
            "linear scm needs n, d, q >= 1".into(),
        ));
    }
    if !(cfg.noise_sd >= 0.0 && cfg.noise_sd.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_sd must be >= 0, got {}",
            cfg.noise_sd
        )));
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");

    // independent child streams per component
    let mut dir_rng = rng_for_stream(cfg.seed, 0);
    let mut coef_rng = rng_for_stream(cfg.seed, 1);
    let mut label_rng = rng_for_stream(cfg.seed, 2);
    let mut base_rng = rng_for_stream(cfg.seed, 3);
    let mut noise_rng = rng_for_stream(cfg.seed, 4);

    let mut shifts = Array2::<f64>::zeros((cfg.q, cfg.d));
    for r in 0..cfg.q {
        let mut v: Vec<f64> = (0..cfg.d).map(|_| std_normal.sample(&mut dir_rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        for x in v.iter_mut() {
            *x /= norm;
        }
        for (j, x) in v.into_iter().enumerate() {
            shifts[[r, j]] = cfg.anchor_shift_strength * x;
        }
    }
    let true_coef = Array1::from_shape_fn(cfg.d, |_| std_normal.sample(&mut coef_rng));
    let labels: Vec<usize> = (0..cfg.n).map(|_| label_rng.random_range(0..cfg.q)).collect();

    let mut x = Array2::<f64>::zeros((cfg.n, cfg.d));
    for i in 0..cfg.n {
        for j in 0..cfg.d {
            x[[i, j]] = std_normal.sample(&mut base_rng) + shifts[[labels[i], j]];
        }
    }
    let mut y = x.dot(&true_coef);
    if cfg.noise_sd > 0.0 {
        let noise = Normal::new(0.0, cfg.noise_sd).expect("validated noise_sd");
        for v in y.iter_mut() {
            *v += noise.sample(&mut noise_rng);
        }
    }
    Ok(LinearScmData {
        x: DataMatrix::new(x)?,
        y: TargetVector::new(y)?,
        true_coef,
        anchor_labels: labels,
    })
}
