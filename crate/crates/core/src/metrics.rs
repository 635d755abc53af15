//! Prediction-quality metrics: MSE, RMSE and MAPE.

use serde::{Deserialize, Serialize};

use crate::data::TargetVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    /// Mean absolute percentage error (in percent). `None` when every truth
    /// entry is zero.
    pub mape: Option<f64>,
    /// Number of zero-truth entries excluded from the MAPE.
    pub mape_excluded: usize,
}

/// MSE, RMSE and MAPE of `pred` against `truth`. Zero-truth entries are
/// excluded from the MAPE and counted in `mape_excluded`.
pub fn metrics(pred: &TargetVector, truth: &TargetVector) -> Result<Metrics> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "metrics lengths",
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let n = truth.len() as f64;
    let mse = pred
        .values()
        .iter()
        .zip(truth.values().iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n;
    let mut ape_sum = 0.0;
    let mut ape_n = 0usize;
    for (p, t) in pred.values().iter().zip(truth.values().iter()) {
        if *t != 0.0 {
            ape_sum += ((p - t) / t).abs();
            ape_n += 1;
        }
    }
    let mape = if ape_n > 0 {
        Some(100.0 * ape_sum / ape_n as f64)
    } else {
        None
    };
    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        mape,
        mape_excluded: truth.len() - ape_n,
    })
}
