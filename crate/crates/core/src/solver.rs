//! Closed-form linear solvers: OLS, ridge and anchor regression, plus the
//! anchor loss itself.
//!
//! All solvers center the data internally and recover the intercept from the
//! removed means, so callers can pass raw or centered data interchangeably.
//! The normal equations are solved through a symmetric eigendecomposition;
//! with a singular gram (n < d or collinear features) this yields the
//! minimum-norm solution.

use ndarray::Array1;

use crate::anchor::{AnchorAssignment, ProjectionOperator};
use crate::augment::ar_transform;
use crate::data::{center_dataset, DataMatrix, TargetVector};
use crate::error::{Error, Result};
use crate::linalg::sym_solve;

/// Linear predictor `y = x . coef + intercept`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub coef: Array1<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &DataMatrix) -> Result<TargetVector> {
        if x.d() != self.coef.len() {
            return Err(Error::DimensionMismatch {
                context: "predict features",
                expected: self.coef.len(),
                actual: x.d(),
            });
        }
        let y = x.values().dot(&self.coef) + self.intercept;
        TargetVector::new(y)
    }
}

fn fit_centered(x: &DataMatrix, y: &TargetVector, ridge: f64) -> Result<LinearModel> {
    let c = center_dataset(x, y)?;
    let xc = c.x.values();
    let yc = c.y.values();
    let gram = xc.t().dot(xc);
    let rhs = xc.t().dot(yc);
    let coef = sym_solve(&gram, &rhs, ridge);
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("linear solve"));
    }
    let intercept = c.y_mean - c.x_mean.dot(&coef);
    Ok(LinearModel { coef, intercept })
}

/// Ordinary least squares. Minimum-norm solution when the gram is singular.
pub fn fit_ols(x: &DataMatrix, y: &TargetVector) -> Result<LinearModel> {
    fit_centered(x, y, 0.0)
}

/// Ridge regression `(x^T x + lambda I)^-1 x^T y` on centered data; the
/// intercept is not penalized. `lambda = 0` reduces to [`fit_ols`].
pub fn fit_ridge(x: &DataMatrix, y: &TargetVector, lambda: f64) -> Result<LinearModel> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ridge lambda must be >= 0, got {lambda}"
        )));
    }
    fit_centered(x, y, lambda)
}

/// The anchor objective
/// `||(I - pi)(y - x b)||^2 + gamma ||pi (y - x b)||^2`
/// evaluated at a model (residuals include the intercept).
pub fn anchor_loss(
    model: &LinearModel,
    x: &DataMatrix,
    y: &TargetVector,
    pi: &ProjectionOperator,
    gamma: f64,
) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    let pred = model.predict(x)?;
    let resid = y.values() - pred.values();
    let proj = pi.apply_vec(resid.view())?;
    let kept = &resid - &proj;
    Ok(kept.dot(&kept) + gamma * proj.dot(&proj))
}

/// Anchor regression via the transformed-OLS identity: center, apply the
/// plain anchor modification for `gamma`, then solve OLS. The intercept is
/// recovered from the original (pre-transform) means.
///
/// `gamma = 1` coincides with OLS; `gamma = 0` is OLS after within-group
/// centering ("partialling out").
pub fn fit_anchor_regression(
    x: &DataMatrix,
    y: &TargetVector,
    assignment: &AnchorAssignment,
    gamma: f64,
) -> Result<LinearModel> {
    if assignment.n() != x.n() {
        return Err(Error::DimensionMismatch {
            context: "anchor regression assignment rows",
            expected: x.n(),
            actual: assignment.n(),
        });
    }
    let c = center_dataset(x, y)?;
    let pi = ProjectionOperator::for_assignment(assignment);
    let (xt, yt) = ar_transform(&c.x, &c.y, &pi, gamma)?;
    let gram = xt.values().t().dot(xt.values());
    let rhs = xt.values().t().dot(yt.values());
    let coef = sym_solve(&gram, &rhs, 0.0);
    if coef.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("anchor regression solve"));
    }
    let intercept = c.y_mean - c.x_mean.dot(&coef);
    Ok(LinearModel { coef, intercept })
}
