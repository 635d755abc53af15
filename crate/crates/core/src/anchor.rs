//! Anchor assignments, the anchor indicator matrix and the induced
//! projection operator.
//!
//! For a one-hot anchor matrix the projection `A (A^T A)^+ A^T` replaces each
//! row with its group mean, so the operator is kept in a compact group-index
//! form by default. The dense form materializes the full n x n matrix through
//! the pseudo-inverse and exists as an oracle for tests and as the execution
//! path for weighted anchors.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::sym_pinv;

/// Per-sample partition labels, with optional positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorAssignment {
    labels: Vec<usize>,
    q: usize,
    weights: Option<Vec<f64>>,
}

impl AnchorAssignment {
    pub fn new(labels: Vec<usize>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidConfig("q must be at least 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyData { n: 0, d: 1 });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= q) {
            return Err(Error::LabelOutOfRange { label: bad, q });
        }
        Ok(Self {
            labels,
            q,
            weights: None,
        })
    }

    pub fn with_weights(labels: Vec<usize>, q: usize, weights: Vec<f64>) -> Result<Self> {
        let mut a = Self::new(labels, q)?;
        if weights.len() != a.labels.len() {
            return Err(Error::DimensionMismatch {
                context: "assignment weights",
                expected: a.labels.len(),
                actual: weights.len(),
            });
        }
        if let Some((i, &w)) = weights
            .iter()
            .enumerate()
            .find(|(_, &w)| !(w.is_finite() && w > 0.0))
        {
            return Err(Error::InvalidWeight { index: i, value: w });
        }
        a.weights = Some(weights);
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Number of samples per group; empty groups report 0.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.q];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Restricts the assignment to the given rows, keeping `q` unchanged.
    /// Group sizes are recomputed from the selected rows only.
    pub fn select(&self, idx: &[usize]) -> Result<AnchorAssignment> {
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            let l = *self.labels.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.labels.len(),
            })?;
            labels.push(l);
        }
        let mut out = AnchorAssignment::new(labels, self.q)?;
        if let Some(w) = &self.weights {
            out.weights = Some(idx.iter().map(|&i| w[i]).collect());
        }
        Ok(out)
    }
}

/// The n x q anchor indicator matrix: one nonzero per row, equal to 1 for
/// unweighted assignments and to sqrt(weight) for weighted ones.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorMatrix {
    a: Array2<f64>,
}

impl AnchorMatrix {
    /// Validates an explicit matrix: exactly one strictly positive, finite
    /// entry per row.
    pub fn new(a: Array2<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptyData {
                n: a.nrows(),
                d: a.ncols(),
            });
        }
        for (i, row) in a.rows().into_iter().enumerate() {
            let nonzero: Vec<f64> = row.iter().cloned().filter(|v| *v != 0.0).collect();
            if nonzero.len() != 1 || !(nonzero[0].is_finite() && nonzero[0] > 0.0) {
                return Err(Error::InvalidWeight {
                    index: i,
                    value: nonzero.first().cloned().unwrap_or(0.0),
                });
            }
        }
        Ok(Self { a })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn q(&self) -> usize {
        self.a.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.a
    }
}

/// One-hot (or sqrt-weight scaled) anchor matrix for an assignment.
pub fn build_anchor_matrix(assignment: &AnchorAssignment) -> AnchorMatrix {
    let n = assignment.n();
    let q = assignment.q();
    let mut a = Array2::zeros((n, q));
    for (i, &l) in assignment.labels().iter().enumerate() {
        a[[i, l]] = match assignment.weights() {
            Some(w) => w[i].sqrt(),
            None => 1.0,
        };
    }
    AnchorMatrix { a }
}

/// Projection onto the column span of an anchor matrix.
#[derive(Debug, Clone)]
pub enum ProjectionOperator {
    /// Group-mean form for unweighted one-hot anchors: O(n) storage.
    Compact {
        assignment: AnchorAssignment,
        group_sizes: Vec<usize>,
    },
    /// Materialized `A (A^T A)^+ A^T`.
    Dense { pi: Array2<f64> },
}

impl ProjectionOperator {
    /// Compact group-mean operator. Only valid for unweighted assignments;
    /// weighted anchors must go through [`projection_dense`].
    pub fn compact(assignment: &AnchorAssignment) -> Result<Self> {
        if assignment.is_weighted() {
            return Err(Error::InvalidConfig(
                "compact projection requires an unweighted assignment".into(),
            ));
        }
        Ok(ProjectionOperator::Compact {
            group_sizes: assignment.group_sizes(),
            assignment: assignment.clone(),
        })
    }

    /// Picks the compact form when possible, the dense form otherwise.
    pub fn for_assignment(assignment: &AnchorAssignment) -> Self {
        if assignment.is_weighted() {
            projection_dense(&build_anchor_matrix(assignment))
        } else {
            Self::compact(assignment).expect("unweighted assignment")
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ProjectionOperator::Compact { assignment, .. } => assignment.n(),
            ProjectionOperator::Dense { pi } => pi.nrows(),
        }
    }

    /// Applies the projection to a matrix of row vectors.
    pub fn apply(&self, m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        match self {
            ProjectionOperator::Compact { assignment, .. } => project_group_mean(assignment, m),
            ProjectionOperator::Dense { pi } => {
                if pi.ncols() != m.nrows() {
                    return Err(Error::DimensionMismatch {
                        context: "projection apply rows",
                        expected: pi.ncols(),
                        actual: m.nrows(),
                    });
                }
                Ok(pi.dot(&m))
            }
        }
    }

    pub fn apply_vec(&self, v: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        let m = v.insert_axis(ndarray::Axis(1));
        let out = self.apply(m)?;
        Ok(out.column(0).to_owned())
    }

    /// Row sum `sum_j pi[i][j]`, the denominator term of the scaled
    /// transform. Exactly 1 in compact form.
    pub fn row_sum(&self, i: usize) -> Result<f64> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n(),
            });
        }
        match self {
            ProjectionOperator::Compact { .. } => Ok(1.0),
            ProjectionOperator::Dense { pi } => Ok(pi.row(i).sum()),
        }
    }

    /// All row sums at once.
    pub fn row_sums(&self) -> Array1<f64> {
        match self {
            ProjectionOperator::Compact { assignment, .. } => Array1::ones(assignment.n()),
            ProjectionOperator::Dense { pi } => pi.sum_axis(ndarray::Axis(1)),
        }
    }

    pub fn dense_matrix(&self) -> Option<&Array2<f64>> {
        match self {
            ProjectionOperator::Dense { pi } => Some(pi),
            ProjectionOperator::Compact { .. } => None,
        }
    }
}

/// Dense projection `A (A^T A)^+ A^T`. The pseudo-inverse makes empty anchor
/// groups (all-zero columns of `A`) harmless.
pub fn projection_dense(a: &AnchorMatrix) -> ProjectionOperator {
    let gram = a.values().t().dot(a.values());
    let ginv = sym_pinv(&gram);
    let pi = a.values().dot(&ginv).dot(&a.values().t());
    ProjectionOperator::Dense { pi }
}

/// Replaces each row of `m` with the mean of the rows sharing its label.
///
/// Sums run in ascending sample index so results are bit-for-bit
/// reproducible. Groups with no members simply never contribute.
pub fn project_group_mean(
    assignment: &AnchorAssignment,
    m: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let n = assignment.n();
    if m.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "project_group_mean rows",
            expected: n,
            actual: m.nrows(),
        });
    }
    let q = assignment.q();
    let k = m.ncols();
    let mut sums = Array2::<f64>::zeros((q, k));
    let sizes = assignment.group_sizes();
    for (i, &l) in assignment.labels().iter().enumerate() {
        let mut acc = sums.row_mut(l);
        acc += &m.row(i);
    }
    for (g, &sz) in sizes.iter().enumerate() {
        if sz > 0 {
            let mut row = sums.row_mut(g);
            row /= sz as f64;
        }
    }
    let mut out = Array2::<f64>::zeros((n, k));
    for (i, &l) in assignment.labels().iter().enumerate() {
        out.row_mut(i).assign(&sums.row(l));
    }
    Ok(out)
}
