//! Core dataset types: predictor matrix, target vector and centered pairs.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Predictor matrix, samples as rows. Guaranteed non-empty and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyData {
                n: values.nrows(),
                d: values.ncols(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("data matrix"));
        }
        Ok(Self { values })
    }

    /// Single-column matrix from a plain vector, for 1-D problems.
    pub fn from_column(v: Vec<f64>) -> Result<Self> {
        let n = v.len();
        let values = Array2::from_shape_vec((n, 1), v).expect("vector reshapes to n x 1");
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    /// New matrix from the given rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> DataMatrix {
        DataMatrix {
            values: self.values.select(Axis(0), idx),
        }
    }

    pub fn column(&self, j: usize) -> Result<Array1<f64>> {
        if j >= self.d() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.d(),
            });
        }
        Ok(self.values.column(j).to_owned())
    }
}

/// Regression targets paired with a [`DataMatrix`]. Guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetVector {
    values: Array1<f64>,
}

impl TargetVector {
    pub fn new(values: Array1<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData { n: 0, d: 1 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target vector"));
        }
        Ok(Self { values })
    }

    pub fn from_vec(v: Vec<f64>) -> Result<Self> {
        Self::new(Array1::from_vec(v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView1<'_, f64> {
        self.values.view()
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    pub fn select(&self, idx: &[usize]) -> TargetVector {
        TargetVector {
            values: self.values.select(Axis(0), idx),
        }
    }
}

/// A centered `(x, y)` pair together with the means that were removed.
///
/// Produced by [`center_dataset`], in which case the column means of `x` and
/// the mean of `y` are zero to within 1e-9. [`CenteredDataset::from_parts`]
/// skips that guarantee; it exists so validation or test splits can be
/// shifted by the *training* means before being fed to a model.
#[derive(Debug, Clone)]
pub struct CenteredDataset {
    pub x: DataMatrix,
    pub y: TargetVector,
    pub x_mean: Array1<f64>,
    pub y_mean: f64,
}

impl CenteredDataset {
    /// Builds the pair without re-centering; `x`/`y` are stored as given.
    pub fn from_parts(
        x: DataMatrix,
        y: TargetVector,
        x_mean: Array1<f64>,
        y_mean: f64,
    ) -> Result<Self> {
        if x.n() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "centered dataset rows",
                expected: x.n(),
                actual: y.len(),
            });
        }
        if x_mean.len() != x.d() {
            return Err(Error::DimensionMismatch {
                context: "centered dataset mean length",
                expected: x.d(),
                actual: x_mean.len(),
            });
        }
        Ok(Self {
            x,
            y,
            x_mean,
            y_mean,
        })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn d(&self) -> usize {
        self.x.d()
    }

    /// Adds the stored means back, reproducing the original data.
    pub fn uncenter(&self) -> (DataMatrix, TargetVector) {
        let x = &self.x.values + &self.x_mean;
        let y = &self.y.values + self.y_mean;
        (DataMatrix { values: x }, TargetVector { values: y })
    }

    /// Shifts a foreign `(x, y)` pair by this dataset's means. Used to put
    /// validation/test data on the same scale as the centered training data.
    pub fn center_other(&self, x: &DataMatrix, y: &TargetVector) -> Result<CenteredDataset> {
        if x.d() != self.d() {
            return Err(Error::DimensionMismatch {
                context: "centering foreign data",
                expected: self.d(),
                actual: x.d(),
            });
        }
        let xc = &x.values - &self.x_mean;
        let yc = &y.values - self.y_mean;
        CenteredDataset::from_parts(
            DataMatrix { values: xc },
            TargetVector { values: yc },
            self.x_mean.clone(),
            self.y_mean,
        )
    }
}

/// Removes column means from `x` and the mean from `y`.
///
/// A second refinement pass subtracts the residual means left by the first
/// pass, so the output means are zero well within 1e-9 even for badly scaled
/// inputs. The stored means are the sum of both passes, which makes
/// [`CenteredDataset::uncenter`] reproduce the inputs to within rounding.
pub fn center_dataset(x: &DataMatrix, y: &TargetVector) -> Result<CenteredDataset> {
    if x.n() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "center_dataset rows",
            expected: x.n(),
            actual: y.len(),
        });
    }
    let mut xc = x.values.clone();
    let mut x_mean = xc.mean_axis(Axis(0)).expect("non-empty matrix");
    xc -= &x_mean;
    let resid = xc.mean_axis(Axis(0)).expect("non-empty matrix");
    xc -= &resid;
    x_mean += &resid;

    let mut yc = y.values.clone();
    let mut y_mean = yc.mean().expect("non-empty vector");
    yc -= y_mean;
    let resid_y = yc.mean().expect("non-empty vector");
    yc -= resid_y;
    y_mean += resid_y;

    CenteredDataset::from_parts(
        DataMatrix { values: xc },
        TargetVector { values: yc },
        x_mean,
        y_mean,
    )
}
