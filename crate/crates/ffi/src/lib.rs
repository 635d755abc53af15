//! C ABI for the anchor-aug library.
//!
//! The surface follows the usual opaque-handle pattern: constructors return a
//! status code and write a `*mut` handle through an out parameter, every
//! handle has a matching `_free`, and the most recent error message is
//! available per thread from [`ada_last_error_message`]. Matrices cross the
//! boundary as row-major `double` buffers allocated by the caller.
//!
//! The generated header lives at `include/anchor_aug.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use anchor_aug::augment::{ada_minibatch, ada_transform, augment_dataset_offline};
use anchor_aug::bench;
use anchor_aug::{
    fit_anchor_regression, gamma_grid, kmeans, AnchorAssignment, DataMatrix, GammaPrior,
    KMeansConfig, ProjectionOperator, TargetVector,
};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SingularTransform = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty cstring"));
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("no interior nul");
    });
}

fn status_of(err: &anchor_aug::Error) -> AdaStatus {
    use anchor_aug::Error::*;
    set_error(&err.to_string());
    match err {
        DimensionMismatch { .. } | IndexOutOfRange { .. } => AdaStatus::DimensionMismatch,
        ZeroDenominator { .. } => AdaStatus::SingularTransform,
        InvalidConfig(_) | LabelOutOfRange { .. } | InvalidWeight { .. }
        | ValueOutOfRange { .. } | EmptyData { .. } | BatchTooSmall { .. } => {
            AdaStatus::InvalidArgument
        }
        _ => AdaStatus::InternalError,
    }
}

/// Message for the most recent error on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ada_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// A dataset handle: an n x d feature matrix with its n targets.
pub struct AdaDataset {
    x: DataMatrix,
    y: TargetVector,
}

/// A per-sample partition into q anchor groups.
pub struct AdaAssignment {
    inner: AnchorAssignment,
}

/// Deterministic random generator handle for the minibatch API.
pub struct AdaRng {
    inner: ChaCha8Rng,
}

unsafe fn slice_from<'a>(ptr: *const f64, len: usize) -> Option<&'a [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

unsafe fn slice_from_mut<'a>(ptr: *mut f64, len: usize) -> Option<&'a mut [f64]> {
    if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts_mut(ptr, len))
    }
}

macro_rules! nonnull {
    ($ptr:expr) => {
        match $ptr.as_ref() {
            Some(r) => r,
            None => {
                set_error("null pointer argument");
                return AdaStatus::NullPointer;
            }
        }
    };
}

/// Creates a dataset from a row-major `n x d` feature buffer and `n` targets.
///
/// # Safety
/// `x` must point to `n * d` readable doubles, `y` to `n`, and `out` must be
/// a valid location to store the handle. Free with [`ada_dataset_free`].
#[no_mangle]
pub unsafe extern "C" fn ada_dataset_new(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const f64,
    out: *mut *mut AdaDataset,
) -> AdaStatus {
    if out.is_null() {
        set_error("null out pointer");
        return AdaStatus::NullPointer;
    }
    let (Some(xs), Some(ys)) = (slice_from(x, n * d), slice_from(y, n)) else {
        set_error("null data pointer");
        return AdaStatus::NullPointer;
    };
    let xm = match ndarray_from(xs, n, d) {
        Ok(m) => m,
        Err(status) => return status,
    };
    let yv = match TargetVector::new(ys.to_vec().into()) {
        Ok(v) => v,
        Err(e) => return status_of(&e),
    };
    if xm.n() != yv.len() {
        set_error("x and y row counts differ");
        return AdaStatus::DimensionMismatch;
    }
    *out = Box::into_raw(Box::new(AdaDataset { x: xm, y: yv }));
    AdaStatus::Ok
}

fn ndarray_from(xs: &[f64], n: usize, d: usize) -> Result<DataMatrix, AdaStatus> {
    let arr = match ndarray::Array2::from_shape_vec((n, d), xs.to_vec()) {
        Ok(a) => a,
        Err(e) => {
            set_error(&e.to_string());
            return Err(AdaStatus::InvalidArgument);
        }
    };
    DataMatrix::new(arr).map_err(|e| status_of(&e))
}

/// # Safety
/// `ds` must be null or a handle from [`ada_dataset_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ada_dataset_free(ds: *mut AdaDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a valid dataset handle.
#[no_mangle]
pub unsafe extern "C" fn ada_dataset_rows(ds: *const AdaDataset) -> usize {
    ds.as_ref().map(|d| d.x.n()).unwrap_or(0)
}

/// # Safety
/// `ds` must be a valid dataset handle.
#[no_mangle]
pub unsafe extern "C" fn ada_dataset_cols(ds: *const AdaDataset) -> usize {
    ds.as_ref().map(|d| d.x.d()).unwrap_or(0)
}

/// Creates an assignment from `n` labels in `[0, q)`.
///
/// # Safety
/// `labels` must point to `n` readable values; `out` must be writable. Free
/// with [`ada_assignment_free`].
#[no_mangle]
pub unsafe extern "C" fn ada_assignment_new(
    labels: *const usize,
    n: usize,
    q: usize,
    out: *mut *mut AdaAssignment,
) -> AdaStatus {
    if labels.is_null() || out.is_null() {
        set_error("null pointer argument");
        return AdaStatus::NullPointer;
    }
    let ls = std::slice::from_raw_parts(labels, n);
    match AnchorAssignment::new(ls.to_vec(), q) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(AdaAssignment { inner }));
            AdaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `a` must be null or an assignment handle, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ada_assignment_free(a: *mut AdaAssignment) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// # Safety
/// `a` must be a valid assignment handle.
#[no_mangle]
pub unsafe extern "C" fn ada_assignment_len(a: *const AdaAssignment) -> usize {
    a.as_ref().map(|a| a.inner.n()).unwrap_or(0)
}

/// # Safety
/// `a` must be a valid assignment handle.
#[no_mangle]
pub unsafe extern "C" fn ada_assignment_groups(a: *const AdaAssignment) -> usize {
    a.as_ref().map(|a| a.inner.q()).unwrap_or(0)
}

/// Copies the labels into a caller buffer of length `len` (must equal the
/// assignment length).
///
/// # Safety
/// `a` must be a valid assignment handle and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn ada_assignment_labels(
    a: *const AdaAssignment,
    out: *mut usize,
    len: usize,
) -> AdaStatus {
    let a = nonnull!(a);
    if out.is_null() {
        set_error("null out pointer");
        return AdaStatus::NullPointer;
    }
    if len != a.inner.n() {
        set_error("label buffer length mismatch");
        return AdaStatus::DimensionMismatch;
    }
    std::slice::from_raw_parts_mut(out, len).copy_from_slice(a.inner.labels());
    AdaStatus::Ok
}

/// Clusters the dataset features into `q` groups with seeded k-means
/// (k-means++ init, 10 restarts) and returns the assignment.
///
/// # Safety
/// `ds` must be a valid dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ada_kmeans(
    ds: *const AdaDataset,
    q: usize,
    seed: u64,
    out: *mut *mut AdaAssignment,
) -> AdaStatus {
    let ds = nonnull!(ds);
    if out.is_null() {
        set_error("null out pointer");
        return AdaStatus::NullPointer;
    }
    match kmeans(&ds.x, &KMeansConfig::new(q, seed)) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(AdaAssignment {
                inner: result.assignment,
            }));
            AdaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Creates a seeded generator for [`ada_minibatch`].
#[no_mangle]
pub extern "C" fn ada_rng_new(seed: u64) -> *mut AdaRng {
    Box::into_raw(Box::new(AdaRng {
        inner: ChaCha8Rng::seed_from_u64(seed),
    }))
}

/// # Safety
/// `rng` must be null or a handle from [`ada_rng_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ada_rng_free(rng: *mut AdaRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

fn write_outputs(
    out_x: &mut [f64],
    out_y: &mut [f64],
    x: &DataMatrix,
    y: &TargetVector,
) -> AdaStatus {
    for (dst, src) in out_x.iter_mut().zip(x.values().iter()) {
        *dst = *src;
    }
    out_y.copy_from_slice(y.values().as_slice().expect("contiguous targets"));
    AdaStatus::Ok
}

/// Applies the scaled anchor transform for one gamma. `out_x` receives the
/// transformed features (row major, `n * d`), `out_y` the `n` targets.
///
/// # Safety
/// `ds` and `assignment` must be valid handles with matching row counts;
/// `out_x`/`out_y` must be writable for `n * d` / `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn ada_transform_apply(
    ds: *const AdaDataset,
    assignment: *const AdaAssignment,
    gamma: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> AdaStatus {
    let ds = nonnull!(ds);
    let assignment = nonnull!(assignment);
    let (Some(ox), Some(oy)) = (
        slice_from_mut(out_x, ds.x.n() * ds.x.d()),
        slice_from_mut(out_y, ds.x.n()),
    ) else {
        set_error("null output pointer");
        return AdaStatus::NullPointer;
    };
    let pi = ProjectionOperator::for_assignment(&assignment.inner);
    match ada_transform(&ds.x, &ds.y, &pi, gamma) {
        Ok((x, y)) => write_outputs(ox, oy, &x, &y),
        Err(e) => status_of(&e),
    }
}

/// Rows produced by [`ada_augment_offline`] for a dataset of `n` samples and
/// `n_aug` augmentations per sample.
#[no_mangle]
pub extern "C" fn ada_augment_rows(n: usize, n_aug: usize) -> usize {
    n * (n_aug + 1)
}

/// Offline augmentation over the symmetric gamma grid for `alpha` with
/// `n_aug` values (even, >= 2). Output buffers must hold
/// `ada_augment_rows(n, n_aug) * d` and `ada_augment_rows(n, n_aug)` doubles.
///
/// # Safety
/// `ds` and `assignment` must be valid handles with matching row counts;
/// output buffers must be writable at the documented sizes.
#[no_mangle]
pub unsafe extern "C" fn ada_augment_offline(
    ds: *const AdaDataset,
    assignment: *const AdaAssignment,
    alpha: f64,
    n_aug: usize,
    out_x: *mut f64,
    out_y: *mut f64,
) -> AdaStatus {
    let ds = nonnull!(ds);
    let assignment = nonnull!(assignment);
    let rows = ds.x.n() * (n_aug + 1);
    let (Some(ox), Some(oy)) = (
        slice_from_mut(out_x, rows * ds.x.d()),
        slice_from_mut(out_y, rows),
    ) else {
        set_error("null output pointer");
        return AdaStatus::NullPointer;
    };
    let grid = match gamma_grid(alpha, n_aug) {
        Ok(g) => g,
        Err(e) => return status_of(&e),
    };
    match augment_dataset_offline(&ds.x, &ds.y, &assignment.inner, &grid) {
        Ok((x, y)) => write_outputs(ox, oy, &x, &y),
        Err(e) => status_of(&e),
    }
}

/// One augmented minibatch: draws gamma uniformly from `[1/alpha, alpha]`
/// using the generator handle and applies the scaled transform to the whole
/// dataset handle (callers pass the batch as the dataset). The drawn gamma is
/// written to `out_gamma`.
///
/// # Safety
/// All handles must be valid; `out_x`/`out_y`/`out_gamma` must be writable
/// for `n * d`, `n` and 1 doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn ada_minibatch_apply(
    ds: *const AdaDataset,
    assignment: *const AdaAssignment,
    alpha: f64,
    rng: *mut AdaRng,
    out_x: *mut f64,
    out_y: *mut f64,
    out_gamma: *mut f64,
) -> AdaStatus {
    let ds = nonnull!(ds);
    let assignment = nonnull!(assignment);
    let Some(rng) = rng.as_mut() else {
        set_error("null rng handle");
        return AdaStatus::NullPointer;
    };
    if out_gamma.is_null() {
        set_error("null out_gamma pointer");
        return AdaStatus::NullPointer;
    }
    let (Some(ox), Some(oy)) = (
        slice_from_mut(out_x, ds.x.n() * ds.x.d()),
        slice_from_mut(out_y, ds.x.n()),
    ) else {
        set_error("null output pointer");
        return AdaStatus::NullPointer;
    };
    let prior = match GammaPrior::uniform(alpha) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    match ada_minibatch(&ds.x, &ds.y, &assignment.inner, &prior, &mut rng.inner) {
        Ok(batch) => {
            *out_gamma = batch.gamma;
            write_outputs(ox, oy, &batch.x, &batch.y)
        }
        Err(e) => status_of(&e),
    }
}

/// Closed-form anchor regression on the dataset for the given partition and
/// gamma. Writes `d` coefficients and the intercept.
///
/// # Safety
/// Handles must be valid; `out_coef` must be writable for `d` doubles and
/// `out_intercept` for one.
#[no_mangle]
pub unsafe extern "C" fn ada_fit_anchor_regression(
    ds: *const AdaDataset,
    assignment: *const AdaAssignment,
    gamma: f64,
    out_coef: *mut f64,
    out_intercept: *mut f64,
) -> AdaStatus {
    let ds = nonnull!(ds);
    let assignment = nonnull!(assignment);
    let Some(oc) = slice_from_mut(out_coef, ds.x.d()) else {
        set_error("null coefficient pointer");
        return AdaStatus::NullPointer;
    };
    if out_intercept.is_null() {
        set_error("null intercept pointer");
        return AdaStatus::NullPointer;
    }
    match fit_anchor_regression(&ds.x, &ds.y, &assignment.inner, gamma) {
        Ok(model) => {
            oc.copy_from_slice(model.coef.as_slice().expect("contiguous coefficients"));
            *out_intercept = model.intercept;
            AdaStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Runs a benchmark experiment from a TOML config file and writes the
/// results JSON to `out_path`. Paths are NUL-terminated UTF-8.
///
/// # Safety
/// `config_path` and `out_path` must be valid NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ada_run_experiment_file(
    config_path: *const c_char,
    out_path: *const c_char,
    threads: usize,
) -> AdaStatus {
    if config_path.is_null() || out_path.is_null() {
        set_error("null path argument");
        return AdaStatus::NullPointer;
    }
    let parse = |p: *const c_char| -> Result<std::path::PathBuf, AdaStatus> {
        match std::ffi::CStr::from_ptr(p).to_str() {
            Ok(s) => Ok(std::path::PathBuf::from(s)),
            Err(_) => {
                set_error("path is not valid UTF-8");
                Err(AdaStatus::InvalidArgument)
            }
        }
    };
    let config_path = match parse(config_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let out_path = match parse(out_path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    let cfg = match bench::ExperimentConfig::load(&config_path) {
        Ok(c) => c,
        Err(e) => return status_of(&e),
    };
    let result = match bench::run_experiment(&cfg, threads.max(1)) {
        Ok(r) => r,
        Err(e) => return status_of(&e),
    };
    match result.save(&out_path) {
        Ok(()) => AdaStatus::Ok,
        Err(e) => status_of(&e),
    }
}
