//! Loading small tabular regression datasets from delimited text files:
//! numeric parsing with mean imputation, min-max feature normalization and
//! train/validation/test splitting.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{DataMatrix, TargetVector};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Feature normalization applied to a [`TabularDataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Normalization {
    None,
    /// Per-feature min-max: `(v - lo) / (hi - lo)`, constant columns map to 0.
    MinMax { lo: Vec<f64>, hi: Vec<f64> },
}

impl Normalization {
    /// Undoes the normalization on a feature matrix.
    pub fn inverse(&self, x: &DataMatrix) -> DataMatrix {
        match self {
            Normalization::None => x.clone(),
            Normalization::MinMax { lo, hi } => {
                let mut v = x.values().clone();
                for (j, mut col) in v.columns_mut().into_iter().enumerate() {
                    let range = hi[j] - lo[j];
                    col.mapv_inplace(|s| s * range + lo[j]);
                }
                DataMatrix::new(v).expect("inverse of finite data")
            }
        }
    }
}

/// A loaded tabular dataset: features, target, names and any normalization
/// that has been applied to the features.
#[derive(Debug, Clone)]
pub struct TabularDataset {
    pub x: DataMatrix,
    pub y: TargetVector,
    pub feature_names: Vec<String>,
    pub normalization: Normalization,
}

impl TabularDataset {
    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn d(&self) -> usize {
        self.x.d()
    }

    fn select(&self, idx: &[usize]) -> TabularDataset {
        TabularDataset {
            x: self.x.select_rows(idx),
            y: self.y.select(idx),
            feature_names: self.feature_names.clone(),
            normalization: self.normalization.clone(),
        }
    }
}

/// Which column holds the regression target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSpec {
    Name(String),
    Index(usize),
}

/// CSV parsing options. `missing` values (matched case-insensitively) are
/// imputed with the column mean after the full file is read.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub has_header: bool,
    pub missing_tokens: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            missing_tokens: vec!["".into(), "?".into(), "na".into(), "nan".into()],
        }
    }
}

/// Reads a delimited numeric file. Missing feature cells are imputed with
/// their column mean; a missing or non-numeric target cell is an error, as is
/// a row with the wrong number of fields (both reported with line numbers).
pub fn load_csv(path: &Path, target: &ColumnSpec, opts: &LoadOptions) -> Result<TabularDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers: Vec<String> = if opts.has_header {
        reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect()
    } else {
        Vec::new()
    };

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut width: Option<usize> = None;
    for (ri, record) in reader.records().enumerate() {
        let line = ri + 1 + usize::from(opts.has_header);
        let record = record.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue; // blank line
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        let mut row = Vec::with_capacity(record.len());
        for (ci, cell) in record.iter().enumerate() {
            let lower = cell.to_ascii_lowercase();
            if opts.missing_tokens.iter().any(|t| *t == lower) {
                row.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("column {ci}: cannot parse {cell:?} as a number"),
                })?;
                row.push(Some(v));
            }
        }
        rows.push(row);
    }
    let width = width.ok_or(Error::EmptyData { n: 0, d: 0 })?;
    if opts.has_header && headers.len() != width {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "header has {} fields but rows have {width}",
                headers.len()
            ),
        });
    }

    let names: Vec<String> = if opts.has_header {
        headers
    } else {
        (0..width).map(|i| format!("col{i}")).collect()
    };
    let target_idx = match target {
        ColumnSpec::Index(i) => {
            if *i >= width {
                return Err(Error::MissingColumn(format!("index {i}")));
            }
            *i
        }
        ColumnSpec::Name(name) => names
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?,
    };

    let n = rows.len();
    let d = width - 1;
    if d == 0 {
        return Err(Error::EmptyData { n, d: 0 });
    }

    // column means over present values, for imputation
    let mut sums = vec![0.0_f64; width];
    let mut counts = vec![0usize; width];
    for row in &rows {
        for (c, v) in row.iter().enumerate() {
            if let Some(v) = v {
                sums[c] += v;
                counts[c] += 1;
            }
        }
    }

    let mut x = Array2::<f64>::zeros((n, d));
    let mut y = Array1::<f64>::zeros(n);
    for (r, row) in rows.iter().enumerate() {
        let mut fc = 0usize;
        for (c, v) in row.iter().enumerate() {
            if c == target_idx {
                y[r] = v.ok_or(Error::Parse {
                    line: r + 1 + usize::from(opts.has_header),
                    message: "missing target value".into(),
                })?;
            } else {
                let value = match v {
                    Some(v) => *v,
                    None => {
                        if counts[c] == 0 {
                            return Err(Error::EmptyColumn(names[c].clone()));
                        }
                        sums[c] / counts[c] as f64
                    }
                };
                x[[r, fc]] = value;
                fc += 1;
            }
        }
    }
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .map(|(_, n)| n.clone())
        .collect();
    Ok(TabularDataset {
        x: DataMatrix::new(x)?,
        y: TargetVector::new(y)?,
        feature_names,
        normalization: Normalization::None,
    })
}

/// Min-max normalizes every feature to `[0, 1]`, storing the per-feature
/// ranges for the inverse. Constant columns are mapped to 0 with a warning.
pub fn minmax_normalize(ds: &TabularDataset) -> TabularDataset {
    let d = ds.d();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for row in ds.x.values().rows() {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let mut x = ds.x.values().clone();
    for (j, mut col) in x.columns_mut().into_iter().enumerate() {
        let range = hi[j] - lo[j];
        if range > 0.0 {
            col.mapv_inplace(|v| (v - lo[j]) / range);
        } else {
            log::warn!(
                "feature {:?} is constant; min-max maps it to 0",
                ds.feature_names.get(j).map(String::as_str).unwrap_or("?")
            );
            col.fill(0.0);
        }
    }
    TabularDataset {
        x: DataMatrix::new(x).expect("finite normalized data"),
        y: ds.y.clone(),
        feature_names: ds.feature_names.clone(),
        normalization: Normalization::MinMax { lo, hi },
    }
}

/// Split sizes, either absolute counts (must sum to n) or fractions (must
/// sum to at most 1; rounding leftovers go to the training split when the
/// fractions sum to 1, otherwise the remainder is dropped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSizes {
    Counts { train: usize, val: usize, test: usize },
    Fractions { train: f64, val: f64, test: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub sizes: SplitSizes,
    #[serde(default)]
    pub seed: u64,
    /// Keep file order (chronological) instead of a seeded shuffle.
    #[serde(default)]
    pub ordered: bool,
}

impl SplitSpec {
    fn resolve(&self, n: usize) -> Result<(usize, usize, usize)> {
        match &self.sizes {
            SplitSizes::Counts { train, val, test } => {
                if train + val + test != n {
                    return Err(Error::InvalidConfig(format!(
                        "split counts {train}+{val}+{test} do not sum to n={n}"
                    )));
                }
                Ok((*train, *val, *test))
            }
            SplitSizes::Fractions { train, val, test } => {
                for f in [train, val, test] {
                    if !(f.is_finite() && *f >= 0.0 && *f <= 1.0) {
                        return Err(Error::InvalidConfig(format!(
                            "split fraction {f} out of [0, 1]"
                        )));
                    }
                }
                let total = train + val + test;
                if total > 1.0 + 1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "split fractions sum to {total} > 1"
                    )));
                }
                let nt = (train * n as f64).floor() as usize;
                let nv = (val * n as f64).floor() as usize;
                let ns = (test * n as f64).floor() as usize;
                if (total - 1.0).abs() <= 1e-9 {
                    // exhaustive split: leftover rows go to train
                    Ok((n - nv - ns, nv, ns))
                } else {
                    Ok((nt, nv, ns))
                }
            }
        }
    }
}

/// Splits into (train, val, test); disjoint, and exhaustive whenever the
/// sizes cover the whole dataset.
pub fn split(
    ds: &TabularDataset,
    spec: &SplitSpec,
) -> Result<(TabularDataset, TabularDataset, TabularDataset)> {
    let n = ds.n();
    let (nt, nv, ns) = spec.resolve(n)?;
    let mut idx: Vec<usize> = (0..n).collect();
    if !spec.ordered {
        idx.shuffle(&mut rng_from_seed(spec.seed));
    }
    let train = ds.select(&idx[..nt]);
    let val = ds.select(&idx[nt..nt + nv]);
    let test = ds.select(&idx[nt + nv..nt + nv + ns]);
    Ok((train, val, test))
}

/// On-disk description of a dataset: file location, parsing options, target
/// column, normalization and split. The data path is resolved relative to
/// the descriptor file's directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default)]
    pub has_header: bool,
    pub target: ColumnSpec,
    #[serde(default)]
    pub minmax: bool,
    pub split: SplitSpec,
}

fn default_delimiter() -> String {
    ",".into()
}

impl DatasetDescriptor {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut desc: DatasetDescriptor = toml::from_str(&text)?;
        if desc.path.is_relative() {
            if let Some(dir) = path.parent() {
                desc.path = dir.join(&desc.path);
            }
        }
        Ok(desc)
    }

    fn delimiter_byte(&self) -> Result<u8> {
        match self.delimiter.as_str() {
            "\\t" | "\t" | "tab" => Ok(b'\t'),
            s if s.len() == 1 => Ok(s.as_bytes()[0]),
            other => Err(Error::InvalidConfig(format!(
                "delimiter must be a single character or \"tab\", got {other:?}"
            ))),
        }
    }

    /// Loads, optionally normalizes, and returns the full dataset.
    pub fn load_dataset(&self) -> Result<TabularDataset> {
        let opts = LoadOptions {
            delimiter: self.delimiter_byte()?,
            has_header: self.has_header,
            ..Default::default()
        };
        let ds = load_csv(&self.path, &self.target, &opts)?;
        Ok(if self.minmax { minmax_normalize(&ds) } else { ds })
    }

    /// Loads and splits per this descriptor, with the split seed overridden.
    pub fn load_splits(
        &self,
        seed_override: Option<u64>,
    ) -> Result<(TabularDataset, TabularDataset, TabularDataset)> {
        let ds = self.load_dataset()?;
        let mut spec = self.split.clone();
        if let Some(seed) = seed_override {
            spec.seed = seed;
        }
        split(&ds, &spec)
    }
}
