//! Anchor construction by partitioning: k-means clustering and equal-width /
//! equal-size binning of a scalar feature.

use ndarray::{Array1, Array2, ArrayView1};
use rand::Rng;

use crate::anchor::AnchorAssignment;
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::rng_for_stream;

/// Lloyd's algorithm configuration. `tol` is the relative drop in inertia
/// below which a run stops.
#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub q: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub n_init: usize,
}

impl KMeansConfig {
    pub fn new(q: usize, seed: u64) -> Self {
        Self {
            q,
            max_iter: 300,
            tol: 1e-6,
            seed,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: AnchorAssignment,
    pub centroids: Array2<f64>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: ArrayView1<'_, f64>, centroids: &Array2<f64>) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, row) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(point, row);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first centroid uniform, the rest sampled with
/// probability proportional to squared distance from the chosen set.
fn kmeanspp_init(x: &Array2<f64>, q: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = x.nrows();
    let d = x.ncols();
    let mut centroids = Array2::<f64>::zeros((q, d));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&x.row(first));

    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(x.row(i), centroids.row(0)))
        .collect();
    for c in 1..q {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let u: f64 = rng.random_range(0.0..total);
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if u < acc {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            // all remaining distances zero (duplicate points); pick uniformly
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&x.row(pick));
        for i in 0..n {
            let nd = sq_dist(x.row(i), centroids.row(c));
            if nd < d2[i] {
                d2[i] = nd;
            }
        }
    }
    centroids
}

struct LloydRun {
    labels: Vec<usize>,
    centroids: Array2<f64>,
    inertia: f64,
    iterations: usize,
}

fn lloyd(x: &Array2<f64>, q: usize, cfg: &KMeansConfig, rng: &mut impl Rng) -> LloydRun {
    let n = x.nrows();
    let d = x.ncols();
    let mut centroids = kmeanspp_init(x, q, rng);
    let mut labels = vec![0usize; n];
    let mut prev_inertia = f64::INFINITY;
    let mut iterations = 0usize;

    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let mut inertia = 0.0;
        for i in 0..n {
            let (c, dist) = nearest(x.row(i), &centroids);
            labels[i] = c;
            inertia += dist;
        }
        debug_assert!(
            inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12,
            "inertia increased: {prev_inertia} -> {inertia}"
        );
        if prev_inertia.is_finite() && prev_inertia - inertia <= cfg.tol * prev_inertia {
            break;
        }
        prev_inertia = inertia;

        // update step
        let mut sums = Array2::<f64>::zeros((q, d));
        let mut counts = vec![0usize; q];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += &x.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..q {
            if counts[c] > 0 {
                let mut row = sums.row_mut(c);
                row /= counts[c] as f64;
                centroids.row_mut(c).assign(&sums.row(c));
            }
        }

        // empty-cluster repair: reseed at the points farthest from their
        // assigned centroid, one per empty cluster, farthest first
        let empties: Vec<usize> = (0..q).filter(|&c| counts[c] == 0).collect();
        if !empties.is_empty() {
            let mut by_dist: Vec<(usize, f64)> = (0..n)
                .map(|i| (i, sq_dist(x.row(i), centroids.row(labels[i]))))
                .collect();
            by_dist.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            for (k, &c) in empties.iter().enumerate() {
                if k < n {
                    centroids.row_mut(c).assign(&x.row(by_dist[k].0));
                }
            }
        }
    }

    // final assignment consistent with the returned centroids
    let mut inertia = 0.0;
    for i in 0..n {
        let (c, dist) = nearest(x.row(i), &centroids);
        labels[i] = c;
        inertia += dist;
    }
    LloydRun {
        labels,
        centroids,
        inertia,
        iterations,
    }
}

/// Lloyd's algorithm with k-means++ seeding, best of `n_init` restarts by
/// inertia. Deterministic for a given seed: restart r uses child stream r of
/// `cfg.seed`, and ties between restarts keep the earlier one.
pub fn kmeans(x: &DataMatrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    let n = x.n();
    if cfg.q == 0 {
        return Err(Error::InvalidConfig("kmeans needs q >= 1".into()));
    }
    if cfg.q > n {
        return Err(Error::InvalidConfig(format!(
            "kmeans needs q <= n, got q={} with n={}",
            cfg.q, n
        )));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidConfig("kmeans needs max_iter >= 1".into()));
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidConfig("kmeans needs tol > 0".into()));
    }

    let mut best: Option<LloydRun> = None;
    for restart in 0..cfg.n_init.max(1) {
        let mut rng = rng_for_stream(cfg.seed, restart as u64);
        let run = lloyd(x.values(), cfg.q, cfg, &mut rng);
        let better = match &best {
            None => true,
            Some(b) => run.inertia < b.inertia,
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    Ok(KMeansResult {
        assignment: AnchorAssignment::new(run.labels, cfg.q)?,
        centroids: run.centroids,
        inertia: run.inertia,
        iterations: run.iterations,
    })
}

/// Equal-width binning of `g` over `[lo, hi]` into `q` bins.
///
/// Values are rescaled to `[0, 1]`; bin r (1-based) covers ((r-1)/q, r/q],
/// with 0 landing in bin 1. Returned labels are 0-based.
pub fn equal_width_bins(
    g: ArrayView1<'_, f64>,
    q: usize,
    lo: f64,
    hi: f64,
) -> Result<AnchorAssignment> {
    if q == 0 {
        return Err(Error::InvalidConfig("binning needs q >= 1".into()));
    }
    if !(hi > lo) {
        return Err(Error::InvalidConfig(format!(
            "equal_width_bins needs hi > lo, got [{lo}, {hi}]"
        )));
    }
    let mut labels = Vec::with_capacity(g.len());
    for (i, &v) in g.iter().enumerate() {
        if !v.is_finite() || v < lo || v > hi {
            return Err(Error::ValueOutOfRange {
                index: i,
                value: v,
                lo,
                hi,
            });
        }
        let scaled = (v - lo) / (hi - lo);
        let r = (q as f64 * scaled).ceil() as usize;
        labels.push(r.clamp(1, q) - 1);
    }
    AnchorAssignment::new(labels, q)
}

/// Equal-size binning: rank the samples (ties broken by index) and cut the
/// ranking into `q` nearly equal groups, sizes differing by at most one.
pub fn equal_size_bins(g: ArrayView1<'_, f64>, q: usize) -> Result<AnchorAssignment> {
    let n = g.len();
    if q == 0 {
        return Err(Error::InvalidConfig("binning needs q >= 1".into()));
    }
    if q > n {
        return Err(Error::InvalidConfig(format!(
            "equal_size_bins needs q <= n, got q={q} with n={n}"
        )));
    }
    if let Some((i, &v)) = g.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::ValueOutOfRange {
            index: i,
            value: v,
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap().then(a.cmp(&b)));
    let mut labels = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        let rank = pos + 1; // 1-based
        labels[i] = (rank * q).div_ceil(n) - 1;
    }
    AnchorAssignment::new(labels, q)
}

/// Inertia of an explicit labeling against given centroids; test oracle and
/// reporting helper.
pub fn inertia_of(x: &DataMatrix, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(x.values().row(i), centroids.row(l)))
        .sum()
}

/// Mean of each labeled group; rows for empty groups are zero.
pub fn group_centroids(x: &DataMatrix, assignment: &AnchorAssignment) -> Array2<f64> {
    let q = assignment.q();
    let d = x.d();
    let mut sums = Array2::<f64>::zeros((q, d));
    let sizes = assignment.group_sizes();
    for (i, &l) in assignment.labels().iter().enumerate() {
        let mut row = sums.row_mut(l);
        row += &x.values().row(i);
    }
    for (g, &sz) in sizes.iter().enumerate() {
        if sz > 0 {
            let mut row = sums.row_mut(g);
            row /= sz as f64;
        }
    }
    sums
}

/// Means of a vector per labeled group.
pub fn group_means_vec(v: ArrayView1<'_, f64>, assignment: &AnchorAssignment) -> Array1<f64> {
    let q = assignment.q();
    let mut sums = Array1::<f64>::zeros(q);
    let sizes = assignment.group_sizes();
    for (i, &l) in assignment.labels().iter().enumerate() {
        sums[l] += v[i];
    }
    for (g, &sz) in sizes.iter().enumerate() {
        if sz > 0 {
            sums[g] /= sz as f64;
        }
    }
    sums
}
