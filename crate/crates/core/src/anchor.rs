//! Anchor selection and initial anchor-graph construction.
//!
//! Each view contributes an N×M anchor graph linking every sample to M
//! representative points. Anchors come from seeded k-means (default) or
//! from one shared uniform row sample so that anchors correspond across
//! views. The initial graph and the adaptive quadratic weight α both come
//! from the classic k-nearest-neighbor closed form on squared distances.

use ndarray::{Array2, ArrayView2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::{Error, Result};

/// V feature matrices over the same N samples, with optional ground truth.
#[derive(Debug, Clone)]
pub struct MultiViewDataset {
    views: Vec<Array2<f64>>,
    labels: Option<Vec<usize>>,
    names: Option<Vec<String>>,
}

impl MultiViewDataset {
    /// Validates shared row count (N ≥ 2), V ≥ 1, d_v ≥ 1 and finiteness.
    pub fn new(views: Vec<Array2<f64>>, labels: Option<Vec<usize>>) -> Result<Self> {
        if views.is_empty() {
            return Err(Error::InvalidInput("dataset needs at least one view".into()));
        }
        let n = views[0].nrows();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 2 samples, got {n}"
            )));
        }
        for (v, x) in views.iter().enumerate() {
            if x.nrows() != n {
                return Err(Error::InvalidInput(format!(
                    "view {} has {} rows, expected {n}",
                    v + 1,
                    x.nrows()
                )));
            }
            if x.ncols() == 0 {
                return Err(Error::InvalidInput(format!("view {} has no features", v + 1)));
            }
            if x.iter().any(|e| !e.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "view {} contains a non-finite entry",
                    v + 1
                )));
            }
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::InvalidInput(format!(
                    "labels length {} does not match sample count {n}",
                    l.len()
                )));
            }
        }
        Ok(Self {
            views,
            labels,
            names: None,
        })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        self.names = Some(names);
        self
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn view(&self, v: usize) -> ArrayView2<'_, f64> {
        self.views[v].view()
    }

    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// True when every view consists of one repeated point.
    pub fn is_degenerate(&self) -> bool {
        self.views.iter().all(|x| {
            let first = x.row(0);
            x.rows().into_iter().all(|r| r == first)
        })
    }
}

/// How anchors are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorStrategy {
    /// Per-view k-means++ centroids (≤ 50 Lloyd iterations).
    KMeans,
    /// One seeded row subset shared by every view.
    UniformSample,
}

impl std::fmt::Display for AnchorStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnchorStrategy::KMeans => write!(f, "kmeans"),
            AnchorStrategy::UniformSample => write!(f, "uniform-sample"),
        }
    }
}

/// Per-view M×d_v anchor matrices plus the provenance that produced them.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    views: Vec<Array2<f64>>,
    strategy: AnchorStrategy,
    seed: u64,
}

impl AnchorSet {
    pub fn n_anchors(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn view(&self, v: usize) -> ArrayView2<'_, f64> {
        self.views[v].view()
    }

    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn strategy(&self) -> AnchorStrategy {
        self.strategy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Row-stochastic N×M sample-to-anchor affinities.
#[derive(Debug, Clone)]
pub struct AnchorGraph {
    weights: Array2<f64>,
}

impl AnchorGraph {
    /// Validates entries in [0, 1] and unit row sums (1e-9).
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        for (i, row) in weights.rows().into_iter().enumerate() {
            let mut sum = 0.0;
            for &w in row.iter() {
                if !(0.0..=1.0 + 1e-12).contains(&w) {
                    return Err(Error::InvalidInput(format!(
                        "anchor graph row {i} has weight {w} outside [0, 1]"
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "anchor graph row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn into_weights(self) -> Array2<f64> {
        self.weights
    }
}

/// N×M squared Euclidean sample-to-anchor distances for one view.
#[derive(Debug, Clone)]
pub struct DistanceBlock {
    d: Array2<f64>,
}

impl DistanceBlock {
    /// Wraps a precomputed distance matrix, rejecting negative or
    /// non-finite entries.
    pub fn new(d: Array2<f64>) -> Result<Self> {
        if d.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidInput(
                "distance block entries must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { d })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.d
    }

    pub fn n_anchors(&self) -> usize {
        self.d.ncols()
    }
}

/// Picks `m` anchors per view. Deterministic for a fixed
/// (data, m, strategy, seed) tuple.
pub fn select_anchors(
    data: &MultiViewDataset,
    m: usize,
    strategy: AnchorStrategy,
    seed: u64,
) -> Result<AnchorSet> {
    let n = data.n_samples();
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "anchor count must lie in 1..={n}, got {m}"
        )));
    }
    let views = match strategy {
        AnchorStrategy::UniformSample => {
            // One index subset shared by all views keeps anchors aligned.
            let mut rng = StdRng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..n).collect();
            for i in 0..m {
                let j = rng.random_range(i..n);
                idx.swap(i, j);
            }
            idx.truncate(m);
            data.views()
                .iter()
                .map(|x| {
                    let mut a = Array2::<f64>::zeros((m, x.ncols()));
                    for (r, &i) in idx.iter().enumerate() {
                        a.row_mut(r).assign(&x.row(i));
                    }
                    a
                })
                .collect()
        }
        AnchorStrategy::KMeans => data
            .views()
            .iter()
            .enumerate()
            .map(|(v, x)| {
                let view_seed = seed.wrapping_add((v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                kmeans_centroids(x.view(), m, view_seed)
            })
            .collect(),
    };
    Ok(AnchorSet {
        views,
        strategy,
        seed,
    })
}

// Seeded k-means++ initialization followed by at most 50 Lloyd iterations.
// An emptied cluster is re-seeded from the point farthest from its centroid.
fn kmeans_centroids(x: ArrayView2<'_, f64>, m: usize, seed: u64) -> Array2<f64> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut rng = StdRng::seed_from_u64(seed);
    let mut centers = Array2::<f64>::zeros((m, d));

    // k-means++ seeding
    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&x.row(first));
    let mut min_d2 = vec![0.0f64; n];
    for (i, md) in min_d2.iter_mut().enumerate() {
        *md = sq_dist(x.row(i), centers.row(0));
    }
    for c in 1..m {
        let total: f64 = min_d2.iter().sum();
        let pick = if total <= 0.0 {
            rng.random_range(0..n)
        } else {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = n - 1;
            for (i, &w) in min_d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        };
        centers.row_mut(c).assign(&x.row(pick));
        for (i, md) in min_d2.iter_mut().enumerate() {
            *md = md.min(sq_dist(x.row(i), centers.row(c)));
        }
    }

    let mut assign = vec![0usize; n];
    for _ in 0..50 {
        let mut changed = false;
        let mut dist_to_own = vec![0.0f64; n];
        for i in 0..n {
            let mut best = (f64::INFINITY, 0usize);
            for c in 0..m {
                let dd = sq_dist(x.row(i), centers.row(c));
                if dd < best.0 {
                    best = (dd, c);
                }
            }
            dist_to_own[i] = best.0;
            if assign[i] != best.1 {
                assign[i] = best.1;
                changed = true;
            }
        }
        let mut counts = vec![0usize; m];
        let mut sums = Array2::<f64>::zeros((m, d));
        for i in 0..n {
            counts[assign[i]] += 1;
            let mut row = sums.row_mut(assign[i]);
            row += &x.row(i);
        }
        let mut taken = vec![false; n];
        for c in 0..m {
            if counts[c] == 0 {
                // farthest available point becomes the new centroid
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dist_to_own[a].partial_cmp(&dist_to_own[b]).unwrap())
                    .unwrap_or(0);
                taken[far] = true;
                centers.row_mut(c).assign(&x.row(far));
                changed = true;
            } else {
                for j in 0..d {
                    centers[[c, j]] = sums[[c, j]] / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }
    centers
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Squared Euclidean distances between every sample row of `x` and every
/// anchor row of `a`.
pub fn pairwise_sq_dists(x: ArrayView2<'_, f64>, a: ArrayView2<'_, f64>) -> Result<DistanceBlock> {
    if x.ncols() != a.ncols() {
        return Err(Error::InvalidInput(format!(
            "feature dimensions differ: samples have {}, anchors have {}",
            x.ncols(),
            a.ncols()
        )));
    }
    let (n, m) = (x.nrows(), a.nrows());
    let mut d = Array2::<f64>::zeros((n, m));
    for i in 0..n {
        let xi = x.row(i);
        for j in 0..m {
            d[[i, j]] = sq_dist(xi, a.row(j));
        }
    }
    Ok(DistanceBlock { d })
}

// Sorted (distance, anchor index) row; ties break on index so the
// construction is deterministic.
fn sorted_row(d: &Array2<f64>, i: usize) -> Vec<(f64, usize)> {
    let mut row: Vec<(f64, usize)> = d.row(i).iter().cloned().zip(0..d.ncols()).collect();
    row.sort_by(|a, b| a.partial_cmp(b).unwrap());
    row
}

/// Closed-form k-nearest-anchor graph: row i puts weight
/// `(d_(k+1) − d_(j)) / (k·d_(k+1) − Σ_{l≤k} d_(l))` on its j-th nearest
/// anchor and 0 elsewhere, which lands exactly on the probability simplex.
/// A row whose k+1 nearest anchors are equidistant gets uniform weight 1/k
/// on the k nearest.
pub fn init_anchor_graph(d: &DistanceBlock, k: usize) -> Result<AnchorGraph> {
    let m = d.n_anchors();
    if k == 0 || k >= m {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must lie in 1..{m}, got {k}"
        )));
    }
    let n = d.matrix().nrows();
    let mut z = Array2::<f64>::zeros((n, m));
    for i in 0..n {
        let row = sorted_row(d.matrix(), i);
        let dk1 = row[k].0;
        let head: f64 = row[..k].iter().map(|&(dist, _)| dist).sum();
        let den = k as f64 * dk1 - head;
        if den > 1e-12 * (1.0 + k as f64 * dk1.abs()) {
            let mut sum = 0.0;
            for &(dist, j) in &row[..k] {
                let w = (dk1 - dist) / den;
                z[[i, j]] = w;
                sum += w;
            }
            // kill accumulated rounding so rows sum to 1 exactly
            for &(_, j) in &row[..k] {
                z[[i, j]] /= sum;
            }
        } else {
            for &(_, j) in &row[..k] {
                z[[i, j]] = 1.0 / k as f64;
            }
        }
    }
    AnchorGraph::new(z)
}

/// Adaptive quadratic weight: the mean over rows of
/// `(k/2)·d_(k+1) − ½·Σ_{l≤k} d_(l)`, clamped below at 1e-12.
pub fn compute_alpha(d: &DistanceBlock, k: usize) -> Result<f64> {
    let m = d.n_anchors();
    if k == 0 || k >= m {
        return Err(Error::InvalidParameter(format!(
            "neighbor count must lie in 1..{m}, got {k}"
        )));
    }
    let n = d.matrix().nrows();
    let mut total = 0.0;
    for i in 0..n {
        let row = sorted_row(d.matrix(), i);
        let head: f64 = row[..k].iter().map(|&(dist, _)| dist).sum();
        total += 0.5 * (k as f64 * row[k].0 - head);
    }
    Ok((total / n as f64).max(1e-12))
}
