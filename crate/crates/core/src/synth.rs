//! Seeded multi-view Gaussian blob generator.
//!
//! Each view draws its own cluster centers (so views genuinely differ),
//! scaled so the closest pair of centers sits `separation` noise units
//! apart. A corruption fraction re-centers some samples on a wrong cluster
//! per view, which simulates views that disagree.

use ndarray::Array2;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

use crate::anchor::MultiViewDataset;
use crate::{Error, Result};

/// Shape of a synthetic multi-view dataset.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    pub v: usize,
    /// Feature count per view (length v).
    pub dims: Vec<usize>,
    /// Minimum center spacing in units of the view's noise σ.
    pub separation: f64,
    /// Per-view noise σ (length v).
    pub noise: Vec<f64>,
    /// Fraction of samples per view re-drawn from a wrong cluster.
    pub view_corruption: f64,
    pub seed: u64,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n < self.k {
            return Err(Error::InvalidParameter(format!(
                "need n >= k >= 1, got n={} k={}",
                self.n, self.k
            )));
        }
        if self.v == 0 || self.dims.len() != self.v || self.noise.len() != self.v {
            return Err(Error::InvalidParameter(format!(
                "dims and noise must both have one entry per view ({})",
                self.v
            )));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter("every view needs >= 1 feature".into()));
        }
        if !self.separation.is_finite() || self.separation <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "separation must be positive, got {}",
                self.separation
            )));
        }
        if self.noise.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidParameter("noise must be nonnegative".into()));
        }
        if !(0.0..=0.5).contains(&self.view_corruption) {
            return Err(Error::InvalidParameter(format!(
                "corruption must lie in [0, 0.5], got {}",
                self.view_corruption
            )));
        }
        Ok(())
    }
}

// Box-Muller; two uniforms per normal keeps the stream deterministic.
fn normal(rng: &mut StdRng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

// k Gaussian centers rescaled so the closest pair is exactly `spacing`
// apart.
fn draw_centers(k: usize, d: usize, spacing: f64, rng: &mut StdRng) -> Array2<f64> {
    loop {
        let mut centers = Array2::<f64>::zeros((k, d));
        for v in centers.iter_mut() {
            *v = normal(rng);
        }
        if k == 1 {
            return centers;
        }
        let mut min_dist = f64::INFINITY;
        for a in 0..k {
            for b in (a + 1)..k {
                let dist: f64 = (0..d)
                    .map(|t| (centers[[a, t]] - centers[[b, t]]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                min_dist = min_dist.min(dist);
            }
        }
        if min_dist > 1e-9 {
            let scale = spacing / min_dist;
            centers.mapv_inplace(|x| x * scale);
            return centers;
        }
        // astronomically unlikely collision: redraw
    }
}

/// Generates the dataset described by `spec`, with ground-truth labels
/// attached. Deterministic for a fixed spec (seed included).
pub fn generate_synth(spec: &SynthSpec) -> Result<MultiViewDataset> {
    spec.validate()?;
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k).collect();
    let mut views = Vec::with_capacity(spec.v);
    for v in 0..spec.v {
        let mut rng =
            StdRng::seed_from_u64(spec.seed.wrapping_add((v as u64).wrapping_mul(0xA24B_AED4_963E_E407)));
        let sigma = spec.noise[v];
        // zero noise still needs distinct centers, so space by separation
        let spacing = spec.separation * if sigma > 0.0 { sigma } else { 1.0 };
        let centers = draw_centers(spec.k, spec.dims[v], spacing, &mut rng);

        // which samples this view mis-centers
        let n_corrupt = (spec.view_corruption * spec.n as f64).floor() as usize;
        let mut idx: Vec<usize> = (0..spec.n).collect();
        for i in 0..n_corrupt {
            let j = rng.random_range(i..spec.n);
            idx.swap(i, j);
        }
        let mut corrupted = vec![false; spec.n];
        for &i in idx.iter().take(n_corrupt) {
            corrupted[i] = true;
        }

        let d = spec.dims[v];
        let mut x = Array2::<f64>::zeros((spec.n, d));
        for i in 0..spec.n {
            let cluster = if corrupted[i] && spec.k > 1 {
                (labels[i] + 1 + rng.random_range(0..spec.k - 1)) % spec.k
            } else {
                labels[i]
            };
            for t in 0..d {
                x[[i, t]] = centers[[cluster, t]] + sigma * normal(&mut rng);
            }
        }
        views.push(x);
    }
    MultiViewDataset::new(views, Some(labels))
}
