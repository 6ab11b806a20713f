//! Third-order tensor transforms, the tensor Schatten p-norm, and its
//! proximal operator.
//!
//! A tensor here is an n1×n2×n3 stack of frontal slices (n1×n2 matrices
//! indexed by the third mode). The spectral domain is reached by a DFT
//! along every third-mode tube; because the input is real, spectral slices
//! k and n3−k are complex conjugates of one another, and all per-slice work
//! is done on the first ⌊n3/2⌋+1 slices and mirrored.
//!
//! The Schatten p-norm (0 < p ≤ 1) sums the p-th powers of the singular
//! values of every spectral slice; its proximal map shrinks each singular
//! value through a generalized soft-threshold ([`gst_scalar`]) with weight
//! τ·n3 and reconstructs.

use ndarray::{Array1, Array2, Array3, ArrayView2};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::linalg::{cdot, herm_eigh, orthonormalize_complex};
use crate::{Error, Result};

/// Dense real third-order tensor with addressable frontal slices.
///
/// All entries are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor3 {
    data: Array3<f64>,
}

impl RealTensor3 {
    /// Wraps an array, rejecting non-finite entries.
    pub fn new(data: Array3<f64>) -> Result<Self> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "tensor contains a non-finite entry".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            data: Array3::zeros(dims),
        }
    }

    /// (n1, n2, n3)
    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    /// The n1×n2 frontal slice at third-mode index `k`.
    pub fn slice(&self, k: usize) -> ArrayView2<'_, f64> {
        self.data.slice(ndarray::s![.., .., k])
    }

    pub fn as_array(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    /// Entrywise ∞-norm.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub(crate) fn from_array_unchecked(data: Array3<f64>) -> Self {
        debug_assert!(data.iter().all(|x| x.is_finite()));
        Self { data }
    }
}

/// Dense complex third-order tensor (the spectral-domain counterpart of
/// [`RealTensor3`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor3 {
    data: Array3<Complex64>,
}

impl ComplexTensor3 {
    pub fn new(data: Array3<Complex64>) -> Result<Self> {
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput(
                "tensor contains a non-finite entry".into(),
            ));
        }
        Ok(Self { data })
    }

    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self {
            data: Array3::from_elem(dims, Complex64::new(0.0, 0.0)),
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.data.dim()
    }

    pub fn slice(&self, k: usize) -> ArrayView2<'_, Complex64> {
        self.data.slice(ndarray::s![.., .., k])
    }

    pub fn as_array(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn into_array(self) -> Array3<Complex64> {
        self.data
    }

    /// Largest deviation from third-mode conjugate symmetry, i.e. the
    /// ∞-norm of `t[.., .., k] − conj(t[.., .., n3−k])` over all k (slice 0
    /// pairs with itself, so its imaginary part counts directly).
    pub fn conj_symmetry_error(&self) -> f64 {
        let (n1, n2, n3) = self.dims();
        let mut worst = 0.0f64;
        for i in 0..n1 {
            for j in 0..n2 {
                worst = worst.max(self.data[[i, j, 0]].im.abs());
                for k in 1..n3 {
                    let d = self.data[[i, j, k]] - self.data[[i, j, n3 - k]].conj();
                    worst = worst.max(d.norm());
                }
            }
        }
        worst
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Singular value decomposition of one spectral slice: `left` (n1×h),
/// descending `singulars` (length h = min(n1, n2)) and `right` (n2×h),
/// with `slice ≈ left · diag(singulars) · right^H`.
#[derive(Debug, Clone)]
pub struct SliceSVD {
    pub left: Array2<Complex64>,
    pub singulars: Array1<f64>,
    pub right: Array2<Complex64>,
}

/// Thin SVD of a complex frontal slice via the Gram matrix of its smaller
/// side (Hermitian Jacobi eigendecomposition).
pub fn slice_svd(a: ArrayView2<'_, Complex64>) -> SliceSVD {
    let (n1, n2) = (a.nrows(), a.ncols());
    if n2 <= n1 {
        let mut gram = Array2::<Complex64>::zeros((n2, n2));
        for i in 0..n2 {
            for j in 0..n2 {
                gram[[i, j]] = cdot(a.column(i), a.column(j));
            }
        }
        let (evals, right) = herm_eigh(gram.view());
        let singulars = Array1::from_iter(evals.iter().map(|&e| e.max(0.0).sqrt()));
        let left = left_factor(a, &right, &singulars);
        SliceSVD {
            left,
            singulars,
            right,
        }
    } else {
        let mut gram = Array2::<Complex64>::zeros((n1, n1));
        for i in 0..n1 {
            for j in 0..n1 {
                gram[[i, j]] = cdot(a.row(i), a.row(j)).conj();
            }
        }
        let (evals, left) = herm_eigh(gram.view());
        let singulars = Array1::from_iter(evals.iter().map(|&e| e.max(0.0).sqrt()));
        // right_j = a^H u_j / σ_j
        let mut right = Array2::<Complex64>::zeros((n2, n1));
        let smax = singulars.iter().cloned().fold(0.0f64, f64::max);
        let cutoff = (smax * 1e-13).max(1e-300);
        for j in 0..n1 {
            if singulars[j] > cutoff {
                for r in 0..n2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n1 {
                        acc += a[[i, r]].conj() * left[[i, j]];
                    }
                    right[[r, j]] = acc / singulars[j];
                }
            }
        }
        orthonormalize_complex(&mut right);
        SliceSVD {
            left,
            singulars,
            right,
        }
    }
}

fn left_factor(
    a: ArrayView2<'_, Complex64>,
    right: &Array2<Complex64>,
    singulars: &Array1<f64>,
) -> Array2<Complex64> {
    let (n1, h) = (a.nrows(), right.ncols());
    let smax = singulars.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = (smax * 1e-13).max(1e-300);
    let mut left = Array2::<Complex64>::zeros((n1, h));
    for j in 0..h {
        if singulars[j] > cutoff {
            for r in 0..n1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..a.ncols() {
                    acc += a[[r, c]] * right[[c, j]];
                }
                left[[r, j]] = acc / singulars[j];
            }
        }
    }
    orthonormalize_complex(&mut left);
    left
}

/// DFT of every third-mode tube. Dims are unchanged; the output satisfies
/// conjugate symmetry between slices k and n3−k.
pub fn fft_mode3(t: &RealTensor3) -> ComplexTensor3 {
    let (n1, n2, n3) = t.dims();
    let mut out = Array3::from_elem((n1, n2, n3), Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n3);
    let mut buf = vec![Complex64::new(0.0, 0.0); n3];
    for i in 0..n1 {
        for j in 0..n2 {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(t.as_array()[[i, j, k]], 0.0);
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                out[[i, j, k]] = *b;
            }
        }
    }
    ComplexTensor3 { data: out }
}

/// Inverse of [`fft_mode3`].
///
/// The input must be conjugate-symmetric along the third mode (the
/// signature of a spectral tensor that came from real data); a violation
/// beyond 1e-8 (relative to the largest entry) is reported as corrupted
/// input. Sub-tolerance imaginary residue in the inverse transform is
/// discarded.
pub fn ifft_mode3(t: &ComplexTensor3) -> Result<RealTensor3> {
    let (n1, n2, n3) = t.dims();
    let tol = 1e-8 * t.max_abs().max(1.0);
    if t.conj_symmetry_error() > tol {
        return Err(Error::InvalidInput(
            "spectral tensor violates conjugate symmetry along mode 3".into(),
        ));
    }
    let mut out = Array3::<f64>::zeros((n1, n2, n3));
    let mut planner = FftPlanner::<f64>::new();
    let ifft = planner.plan_fft_inverse(n3);
    let scale = 1.0 / n3 as f64;
    let mut buf = vec![Complex64::new(0.0, 0.0); n3];
    for i in 0..n1 {
        for j in 0..n2 {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = t.as_array()[[i, j, k]];
            }
            ifft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                out[[i, j, k]] = b.re * scale;
            }
        }
    }
    RealTensor3::new(out)
}

fn validate_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Schatten exponent p must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Sum of σ^p over all spectral slices — the p-th power of the tensor
/// Schatten p-norm. Shared by the norm itself and the prox objective.
pub(crate) fn schatten_p_pow(t: &RealTensor3, p: f64) -> f64 {
    let (_, _, n3) = t.dims();
    let spec = fft_mode3(t);
    let half = n3 / 2;
    let mut total = 0.0f64;
    for k in 0..=half.min(n3 - 1) {
        let svd = slice_svd(spec.slice(k));
        // slice n3−k is the conjugate of slice k: same singular values
        let mult = if k == 0 || 2 * k == n3 { 1.0 } else { 2.0 };
        // Gram-based singular values carry ~sqrt(eps)·σmax of noise; for
        // p < 1 the power σ^p blows that up, so numerically-zero values
        // are dropped.
        let floor = svd.singulars.first().copied().unwrap_or(0.0) * 1e-7;
        for &s in svd.singulars.iter() {
            if s > floor {
                total += mult * s.powf(p);
            }
        }
    }
    total
}

/// Tensor Schatten p-norm: `(Σ_slices Σ_j σ_j^p)^(1/p)` over the spectral
/// slices, 0 < p ≤ 1.
pub fn schatten_p_norm(t: &RealTensor3, p: f64) -> Result<f64> {
    validate_p(p)?;
    Ok(schatten_p_pow(t, p).powf(1.0 / p))
}

/// Generalized soft-thresholding: the minimizer over δ ≥ 0 of
/// `½(δ − sigma)² + w·δ^p`.
///
/// For p = 1 this is `max(sigma − w, 0)`. For p < 1 the objective has an
/// exact cut-off: below it the minimizer is 0, above it the inner
/// stationary point is found by the fixed-point iteration
/// `δ ← sigma − w·p·δ^(p−1)` started at δ = sigma, which decreases
/// monotonically onto the stable root.
pub fn gst_scalar(sigma: f64, w: f64, p: f64) -> f64 {
    debug_assert!(sigma >= 0.0 && w >= 0.0 && p > 0.0 && p <= 1.0);
    if sigma <= 0.0 {
        return 0.0;
    }
    if w <= 0.0 {
        return sigma;
    }
    if p >= 1.0 {
        return (sigma - w).max(0.0);
    }
    // Threshold below which 0 beats any interior stationary point.
    let a = (2.0 * w * (1.0 - p)).powf(1.0 / (2.0 - p));
    let threshold = a + w * p * a.powf(p - 1.0);
    if sigma <= threshold {
        return 0.0;
    }
    let mut delta = sigma;
    for _ in 0..50 {
        let next = sigma - w * p * delta.powf(p - 1.0);
        let step = (next - delta).abs();
        delta = next;
        if step < 1e-12 {
            break;
        }
    }
    delta.clamp(0.0, sigma)
}

/// Proximal operator of `tau · ‖·‖_Sp^p`: the minimizer over 𝒥 of
/// `½‖𝒥 − x‖_F² + tau·‖𝒥‖_Sp^p`.
///
/// Implemented slice-wise in the spectral domain: SVD each slice, shrink
/// every singular value through [`gst_scalar`] with weight `tau·n3`,
/// reconstruct, and transform back. Only slices 0..=⌊n3/2⌋ are decomposed;
/// their conjugate mirrors are filled in directly.
pub fn prox_schatten_p(x: &RealTensor3, tau: f64, p: f64) -> Result<RealTensor3> {
    validate_p(p)?;
    if tau < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "prox weight tau must be nonnegative, got {tau}"
        )));
    }
    if tau == 0.0 {
        return Ok(x.clone());
    }
    let (n1, n2, n3) = x.dims();
    let spec = fft_mode3(x);
    let w = tau * n3 as f64;
    let mut shrunk = Array3::from_elem((n1, n2, n3), Complex64::new(0.0, 0.0));
    let half = n3 / 2;
    for k in 0..=half.min(n3 - 1) {
        let svd = slice_svd(spec.slice(k));
        let h = svd.singulars.len();
        // reconstruct Σ_j u_j · gst(σ_j) · v_j^H
        let mut slice = Array2::<Complex64>::zeros((n1, n2));
        for j in 0..h {
            let s_in = if svd.singulars[j] < 1e-14 {
                0.0
            } else {
                svd.singulars[j]
            };
            let s_out = gst_scalar(s_in, w, p);
            if s_out == 0.0 {
                continue;
            }
            for r in 0..n1 {
                let ur = svd.left[[r, j]] * s_out;
                for c in 0..n2 {
                    slice[[r, c]] += ur * svd.right[[c, j]].conj();
                }
            }
        }
        for r in 0..n1 {
            for c in 0..n2 {
                shrunk[[r, c, k]] = slice[[r, c]];
                if k != 0 && 2 * k != n3 {
                    shrunk[[r, c, n3 - k]] = slice[[r, c]].conj();
                }
            }
        }
    }
    ifft_mode3(&ComplexTensor3 { data: shrunk })
}
