//! Dense eigensolvers and thin SVD helpers.
//!
//! Every decomposition in the solver touches only the small side of a tall
//! matrix (the anchor count, or the view count in the Fourier domain), so
//! cyclic Jacobi is used throughout: it is deterministic, has no convergence
//! surprises, and delivers eigenvalues at machine precision for the matrix
//! sizes that occur here.

use ndarray::{Array1, Array2, ArrayView2};
use rustfft::num_complex::Complex64;

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi.
///
/// Returns eigenvalues in descending order with matching eigenvector
/// columns. The input is read as symmetric; only the upper triangle drives
/// the rotations.
pub fn sym_eigh(a: ArrayView2<'_, f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "sym_eigh requires a square matrix");
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    if n < 2 {
        return sorted_eigh_real(m, v);
    }

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        let scale: f64 = m.diag().iter().map(|d| d * d).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate_real(&mut m, &mut v, p, q, c, s);
            }
        }
    }
    sorted_eigh_real(m, v)
}

// Applies J^T A J and V <- V J for the plane rotation J(p,q; c,s).
fn rotate_real(m: &mut Array2<f64>, v: &mut Array2<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = m.nrows();
    for k in 0..n {
        let akp = m[[k, p]];
        let akq = m[[k, q]];
        m[[k, p]] = c * akp - s * akq;
        m[[k, q]] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = m[[p, k]];
        let aqk = m[[q, k]];
        m[[p, k]] = c * apk - s * aqk;
        m[[q, k]] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = c * vkp - s * vkq;
        v[[k, q]] = s * vkp + c * vkq;
    }
}

fn sorted_eigh_real(m: Array2<f64>, v: Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap());
    let evals = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut evecs = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        evecs.column_mut(dst).assign(&v.column(src));
    }
    (evals, evecs)
}

/// Eigendecomposition of a complex Hermitian matrix by cyclic Jacobi.
///
/// Eigenvalues (real) come back descending with matching complex
/// eigenvector columns. Off-diagonal pivots are phase-rotated to the real
/// axis before the plane rotation, so the iteration is the textbook real
/// scheme underneath.
pub fn herm_eigh(a: ArrayView2<'_, Complex64>) -> (Array1<f64>, Array2<Complex64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "herm_eigh requires a square matrix");
    let mut m = a.to_owned();
    let mut v = Array2::<Complex64>::eye(n);
    if n >= 2 {
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[[i, j]].norm_sqr();
                }
            }
            let scale: f64 = m.diag().iter().map(|d| d.norm_sqr()).sum::<f64>().max(1e-300);
            if off <= 1e-30 * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[[p, q]];
                    let mag = apq.norm();
                    if mag <= 1e-300 {
                        continue;
                    }
                    let b = apq / mag; // unit phase of the pivot
                    let app = m[[p, p]].re;
                    let aqq = m[[q, q]].re;
                    let tau = (aqq - app) / (2.0 * mag);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    rotate_herm(&mut m, &mut v, p, q, c, s, b);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].re.partial_cmp(&m[[i, i]].re).unwrap());
    let evals = Array1::from_iter(order.iter().map(|&i| m[[i, i]].re));
    let mut evecs = Array2::<Complex64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        evecs.column_mut(dst).assign(&v.column(src));
    }
    (evals, evecs)
}

// G = diag(1, conj(b)) applied after the real rotation; A <- G^H A G, V <- V G.
fn rotate_herm(
    m: &mut Array2<Complex64>,
    v: &mut Array2<Complex64>,
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    b: Complex64,
) {
    let n = m.nrows();
    let bc = b.conj();
    for k in 0..n {
        let akp = m[[k, p]];
        let akq = m[[k, q]];
        m[[k, p]] = akp * c - akq * (bc * s);
        m[[k, q]] = akp * s + akq * (bc * c);
    }
    for k in 0..n {
        let apk = m[[p, k]];
        let aqk = m[[q, k]];
        m[[p, k]] = apk * c - aqk * (b * s);
        m[[q, k]] = apk * s + aqk * (b * c);
    }
    for k in 0..n {
        let vkp = v[[k, p]];
        let vkq = v[[k, q]];
        v[[k, p]] = vkp * c - vkq * (bc * s);
        v[[k, q]] = vkp * s + vkq * (bc * c);
    }
}

/// Thin SVD of a real matrix via the Gram matrix of its smaller side.
///
/// Returns `(u, singulars, v)` with `a ≈ u · diag(singulars) · v^T`,
/// singular values descending, `u` of shape n×h and `v` of shape m×h for
/// h = min(n, m). Cost is O(n·m·h + h³), which keeps the tall-skinny case
/// linear in the long dimension. Columns belonging to (near-)zero singular
/// values are completed to an orthonormal basis.
pub fn thin_svd_gram(a: ArrayView2<'_, f64>) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
    let (n, m) = (a.nrows(), a.ncols());
    if m <= n {
        let gram = a.t().dot(&a);
        let (evals, vecs) = sym_eigh(gram.view());
        let singulars = Array1::from_iter(evals.iter().map(|&e| e.max(0.0).sqrt()));
        let v = vecs;
        let u = left_factor_real(a, &v, &singulars);
        (u, singulars, v)
    } else {
        let gram = a.dot(&a.t());
        let (evals, vecs) = sym_eigh(gram.view());
        let singulars = Array1::from_iter(evals.iter().map(|&e| e.max(0.0).sqrt()));
        let u = vecs;
        let v = left_factor_real(a.t(), &u, &singulars);
        (u, singulars, v)
    }
}

// Columns a·v_j / σ_j, re-orthonormalized; degenerate columns filled in.
fn left_factor_real(a: ArrayView2<'_, f64>, v: &Array2<f64>, s: &Array1<f64>) -> Array2<f64> {
    let n = a.nrows();
    let h = v.ncols();
    let smax = s.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = (smax * 1e-13).max(1e-300);
    let mut u = Array2::<f64>::zeros((n, h));
    for j in 0..h {
        if s[j] > cutoff {
            let col = a.dot(&v.column(j)) / s[j];
            u.column_mut(j).assign(&col);
        }
    }
    orthonormalize_real(&mut u);
    u
}

// Modified Gram-Schmidt; columns that vanish are replaced by canonical
// basis vectors orthogonalized against everything kept so far.
fn orthonormalize_real(u: &mut Array2<f64>) {
    let (n, h) = (u.nrows(), u.ncols());
    for j in 0..h {
        for i in 0..j {
            let proj = u.column(i).dot(&u.column(j));
            let ui = u.column(i).to_owned();
            u.column_mut(j).scaled_add(-proj, &ui);
        }
        let norm = u.column(j).dot(&u.column(j)).sqrt();
        if norm > 1e-150 {
            u.column_mut(j).mapv_inplace(|x| x / norm);
        } else {
            'fill: for cand in 0..n {
                let mut col = Array1::<f64>::zeros(n);
                col[cand] = 1.0;
                for i in 0..j {
                    let proj = u.column(i).dot(&col);
                    col.scaled_add(-proj, &u.column(i).to_owned());
                }
                let cn = col.dot(&col).sqrt();
                if cn > 0.5 {
                    col.mapv_inplace(|x| x / cn);
                    u.column_mut(j).assign(&col);
                    break 'fill;
                }
            }
        }
    }
}

/// Complex analogue of [`orthonormalize_real`] for SVD factors of frontal
/// slices.
pub(crate) fn orthonormalize_complex(u: &mut Array2<Complex64>) {
    let (n, h) = (u.nrows(), u.ncols());
    for j in 0..h {
        for i in 0..j {
            let proj = cdot(u.column(i), u.column(j));
            for k in 0..n {
                let ui = u[[k, i]];
                u[[k, j]] -= proj * ui;
            }
        }
        let norm = cdot(u.column(j), u.column(j)).re.max(0.0).sqrt();
        if norm > 1e-150 {
            for k in 0..n {
                u[[k, j]] /= norm;
            }
        } else {
            'fill: for cand in 0..n {
                let mut col = Array1::<Complex64>::zeros(n);
                col[cand] = Complex64::new(1.0, 0.0);
                for i in 0..j {
                    let proj = cdot(u.column(i), col.view());
                    for k in 0..n {
                        let ui = u[[k, i]];
                        col[k] -= proj * ui;
                    }
                }
                let cn = cdot(col.view(), col.view()).re.max(0.0).sqrt();
                if cn > 0.5 {
                    for k in 0..n {
                        u[[k, j]] = col[k] / cn;
                    }
                    break 'fill;
                }
            }
        }
    }
}

/// Conjugate-linear inner product `x^H y`.
pub(crate) fn cdot(
    x: ndarray::ArrayView1<'_, Complex64>,
    y: ndarray::ArrayView1<'_, Complex64>,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    acc
}
