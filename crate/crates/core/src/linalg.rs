//! Dense complex linear-algebra helpers shared by every module.

use ndarray::prelude::*;
use ndarray_linalg::{Eig, Eigh, Norm, SVD, UPLO};

use crate::{Error, Result, C64};

pub fn identity(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

pub fn adjoint(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// (X + X*)/2. Applied after channel applications before eigen-analysis
/// to remove 1e−15-scale drift ahead of PSD checks.
pub fn hermitize(a: &Array2<C64>) -> Array2<C64> {
    let ad = adjoint(&a.view());
    (a + &ad).mapv(|z| 0.5 * z)
}

pub fn frobenius(a: &Array2<C64>) -> f64 {
    a.norm_l2()
}

pub fn trace(a: &ArrayView2<C64>) -> C64 {
    a.diag().sum()
}

/// Row-major vectorization: vec(|i⟩⟨j|) = e_{i·n+j}.
pub fn vec_of(a: &ArrayView2<C64>) -> Array1<C64> {
    Array1::from_iter(a.iter().cloned())
}

pub fn unvec(v: &ArrayView1<C64>, rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_vec((rows, cols), v.to_vec()).expect("unvec shape")
}

/// Kronecker product, leftmost factor most significant (row-major).
pub fn kron(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij != C64::new(0.0, 0.0) {
                let mut block = out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
                block.zip_mut_with(b, |o, &bv| *o += aij * bv);
            }
        }
    }
    out
}

/// Hermitian eigendecomposition (ascending eigenvalues); columns of the
/// returned matrix are the eigenvectors.
///
/// The backend hands back eigenvectors of the transpose for row-major
/// complex input, so the result is conjugated here; a debug assertion
/// guards the convention.
pub fn eigh(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let std_a = a.as_standard_layout().to_owned();
    let (vals, vecs) = std_a.eigh(UPLO::Lower)?;
    let vecs = vecs.mapv(|z| z.conj());
    debug_assert!({
        let n = vals.len();
        if n > 0 {
            let v = vecs.column(0).to_owned();
            let av = std_a.dot(&v);
            let lv = v.mapv(|z| z * vals[0]);
            (&av - &lv).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
                < 1e-8 * (1.0 + frobenius(&std_a))
        } else {
            true
        }
    });
    Ok((vals, vecs))
}

pub fn eigh_values(a: &Array2<C64>) -> Result<Array1<f64>> {
    let (vals, _) = eigh(a)?;
    Ok(vals)
}

pub fn min_eig(a: &Array2<C64>) -> Result<f64> {
    let vals = eigh_values(&hermitize(a))?;
    Ok(vals.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// General (non-hermitian) eigendecomposition via LAPACK zgeev.
pub fn eig(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let (vals, vecs) = a.eig()?;
    Ok((vals, vecs))
}

pub fn singular_values(a: &Array2<C64>) -> Result<Array1<f64>> {
    let (_, s, _) = a.svd(false, false)?;
    Ok(s)
}

/// Trace norm ‖a‖₁ = Σ singular values.
pub fn trace_norm(a: &Array2<C64>) -> Result<f64> {
    Ok(singular_values(a)?.sum())
}

/// Operator (spectral) norm.
pub fn op_norm(a: &Array2<C64>) -> Result<f64> {
    Ok(singular_values(a)?
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max))
}

/// Hermitian square root via spectral calculus; eigenvalues clipped at 0.
pub fn sqrtm_psd(a: &Array2<C64>) -> Result<Array2<C64>> {
    func_psd(a, |x| x.max(0.0).sqrt())
}

/// Spectral function f(A) of a hermitian matrix.
pub fn func_psd(a: &Array2<C64>, f: impl Fn(f64) -> f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh(&hermitize(a))?;
    let fv = vals.mapv(f);
    let scaled = &vecs * &fv.mapv(|x| C64::new(x, 0.0)).insert_axis(Axis(0));
    Ok(scaled.dot(&adjoint(&vecs.view())))
}

/// Positive part A₊ of a hermitian matrix.
pub fn positive_part(a: &Array2<C64>) -> Result<Array2<C64>> {
    func_psd(a, |x| x.max(0.0))
}

/// Inverse of a strictly positive definite hermitian matrix through its
/// spectrum; rejects eigenvalues at or below `floor`.
pub fn inv_pd(a: &Array2<C64>, floor: f64) -> Result<Array2<C64>> {
    let (vals, _) = eigh(&hermitize(a))?;
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= floor {
        return Err(Error::NotFaithful {
            min_eig: min,
            threshold: floor,
        });
    }
    func_psd(a, |x| 1.0 / x)
}

/// Support projection: span of eigenvectors with eigenvalue above
/// `rel_tol` times the largest eigenvalue.
pub fn support_projection(a: &Array2<C64>, rel_tol: f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh(&hermitize(a))?;
    let top = vals.iter().cloned().fold(0.0_f64, f64::max);
    let cut = rel_tol * top.max(f64::MIN_POSITIVE);
    let n = vals.len();
    let mut p = Array2::zeros((n, n));
    for (k, &v) in vals.iter().enumerate() {
        if v > cut {
            let col = vecs.column(k);
            for i in 0..n {
                for j in 0..n {
                    p[[i, j]] += col[i] * col[j].conj();
                }
            }
        }
    }
    Ok(p)
}

/// Round a near-projection to an exact one (eigenvalues snapped to {0,1}).
pub fn round_projection(a: &Array2<C64>) -> Result<Array2<C64>> {
    func_psd(a, |x| if x > 0.5 { 1.0 } else { 0.0 })
}

/// ‖p² − p‖ + hermiticity defect; 0 for an exact projection.
pub fn projection_defect(p: &Array2<C64>) -> f64 {
    let herm = frobenius(&(p - &adjoint(&p.view())));
    let idem = frobenius(&(p.dot(p) - p));
    herm + idem
}

pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    frobenius(&(adjoint(&u.view()).dot(u) - &identity(n)))
}

/// Von Neumann entropy −Σ λ log λ of a density matrix (natural log).
pub fn von_neumann_entropy(rho: &Array2<C64>) -> Result<f64> {
    let vals = eigh_values(&hermitize(rho))?;
    Ok(vals
        .iter()
        .filter(|&&v| v > 1e-15)
        .map(|&v| -v * v.ln())
        .sum())
}
