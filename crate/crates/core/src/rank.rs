//! Singular-value based rank, kernels and orthonormal bases.
//!
//! Every rank decision in the crate goes through [`rank_with_tolerance`] or one
//! of the helpers below so that a single absolute threshold can be shared
//! between related matrices (a block and its neighbours, `G` and `K_n`).

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Outcome of a numerical rank computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub nullity: usize,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    pub tolerance_used: f64,
}

/// Full singular value decomposition with descending singular values.
///
/// `u` is `rows × rows` and `v` is `cols × cols`; columns beyond
/// `min(rows, cols)` complete the bases orthonormally.
pub(crate) struct FullSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub(crate) fn full_svd(a: &DMatrix<f64>) -> FullSvd {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return FullSvd {
            u: DMatrix::identity(rows, rows),
            sigma: Vec::new(),
            v: DMatrix::identity(cols, cols),
        };
    }
    // faer returns full orthonormal U and V with descending singular values.
    let svd = to_faer(a).svd().expect("SVD of a finite matrix converges");
    let s = svd.S();
    let sigma = (0..rows.min(cols)).map(|i| s[i]).collect();
    FullSvd {
        u: from_faer(svd.U()),
        sigma,
        v: from_faer(svd.V()),
    }
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Minimum-norm least-squares solution of `a x = b`, discarding singular
/// directions with `σ ≤ tol`.
pub(crate) fn svd_solve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64) -> DVector<f64> {
    let svd = full_svd(a);
    let mut x = DVector::zeros(a.ncols());
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s > tol {
            x += svd.v.column(i) * (svd.u.column(i).dot(b) / s);
        }
    }
    x
}

fn check_finite(a: &DMatrix<f64>) -> Result<()> {
    if let Some(pos) = a.iter().position(|x| !x.is_finite()) {
        let rows = a.nrows().max(1);
        return Err(Error::NonFinite(format!(
            "matrix entry ({}, {})",
            pos % rows,
            pos / rows
        )));
    }
    Ok(())
}

/// Default threshold: `max(rows, cols) · ε · σ_max`.
pub fn default_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

/// Numerical rank of `a`: the number of singular values strictly above `tol`.
pub fn rank_with_tolerance(a: &DMatrix<f64>, tol: Option<f64>) -> Result<RankReport> {
    check_finite(a)?;
    let (rows, cols) = a.shape();
    let sigma = singular_values(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let tolerance_used = tol.unwrap_or_else(|| default_tolerance(rows, cols, smax));
    let rank = sigma.iter().filter(|&&s| s > tolerance_used).count();
    Ok(RankReport {
        rank,
        nullity: cols - rank,
        singular_values: sigma,
        tolerance_used,
    })
}

pub(crate) fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let s = to_faer(a)
        .singular_values()
        .expect("SVD of a finite matrix converges");
    debug_assert!(s.windows(2).all(|w| w[0] >= w[1]));
    s
}

pub(crate) fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    singular_values(a).iter().filter(|&&s| s > tol).count()
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the right kernel of `a`.
pub(crate) fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    if a.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let svd = full_svd(a);
    let r = svd.sigma.iter().filter(|&&s| s > tol).count();
    svd.v.columns(r, cols - r).into_owned()
}

/// Orthonormal basis of the left kernel `{w : wᵀ a = 0}`.
pub(crate) fn left_null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    null_space(&a.transpose(), tol)
}

/// Orthonormal basis of the column space of `a`.
pub(crate) fn column_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = a.nrows();
    if a.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = full_svd(a);
    let r = svd.sigma.iter().filter(|&&s| s > tol).count();
    svd.u.columns(0, r).into_owned()
}

/// Stack matrices with equal column counts vertically.
pub(crate) fn vstack(parts: &[&DMatrix<f64>], cols: usize) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), cols)).copy_from(*p);
        r += p.nrows();
    }
    out
}

/// Concatenate matrices with equal row counts horizontally.
pub(crate) fn hstack(parts: &[&DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

/// Largest principal-angle sine between the column spans of two orthonormal
/// bases; zero when the spans coincide.
pub fn subspace_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    // ‖(I - B Bᵀ) A‖₂ = sin of the largest principal angle.
    let residual = a - b * (b.transpose() * a);
    spectral_norm(&residual)
}
