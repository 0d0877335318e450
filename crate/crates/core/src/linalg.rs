//! Small dense linear-algebra helpers on top of nalgebra.

use crate::{Complex, Error, Result};
use alloc::format;
use nalgebra::DMatrix;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex>;

/// `J = [[0, I], [−I, 0]]` of size `2n`, so that `ω(u, v) = uᵀ J v` and the
/// Hamilton field of `p` is `J ∇p`.
pub fn standard_form(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Largest absolute entry.
pub fn max_abs(m: &RMat) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs_c(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.norm()))
}

/// `‖M − Mᵀ‖∞` (entrywise max).
pub fn symmetry_residual(m: &RMat) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            r = r.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    r
}

/// `‖A − A*‖∞` (entrywise max).
pub fn hermitian_residual(m: &CMat) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..=i {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Orthonormal basis of the column span (thin QR), for full-rank input.
pub fn orthonormal_columns(b: &RMat) -> RMat {
    let ncols = b.ncols();
    let q = b.clone().qr().q();
    q.columns(0, ncols).into_owned()
}

/// Singular values of a real matrix, sorted decreasingly.
pub fn singular_values(m: &RMat) -> alloc::vec::Vec<f64> {
    let mut s: alloc::vec::Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Ratio of smallest to largest singular value (0 for empty or zero input).
pub fn rank_ratio(m: &RMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Determinant through LU (1 for the empty matrix).
pub fn det(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

pub fn require_square(m: &RMat, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Eigenvalues of a real symmetric matrix (symmetrised first).
pub fn symmetric_eigenvalues(m: &RMat) -> alloc::vec::Vec<f64> {
    if m.nrows() == 0 {
        return alloc::vec::Vec::new();
    }
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().iter().copied().collect()
}

/// Integer matrix power `M^k` for `k ≥ 0`.
pub fn matrix_power(m: &RMat, k: u32) -> RMat {
    let mut result = RMat::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

/// Matrix exponential by scaling and squaring of a degree-18 Taylor
/// polynomial (accurate to round-off once the scaled norm is ≤ ½).
pub fn expm(m: &RMat) -> RMat {
    let n = m.nrows();
    let norm: f64 = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = m * scale;
    let mut result = RMat::identity(n, n);
    let mut term = RMat::identity(n, n);
    for k in 1..=18 {
        term = &term * &a / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Embed a real matrix into complex entries.
pub fn to_complex(m: &RMat) -> CMat {
    m.map(|v| Complex::new(v, 0.0))
}

/// Spectral (2-)norm of a complex matrix.
pub fn spectral_norm_c(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0, |a: f64, &b| a.max(b))
}
