use crate::linalg::{require_square, symmetric_eigenvalues, symmetry_residual, RMat};
use crate::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const DEFAULT_SIGNATURE_TOL: f64 = 1e-8;

/// Inertia of a real symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Signature {
    pub n_plus: usize,
    pub n_minus: usize,
    pub n_zero: usize,
}

impl Signature {
    /// `n₊ − n₋`.
    pub fn value(&self) -> i32 {
        self.n_plus as i32 - self.n_minus as i32
    }

    pub fn dim(&self) -> usize {
        self.n_plus + self.n_minus + self.n_zero
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.n_zero == 0
    }
}

/// Counts eigenvalues above `tol·‖M‖`, below `−tol·‖M‖`, and in between.
///
/// `M` must be symmetric up to `tol·max(1, ‖M‖)` entrywise.
pub fn signature(m: &RMat, tol: f64) -> Result<Signature> {
    require_square(m, "signature input")?;
    let eig = symmetric_eigenvalues(m);
    let norm = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let residual = symmetry_residual(m);
    if residual > tol * norm.max(1.0) {
        return Err(Error::NotSymmetric { residual });
    }
    let cut = tol * norm;
    let mut s = Signature::default();
    for e in eig {
        if e > cut {
            s.n_plus += 1;
        } else if e < -cut {
            s.n_minus += 1;
        } else {
            s.n_zero += 1;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_read_off() {
        let id = signature(&RMat::identity(3, 3), 1e-9).unwrap();
        assert_eq!((id.n_plus, id.n_minus, id.n_zero), (3, 0, 0));
        let z = signature(&RMat::zeros(2, 2), 1e-9).unwrap();
        assert_eq!((z.n_plus, z.n_minus, z.n_zero), (0, 0, 2));
        let d = signature(&RMat::from_diagonal(&nalgebra::DVector::from_vec(alloc::vec![2.0, -1.0, 0.0])), 1e-9).unwrap();
        assert_eq!((d.n_plus, d.n_minus, d.n_zero), (1, 1, 1));
        assert_eq!(d.value(), 0);
    }

    #[test]
    fn rejects_asymmetric_matrix() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(signature(&m, 1e-9), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn scale_invariant_threshold() {
        let m = RMat::from_row_slice(2, 2, &[1e12, 0.0, 0.0, 1e-3]);
        assert_eq!(signature(&m, 1e-8).unwrap().n_zero, 1);
        assert_eq!(signature(&(m * 1e-20), 1e-8).unwrap().n_zero, 1);
    }
}
