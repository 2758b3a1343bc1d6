//! Symmetric eigendecompositions of `nalgebra` matrices, computed by `faer`.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

fn to_faer(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.read(i, j))
}

/// Eigenvalues of a symmetric matrix, non-decreasing.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev = to_faer(m).selfadjoint_eigenvalues(Side::Lower);
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues (non-decreasing) and the matching eigenvector columns.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let d = to_faer(m).selfadjoint_eigendecomposition(Side::Lower);
    let s = d.s().column_vector();
    let values = DVector::from_fn(s.nrows(), |i, _| s.read(i));
    (values, from_faer(d.u()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_residual() {
        let m = DMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let (vals, vecs) = symmetric_eigen(&m);
        let r = &m * &vecs - &vecs * DMatrix::from_diagonal(&vals);
        assert!(r.amax() < 1e-14);
        assert!(vals.as_slice().windows(2).all(|w| w[0] <= w[1]));
    }
}
