//! Small dense kernels shared by the sweeps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

pub type CMatrix = DMatrix<C64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise modulus of `m - m†`.
pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// decreasing order. Column `k` of the returned matrix is the eigenvector of
/// the `k`-th eigenvalue.
pub(crate) fn eigh_descending(m: CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 1 {
        return (vec![m[(0, 0)].re], CMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Whether `m` is unitary within `tol` (max entrywise deviation of `m†m` from I).
pub(crate) fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let prod = m.adjoint() * m;
    let n = m.nrows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let want = if i == j { 1.0 } else { 0.0 };
            (prod[(i, j)] - C64::new(want, 0.0)).norm() <= tol
        })
    })
}
