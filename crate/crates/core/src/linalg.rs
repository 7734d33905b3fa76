//! Small dense helpers on top of nalgebra: symmetric matrix functions and
//! conversions between row-major storage and `DMatrix`.

use nalgebra::{DMatrix, SymmetricEigen};

pub(crate) fn from_row_major(m: usize, data: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(m, m, data)
}

pub(crate) fn to_row_major(a: &DMatrix<f64>) -> Vec<f64> {
    let m = a.nrows();
    let mut out = Vec::with_capacity(m * a.ncols());
    for i in 0..m {
        for j in 0..a.ncols() {
            out.push(a[(i, j)]);
        }
    }
    out
}

pub(crate) fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub(crate) fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Applies `f` to the spectrum of a symmetric matrix: `U f(Λ) U'`.
pub(crate) fn sym_apply(a: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(a));
    let mapped = eig.eigenvalues.map(f);
    let u = &eig.eigenvectors;
    symmetrize(&(u * DMatrix::from_diagonal(&mapped) * u.transpose()))
}

pub(crate) fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let eig = SymmetricEigen::new(symmetrize(a));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a)
        .into_iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
