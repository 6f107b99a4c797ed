//! Dense complex matrix helpers on top of `nalgebra` storage.

use matrixmultiply::CGemmOption;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

/// `A · B` through the blocked complex kernel of `matrixmultiply`.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // nalgebra is column major: element (i, j) sits at i + j·nrows
    // SAFETY: Complex<f64> is repr(C) with layout [re, im], identical to
    // matrixmultiply's c64; every pointer spans a live buffer of the stated
    // shape and strides, and `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    c
}

/// `‖M‖_{ℓ∞→ℓ∞}`, the largest absolute row sum.
pub fn inf_norm(m: &CMatrix) -> f64 {
    row_abs_sums(m).into_iter().fold(0.0, f64::max)
}

pub fn row_abs_sums(m: &CMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; m.nrows()];
    for j in 0..m.ncols() {
        for (i, s) in sums.iter_mut().enumerate() {
            *s += m[(i, j)].norm();
        }
    }
    sums
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `max |M - I|` entrywise.
pub fn identity_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows().saturating_sub(1)) {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// `V f(Λ) V*` for a Hermitian matrix.
pub fn hermitian_function<F: Fn(f64) -> f64>(values: &[f64], vectors: &CMatrix, f: F) -> CMatrix {
    let n = values.len();
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let s = f(v);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    matmul(&scaled, &vectors.adjoint())
}

/// Numerical rank from singular values above `rel_tol · σ_max`.
pub fn rank(m: &CMatrix, rel_tol: f64) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}
