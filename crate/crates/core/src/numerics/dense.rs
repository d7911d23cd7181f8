use faer::linalg::triangular_solve::{solve_lower_triangular_in_place, solve_upper_triangular_in_place};
use faer::{Mat, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenpairs of a Hermitian-definite pencil, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct DenseEigResult<T> {
    pub values: Vec<f64>,
    /// Columns are `B`-orthonormal eigenvectors.
    pub vectors: Mat<T>,
}

pub fn hermitian_part<T: Scalar>(a: &Mat<T>) -> Mat<T> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| (a[(i, j)] + a[(j, i)].conjugate()).scale(0.5))
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky_lower<T: Scalar>(b: &Mat<T>) -> Result<Mat<T>> {
    let llt = b.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    Ok(llt.L().to_owned())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig<T: Scalar>(a: &Mat<T>) -> Result<DenseEigResult<T>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(DenseEigResult {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let h = hermitian_part(a);
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenSolverFailed)?;
    let s = evd.S().column_vector();
    let values = (0..n).map(|i| s[i].real()).collect();
    Ok(DenseEigResult {
        values,
        vectors: evd.U().to_owned(),
    })
}

pub fn hermitian_eigenvalues<T: Scalar>(a: &Mat<T>) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    hermitian_part(a)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::EigenSolverFailed)
}

/// Solves `A v = lambda B v` for Hermitian `A` and Hermitian positive
/// definite `B` through `B = L L^H` and the standard problem for
/// `L^{-1} A L^{-H}`.
pub fn dense_generalized_eig<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Result<DenseEigResult<T>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    let l = cholesky_lower(b)?;
    // X = L^{-1} A, then C = L^{-1} X^H = L^{-1} A L^{-H}
    let mut x = a.clone();
    solve_lower_triangular_in_place(l.as_ref(), x.as_mut(), Par::Seq);
    let mut c = x.adjoint().to_owned();
    solve_lower_triangular_in_place(l.as_ref(), c.as_mut(), Par::Seq);
    let DenseEigResult { values, vectors } = hermitian_eig(&c)?;
    let mut v = vectors;
    solve_upper_triangular_in_place(l.adjoint(), v.as_mut(), Par::Seq);
    Ok(DenseEigResult { values, vectors: v })
}

/// Eigenvalues of a general square matrix.
pub fn general_eigenvalues<T: Scalar>(a: &Mat<T>) -> Result<Vec<Complex64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    a.eigenvalues().map_err(|_| Error::EigenSolverFailed)
}

/// Dense Cholesky solver.
#[derive(Clone, Debug)]
pub struct DenseCholesky<T> {
    l: Mat<T>,
}

impl<T: Scalar> DenseCholesky<T> {
    pub fn new(a: &Mat<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: a.ncols(),
            });
        }
        if a.nrows() == 0 {
            return Ok(Self { l: Mat::zeros(0, 0) });
        }
        Ok(Self {
            l: cholesky_lower(&hermitian_part(a))?,
        })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn solve_mat_in_place(&self, x: &mut Mat<T>) {
        if self.dim() == 0 {
            return;
        }
        solve_lower_triangular_in_place(self.l.as_ref(), x.as_mut(), Par::Seq);
        solve_upper_triangular_in_place(self.l.adjoint(), x.as_mut(), Par::Seq);
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x = Mat::from_fn(n, 1, |i, _| b[i]);
        self.solve_mat_in_place(&mut x);
        (0..n).map(|i| x[(i, 0)]).collect()
    }

    pub fn factor(&self) -> &Mat<T> {
        &self.l
    }
}

/// `A^H B` for dense matrices.
pub fn adjoint_mul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    a.adjoint() * b
}
