use faer::Mat;

use crate::error::{Error, Result};
use crate::numerics::dense::{hermitian_part, DenseCholesky};
use crate::numerics::factor::Factorization;
use crate::scalar::Scalar;

/// Solver for `(A + G G^H) x = b` given a factorization of `A`:
/// `x = A^{-1} b - W (I + G^H W)^{-1} G^H A^{-1} b` with `W = A^{-1} G`.
pub struct LowRankShiftedSolver<'a, T> {
    factor: &'a Factorization<T>,
    g: Mat<T>,
    w: Mat<T>,
    core: DenseCholesky<T>,
}

impl<'a, T: Scalar> LowRankShiftedSolver<'a, T> {
    pub fn new(factor: &'a Factorization<T>, g: Mat<T>) -> Result<Self> {
        if g.nrows() != factor.dim() {
            return Err(Error::DimensionMismatch {
                expected: factor.dim(),
                found: g.nrows(),
            });
        }
        let w = factor.solve_mat(&g);
        let r = g.ncols();
        let mut core = g.adjoint() * &w;
        for i in 0..r {
            core[(i, i)] += T::ONE;
        }
        let core = hermitian_part(&core);
        let chol = DenseCholesky::new(&core).map_err(|_| Error::SingularCore)?;
        // reject a numerically singular core
        let l = chol.factor();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..r {
            let d = l[(i, i)].real().abs();
            lo = lo.min(d);
            hi = hi.max(d);
        }
        if r > 0 && (lo == 0.0 || (hi / lo).powi(2) > 1e14) {
            return Err(Error::SingularCore);
        }
        Ok(Self { factor, g, w, core: chol })
    }

    pub fn rank(&self) -> usize {
        self.g.ncols()
    }

    /// `(A + G G^H)^{-1} G`, which reduces to `W (I + G^H W)^{-1}`.
    pub fn solve_generators(&self) -> Mat<T> {
        let r = self.rank();
        let mut inv = Mat::<T>::identity(r, r);
        self.core.solve_mat_in_place(&mut inv);
        &self.w * inv
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = self.factor.solve(b);
        let r = self.rank();
        if r == 0 {
            return x;
        }
        let mut t = Mat::<T>::zeros(r, 1);
        for j in 0..r {
            let mut acc = T::ZERO;
            for i in 0..x.len() {
                acc += self.g[(i, j)].conjugate() * x[i];
            }
            t[(j, 0)] = acc;
        }
        self.core.solve_mat_in_place(&mut t);
        for j in 0..r {
            let c = t[(j, 0)];
            if c == T::ZERO {
                continue;
            }
            for i in 0..x.len() {
                x[i] -= self.w[(i, j)] * c;
            }
        }
        x
    }
}

pub fn apply_lowrank_woodbury<T: Scalar>(factor: &Factorization<T>, g: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    Ok(LowRankShiftedSolver::new(factor, g.clone())?.solve(b))
}
