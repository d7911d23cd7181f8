use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, LdltRef, LltRef, SymbolicCholesky,
};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};
use crate::numerics::sparse::CsrMatrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    Cholesky,
    Ldlh,
}

/// Sparse Cholesky or LDL^H factorization with a fill-reducing (AMD)
/// ordering and supernodal numeric phase.
#[derive(Debug)]
pub struct Factorization<T> {
    n: usize,
    kind: FactorKind,
    symbolic: Option<SymbolicCholesky<usize>>,
    values: Vec<T>,
}

pub fn factorize<T: Scalar>(a: &CsrMatrix<T>, kind: FactorKind) -> Result<Factorization<T>> {
    Factorization::new(a, kind)
}

impl<T: Scalar> Factorization<T> {
    pub fn new(a: &CsrMatrix<T>, kind: FactorKind) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        if n == 0 {
            return Ok(Self {
                n,
                kind,
                symbolic: None,
                values: Vec::new(),
            });
        }
        let csc = a.to_faer_csc()?;
        let symbolic = factorize_symbolic_cholesky(
            csc.symbolic(),
            Side::Lower,
            Default::default(),
            Default::default(),
        )
        .map_err(|_| Error::invalid("symbolic factorization failed"))?;
        let mut values = vec![T::ZERO; symbolic.len_val()];
        let par = Par::Seq;
        match kind {
            FactorKind::Cholesky => {
                let req = symbolic.factorize_numeric_llt_scratch::<T>(par, Default::default());
                let mut buf = MemBuffer::new(req);
                symbolic
                    .factorize_numeric_llt::<T>(
                        &mut values,
                        csc.as_ref(),
                        Side::Lower,
                        Default::default(),
                        par,
                        MemStack::new(&mut buf),
                        Default::default(),
                    )
                    .map_err(|_| Error::NotPositiveDefinite)?;
            }
            FactorKind::Ldlh => {
                let req = symbolic.factorize_numeric_ldlt_scratch::<T>(par, Default::default());
                let mut buf = MemBuffer::new(req);
                symbolic
                    .factorize_numeric_ldlt::<T>(
                        &mut values,
                        csc.as_ref(),
                        Side::Lower,
                        Default::default(),
                        par,
                        MemStack::new(&mut buf),
                        Default::default(),
                    )
                    .map_err(|_| Error::NotPositiveDefinite)?;
            }
        }
        if values.iter().any(|v| !v.real().is_finite() || !v.imag().is_finite()) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            n,
            kind,
            symbolic: Some(symbolic),
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn ordering(&self) -> &'static str {
        "amd"
    }

    /// Solve for every column of the column-major `rhs` (`n x k`) in place.
    pub fn solve_columns_in_place(&self, rhs: MatMut<'_, T>) {
        let Some(symbolic) = &self.symbolic else {
            return;
        };
        assert_eq!(rhs.nrows(), self.n);
        let par = Par::Seq;
        let req = symbolic.solve_in_place_scratch::<T>(rhs.ncols(), par);
        let mut buf = MemBuffer::new(req);
        let stack = MemStack::new(&mut buf);
        match self.kind {
            FactorKind::Cholesky => {
                LltRef::new(symbolic, &self.values).solve_in_place_with_conj(Conj::No, rhs, par, stack)
            }
            FactorKind::Ldlh => {
                LdltRef::new(symbolic, &self.values).solve_in_place_with_conj(Conj::No, rhs, par, stack)
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        self.solve_columns_in_place(MatMut::from_column_major_slice_mut(b, n, 1));
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_mat(&self, b: &faer::Mat<T>) -> faer::Mat<T> {
        let mut x = b.clone();
        self.solve_columns_in_place(x.as_mut());
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn laplace_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    #[test]
    fn solves_spd_both_kinds() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        for kind in [FactorKind::Cholesky, FactorKind::Ldlh] {
            let f = factorize(&a, kind).unwrap();
            let x = f.solve(&b);
            let r = a.matvec(&x);
            let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{kind:?} residual {err}");
        }
    }

    #[test]
    fn solves_hermitian_complex() {
        let i = Complex64::new(0.0, 1.0);
        let a = CsrMatrix::from_triplets(
            3,
            3,
            vec![
                (0, 0, Complex64::new(4.0, 0.0)),
                (0, 1, i),
                (1, 0, -i),
                (1, 1, Complex64::new(3.0, 0.0)),
                (1, 2, Complex64::new(1.0, 1.0)),
                (2, 1, Complex64::new(1.0, -1.0)),
                (2, 2, Complex64::new(5.0, 0.0)),
            ],
        );
        let b = vec![Complex64::new(1.0, 2.0), Complex64::new(-1.0, 0.5), Complex64::new(0.0, 1.0)];
        let x = factorize(&a, FactorKind::Cholesky).unwrap().solve(&b);
        let r = a.matvec(&x);
        for (p, q) in r.iter().zip(&b) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn indefinite_rejected_by_cholesky() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            factorize(&a, FactorKind::Cholesky),
            Err(Error::NotPositiveDefinite)
        ));
    }
}
