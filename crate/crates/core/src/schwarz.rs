//! Additive overlapping Schwarz preconditioners with an optional coarse
//! correction.

use crate::coarse::CoarseBasis;
use crate::error::{Error, Result};
use crate::numerics::{factorize, CsrMatrix, DenseCholesky, FactorKind, Factorization};
use crate::scalar::Scalar;
use crate::system::DdSystem;

/// Action of an approximate inverse.
pub trait Preconditioner<T> {
    fn apply(&self, r: &[T]) -> Vec<T>;
}

/// No preconditioning.
#[derive(Clone, Copy, Debug, Default)]
pub struct Identity;

impl<T: Scalar> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T]) -> Vec<T> {
        r.to_vec()
    }
}

impl<T: Scalar> Preconditioner<T> for Factorization<T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        self.solve(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    One,
    Two,
}

struct LocalSolver<T> {
    dofs: Vec<usize>,
    factor: Factorization<T>,
}

struct CoarseSolver<T> {
    basis: CoarseBasis<T>,
    a0: DenseCholesky<T>,
}

/// `B^{-1} r = sum_j E_j A_j^{-1} E_j^T r + C A0^{-1} C^H r`.
pub struct SchwarzPreconditioner<T> {
    n: usize,
    locals: Vec<LocalSolver<T>>,
    coarse: Option<CoarseSolver<T>>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> SchwarzPreconditioner<T> {
    pub fn build(system: &DdSystem<T>, coarse: Option<CoarseBasis<T>>) -> Result<Self> {
        Self::from_parts(system.a.matrix(), &system.overlap_dofs, coarse)
    }

    /// Local blocks are the principal submatrices of `a` on each dof list.
    pub fn from_parts(a: &CsrMatrix<T>, local_dofs: &[Vec<usize>], coarse: Option<CoarseBasis<T>>) -> Result<Self> {
        let n = a.nrows();
        let mut warnings = Vec::new();
        let mut locals = Vec::with_capacity(local_dofs.len());
        for (j, dofs) in local_dofs.iter().enumerate() {
            if dofs.is_empty() {
                warnings.push(format!("subdomain {j} has no local dofs"));
                continue;
            }
            if dofs.last().is_some_and(|&d| d >= n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: dofs[dofs.len() - 1] + 1,
                });
            }
            let factor = factorize(&a.principal_submatrix(dofs), FactorKind::Cholesky)?;
            locals.push(LocalSolver {
                dofs: dofs.clone(),
                factor,
            });
        }
        let coarse = match coarse {
            Some(basis) if basis.coarse_dim() > 0 => {
                if basis.num_dofs != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: basis.num_dofs,
                    });
                }
                let a0 = basis.factor_a0()?;
                Some(CoarseSolver { basis, a0 })
            }
            Some(_) => {
                warnings.push("coarse space is empty; using the one-level preconditioner".to_string());
                None
            }
            None => None,
        };
        Ok(Self {
            n,
            locals,
            coarse,
            warnings,
        })
    }

    pub fn level(&self) -> Level {
        if self.coarse.is_some() {
            Level::Two
        } else {
            Level::One
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse.as_ref().map_or(0, |c| c.basis.coarse_dim())
    }

    pub fn coarse_basis(&self) -> Option<&CoarseBasis<T>> {
        self.coarse.as_ref().map(|c| &c.basis)
    }

    pub fn num_local_solvers(&self) -> usize {
        self.locals.len()
    }
}

impl<T: Scalar> Preconditioner<T> for SchwarzPreconditioner<T> {
    fn apply(&self, r: &[T]) -> Vec<T> {
        assert_eq!(r.len(), self.n, "residual length");
        let mut z = vec![T::ZERO; self.n];
        for local in &self.locals {
            let mut x: Vec<T> = local.dofs.iter().map(|&d| r[d]).collect();
            local.factor.solve_in_place(&mut x);
            for (&d, v) in local.dofs.iter().zip(x) {
                z[d] += v;
            }
        }
        if let Some(c) = &self.coarse {
            let y = c.a0.solve(&c.basis.restrict(r));
            c.basis.prolong(&y, &mut z);
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace1d(n: usize) -> CsrMatrix<f64> {
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
    fn single_block_is_exact_inverse() {
        let a = laplace1d(9);
        let p = SchwarzPreconditioner::from_parts(&a, &[(0..9).collect()], None).unwrap();
        let r: Vec<f64> = (0..9).map(|i| (i as f64).cos()).collect();
        let z = p.apply(&r);
        let az = a.matvec(&z);
        for (x, y) in az.iter().zip(&r) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(p.level(), Level::One);
        assert!(p.apply(&[0.0; 9]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn overlapping_blocks_sum() {
        let a = laplace1d(6);
        let p = SchwarzPreconditioner::from_parts(&a, &[vec![0, 1, 2, 3], vec![2, 3, 4, 5]], None).unwrap();
        let e = |k: usize| -> Vec<f64> { (0..6).map(|i| if i == k { 1.0 } else { 0.0 }).collect() };
        for i in 0..6 {
            for j in 0..6 {
                let zi = p.apply(&e(i));
                let zj = p.apply(&e(j));
                assert!((zi[j] - zj[i]).abs() < 1e-13);
            }
        }
    }
}
