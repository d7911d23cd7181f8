use crate::error::{Error, Result};
use crate::numerics::sparse::CsrMatrix;
use crate::scalar::{axpy, dot, norm2, Scalar};

#[derive(Clone, Debug)]
pub struct InnerSolve<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub relres: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess,
/// stopping at relative residual `tol`.
pub fn inner_solve<T: Scalar>(a: &CsrMatrix<T>, b: &[T], tol: f64, max_it: usize) -> Result<InnerSolve<T>> {
    let n = a.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| {
            let d = d.real();
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let mut x = vec![T::ZERO; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(InnerSolve {
            x,
            iterations: 0,
            relres: 0.0,
        });
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(v, d)| v.scale(*d)).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z).real();
    let mut q = vec![T::ZERO; n];
    let mut relres = 1.0;
    for it in 1..=max_it {
        a.matvec_into(&p, &mut q);
        let pq = dot(&p, &q).real();
        if pq <= 0.0 {
            return Err(Error::BreakdownNonpositiveCurvature {
                iteration: it,
                curvature: pq,
            });
        }
        let alpha = rz / pq;
        axpy(T::from_re(alpha), &p, &mut x);
        axpy(T::from_re(-alpha), &q, &mut r);
        relres = norm2(&r) / bnorm;
        if relres <= tol {
            return Ok(InnerSolve {
                x,
                iterations: it,
                relres,
            });
        }
        for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri.scale(*d);
        }
        let rz_new = dot(&r, &z).real();
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + pi.scale(beta);
        }
    }
    let _ = relres;
    Err(Error::MaxIterations { tol, max_it })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_on_tridiagonal() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let b = vec![1.0; n];
        let s = inner_solve(&a, &b, 1e-10, 500).unwrap();
        assert!(s.relres <= 1e-10);
        let r = a.matvec(&s.x);
        let err = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8);
    }

    #[test]
    fn reports_failure() {
        let n = 100;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let b = vec![1.0; n];
        assert!(matches!(
            inner_solve(&a, &b, 1e-12, 3),
            Err(Error::MaxIterations { .. })
        ));
    }
}
