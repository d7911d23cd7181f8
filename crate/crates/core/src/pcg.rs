//! Preconditioned conjugate gradients with Lanczos spectrum estimates.

use std::time::Instant;

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::dense::hermitian_eigenvalues;
use crate::numerics::CsrMatrix;
use crate::scalar::{axpy, dot, norm2, Scalar};
use crate::schwarz::Preconditioner;

#[derive(Clone, Debug, Default, Serialize)]
pub struct PcgReport {
    pub iterations: usize,
    /// `||r_k|| / ||r_0||` after each iteration.
    pub relres_history: Vec<f64>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub converged: bool,
    pub lambda_min_est: Option<f64>,
    pub lambda_max_est: Option<f64>,
    pub cond_est: Option<f64>,
    pub solve_seconds: f64,
}

impl PcgReport {
    pub fn final_relres(&self) -> f64 {
        self.relres_history.last().copied().unwrap_or(0.0)
    }
}

/// PCG from a zero initial guess, stopping when the unpreconditioned
/// residual has dropped by `tol`. Hitting `max_it` is not an error; the
/// report is flagged as not converged.
pub fn pcg_solve<T: Scalar, P: Preconditioner<T> + ?Sized>(
    a: &CsrMatrix<T>,
    precond: &P,
    f: &[T],
    tol: f64,
    max_it: usize,
) -> Result<(Vec<T>, PcgReport)> {
    let n = a.nrows();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.len(),
        });
    }
    if f.iter().any(|v| !v.real().is_finite() || !v.imag().is_finite()) {
        return Err(Error::invalid("right-hand side is not finite"));
    }
    let start = Instant::now();
    let mut report = PcgReport::default();
    let mut x = vec![T::ZERO; n];
    let r0 = norm2(f);
    if r0 == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let mut r = f.to_vec();
    let mut z = precond.apply(&r);
    let mut rz = dot(&r, &z).real();
    let mut p = z.clone();
    let mut q = vec![T::ZERO; n];
    for it in 1..=max_it {
        if !(rz > 0.0) {
            return Err(Error::BreakdownNonpositiveCurvature {
                iteration: it,
                curvature: rz,
            });
        }
        a.matvec_into(&p, &mut q);
        let pq = dot(&p, &q).real();
        if !(pq > 0.0) {
            return Err(Error::BreakdownNonpositiveCurvature {
                iteration: it,
                curvature: pq,
            });
        }
        let alpha = rz / pq;
        axpy(T::from_re(alpha), &p, &mut x);
        axpy(T::from_re(-alpha), &q, &mut r);
        let relres = norm2(&r) / r0;
        report.alphas.push(alpha);
        report.relres_history.push(relres);
        report.iterations = it;
        if relres <= tol {
            report.converged = true;
            break;
        }
        z = precond.apply(&r);
        let rz_new = dot(&r, &z).real();
        let beta = rz_new / rz;
        report.betas.push(beta);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = *zi + pi.scale(beta);
        }
    }
    report.solve_seconds = start.elapsed().as_secs_f64();
    if let Ok((lo, hi, c)) = estimate_condition(&report) {
        report.lambda_min_est = Some(lo);
        report.lambda_max_est = Some(hi);
        report.cond_est = Some(c);
    }
    Ok((x, report))
}

/// Symmetric tridiagonal Lanczos matrix implied by the PCG coefficients.
pub fn lanczos_matrix(report: &PcgReport) -> Mat<f64> {
    let k = report.alphas.len();
    let al = &report.alphas;
    let be = &report.betas;
    Mat::from_fn(k, k, |i, j| {
        if i == j {
            let prev = if i > 0 { be[i - 1] / al[i - 1] } else { 0.0 };
            1.0 / al[i] + prev
        } else if i + 1 == j || j + 1 == i {
            let m = i.min(j);
            be[m].sqrt() / al[m]
        } else {
            0.0
        }
    })
}

/// Extreme eigenvalues of the Lanczos matrix and their ratio.
pub fn estimate_condition(report: &PcgReport) -> Result<(f64, f64, f64)> {
    if report.alphas.is_empty() {
        return Err(Error::InsufficientData);
    }
    let ev = hermitian_eigenvalues(&lanczos_matrix(report))?;
    let lo = ev[0];
    let hi = ev[ev.len() - 1];
    if !(lo > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((lo, hi, (hi / lo).max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwarz::Identity;

    #[test]
    fn identity_converges_in_one_step() {
        let a = CsrMatrix::<f64>::identity(5);
        let f = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let (x, rep) = pcg_solve(&a, &Identity, &f, 1e-12, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(x, f);
        assert!((rep.cond_est.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_condition_estimate() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let f = vec![1.0; 10];
        let (_, rep) = pcg_solve(&a, &Identity, &f, 1e-14, 100).unwrap();
        let (lo, hi, c) = estimate_condition(&rep).unwrap();
        assert!((9.5..=10.0 + 1e-9).contains(&c), "{c}");
        assert!(lo >= 1.0 - 1e-9 && hi <= 10.0 + 1e-9);
    }

    #[test]
    fn indefinite_input_breaks_down() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        let err = pcg_solve(&a, &Identity, &[0.0, 1.0], 1e-8, 10).unwrap_err();
        assert!(matches!(err, Error::BreakdownNonpositiveCurvature { .. }));
    }

    #[test]
    fn max_iterations_reported_not_thrown() {
        let d: Vec<f64> = (1..=10).map(f64::from).collect();
        let a = CsrMatrix::from_diagonal(&d);
        let (_, rep) = pcg_solve(&a, &Identity, &[1.0; 10], 1e-14, 3).unwrap();
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 3);
        assert!(estimate_condition(&PcgReport::default()).is_err());
    }
}
