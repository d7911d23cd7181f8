//! Configuration-driven experiment runner.

mod config;
mod output;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

pub use config::{parse_vary, ExperimentConfig, ModelId, ProblemKind, Variant, MAX_ELEMENTS_PER_AXIS};
pub use output::{read_rows, write_csv, write_rows, CSV_SCHEMA};

use crate::coarse::{build_coarse, local_eigenbases, CoarseOptions, CoarseVariant, ColumnSolver};
use crate::decomposition::Decomposition;
use crate::elliptic::{CoefficientField, EllipticProblem};
use crate::error::{Result, StageExt};
use crate::mesh::{build_structured_mesh, MeshConvention};
use crate::numerics::general_eigenvalues;
use crate::pcg::{pcg_solve, PcgReport};
use crate::pwls::{PwlsProblem, PwlsSpec};
use crate::scalar::Scalar;
use crate::schwarz::{Preconditioner, SchwarzPreconditioner};
use crate::system::DdSystem;

/// Dense spectrum dumps are refused above this many dofs.
pub const SPECTRUM_DOF_LIMIT: usize = 2000;

/// One CSV row: the configuration echo followed by the measurements.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ResultRow {
    pub problem: String,
    pub model: String,
    pub dim: usize,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub omega: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub variant: String,
    pub tol: f64,
    #[serde(rename = "tol_A")]
    pub tol_a: f64,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub relres: f64,
    pub cond_est: Option<f64>,
    pub coarse_dim: usize,
    #[serde(rename = "M")]
    pub max_neighbors: usize,
    pub sum_li: usize,
    pub rel_error: Option<f64>,
    pub setup_seconds: f64,
    pub solve_seconds: f64,
}

/// A built discretization of either scalar type.
pub enum Discretization {
    Elliptic(Box<EllipticProblem>),
    Helmholtz(Box<PwlsProblem>),
}

impl Discretization {
    pub fn decomposition(&self) -> &Decomposition {
        match self {
            Discretization::Elliptic(p) => &p.decomp,
            Discretization::Helmholtz(p) => &p.decomp,
        }
    }

    pub fn num_dofs(&self) -> usize {
        match self {
            Discretization::Elliptic(p) => p.system.num_dofs(),
            Discretization::Helmholtz(p) => p.system.num_dofs(),
        }
    }

    pub fn default_threshold(&self) -> f64 {
        match self {
            Discretization::Elliptic(p) => p.default_threshold(),
            Discretization::Helmholtz(p) => p.default_threshold(),
        }
    }
}

/// Builds mesh, decomposition, partition of unity and system.
pub fn build_discretization(cfg: &ExperimentConfig, max_oversample: usize) -> Result<Discretization> {
    cfg.validate()?;
    if cfg.problem.is_elliptic() {
        let mesh = build_structured_mesh(cfg.dim(), cfg.n, cfg.m, MeshConvention::Elliptic)?;
        let model = cfg.model.coefficient().expect("validated");
        let coefficient = if cfg.mu1.is_some() || cfg.mu2.is_some() {
            let (mu1, mu2) = cfg.resolved_mu();
            CoefficientField::jump(&mesh, model, mu1, mu2)
        } else {
            CoefficientField::model(&mesh, model, cfg.mu.unwrap_or(0.0), cfg.seed)
        };
        let p = EllipticProblem::from_parts(mesh, coefficient, cfg.l, max_oversample)?;
        Ok(Discretization::Elliptic(Box::new(p)))
    } else {
        let spec = PwlsSpec {
            model: cfg.model.wavespeed().expect("validated"),
            n: cfg.n,
            m: cfg.m,
            p: cfg.p.expect("validated"),
            omega: cfg.omega.expect("validated"),
            overlap: cfg.l,
            max_oversample,
            seed: cfg.seed,
            multipliers: cfg.multipliers(),
        };
        Ok(Discretization::Helmholtz(Box::new(PwlsProblem::build(&spec)?)))
    }
}

fn coarse_options(cfg: &ExperimentConfig) -> CoarseOptions {
    CoarseOptions {
        tol_a: cfg.resolved_tol_a(),
        max_it: None,
        column_solver: cfg.column_solver,
    }
}

/// Preconditioner for a configuration together with the coarse statistics.
pub struct Setup<T> {
    pub precond: SchwarzPreconditioner<T>,
    pub threshold: f64,
    pub sum_li: usize,
}

pub fn build_preconditioner<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    cfg: &ExperimentConfig,
    threshold: f64,
) -> Result<Setup<T>> {
    let (coarse, sum_li) = match cfg.variant.coarse() {
        None => (None, 0),
        Some(v) => {
            let bases = local_eigenbases(system, threshold, false).stage("eigenproblems")?;
            let sum_li = bases.iter().map(|b| b.selected).sum();
            let basis = build_coarse(system, decomp, &bases, v, cfg.k, &coarse_options(cfg)).stage("coarse space")?;
            (Some(basis), sum_li)
        }
    };
    let precond = SchwarzPreconditioner::build(system, coarse).stage("preconditioner")?;
    Ok(Setup {
        precond,
        threshold,
        sum_li,
    })
}

struct Solved<T> {
    u: Vec<T>,
    report: PcgReport,
    setup: Setup<T>,
    setup_seconds: f64,
}

fn solve_system<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    cfg: &ExperimentConfig,
    threshold: f64,
    started: Instant,
) -> Result<Solved<T>> {
    let setup = build_preconditioner(system, decomp, cfg, threshold)?;
    let setup_seconds = started.elapsed().as_secs_f64();
    let (u, report) = pcg_solve(
        system.a.matrix(),
        &setup.precond,
        &system.rhs,
        cfg.resolved_tol(),
        cfg.resolved_max_it(),
    )
    .stage("pcg")?;
    Ok(Solved {
        u,
        report,
        setup,
        setup_seconds,
    })
}

fn max_oversample(cfg: &ExperimentConfig) -> usize {
    cfg.k.unwrap_or(0)
}

/// Runs one experiment end to end.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRow> {
    cfg.validate()?;
    let started = Instant::now();
    let disc = build_discretization(cfg, max_oversample(cfg)).stage("discretization")?;
    let threshold = cfg.lambda.unwrap_or_else(|| disc.default_threshold());
    let decomp = disc.decomposition();
    let (report, setup_seconds, coarse_dim, sum_li, rel_error) = match &disc {
        Discretization::Elliptic(p) => {
            let s = solve_system(&p.system, decomp, cfg, threshold, started)?;
            (s.report, s.setup_seconds, s.setup.precond.coarse_dim(), s.setup.sum_li, None)
        }
        Discretization::Helmholtz(p) => {
            let s = solve_system(&p.system, decomp, cfg, threshold, started)?;
            let err = match &p.exact {
                Some(_) => Some(p.evaluate_error(&s.u).stage("error evaluation")?),
                None => None,
            };
            (s.report, s.setup_seconds, s.setup.precond.coarse_dim(), s.setup.sum_li, err)
        }
    };
    let is_helmholtz = !cfg.problem.is_elliptic();
    let (mu1, mu2) = cfg.resolved_mu();
    Ok(ResultRow {
        problem: cfg.problem.name().to_string(),
        model: cfg.model.name().to_string(),
        dim: cfg.dim(),
        n: cfg.n,
        m: cfg.m,
        l: cfg.l,
        k: cfg.k,
        p: cfg.p,
        omega: cfg.omega,
        mu1: (!is_helmholtz).then_some(mu1),
        mu2: (!is_helmholtz).then_some(mu2),
        lambda: threshold,
        variant: cfg.variant.name().to_string(),
        tol: cfg.resolved_tol(),
        tol_a: cfg.resolved_tol_a(),
        seed: cfg.seed,
        iterations: report.iterations,
        converged: report.converged,
        relres: report.final_relres(),
        cond_est: report.cond_est,
        coarse_dim,
        max_neighbors: decomp.max_neighbors,
        sum_li,
        rel_error,
        setup_seconds,
        solve_seconds: report.solve_seconds,
    })
}

/// Cartesian product of the varied values applied to `base`, in the order
/// the keys and values were given (last key varies fastest).
pub fn expand_sweep(base: &ExperimentConfig, vary: &[(String, Vec<String>)]) -> Result<Vec<ExperimentConfig>> {
    let mut configs = vec![base.clone()];
    for (key, values) in vary {
        let mut next = Vec::with_capacity(configs.len() * values.len());
        for c in &configs {
            for v in values {
                next.push(c.with_field(key, v)?);
            }
        }
        configs = next;
    }
    Ok(configs)
}

/// Runs every sweep point on up to `jobs` threads; rows come back in config
/// order.
pub fn sweep(base: &ExperimentConfig, vary: &[(String, Vec<String>)], jobs: usize) -> Result<Vec<ResultRow>> {
    let configs = expand_sweep(base, vary)?;
    let results: Vec<Mutex<Option<Result<ResultRow>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = jobs.clamp(1, configs.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= configs.len() {
                    break;
                }
                let r = run(&configs[idx]);
                *results[idx].lock().expect("result slot") = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every point ran"))
        .collect()
}

/// Eigenvalues of the preconditioned operator from a dense oracle.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub dofs: usize,
    pub coarse_dim: usize,
    /// Sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub cond: f64,
    pub max_imag: f64,
}

/// Dense `B^{-1} A` built column by column.
pub fn preconditioned_matrix<T: Scalar, P: Preconditioner<T> + ?Sized>(
    a: &crate::numerics::CsrMatrix<T>,
    precond: &P,
) -> Mat<T> {
    let n = a.nrows();
    let mut out = Mat::<T>::zeros(n, n);
    let mut e = vec![T::ZERO; n];
    for j in 0..n {
        e[j] = T::ONE;
        let col = precond.apply(&a.matvec(&e));
        e[j] = T::ZERO;
        for i in 0..n {
            out[(i, j)] = col[i];
        }
    }
    out
}

fn spectrum_of<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    cfg: &ExperimentConfig,
    threshold: f64,
) -> Result<SpectrumReport> {
    let setup = build_preconditioner(system, decomp, cfg, threshold)?;
    let m = preconditioned_matrix(system.a.matrix(), &setup.precond);
    let mut ev = general_eigenvalues(&m).stage("dense eigensolver")?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re));
    let lambda_min = ev.first().map_or(f64::NAN, |z| z.re);
    let lambda_max = ev.last().map_or(f64::NAN, |z| z.re);
    let max_imag = ev.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    Ok(SpectrumReport {
        dofs: system.num_dofs(),
        coarse_dim: setup.precond.coarse_dim(),
        eigenvalues: ev,
        lambda_min,
        lambda_max,
        cond: lambda_max / lambda_min,
        max_imag,
    })
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<SpectrumReport> {
    let disc = build_discretization(cfg, max_oversample(cfg)).stage("discretization")?;
    let dofs = disc.num_dofs();
    if dofs > SPECTRUM_DOF_LIMIT {
        return Err(crate::Error::TooLargeForOracle {
            dofs,
            limit: SPECTRUM_DOF_LIMIT,
        });
    }
    let threshold = cfg.lambda.unwrap_or_else(|| disc.default_threshold());
    match &disc {
        Discretization::Elliptic(p) => spectrum_of(&p.system, &p.decomp, cfg, threshold),
        Discretization::Helmholtz(p) => spectrum_of(&p.system, &p.decomp, cfg, threshold),
    }
}

/// Energy distance between a global coarse column and its economical
/// approximations.
#[derive(Clone, Debug, Serialize)]
pub struct DecayColumn {
    pub subdomain: usize,
    pub mode: usize,
    pub errors: Vec<f64>,
    /// Fitted factor `r` in `e_k ~ C r^k`.
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub ks: Vec<usize>,
    pub columns: Vec<DecayColumn>,
}

impl DecayReport {
    pub fn fraction_below(&self, r: f64) -> f64 {
        if self.columns.is_empty() {
            return 0.0;
        }
        self.columns.iter().filter(|c| c.ratio <= r).count() as f64 / self.columns.len() as f64
    }
}

/// Decay factor `r` of a least-squares fit `e_k ~ C r^k`. Errors that
/// vanish to rounding (the region already covers the domain) are left out
/// of the fit; when fewer than two remain the column is exact and the
/// factor is 0.
pub fn fit_ratio(ks: &[usize], errors: &[f64]) -> f64 {
    let top = errors.iter().copied().fold(0.0f64, f64::max);
    let (xs, ys): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > EXACT_RELATIVE * top)
        .map(|(&k, &e)| (k as f64, e.ln()))
        .unzip();
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxy / sxx).exp()
}

/// Errors below this fraction of a column's largest error count as exact.
const EXACT_RELATIVE: f64 = 1e-12;

fn decay_of<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    cfg: &ExperimentConfig,
    threshold: f64,
    ks: &[usize],
) -> Result<DecayReport> {
    let bases = local_eigenbases(system, threshold, false).stage("eigenproblems")?;
    let shifted = matches!(cfg.variant, Variant::PsibarGlobal | Variant::PsibarEcon);
    let opts = CoarseOptions {
        column_solver: ColumnSolver::Direct,
        ..coarse_options(cfg)
    };
    let (global_variant, econ_variant) = if shifted {
        (CoarseVariant::PsibarGlobal, CoarseVariant::PsibarEcon)
    } else {
        (CoarseVariant::PsiGlobal, CoarseVariant::PsiEcon)
    };
    let global = build_coarse(system, decomp, &bases, global_variant, None, &opts).stage("coarse space")?;
    let a = system.a.matrix();
    let n = system.num_dofs();
    let mut errors: Vec<Vec<f64>> = vec![Vec::with_capacity(ks.len()); global.coarse_dim()];
    for &k in ks {
        let econ = build_coarse(system, decomp, &bases, econ_variant, Some(k), &opts).stage("coarse space")?;
        for (c, (g, e)) in global.columns.iter().zip(&econ.columns).enumerate() {
            debug_assert_eq!((g.subdomain, g.mode), (e.subdomain, e.mode));
            let mut d = g.to_dense(n);
            e.add_to(-T::ONE, &mut d);
            errors[c].push(a.quad_form(&d).real().max(0.0).sqrt());
        }
    }
    let columns = global
        .columns
        .iter()
        .zip(errors)
        .map(|(g, errors)| DecayColumn {
            subdomain: g.subdomain,
            mode: g.mode,
            ratio: fit_ratio(ks, &errors),
            errors,
        })
        .collect();
    Ok(DecayReport {
        ks: ks.to_vec(),
        columns,
    })
}

/// Energy distances `|psi - psi_k|_a` per coarse column for each `k`. The
/// global reference columns are computed with a direct solver.
pub fn decay(cfg: &ExperimentConfig, ks: &[usize]) -> Result<DecayReport> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(crate::Error::invalid("decay needs a list of k >= 1"));
    }
    let kmax = *ks.iter().max().expect("nonempty");
    let disc = build_discretization(cfg, kmax).stage("discretization")?;
    let threshold = cfg.lambda.unwrap_or_else(|| disc.default_threshold());
    match &disc {
        Discretization::Elliptic(p) => decay_of(&p.system, &p.decomp, cfg, threshold, ks),
        Discretization::Helmholtz(p) => decay_of(&p.system, &p.decomp, cfg, threshold, ks),
    }
}
