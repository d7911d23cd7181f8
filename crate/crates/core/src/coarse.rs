//! Local spectral eigenproblems and the coarse bases built from them.

use std::io::Write;
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::numerics::dense::hermitian_part;
use crate::numerics::{
    dense_generalized_eig, factorize, inner_solve, CsrMatrix, DenseCholesky, FactorKind, LowRankShiftedSolver,
};
use crate::scalar::{dot, Scalar};
use crate::system::DdSystem;

/// Pencil eigenvalues at or below this value are read as an infinite
/// spectral eigenvalue.
pub const INFINITE_MU: f64 = 1e-12;

/// Relative gap below which neighbouring eigenvalues are orthonormalized
/// together.
pub const CLUSTER_GAP: f64 = 1e-8;

/// Regions with at most this many dofs are factorized for the `psi` systems.
pub const DIRECT_REGION_LIMIT: usize = 20_000;

/// Selected spectral modes of one subdomain.
#[derive(Clone, Debug)]
pub struct LocalEigenBasis<T> {
    pub subdomain: usize,
    pub threshold: f64,
    /// Descending; `f64::INFINITY` marks modes in the kernel of `a_i`.
    pub lambdas: Vec<f64>,
    /// Columns over the closed-subdomain dofs. The first `selected` are the
    /// chosen modes; further columns are only present when requested.
    pub phis: Mat<T>,
    pub selected: usize,
}

impl<T: Scalar> LocalEigenBasis<T> {
    pub fn phi(&self, j: usize) -> Vec<T> {
        self.phis.col(j).iter().copied().collect()
    }

    pub fn infinite_count(&self) -> usize {
        self.lambdas.iter().take_while(|l| l.is_infinite()).count()
    }
}

fn same_cluster(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a.is_infinite() && b.is_infinite();
    }
    (a - b).abs() < CLUSTER_GAP * a.abs().max(b.abs())
}

/// Solves `s phi = lambda a phi` through the definite pencil
/// `a x = mu (a + s) x` with `lambda = (1 - mu) / mu`, keeping the modes
/// with `lambda >= threshold` (or every mode when `keep_all`).
pub fn solve_local_gep<T: Scalar>(
    local_a: &CsrMatrix<T>,
    local_s: &CsrMatrix<T>,
    threshold: f64,
    keep_all: bool,
) -> Result<LocalEigenBasis<T>> {
    if !(threshold > 0.0) {
        return Err(Error::invalid("the spectral threshold must be positive"));
    }
    let n = local_a.nrows();
    if local_s.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: local_s.nrows(),
        });
    }
    let a = hermitian_part(&local_a.to_dense());
    let s = hermitian_part(&local_s.to_dense());
    let b = &a + &s;
    let eig = dense_generalized_eig(&a, &b)?;
    let lambdas: Vec<f64> = eig
        .values
        .iter()
        .map(|&mu| if mu <= INFINITE_MU { f64::INFINITY } else { ((1.0 - mu) / mu).max(0.0) })
        .collect();
    let selected = lambdas.iter().take_while(|&&l| l >= threshold).count();
    let kept = if keep_all { n } else { selected };

    let mut phis = Mat::<T>::zeros(n, kept);
    for j in 0..kept {
        let snorm = 1.0 - eig.values[j];
        let scale = if snorm > 1e-14 { 1.0 / snorm.sqrt() } else { 1.0 };
        for r in 0..n {
            phis[(r, j)] = eig.vectors[(r, j)].scale(scale);
        }
    }
    // s-orthonormalize inside clusters of the selected modes
    let mut start = 0;
    while start < selected {
        let mut end = start + 1;
        while end < selected && same_cluster(lambdas[end - 1], lambdas[end]) {
            end += 1;
        }
        if end - start > 1 {
            s_gram_schmidt(&s, &mut phis, start, end);
        }
        start = end;
    }
    Ok(LocalEigenBasis {
        subdomain: 0,
        threshold,
        lambdas,
        phis,
        selected,
    })
}

fn s_gram_schmidt<T: Scalar>(s: &Mat<T>, phis: &mut Mat<T>, start: usize, end: usize) {
    let n = phis.nrows();
    for j in start..end {
        for q in start..j {
            let sq: Vec<T> = (0..n).map(|r| (0..n).map(|c| s[(r, c)] * phis[(c, q)]).sum()).collect();
            let coef: T = (0..n).map(|r| sq[r].conjugate() * phis[(r, j)]).sum();
            for r in 0..n {
                let v = phis[(r, q)] * coef;
                phis[(r, j)] -= v;
            }
        }
        let sj: Vec<T> = (0..n).map(|r| (0..n).map(|c| s[(r, c)] * phis[(c, j)]).sum()).collect();
        let nrm: f64 = (0..n).map(|r| (phis[(r, j)].conjugate() * sj[r]).real()).sum::<f64>();
        if nrm > 0.0 {
            let inv = 1.0 / nrm.sqrt();
            for r in 0..n {
                phis[(r, j)] = phis[(r, j)].scale(inv);
            }
        }
    }
}

/// Coefficients `s_i(v, phi_j)` of the s-orthogonal projection onto the
/// selected modes.
pub fn project_pi<T: Scalar>(basis: &LocalEigenBasis<T>, local_s: &CsrMatrix<T>, v: &[T]) -> Vec<T> {
    let sv = local_s.matvec(v);
    (0..basis.selected).map(|j| dot(&basis.phi(j), &sv)).collect()
}

/// Eigenbases of every subdomain.
pub fn local_eigenbases<T: Scalar>(
    system: &DdSystem<T>,
    threshold: f64,
    keep_all: bool,
) -> Result<Vec<LocalEigenBasis<T>>> {
    (0..system.num_subdomains())
        .map(|i| {
            let mut b = solve_local_gep(&system.local_a[i], &system.local_s[i], threshold, keep_all)?;
            b.subdomain = i;
            Ok(b)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarseVariant {
    PsiGlobal,
    PsibarGlobal,
    PsiEcon,
    PsibarEcon,
}

impl CoarseVariant {
    pub fn is_economical(self) -> bool {
        matches!(self, CoarseVariant::PsiEcon | CoarseVariant::PsibarEcon)
    }

    pub fn is_shifted(self) -> bool {
        matches!(self, CoarseVariant::PsibarGlobal | CoarseVariant::PsibarEcon)
    }

    pub fn name(self) -> &'static str {
        match self {
            CoarseVariant::PsiGlobal => "psi_global",
            CoarseVariant::PsibarGlobal => "psibar_global",
            CoarseVariant::PsiEcon => "psi_econ",
            CoarseVariant::PsibarEcon => "psibar_econ",
        }
    }
}

/// How the global `psi` systems are solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSolver {
    /// Jacobi conjugate gradients to the inner tolerance.
    #[default]
    Iterative,
    /// Sparse factorization of the global operator.
    Direct,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoarseOptions {
    pub tol_a: f64,
    /// Defaults to ten times the system size.
    pub max_it: Option<usize>,
    pub column_solver: ColumnSolver,
}

impl Default for CoarseOptions {
    fn default() -> Self {
        Self {
            tol_a: 0.1,
            max_it: None,
            column_solver: ColumnSolver::Iterative,
        }
    }
}

/// A coarse basis vector with optional sparse support.
#[derive(Clone, Debug)]
pub struct CoarseColumn<T> {
    pub subdomain: usize,
    pub mode: usize,
    /// Sorted support, shared by all columns of one region; `None` stores
    /// every dof.
    pub support: Option<Arc<[usize]>>,
    pub values: Vec<T>,
}

impl<T: Scalar> CoarseColumn<T> {
    /// `c^H r`
    pub fn adjoint_dot(&self, r: &[T]) -> T {
        match &self.support {
            None => dot(&self.values, r),
            Some(idx) => idx.iter().zip(&self.values).map(|(&g, v)| v.conjugate() * r[g]).sum(),
        }
    }

    /// `z += alpha c`
    pub fn add_to(&self, alpha: T, z: &mut [T]) {
        match &self.support {
            None => {
                for (zi, v) in z.iter_mut().zip(&self.values) {
                    *zi += alpha * *v;
                }
            }
            Some(idx) => {
                for (&g, v) in idx.iter().zip(&self.values) {
                    z[g] += alpha * *v;
                }
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<T> {
        let mut out = vec![T::ZERO; n];
        self.add_to(T::ONE, &mut out);
        out
    }

    pub fn support_len(&self, n: usize) -> usize {
        self.support.as_ref().map_or(n, |s| s.len())
    }
}

#[derive(Clone, Debug)]
pub struct CoarseBasis<T> {
    pub variant: CoarseVariant,
    pub k: Option<usize>,
    pub threshold: f64,
    pub counts: Vec<usize>,
    pub columns: Vec<CoarseColumn<T>>,
    pub a0: Mat<T>,
    pub num_dofs: usize,
    /// Largest inner iteration count over the iterative column solves.
    pub max_inner_iterations: usize,
}

impl<T: Scalar> CoarseBasis<T> {
    pub fn coarse_dim(&self) -> usize {
        self.columns.len()
    }

    pub fn a0_hermitian_defect(&self) -> f64 {
        let n = self.a0.nrows();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                d = d.max((self.a0[(i, j)] - self.a0[(j, i)].conjugate()).modulus());
            }
        }
        d
    }

    pub fn factor_a0(&self) -> Result<DenseCholesky<T>> {
        DenseCholesky::new(&self.a0)
    }

    /// `C^H r`
    pub fn restrict(&self, r: &[T]) -> Vec<T> {
        self.columns.iter().map(|c| c.adjoint_dot(r)).collect()
    }

    /// `C y`
    pub fn prolong(&self, y: &[T], z: &mut [T]) {
        for (c, &v) in self.columns.iter().zip(y) {
            if v != T::ZERO {
                c.add_to(v, z);
            }
        }
    }

    /// A-orthogonal projection `C A0^{-1} C^H A u` onto the coarse space.
    pub fn a_projection(&self, a: &CsrMatrix<T>, u: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::ZERO; self.num_dofs];
        if self.coarse_dim() == 0 {
            return Ok(out);
        }
        let chol = self.factor_a0()?;
        let y = chol.solve(&self.restrict(&a.matvec(u)));
        self.prolong(&y, &mut out);
        Ok(out)
    }

    pub fn dense_columns(&self) -> Mat<T> {
        let n = self.num_dofs;
        let mut m = Mat::<T>::zeros(n, self.coarse_dim());
        for (j, c) in self.columns.iter().enumerate() {
            match &c.support {
                None => {
                    for (i, v) in c.values.iter().enumerate() {
                        m[(i, j)] = *v;
                    }
                }
                Some(idx) => {
                    for (&i, v) in idx.iter().zip(&c.values) {
                        m[(i, j)] = *v;
                    }
                }
            }
        }
        m
    }

    pub fn manifest(&self) -> CoarseManifest {
        CoarseManifest {
            variant: self.variant,
            k: self.k,
            lambda: self.threshold,
            l_i: self.counts.clone(),
            coarse_dim: self.coarse_dim(),
        }
    }

    /// Writes the columns as a dense Matrix Market array and the manifest as
    /// JSON.
    pub fn export<W1: Write, W2: Write>(&self, columns: &mut W1, manifest: &mut W2) -> Result<()> {
        crate::numerics::matrix_market::write_dense(columns, &self.dense_columns())?;
        serde_json::to_writer_pretty(&mut *manifest, &self.manifest())?;
        writeln!(manifest)?;
        Ok(())
    }
}

/// Summary written next to an exported coarse basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseManifest {
    pub variant: CoarseVariant,
    pub k: Option<usize>,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub l_i: Vec<usize>,
    pub coarse_dim: usize,
}

impl CoarseManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("manifest threshold must be positive"));
        }
        let total = self.l_i.iter().try_fold(0usize, |acc, &l| acc.checked_add(l));
        if total != Some(self.coarse_dim) {
            return Err(Error::invalid("manifest coarse_dim differs from the sum of l_i"));
        }
        if self.variant.is_economical() != self.k.is_some() {
            return Err(Error::invalid("manifest k must be given exactly for economical variants"));
        }
        if self.k == Some(0) {
            return Err(Error::invalid("manifest k must be at least one"));
        }
        Ok(())
    }
}

/// Right-hand side `S_i phi_j` over the closed-subdomain dofs.
fn generator<T: Scalar>(system: &DdSystem<T>, basis: &LocalEigenBasis<T>, j: usize) -> Vec<T> {
    system.local_s[basis.subdomain].matvec(&basis.phi(j))
}

fn counts<T>(bases: &[LocalEigenBasis<T>]) -> Vec<usize> {
    bases.iter().map(|b| b.selected).collect()
}

fn threshold_of<T>(bases: &[LocalEigenBasis<T>]) -> f64 {
    bases.first().map_or(f64::NAN, |b| b.threshold)
}

/// Global generator matrix `G` whose columns are the zero-extended
/// `S_i phi_j`, restricted to the rows in `rows` (all rows when `None`).
/// Columns vanishing on the rows are dropped; the second return value maps
/// each kept column to its `(i, j)`.
fn generator_matrix<T: Scalar>(
    system: &DdSystem<T>,
    bases: &[LocalEigenBasis<T>],
    rows: Option<&[usize]>,
) -> (Mat<T>, Vec<(usize, usize)>) {
    let n = system.num_dofs();
    let (nrows, local_index): (usize, Box<dyn Fn(usize) -> Option<usize>>) = match rows {
        None => (n, Box::new(Some)),
        Some(r) => (r.len(), Box::new(move |g: usize| r.binary_search(&g).ok())),
    };
    let mut cols: Vec<(Vec<(usize, T)>, (usize, usize))> = Vec::new();
    for b in bases {
        let dofs = &system.closed_dofs[b.subdomain];
        for j in 0..b.selected {
            let g = generator(system, b, j);
            let entries: Vec<(usize, T)> = dofs
                .iter()
                .zip(&g)
                .filter_map(|(&d, &v)| local_index(d).map(|li| (li, v)))
                .filter(|(_, v)| *v != T::ZERO)
                .collect();
            if !entries.is_empty() {
                cols.push((entries, (b.subdomain, j)));
            }
        }
    }
    let mut m = Mat::<T>::zeros(nrows, cols.len());
    let mut owners = Vec::with_capacity(cols.len());
    for (c, (entries, owner)) in cols.into_iter().enumerate() {
        for (r, v) in entries {
            m[(r, c)] = v;
        }
        owners.push(owner);
    }
    (m, owners)
}

/// `C^H A C`, exploiting column supports when they are sparse.
pub fn coarse_operator<T: Scalar>(a: &CsrMatrix<T>, columns: &[CoarseColumn<T>]) -> Mat<T> {
    let n = a.nrows();
    let nc = columns.len();
    if nc == 0 {
        return Mat::zeros(0, 0);
    }
    if columns.iter().any(|c| c.support.is_none()) {
        let mut c = Mat::<T>::zeros(n, nc);
        let mut ac = Mat::<T>::zeros(n, nc);
        for (j, col) in columns.iter().enumerate() {
            let v = col.to_dense(n);
            let av = a.matvec(&v);
            for i in 0..n {
                c[(i, j)] = v[i];
                ac[(i, j)] = av[i];
            }
        }
        return hermitian_part(&(c.adjoint() * &ac));
    }
    sparse_coarse_operator(a, columns)
}

/// Consecutive runs of columns sharing one support.
fn support_groups<T>(columns: &[CoarseColumn<T>]) -> Vec<std::ops::Range<usize>> {
    let mut groups: Vec<std::ops::Range<usize>> = Vec::new();
    for (j, c) in columns.iter().enumerate() {
        let same = groups.last().is_some_and(|g| {
            let prev = columns[g.start].support.as_ref().unwrap();
            let cur = c.support.as_ref().unwrap();
            Arc::ptr_eq(prev, cur) || prev[..] == cur[..]
        });
        match groups.last_mut() {
            Some(g) if same => g.end = j + 1,
            _ => groups.push(j..j + 1),
        }
    }
    groups
}

/// Blockwise `C^H A C` for columns with sparse supports. For each group
/// `J`, `A C_J` is formed on the rows it touches, and every group `I <= J`
/// overlapping those rows contributes one dense product.
fn sparse_coarse_operator<T: Scalar>(a: &CsrMatrix<T>, columns: &[CoarseColumn<T>]) -> Mat<T> {
    const NONE: usize = usize::MAX;
    let n = a.nrows();
    let nc = columns.len();
    let groups = support_groups(columns);
    let support = |g: usize| columns[groups[g].start].support.as_deref().unwrap();
    let mut groups_at: Vec<Vec<u32>> = vec![Vec::new(); n];
    for g in 0..groups.len() {
        for &d in support(g) {
            groups_at[d].push(g as u32);
        }
    }
    let mut a0 = Mat::<T>::zeros(nc, nc);
    let mut pos_r = vec![NONE; n];
    let mut pos_t = vec![NONE; n];
    let mut seen = vec![false; groups.len()];
    for (gj, cols_j) in groups.iter().enumerate() {
        let r_j = support(gj);
        for (p, &d) in r_j.iter().enumerate() {
            pos_r[d] = p;
        }
        // rows reached by A from the support (A is Hermitian, so the
        // column pattern equals the row pattern)
        let mut rows: Vec<usize> = Vec::new();
        for &d in r_j {
            for &r in a.row(d).0 {
                if pos_t[r] == NONE {
                    pos_t[r] = 0;
                    rows.push(r);
                }
            }
        }
        rows.sort_unstable();
        for (q, &r) in rows.iter().enumerate() {
            pos_t[r] = q;
        }
        let nj = cols_j.len();
        let mut y = Mat::<T>::zeros(rows.len(), nj);
        for (q, &r) in rows.iter().enumerate() {
            let (idx, vals) = a.row(r);
            for (&d, &w) in idx.iter().zip(vals) {
                let p = pos_r[d];
                if p == NONE {
                    continue;
                }
                for (b, col) in columns[cols_j.clone()].iter().enumerate() {
                    y[(q, b)] += w * col.values[p];
                }
            }
        }
        let mut candidates: Vec<usize> = Vec::new();
        for &r in &rows {
            for &g in &groups_at[r] {
                let g = g as usize;
                if g <= gj && !seen[g] {
                    seen[g] = true;
                    candidates.push(g);
                }
            }
        }
        for gi in candidates {
            seen[gi] = false;
            let cols_i = groups[gi].clone();
            let pairs: Vec<(usize, usize)> = support(gi)
                .iter()
                .enumerate()
                .filter(|&(_, &d)| pos_t[d] != NONE)
                .map(|(p, &d)| (p, pos_t[d]))
                .collect();
            let ci = Mat::<T>::from_fn(pairs.len(), cols_i.len(), |r, a| columns[cols_i.start + a].values[pairs[r].0]);
            let yi = Mat::<T>::from_fn(pairs.len(), nj, |r, b| y[(pairs[r].1, b)]);
            let block = ci.adjoint() * &yi;
            for a in 0..cols_i.len() {
                for b in 0..nj {
                    a0[(cols_i.start + a, cols_j.start + b)] = block[(a, b)];
                    if gi != gj {
                        a0[(cols_j.start + b, cols_i.start + a)] = block[(a, b)].conjugate();
                    }
                }
            }
        }
        for &d in r_j {
            pos_r[d] = NONE;
        }
        for &r in &rows {
            pos_t[r] = NONE;
        }
    }
    hermitian_part(&a0)
}

fn finish<T: Scalar>(
    system: &DdSystem<T>,
    bases: &[LocalEigenBasis<T>],
    variant: CoarseVariant,
    k: Option<usize>,
    columns: Vec<CoarseColumn<T>>,
    max_inner_iterations: usize,
) -> CoarseBasis<T> {
    let a0 = coarse_operator(system.a.matrix(), &columns);
    CoarseBasis {
        variant,
        k,
        threshold: threshold_of(bases),
        counts: counts(bases),
        columns,
        a0,
        num_dofs: system.num_dofs(),
        max_inner_iterations,
    }
}

/// Columns solving `A psi = S_i phi_j` (zero-extended) on the whole domain.
pub fn build_psi_global<T: Scalar>(
    system: &DdSystem<T>,
    bases: &[LocalEigenBasis<T>],
    opts: &CoarseOptions,
) -> Result<CoarseBasis<T>> {
    let n = system.num_dofs();
    let a = system.a.matrix();
    let max_it = opts.max_it.unwrap_or(10 * n.max(1));
    let factor = match opts.column_solver {
        ColumnSolver::Direct if bases.iter().any(|b| b.selected > 0) => Some(factorize(a, FactorKind::Cholesky)?),
        _ => None,
    };
    let mut columns = Vec::new();
    let mut max_inner = 0;
    for b in bases {
        for j in 0..b.selected {
            let r = system.extend(b.subdomain, &generator(system, b, j));
            let values = match &factor {
                Some(f) => f.solve(&r),
                None => {
                    let sol = inner_solve(a, &r, opts.tol_a, max_it)?;
                    max_inner = max_inner.max(sol.iterations);
                    sol.x
                }
            };
            columns.push(CoarseColumn {
                subdomain: b.subdomain,
                mode: j,
                support: None,
                values,
            });
        }
    }
    Ok(finish(system, bases, CoarseVariant::PsiGlobal, None, columns, max_inner))
}

/// Columns solving the shifted system `(A + G G^H) psibar = S_i phi_j`.
pub fn build_psibar_global<T: Scalar>(
    system: &DdSystem<T>,
    bases: &[LocalEigenBasis<T>],
) -> Result<CoarseBasis<T>> {
    let (g, owners) = generator_matrix(system, bases, None);
    let mut columns = Vec::new();
    if !owners.is_empty() {
        let factor = factorize(system.a.matrix(), FactorKind::Cholesky)?;
        let solver = LowRankShiftedSolver::new(&factor, g)?;
        let sol = solver.solve_generators();
        for (c, &(i, j)) in owners.iter().enumerate() {
            columns.push(CoarseColumn {
                subdomain: i,
                mode: j,
                support: None,
                values: sol.col(c).iter().copied().collect(),
            });
        }
    }
    Ok(finish(system, bases, CoarseVariant::PsibarGlobal, None, columns, 0))
}

/// Columns solved on the oversampled region of level `k` with homogeneous
/// Dirichlet data on its internal boundary.
pub fn build_economical<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    bases: &[LocalEigenBasis<T>],
    k: usize,
    variant: CoarseVariant,
    opts: &CoarseOptions,
) -> Result<CoarseBasis<T>> {
    if k == 0 {
        return Err(Error::invalid("economical coarse spaces need k >= 1"));
    }
    let shifted = match variant {
        CoarseVariant::PsiEcon => false,
        CoarseVariant::PsibarEcon => true,
        _ => return Err(Error::invalid("variant is not economical")),
    };
    let a = system.a.matrix();
    let mut columns = Vec::new();
    let mut max_inner = 0;
    for b in bases {
        if b.selected == 0 {
            continue;
        }
        let i = b.subdomain;
        let region = decomp.oversampled_elements(i, k)?;
        let dofs = system.incidence.interior_dofs(&region);
        if dofs.is_empty() {
            return Err(Error::EmptyRegion { subdomain: i, k });
        }
        let local_index = |g: usize| dofs.binary_search(&g).map_err(|_| Error::EmptyRegion { subdomain: i, k });
        let closed: Vec<usize> = system.closed_dofs[i]
            .iter()
            .map(|&g| local_index(g))
            .collect::<Result<_>>()?;
        let a_r = a.principal_submatrix(&dofs);
        let rhs = |j: usize| -> Vec<T> {
            let mut r = vec![T::ZERO; dofs.len()];
            for (&li, v) in closed.iter().zip(generator(system, b, j)) {
                r[li] = v;
            }
            r
        };
        let support: Arc<[usize]> = dofs.clone().into();
        let mut push = |j: usize, values: Vec<T>| {
            columns.push(CoarseColumn {
                subdomain: i,
                mode: j,
                support: Some(support.clone()),
                values,
            })
        };
        if shifted {
            let factor = factorize(&a_r, FactorKind::Cholesky)?;
            let (g, owners) = generator_matrix(system, bases, Some(&dofs));
            let solver = LowRankShiftedSolver::new(&factor, g)?;
            let sol = solver.solve_generators();
            for (c, &(owner, j)) in owners.iter().enumerate() {
                if owner == i {
                    push(j, sol.col(c).iter().copied().collect());
                }
            }
        } else if dofs.len() <= DIRECT_REGION_LIMIT {
            let factor = factorize(&a_r, FactorKind::Cholesky)?;
            for j in 0..b.selected {
                push(j, factor.solve(&rhs(j)));
            }
        } else {
            let max_it = opts.max_it.unwrap_or(10 * dofs.len());
            for j in 0..b.selected {
                let sol = inner_solve(&a_r, &rhs(j), opts.tol_a, max_it)?;
                max_inner = max_inner.max(sol.iterations);
                push(j, sol.x);
            }
        }
    }
    // keep (i, j) ordering identical to the global variants
    columns.sort_by_key(|c| (c.subdomain, c.mode));
    Ok(finish(system, bases, variant, Some(k), columns, max_inner))
}

/// Dispatches on the variant.
pub fn build_coarse<T: Scalar>(
    system: &DdSystem<T>,
    decomp: &Decomposition,
    bases: &[LocalEigenBasis<T>],
    variant: CoarseVariant,
    k: Option<usize>,
    opts: &CoarseOptions,
) -> Result<CoarseBasis<T>> {
    match variant {
        CoarseVariant::PsiGlobal => build_psi_global(system, bases, opts),
        CoarseVariant::PsibarGlobal => build_psibar_global(system, bases),
        CoarseVariant::PsiEcon | CoarseVariant::PsibarEcon => {
            let k = k.ok_or_else(|| Error::invalid("economical variants need k"))?;
            build_economical(system, decomp, bases, k, variant, opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> CsrMatrix<f64> {
        CsrMatrix::from_diagonal(v)
    }

    #[test]
    fn pencil_maps_kernel_to_infinity() {
        let a = diag(&[0.0, 1.0, 2.0]);
        let s = diag(&[1.0, 1.0, 1.0]);
        let b = solve_local_gep(&a, &s, 0.75, false).unwrap();
        assert!(b.lambdas[0].is_infinite());
        assert!((b.lambdas[1] - 1.0).abs() < 1e-12);
        assert!((b.lambdas[2] - 0.5).abs() < 1e-12);
        assert_eq!(b.selected, 2);
        assert_eq!(b.infinite_count(), 1);
        let all = solve_local_gep(&a, &s, 1e15, true).unwrap();
        assert_eq!(all.selected, 1);
        assert_eq!(all.phis.ncols(), 3);
    }

    #[test]
    fn ties_at_threshold_are_selected() {
        let a = diag(&[1.0, 1.0, 4.0]);
        let s = diag(&[2.0, 2.0, 1.0]);
        let b = solve_local_gep(&a, &s, 2.0, false).unwrap();
        assert_eq!(b.selected, 2);
        let proj = project_pi(&b, &s, &b.phi(1));
        assert!((proj[0]).abs() < 1e-12 && (proj[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grouped_coarse_operator_matches_dense_product() {
        // 1D Laplacian with overlapping groups of random columns
        let n = 30;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, t);
        let mut columns = Vec::new();
        for (g, range) in [(0usize, 0..12usize), (1, 8..20), (2, 19..30)] {
            let support: Arc<[usize]> = range.collect::<Vec<_>>().into();
            for mode in 0..3 {
                let values = support.iter().map(|&d| ((d * 7 + mode * 3 + g) % 11) as f64 - 5.0).collect();
                columns.push(CoarseColumn { subdomain: g, mode, support: Some(support.clone()), values });
            }
        }
        let sparse = coarse_operator(&a, &columns);
        let dense_cols: Vec<CoarseColumn<f64>> = columns
            .iter()
            .map(|c| CoarseColumn { support: None, values: c.to_dense(n), ..c.clone() })
            .collect();
        let dense = coarse_operator(&a, &dense_cols);
        for i in 0..columns.len() {
            for j in 0..columns.len() {
                assert!((sparse[(i, j)] - dense[(i, j)]).abs() < 1e-10, "{i} {j}");
            }
        }
    }

    #[test]
    fn manifest_validation() {
        let ok = r#"{"variant":"psi_econ","k":2,"Lambda":2.5,"l_i":[1,2],"coarse_dim":3}"#;
        assert!(CoarseManifest::from_json(ok).is_ok());
        for bad in [
            r#"{"variant":"psi_econ","k":2,"Lambda":2.5,"l_i":[1,2],"coarse_dim":4}"#,
            r#"{"variant":"psi_global","k":2,"Lambda":2.5,"l_i":[],"coarse_dim":0}"#,
            r#"{"variant":"psi_global","k":null,"Lambda":-1,"l_i":[],"coarse_dim":0}"#,
            r#"{"variant":"psi_global","k":null,"Lambda":1,"l_i":[],"coarse_dim":0,"x":1}"#,
        ] {
            assert!(CoarseManifest::from_json(bad).is_err(), "{bad}");
        }
    }
}
