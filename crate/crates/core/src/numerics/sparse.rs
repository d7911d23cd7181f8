use faer::Mat;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Coordinate-format accumulator. Duplicates are summed on conversion.
#[derive(Clone, Debug)]
pub struct TripletBuilder<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    /// Scatter a dense block; `None` indices are dropped (eliminated dofs).
    pub fn add_block(&mut self, rows: &[Option<usize>], cols: &[Option<usize>], block: &Mat<T>) {
        for (a, ra) in rows.iter().enumerate() {
            let Some(i) = *ra else { continue };
            for (b, cb) in cols.iter().enumerate() {
                let Some(j) = *cb else { continue };
                let v = block[(a, b)];
                if v != T::ZERO {
                    self.entries.push((i, j, v));
                }
            }
        }
    }

    pub fn build(self) -> CsrMatrix<T> {
        CsrMatrix::from_triplets(self.nrows, self.ncols, self.entries)
    }
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::ONE; n],
        }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::identity(d.len());
        m.values.copy_from_slice(d);
        m
    }

    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, T)>) -> Self {
        entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < nrows && j < ncols, "triplet ({i},{j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &Mat<T>) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != T::ZERO {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), entries)
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }
    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }
    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }
    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => T::ZERO,
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = T::ZERO;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::ZERO; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    /// `x^H A x`
    pub fn quad_form(&self, x: &[T]) -> T {
        let ax = self.matvec(x);
        crate::scalar::dot(x, &ax)
    }

    /// `x^H A y`
    pub fn bilinear(&self, x: &[T], y: &[T]) -> T {
        let ay = self.matvec(y);
        crate::scalar::dot(x, &ay)
    }

    /// Principal submatrix on the sorted index set `idx`.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let mut local = vec![usize::MAX; self.ncols];
        for (k, &g) in idx.iter().enumerate() {
            local[g] = k;
        }
        let mut row_ptr = Vec::with_capacity(idx.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &g in idx {
            let (cols, vals) = self.row(g);
            for (c, v) in cols.iter().zip(vals) {
                let l = local[*c];
                if l != usize::MAX {
                    col_idx.push(l);
                    values.push(*v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: idx.len(),
            ncols: idx.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut entries = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                entries.push((*j, i, v.conjugate()));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, entries)
    }

    /// `max |A - A^H|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                let d = (*v - self.get(*j, i).conjugate()).modulus();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        for v in &mut m.values {
            *v = v.scale(c);
        }
        m
    }

    /// `A + c B` for matrices of equal shape.
    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: other.nrows,
            });
        }
        let mut entries = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            entries.extend(cols.iter().zip(vals).map(|(j, v)| (i, *j, *v)));
            let (cols, vals) = other.row(i);
            entries.extend(cols.iter().zip(vals).map(|(j, v)| (i, *j, c * *v)));
        }
        Ok(Self::from_triplets(self.nrows, self.ncols, entries))
    }

    /// `(A + A^H) / 2`
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        let mut entries = Vec::with_capacity(2 * self.nnz());
        for m in [self, &adj] {
            for i in 0..m.nrows {
                let (cols, vals) = m.row(i);
                entries.extend(cols.iter().zip(vals).map(|(j, v)| (i, *j, v.scale(0.5))));
            }
        }
        Self::from_triplets(self.nrows, self.ncols, entries)
    }

    pub fn to_dense(&self) -> Mat<T> {
        let mut m = Mat::<T>::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (j, v) in cols.iter().zip(vals) {
                m[(i, *j)] = *v;
            }
        }
        m
    }

    /// Column-compressed view for faer. For a Hermitian matrix the CSR arrays
    /// of `A` are the CSC arrays of `conj(A)`, so only values are conjugated.
    pub(crate) fn to_faer_csc(&self) -> Result<faer::sparse::SparseColMat<usize, T>> {
        if self.nrows != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: self.ncols,
            });
        }
        let symbolic = faer::sparse::SymbolicSparseColMat::new_checked(
            self.nrows,
            self.ncols,
            self.row_ptr.clone(),
            None,
            self.col_idx.clone(),
        );
        let vals = self.values.iter().map(|v| v.conjugate()).collect();
        Ok(faer::sparse::SparseColMat::new(symbolic, vals))
    }
}

/// Sparse matrix tagged as Hermitian (symmetric in the real case).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T>(CsrMatrix<T>);

impl<T: Scalar> HermitianOperator<T> {
    /// Accepts `m` if its Hermitian defect is within `tol * max|m|`.
    pub fn try_new(m: CsrMatrix<T>, tol: f64) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > tol * m.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    /// Symmetrize assembled data, removing round-off asymmetry.
    pub fn symmetrized(m: CsrMatrix<T>) -> Self {
        Self(m.hermitian_part())
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> CsrMatrix<T> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn principal_submatrix(&self, idx: &[usize]) -> Self {
        Self(self.0.principal_submatrix(idx))
    }
}

impl<T> std::ops::Deref for HermitianOperator<T> {
    type Target = CsrMatrix<T>;
    fn deref(&self) -> &CsrMatrix<T> {
        &self.0
    }
}
