//! Linear algebra kernels: sparse storage, factorizations, dense
//! eigensolvers, iterative inner solves and Matrix Market I/O.

pub mod dense;
pub mod factor;
pub mod inner;
pub mod matrix_market;
pub mod quadrature;
pub mod sparse;
pub mod woodbury;

pub use dense::{dense_generalized_eig, general_eigenvalues, hermitian_eig, DenseCholesky, DenseEigResult};
pub use factor::{factorize, FactorKind, Factorization};
pub use inner::{inner_solve, InnerSolve};
pub use sparse::{CsrMatrix, HermitianOperator, TripletBuilder};
pub use woodbury::{apply_lowrank_woodbury, LowRankShiftedSolver};
