//! Discretization-independent view of an assembled problem with its local
//! forms, shared by the coarse-space and Schwarz layers.

use crate::decomposition::DofIncidence;
use crate::numerics::{CsrMatrix, HermitianOperator};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct DdSystem<T> {
    pub a: HermitianOperator<T>,
    pub rhs: Vec<T>,
    pub incidence: DofIncidence,
    /// Sorted global dofs touching each closed subdomain; local matrices are
    /// indexed in this order.
    pub closed_dofs: Vec<Vec<usize>>,
    pub local_a: Vec<CsrMatrix<T>>,
    pub local_s: Vec<CsrMatrix<T>>,
    /// Dofs whose support lies inside each overlapping subdomain.
    pub overlap_dofs: Vec<Vec<usize>>,
}

impl<T: Scalar> DdSystem<T> {
    pub fn num_dofs(&self) -> usize {
        self.a.dim()
    }

    pub fn num_subdomains(&self) -> usize {
        self.closed_dofs.len()
    }

    pub fn restrict(&self, i: usize, global: &[T]) -> Vec<T> {
        self.closed_dofs[i].iter().map(|&g| global[g]).collect()
    }

    pub fn extend(&self, i: usize, local: &[T]) -> Vec<T> {
        let mut out = vec![T::ZERO; self.num_dofs()];
        for (&g, v) in self.closed_dofs[i].iter().zip(local) {
            out[g] = *v;
        }
        out
    }

    /// `a_i(u, u)` of a global vector.
    pub fn local_a_energy(&self, i: usize, u: &[T]) -> f64 {
        self.local_a[i].quad_form(&self.restrict(i, u)).real()
    }

    pub fn local_s_energy(&self, i: usize, u: &[T]) -> f64 {
        self.local_s[i].quad_form(&self.restrict(i, u)).real()
    }
}
