//! P1 finite elements for `-div(rho grad u) = f` on the unit box with
//! homogeneous Dirichlet conditions and the high-contrast coefficient models.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, DofIncidence};
use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, MeshConvention, StructuredMesh};
use crate::numerics::{CsrMatrix, HermitianOperator, TripletBuilder};
use crate::pou::PartitionOfUnity;
use crate::system::DdSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientModel {
    Model1,
    Model2,
    Model3,
    Model4,
}

/// Element-wise constant coefficient.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub kind: CoefficientModel,
    pub mu1: f64,
    pub mu2: f64,
    pub seed: u64,
    pub values: Vec<f64>,
}

fn in_open(x: f64, lo: f64, hi: f64) -> bool {
    x > lo && x < hi
}

/// `(1/4,1/2) x (0,1/2) x (0,1/4)` together with the cube `(1/4,1/2)^3`;
/// in 2D the z factor is dropped.
fn in_region1(c: [f64; 3], dim: usize) -> bool {
    let slab = in_open(c[0], 0.25, 0.5) && in_open(c[1], 0.0, 0.5) && (dim == 2 || in_open(c[2], 0.0, 0.25));
    slab || in_cube(c, dim)
}

fn in_cube(c: [f64; 3], dim: usize) -> bool {
    (0..dim).all(|a| in_open(c[a], 0.25, 0.5))
}

impl CoefficientField {
    /// `mu1` scales the first region, `mu2` the cube; the cube takes the
    /// larger of the two exponents.
    pub fn jump(mesh: &StructuredMesh, kind: CoefficientModel, mu1: f64, mu2: f64) -> Self {
        let values = (0..mesh.num_elements())
            .map(|e| {
                let c = mesh.centroid(e);
                if in_cube(c, mesh.dim) {
                    10f64.powf(mu1.max(mu2))
                } else if in_region1(c, mesh.dim) {
                    10f64.powf(mu1)
                } else {
                    1.0
                }
            })
            .collect();
        Self {
            kind,
            mu1,
            mu2,
            seed: 0,
            values,
        }
    }

    pub fn model(mesh: &StructuredMesh, kind: CoefficientModel, mu: f64, seed: u64) -> Self {
        match kind {
            CoefficientModel::Model1 => Self::jump(mesh, kind, 0.0, 0.0),
            CoefficientModel::Model2 => Self::jump(mesh, kind, mu, 0.0),
            CoefficientModel::Model3 => Self::jump(mesh, kind, 0.0, mu),
            CoefficientModel::Model4 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let half = mu / 2.0;
                let values = (0..mesh.num_elements())
                    .map(|_| {
                        let t: f64 = if half > 0.0 { rng.random_range(-half..half) } else { 0.0 };
                        10f64.powf(t)
                    })
                    .collect();
                Self {
                    kind,
                    mu1: mu,
                    mu2: 0.0,
                    seed,
                    values,
                }
            }
        }
    }

    pub fn uniform(mesh: &StructuredMesh, value: f64) -> Self {
        Self {
            kind: CoefficientModel::Model1,
            mu1: 0.0,
            mu2: 0.0,
            seed: 0,
            values: vec![value; mesh.num_elements()],
        }
    }
}

/// Degree-2 quadrature on the reference simplex: barycentric points and
/// weights summing to one.
pub fn simplex_quadrature(dim: usize) -> Vec<([f64; 4], f64)> {
    if dim == 2 {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        vec![([a, b, b, 0.0], 1.0 / 3.0), ([b, a, b, 0.0], 1.0 / 3.0), ([b, b, a, 0.0], 1.0 / 3.0)]
    } else {
        let a = 0.585_410_196_624_968_5;
        let b = 0.138_196_601_125_010_5;
        vec![
            ([a, b, b, b], 0.25),
            ([b, a, b, b], 0.25),
            ([b, b, a, b], 0.25),
            ([b, b, b, a], 0.25),
        ]
    }
}

/// Right-hand side for which `prod sin(pi x_k)` solves the unit-coefficient
/// problem.
pub fn default_load(x: [f64; 3], dim: usize) -> f64 {
    dim as f64 * PI * PI * (0..dim).map(|a| (PI * x[a]).sin()).product::<f64>()
}

pub fn sine_product(x: [f64; 3], dim: usize) -> f64 {
    (0..dim).map(|a| (PI * x[a]).sin()).product()
}

pub struct EllipticProblem {
    pub mesh: StructuredMesh,
    pub decomp: Decomposition,
    pub pou: PartitionOfUnity,
    pub coefficient: CoefficientField,
    pub system: DdSystem<f64>,
    /// Free-dof index of each vertex; `None` on the Dirichlet boundary.
    pub vertex_dof: Vec<Option<usize>>,
    pub dof_vertex: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct EllipticSpec {
    pub dim: usize,
    pub n: usize,
    pub m: usize,
    pub overlap: usize,
    pub max_oversample: usize,
    pub model: CoefficientModel,
    pub mu: f64,
    pub seed: u64,
}

impl EllipticProblem {
    pub fn build(spec: &EllipticSpec) -> Result<Self> {
        let mesh = build_structured_mesh(spec.dim, spec.n, spec.m, MeshConvention::Elliptic)?;
        let coefficient = CoefficientField::model(&mesh, spec.model, spec.mu, spec.seed);
        Self::from_parts(mesh, coefficient, spec.overlap, spec.max_oversample)
    }

    pub fn from_parts(
        mesh: StructuredMesh,
        coefficient: CoefficientField,
        overlap: usize,
        max_oversample: usize,
    ) -> Result<Self> {
        if coefficient.values.len() != mesh.num_elements() || coefficient.values.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::invalid("coefficient must be positive on every element"));
        }
        let decomp = Decomposition::build(&mesh, overlap, max_oversample)?;
        let pou = PartitionOfUnity::build(&mesh, &decomp);
        let mut vertex_dof = vec![None; mesh.num_vertices()];
        let mut dof_vertex = Vec::new();
        for v in 0..mesh.num_vertices() {
            if !mesh.is_boundary_vertex(v) {
                vertex_dof[v] = Some(dof_vertex.len());
                dof_vertex.push(v);
            }
        }
        let incidence = DofIncidence::new(
            dof_vertex.iter().map(|&v| mesh.vertex_elements(v).to_vec()).collect(),
            mesh.num_elements(),
        );
        let (a, rhs) = assemble_global(&mesh, &coefficient, &vertex_dof, dof_vertex.len());
        let a = HermitianOperator::symmetrized(a);
        let mut closed_dofs = Vec::new();
        let mut local_a = Vec::new();
        let mut local_s = Vec::new();
        let mut overlap_dofs = Vec::new();
        for i in 0..decomp.num_subdomains {
            let dofs = incidence.closed_dofs(&decomp.omega[i]);
            local_a.push(assemble_local_a(&mesh, &coefficient, &decomp.omega[i], &vertex_dof, &dofs));
            local_s.push(assemble_local_s(&mesh, &decomp, &pou, &coefficient, i, &vertex_dof, &dofs));
            overlap_dofs.push(incidence.interior_dofs(&decomp.omega_prime[i]));
            closed_dofs.push(dofs);
        }
        let system = DdSystem {
            a,
            rhs,
            incidence,
            closed_dofs,
            local_a,
            local_s,
            overlap_dofs,
        };
        Ok(Self {
            mesh,
            decomp,
            pou,
            coefficient,
            system,
            vertex_dof,
            dof_vertex,
        })
    }

    pub fn coarse_h_over_h(&self) -> f64 {
        self.mesh.m as f64
    }

    /// Default spectral threshold `1 + ln(H/h)`.
    pub fn default_threshold(&self) -> f64 {
        1.0 + self.coarse_h_over_h().ln()
    }

    /// Nodal interpolant of a function on the free dofs.
    pub fn interpolate(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.dof_vertex.iter().map(|&v| f(self.mesh.vertices[v])).collect()
    }

    fn vertex_values(&self, u: &[f64], e: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (k, &v) in self.mesh.element(e).iter().enumerate() {
            out[k] = self.vertex_dof[v].map_or(0.0, |d| u[d]);
        }
        out
    }

    /// `a_i(theta_j u, theta_j u)` with the product integrated exactly (it is
    /// piecewise quadratic, so its squared gradient is too).
    pub fn local_product_energy(&self, i: usize, j: usize, u: &[f64]) -> f64 {
        let d = self.mesh.dim;
        let quad = simplex_quadrature(d);
        let mut total = 0.0;
        for &e in &self.decomp.omega[i] {
            let (vol, g) = self.mesh.simplex_geometry(e);
            let uv = self.vertex_values(u, e);
            let mut tv = [0.0; 4];
            for (k, &v) in self.mesh.element(e).iter().enumerate() {
                tv[k] = self.pou.node_value(v, j);
            }
            let mut gu = [0.0; 3];
            let mut gt = [0.0; 3];
            for k in 0..=d {
                for a in 0..3 {
                    gu[a] += uv[k] * g[k][a];
                    gt[a] += tv[k] * g[k][a];
                }
            }
            let mut acc = 0.0;
            for (bary, w) in &quad {
                let uq: f64 = (0..=d).map(|k| bary[k] * uv[k]).sum();
                let tq: f64 = (0..=d).map(|k| bary[k] * tv[k]).sum();
                let gp: f64 = (0..3).map(|a| (tq * gu[a] + uq * gt[a]).powi(2)).sum();
                acc += w * gp;
            }
            total += self.coefficient.values[e] * vol * acc;
        }
        total
    }
}

fn element_stiffness(mesh: &StructuredMesh, e: usize, rho: f64) -> (usize, [[f64; 4]; 4]) {
    let d = mesh.dim;
    let (vol, g) = mesh.simplex_geometry(e);
    let mut k = [[0.0; 4]; 4];
    for a in 0..=d {
        for b in 0..=d {
            k[a][b] = rho * vol * (0..3).map(|c| g[a][c] * g[b][c]).sum::<f64>();
        }
    }
    (d + 1, k)
}

pub fn assemble_global(
    mesh: &StructuredMesh,
    rho: &CoefficientField,
    vertex_dof: &[Option<usize>],
    ndof: usize,
) -> (CsrMatrix<f64>, Vec<f64>) {
    let d = mesh.dim;
    let nv = d + 1;
    let mut t = TripletBuilder::with_capacity(ndof, ndof, mesh.num_elements() * nv * nv);
    let mut rhs = vec![0.0; ndof];
    let quad = simplex_quadrature(d);
    for e in 0..mesh.num_elements() {
        let (n, k) = element_stiffness(mesh, e, rho.values[e]);
        let vs = mesh.element(e);
        let (vol, _) = mesh.simplex_geometry(e);
        for a in 0..n {
            let Some(ia) = vertex_dof[vs[a]] else { continue };
            for b in 0..n {
                if let Some(ib) = vertex_dof[vs[b]] {
                    t.push(ia, ib, k[a][b]);
                }
            }
            for (bary, w) in &quad {
                let mut x = [0.0; 3];
                for (c, &v) in vs.iter().enumerate() {
                    for q in 0..3 {
                        x[q] += bary[c] * mesh.vertices[v][q];
                    }
                }
                rhs[ia] += w * vol * default_load(x, d) * bary[a];
            }
        }
    }
    (t.build(), rhs)
}

fn local_index(dofs: &[usize], vertex_dof: &[Option<usize>], v: usize) -> Option<usize> {
    vertex_dof[v].and_then(|g| dofs.binary_search(&g).ok())
}

/// Stiffness over the subdomain's elements on its closed dofs, with no
/// condition imposed on the interface.
pub fn assemble_local_a(
    mesh: &StructuredMesh,
    rho: &CoefficientField,
    elements: &[usize],
    vertex_dof: &[Option<usize>],
    dofs: &[usize],
) -> CsrMatrix<f64> {
    let mut t = TripletBuilder::new(dofs.len(), dofs.len());
    for &e in elements {
        let (n, k) = element_stiffness(mesh, e, rho.values[e]);
        let vs = mesh.element(e);
        for a in 0..n {
            let Some(ia) = local_index(dofs, vertex_dof, vs[a]) else { continue };
            for b in 0..n {
                if let Some(ib) = local_index(dofs, vertex_dof, vs[b]) {
                    t.push(ia, ib, k[a][b]);
                }
            }
        }
    }
    t.build().hermitian_part()
}

/// Mass matrix weighted by `rho * sum_{l in S(i)} |grad theta_l|^2`.
pub fn assemble_local_s(
    mesh: &StructuredMesh,
    decomp: &Decomposition,
    pou: &PartitionOfUnity,
    rho: &CoefficientField,
    i: usize,
    vertex_dof: &[Option<usize>],
    dofs: &[usize],
) -> CsrMatrix<f64> {
    let d = mesh.dim;
    let nbrs = &decomp.neighbors[i];
    let mut t = TripletBuilder::new(dofs.len(), dofs.len());
    let denom = ((d + 1) * (d + 2)) as f64;
    for &e in &decomp.omega[i] {
        let weight: f64 = pou
            .element_gradients(mesh, e)
            .iter()
            .filter(|(l, _)| nbrs.binary_search(l).is_ok())
            .map(|(_, g)| g.iter().map(|x| x * x).sum::<f64>())
            .sum();
        if weight == 0.0 {
            continue;
        }
        let (vol, _) = mesh.simplex_geometry(e);
        let c = rho.values[e] * weight * vol / denom;
        let vs = mesh.element(e);
        for a in 0..=d {
            let Some(ia) = local_index(dofs, vertex_dof, vs[a]) else { continue };
            for b in 0..=d {
                if let Some(ib) = local_index(dofs, vertex_dof, vs[b]) {
                    t.push(ia, ib, if a == b { 2.0 * c } else { c });
                }
            }
        }
    }
    t.build().hermitian_part()
}
