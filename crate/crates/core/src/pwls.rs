//! Plane-wave least-squares discretization of the homogeneous Helmholtz
//! equation with impedance boundary data on rectangular quad meshes.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, DofIncidence};
use crate::error::{Error, Result};
use crate::mesh::{build_pwls_mesh, Face, StructuredMesh};
use crate::numerics::quadrature::gauss_legendre_on;
use crate::numerics::{CsrMatrix, HermitianOperator, TripletBuilder};
use crate::pou::PartitionOfUnity;
use crate::system::DdSystem;

type C = Complex64;
const I: C = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveSpeedModel {
    /// Unit speed on `(0,2) x (0,1)` with a known exact solution.
    Model41,
    /// Three horizontal layers on `(0,7200) x (0,3600)`.
    Model42,
    /// Random per-cell speed in `[1500, 5500]` on the same domain.
    Model43,
}

impl WaveSpeedModel {
    pub fn extent(self) -> [f64; 2] {
        match self {
            WaveSpeedModel::Model41 => [2.0, 1.0],
            WaveSpeedModel::Model42 | WaveSpeedModel::Model43 => [7200.0, 3600.0],
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveSpeedField {
    pub kind: WaveSpeedModel,
    pub values: Vec<f64>,
}

impl WaveSpeedField {
    pub fn new(mesh: &StructuredMesh, kind: WaveSpeedModel, seed: u64) -> Self {
        let values = match kind {
            WaveSpeedModel::Model41 => vec![1.0; mesh.num_elements()],
            WaveSpeedModel::Model42 => (0..mesh.num_elements())
                .map(|e| {
                    let y = mesh.centroid(e)[1];
                    if y < 1200.0 {
                        1800.0
                    } else if y < 2400.0 {
                        3600.0
                    } else {
                        5400.0
                    }
                })
                .collect(),
            WaveSpeedModel::Model43 => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..mesh.num_elements()).map(|_| rng.random_range(1500.0..=5500.0)).collect()
            }
        };
        Self { kind, values }
    }

    pub fn constant(mesh: &StructuredMesh, c: f64) -> Self {
        Self {
            kind: WaveSpeedModel::Model41,
            values: vec![c; mesh.num_elements()],
        }
    }
}

/// `p` plane waves per element centred at the element midpoint.
#[derive(Clone, Debug)]
pub struct PlaneWaveSpace {
    pub p: usize,
    pub directions: Vec<[f64; 2]>,
    pub centers: Vec<[f64; 2]>,
    pub kappa: Vec<f64>,
}

impl PlaneWaveSpace {
    pub fn new(mesh: &StructuredMesh, speeds: &WaveSpeedField, omega: f64, p: usize) -> Self {
        let directions = (0..p)
            .map(|l| {
                let t = 2.0 * PI * l as f64 / p as f64;
                [t.cos(), t.sin()]
            })
            .collect();
        let centers = (0..mesh.num_elements())
            .map(|e| {
                let c = mesh.centroid(e);
                [c[0], c[1]]
            })
            .collect();
        let kappa = speeds.values.iter().map(|c| omega / c).collect();
        Self {
            p,
            directions,
            centers,
            kappa,
        }
    }

    #[inline]
    pub fn dof(&self, e: usize, l: usize) -> usize {
        e * self.p + l
    }

    /// Values of all basis functions of element `e` at `x`.
    pub fn values(&self, e: usize, x: [f64; 2]) -> Vec<C> {
        let c = self.centers[e];
        let k = self.kappa[e];
        let r = [x[0] - c[0], x[1] - c[1]];
        self.directions
            .iter()
            .map(|d| C::from_polar(1.0, k * (d[0] * r[0] + d[1] * r[1])))
            .collect()
    }

    /// Value and gradient of `sum_l c_l y_{e,l}` at `x`.
    pub fn eval(&self, e: usize, coeffs: &[C], x: [f64; 2]) -> (C, [C; 2]) {
        let y = self.values(e, x);
        let k = self.kappa[e];
        let mut u = C::new(0.0, 0.0);
        let mut g = [C::new(0.0, 0.0); 2];
        for ((yl, d), c) in y.iter().zip(&self.directions).zip(coeffs) {
            let t = *yl * *c;
            u += t;
            g[0] += I * k * d[0] * t;
            g[1] += I * k * d[1] * t;
        }
        (u, g)
    }
}

/// Scale factors for the default multipliers `alpha = 1`,
/// `beta = kbar^-2`, `nu = kappa^-2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            nu: 1.0,
        }
    }
}

/// Solution used to generate impedance data and to measure errors.
#[derive(Clone, Debug)]
pub enum ExactSolution {
    /// `cos(12 pi y) (A1 e^{-i wx x} + A2 e^{i wx x})`.
    Channel { omega: f64, omega_x: f64, a1: C, a2: C },
    /// `exp(i kappa d . x)`.
    PlaneWave { kappa: f64, direction: [f64; 2] },
}

impl ExactSolution {
    pub fn channel(omega: f64) -> Result<Self> {
        let k2 = omega * omega - (12.0 * PI).powi(2);
        if k2 <= 0.0 {
            return Err(Error::invalid("the channel solution needs omega > 12 pi"));
        }
        let wx = k2.sqrt();
        // [[wx, -wx], [(w - wx) e^{-2 i wx}, (w + wx) e^{2 i wx}]] (A1, A2) = (-i, 0)
        let m11 = C::new(wx, 0.0);
        let m12 = C::new(-wx, 0.0);
        let m21 = (omega - wx) * (-2.0 * I * wx).exp();
        let m22 = (omega + wx) * (2.0 * I * wx).exp();
        let det = m11 * m22 - m12 * m21;
        let b1 = -I;
        let a1 = m22 * b1 / det;
        let a2 = -m21 * b1 / det;
        Ok(ExactSolution::Channel {
            omega,
            omega_x: wx,
            a1,
            a2,
        })
    }

    pub fn eval(&self, x: [f64; 2]) -> (C, [C; 2]) {
        match *self {
            ExactSolution::Channel { omega_x, a1, a2, .. } => {
                let k = 12.0 * PI;
                let ey = (k * x[1]).cos();
                let dey = -k * (k * x[1]).sin();
                let em = (-I * omega_x * x[0]).exp();
                let ep = (I * omega_x * x[0]).exp();
                let fx = a1 * em + a2 * ep;
                let dfx = -I * omega_x * a1 * em + I * omega_x * a2 * ep;
                (fx * ey, [dfx * ey, fx * dey])
            }
            ExactSolution::PlaneWave { kappa, direction } => {
                let u = C::from_polar(1.0, kappa * (direction[0] * x[0] + direction[1] * x[1]));
                (u, [I * kappa * direction[0] * u, I * kappa * direction[1] * u])
            }
        }
    }
}

/// Impedance data `g = (d/dn + i kappa) u`.
#[derive(Clone, Debug)]
pub enum BoundaryData {
    Exact(ExactSolution),
    /// `g = x^2 + y^2`.
    Quadratic,
}

impl BoundaryData {
    fn g(&self, x: [f64; 2], normal: [f64; 2], kappa: f64) -> C {
        match self {
            BoundaryData::Exact(s) => {
                let (u, g) = s.eval(x);
                g[0] * normal[0] + g[1] * normal[1] + I * kappa * u
            }
            BoundaryData::Quadratic => C::new(x[0] * x[0] + x[1] * x[1], 0.0),
        }
    }
}

/// Quadrature point on a face.
#[derive(Clone, Copy, Debug)]
pub struct FacePoint {
    pub x: [f64; 2],
    pub w: f64,
}

#[derive(Clone, Debug)]
pub struct PwlsSpec {
    pub model: WaveSpeedModel,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub omega: f64,
    pub overlap: usize,
    pub max_oversample: usize,
    pub seed: u64,
    pub multipliers: Multipliers,
}

pub struct PwlsProblem {
    pub mesh: StructuredMesh,
    pub decomp: Decomposition,
    pub pou: PartitionOfUnity,
    pub speeds: WaveSpeedField,
    pub space: PlaneWaveSpace,
    pub omega: f64,
    pub multipliers: Multipliers,
    pub boundary: BoundaryData,
    pub exact: Option<ExactSolution>,
    pub system: DdSystem<C>,
}

impl PwlsProblem {
    /// Builds a model problem; the short axis carries `n` subdomains and the
    /// long axis proportionally more.
    pub fn build(spec: &PwlsSpec) -> Result<Self> {
        let extent = spec.model.extent();
        let ratio = (extent[0] / extent[1]).round() as usize;
        let mesh = build_pwls_mesh(extent, [spec.n * ratio, spec.n], spec.m)?;
        let speeds = WaveSpeedField::new(&mesh, spec.model, spec.seed);
        let (boundary, exact) = match spec.model {
            WaveSpeedModel::Model41 => {
                let s = ExactSolution::channel(spec.omega)?;
                (BoundaryData::Exact(s.clone()), Some(s))
            }
            _ => (BoundaryData::Quadratic, None),
        };
        Self::from_parts(
            mesh,
            speeds,
            spec.omega,
            spec.p,
            boundary,
            exact,
            spec.multipliers,
            spec.overlap,
            spec.max_oversample,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        mesh: StructuredMesh,
        speeds: WaveSpeedField,
        omega: f64,
        p: usize,
        boundary: BoundaryData,
        exact: Option<ExactSolution>,
        multipliers: Multipliers,
        overlap: usize,
        max_oversample: usize,
    ) -> Result<Self> {
        if p < 3 {
            return Err(Error::invalid("at least three plane waves per element are required"));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega must be positive"));
        }
        if multipliers.alpha <= 0.0 || multipliers.beta <= 0.0 || multipliers.nu <= 0.0 {
            return Err(Error::invalid("multipliers must be positive"));
        }
        let decomp = Decomposition::build(&mesh, overlap, max_oversample)?;
        let pou = PartitionOfUnity::build(&mesh, &decomp);
        let space = PlaneWaveSpace::new(&mesh, &speeds, omega, p);
        let mut problem = Self {
            mesh,
            decomp,
            pou,
            speeds,
            space,
            omega,
            multipliers,
            boundary,
            exact,
            system: DdSystem {
                a: HermitianOperator::symmetrized(CsrMatrix::zeros(0, 0)),
                rhs: Vec::new(),
                incidence: DofIncidence::new(Vec::new(), 0),
                closed_dofs: Vec::new(),
                local_a: Vec::new(),
                local_s: Vec::new(),
                overlap_dofs: Vec::new(),
            },
        };
        problem.assemble()?;
        Ok(problem)
    }

    pub fn num_dofs(&self) -> usize {
        self.mesh.num_elements() * self.space.p
    }

    fn beta(&self, k: usize, j: usize) -> f64 {
        let kbar = 0.5 * (self.space.kappa[k] + self.space.kappa[j]);
        self.multipliers.beta / (kbar * kbar)
    }

    fn nu(&self, k: usize) -> f64 {
        self.multipliers.nu / (self.space.kappa[k] * self.space.kappa[k])
    }

    fn alpha(&self) -> f64 {
        self.multipliers.alpha
    }

    /// Gauss points on a face, split at the face midpoint.
    pub fn face_points(&self, face: &Face) -> Vec<FacePoint> {
        let a = self.mesh.vertices[face.vertices[0]];
        let b = self.mesh.vertices[face.vertices[1]];
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let kbar = match face.right {
            Some(r) => 0.5 * (self.space.kappa[face.left] + self.space.kappa[r]),
            None => self.space.kappa[face.left],
        };
        let h = self.mesh.h[0].max(self.mesh.h[1]);
        let q = 8usize.max((kbar * h).ceil() as usize + 4);
        let mut pts = Vec::with_capacity(2 * q);
        for (lo, hi) in [(0.0, 0.5), (0.5, 1.0)] {
            for (t, w) in gauss_legendre_on(q, lo, hi) {
                pts.push(FacePoint {
                    x: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                    w: w * len,
                });
            }
        }
        pts
    }

    fn normal(face: &Face) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[face.axis] = face.sign;
        n
    }

    /// Residual rows at a point: jump and normal-derivative sum for an
    /// interior face (over the `2p` dofs of both elements).
    fn interior_rows(&self, face: &Face, x: [f64; 2]) -> (Vec<C>, Vec<C>) {
        let p = self.space.p;
        let (k, j) = (face.left, face.right.expect("interior face"));
        let yk = self.space.values(k, x);
        let yj = self.space.values(j, x);
        let a = face.axis;
        let mut jump = Vec::with_capacity(2 * p);
        let mut flux = Vec::with_capacity(2 * p);
        for l in 0..p {
            jump.push(yk[l]);
            flux.push(I * self.space.kappa[k] * self.space.directions[l][a] * yk[l]);
        }
        for l in 0..p {
            jump.push(-yj[l]);
            flux.push(-I * self.space.kappa[j] * self.space.directions[l][a] * yj[l]);
        }
        (jump, flux)
    }

    /// Impedance residual row `(d/dn + i kappa) y` on a boundary face.
    fn boundary_row(&self, face: &Face, x: [f64; 2]) -> Vec<C> {
        let k = face.left;
        let kap = self.space.kappa[k];
        let a = face.axis;
        self.space
            .values(k, x)
            .iter()
            .zip(&self.space.directions)
            .map(|(y, d)| I * kap * (face.sign * d[a] + 1.0) * y)
            .collect()
    }

    /// `M_ab += w conj(r_a) r_b`
    fn add_outer(m: &mut Mat<C>, r: &[C], w: f64) {
        let n = r.len();
        for b in 0..n {
            let rb = r[b] * w;
            for a in 0..n {
                m[(a, b)] += r[a].conj() * rb;
            }
        }
    }

    pub fn interior_face_matrix(&self, face: &Face) -> Mat<C> {
        let p = self.space.p;
        let mut m = Mat::<C>::zeros(2 * p, 2 * p);
        let (k, j) = (face.left, face.right.expect("interior face"));
        let alpha = self.alpha();
        let beta = self.beta(k, j);
        for pt in self.face_points(face) {
            let (jump, flux) = self.interior_rows(face, pt.x);
            Self::add_outer(&mut m, &jump, alpha * pt.w);
            Self::add_outer(&mut m, &flux, beta * pt.w);
        }
        m
    }

    pub fn boundary_face_matrix(&self, face: &Face) -> (Mat<C>, Vec<C>) {
        let p = self.space.p;
        let mut m = Mat::<C>::zeros(p, p);
        let mut f = vec![C::new(0.0, 0.0); p];
        let k = face.left;
        let nu = self.nu(k);
        let normal = Self::normal(face);
        for pt in self.face_points(face) {
            let r = self.boundary_row(face, pt.x);
            Self::add_outer(&mut m, &r, nu * pt.w);
            let g = self.boundary.g(pt.x, normal, self.space.kappa[k]);
            for a in 0..p {
                f[a] += nu * pt.w * g * r[a].conj();
            }
        }
        (m, f)
    }

    fn element_dofs(&self, e: usize) -> std::ops::Range<usize> {
        e * self.space.p..(e + 1) * self.space.p
    }

    fn assemble(&mut self) -> Result<()> {
        let p = self.space.p;
        let ndof = self.num_dofs();
        let mut t = TripletBuilder::with_capacity(ndof, ndof, self.mesh.interior_faces.len() * 4 * p * p);
        let mut rhs = vec![C::new(0.0, 0.0); ndof];
        for face in &self.mesh.interior_faces {
            let m = self.interior_face_matrix(face);
            let dofs: Vec<Option<usize>> = self
                .element_dofs(face.left)
                .chain(self.element_dofs(face.right.unwrap()))
                .map(Some)
                .collect();
            t.add_block(&dofs, &dofs, &m);
        }
        for face in &self.mesh.boundary_faces {
            let (m, f) = self.boundary_face_matrix(face);
            let dofs: Vec<Option<usize>> = self.element_dofs(face.left).map(Some).collect();
            t.add_block(&dofs, &dofs, &m);
            for (a, v) in f.into_iter().enumerate() {
                rhs[face.left * p + a] += v;
            }
        }
        let raw = t.build();
        let defect = raw.hermitian_defect();
        if defect > 1e-12 * raw.max_abs() {
            return Err(Error::NotHermitian { defect });
        }
        let a = HermitianOperator::symmetrized(raw);
        let incidence = DofIncidence::new((0..ndof).map(|d| vec![d / p]).collect(), self.mesh.num_elements());
        let mut closed_dofs = Vec::new();
        let mut local_a = Vec::new();
        let mut local_s = Vec::new();
        let mut overlap_dofs = Vec::new();
        for i in 0..self.decomp.num_subdomains {
            let dofs = incidence.closed_dofs(&self.decomp.omega_closed[i]);
            let (la, ls) = self.assemble_local(i, &dofs);
            local_a.push(la);
            local_s.push(ls);
            overlap_dofs.push(incidence.interior_dofs(&self.decomp.omega_prime[i]));
            closed_dofs.push(dofs);
        }
        self.system = DdSystem {
            a,
            rhs,
            incidence,
            closed_dofs,
            local_a,
            local_s,
            overlap_dofs,
        };
        Ok(())
    }

    /// Faces entering the local forms of subdomain `i`: interior faces with
    /// both elements in the closed subdomain and boundary faces of its
    /// elements.
    pub fn local_faces(&self, i: usize) -> (Vec<&Face>, Vec<&Face>) {
        let closed = &self.decomp.omega_closed[i];
        let inside = |e: usize| closed.binary_search(&e).is_ok();
        let interior = self
            .mesh
            .interior_faces
            .iter()
            .filter(|f| inside(f.left) && inside(f.right.unwrap()))
            .collect();
        let boundary = self.mesh.boundary_faces.iter().filter(|f| inside(f.left)).collect();
        (interior, boundary)
    }

    /// `sum_{l in S(i)} |grad theta_l(x)|^2`
    pub fn pou_weight(&self, i: usize, x: [f64; 2]) -> f64 {
        let nbrs = &self.decomp.neighbors[i];
        self.pou
            .dual_eval(x)
            .iter()
            .filter(|(l, _, _)| nbrs.binary_search(l).is_ok())
            .map(|(_, _, g)| g[0] * g[0] + g[1] * g[1])
            .sum()
    }

    fn assemble_local(&self, i: usize, dofs: &[usize]) -> (CsrMatrix<C>, CsrMatrix<C>) {
        let p = self.space.p;
        let n = dofs.len();
        let local = |e: usize| -> Vec<Option<usize>> {
            let start = dofs.binary_search(&(e * p)).expect("element dofs in closed set");
            (start..start + p).map(Some).collect()
        };
        let mut ta = TripletBuilder::new(n, n);
        let mut ts = TripletBuilder::new(n, n);
        let (interior, boundary) = self.local_faces(i);
        for face in interior {
            let (k, j) = (face.left, face.right.unwrap());
            let idx: Vec<Option<usize>> = local(k).into_iter().chain(local(j)).collect();
            ta.add_block(&idx, &idx, &self.interior_face_matrix(face));
            let beta = self.beta(k, j);
            let mut sk = Mat::<C>::zeros(p, p);
            let mut sj = Mat::<C>::zeros(p, p);
            for pt in self.face_points(face) {
                let wgt = self.pou_weight(i, pt.x);
                if wgt == 0.0 {
                    continue;
                }
                Self::add_outer(&mut sk, &self.space.values(k, pt.x), beta * wgt * pt.w);
                Self::add_outer(&mut sj, &self.space.values(j, pt.x), beta * wgt * pt.w);
            }
            ts.add_block(&local(k), &local(k), &sk);
            ts.add_block(&local(j), &local(j), &sj);
        }
        for face in boundary {
            let k = face.left;
            let idx = local(k);
            ta.add_block(&idx, &idx, &self.boundary_face_matrix(face).0);
            let nu = self.nu(k);
            let mut sk = Mat::<C>::zeros(p, p);
            for pt in self.face_points(face) {
                let wgt = self.pou_weight(i, pt.x);
                if wgt == 0.0 {
                    continue;
                }
                Self::add_outer(&mut sk, &self.space.values(k, pt.x), nu * wgt * pt.w);
            }
            ts.add_block(&idx, &idx, &sk);
        }
        (ta.build().hermitian_part(), ts.build().hermitian_part())
    }

    /// `a_i(theta_i u, theta_i u)` evaluated at the face quadrature points
    /// with the partition of unity sampled pointwise.
    pub fn local_product_energy(&self, i: usize, u: &[C]) -> f64 {
        let p = self.space.p;
        let theta = |x: [f64; 2]| -> (f64, [f64; 2]) {
            self.pou
                .dual_eval(x)
                .into_iter()
                .find(|(l, _, _)| *l == i)
                .map_or((0.0, [0.0; 2]), |(_, v, g)| (v, g))
        };
        let coeffs = |e: usize| &u[e * p..(e + 1) * p];
        let (interior, boundary) = self.local_faces(i);
        let mut total = 0.0;
        for face in interior {
            let (k, j) = (face.left, face.right.unwrap());
            let a = face.axis;
            let beta = self.beta(k, j);
            for pt in self.face_points(face) {
                let (t, gt) = theta(pt.x);
                let (uk, gk) = self.space.eval(k, coeffs(k), pt.x);
                let (uj, gj) = self.space.eval(j, coeffs(j), pt.x);
                let jump = (uk - uj) * t;
                // n_k = +e_a, n_j = -e_a
                let dk = gk[a] * t + uk * gt[a];
                let dj = -(gj[a] * t + uj * gt[a]);
                total += pt.w * (self.alpha() * jump.norm_sqr() + beta * (dk + dj).norm_sqr());
            }
        }
        for face in boundary {
            let k = face.left;
            let a = face.axis;
            let nu = self.nu(k);
            let kap = self.space.kappa[k];
            for pt in self.face_points(face) {
                let (t, gt) = theta(pt.x);
                let (uk, gk) = self.space.eval(k, coeffs(k), pt.x);
                let dn = face.sign * (gk[a] * t + uk * gt[a]);
                total += pt.w * nu * (dn + I * kap * t * uk).norm_sqr();
            }
        }
        total
    }

    /// Coefficients reproducing a plane wave `exp(i kappa d_l . x)` exactly
    /// when `kappa` matches every element and `d_l` is a basis direction.
    pub fn plane_wave_coefficients(&self, l: usize) -> Vec<C> {
        let p = self.space.p;
        let d = self.space.directions[l];
        let mut u = vec![C::new(0.0, 0.0); self.num_dofs()];
        for e in 0..self.mesh.num_elements() {
            let c = self.space.centers[e];
            u[e * p + l] = C::from_polar(1.0, self.space.kappa[e] * (d[0] * c[0] + d[1] * c[1]));
        }
        u
    }

    /// Relative L2 error against the exact solution by tensor Gauss
    /// quadrature on every element.
    pub fn evaluate_error(&self, u: &[C]) -> Result<f64> {
        let exact = self
            .exact
            .as_ref()
            .ok_or_else(|| Error::invalid("no exact solution for this model"))?;
        let p = self.space.p;
        let (hx, hy) = (self.mesh.h[0], self.mesh.h[1]);
        let mut num = 0.0;
        let mut den = 0.0;
        for e in 0..self.mesh.num_elements() {
            let o = self.mesh.quad_origin(e);
            let q = 8usize.max((self.space.kappa[e] * hx.max(hy)).ceil() as usize + 4);
            let gx = gauss_legendre_on(q, o[0], o[0] + hx);
            let gy = gauss_legendre_on(q, o[1], o[1] + hy);
            for (x, wx) in &gx {
                for (y, wy) in &gy {
                    let pt = [*x, *y];
                    let (uh, _) = self.space.eval(e, &u[e * p..(e + 1) * p], pt);
                    let (ue, _) = exact.eval(pt);
                    num += wx * wy * (uh - ue).norm_sqr();
                    den += wx * wy * ue.norm_sqr();
                }
            }
        }
        Ok((num / den).sqrt())
    }

    /// `H/h` for the threshold: complete elements per subdomain plus one.
    pub fn coarse_h_over_h(&self) -> f64 {
        self.mesh.m as f64 + 1.0
    }

    /// Default spectral threshold `1 + ln(H/h + 2)`.
    pub fn default_threshold(&self) -> f64 {
        1.0 + (self.coarse_h_over_h() + 2.0).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_mesh;
    use crate::mesh::MeshConvention;
    use crate::numerics::{factorize, FactorKind};

    fn plane_wave_problem(n: usize, m: usize, p: usize) -> PwlsProblem {
        let mesh = build_structured_mesh(2, n, m, MeshConvention::Pwls).unwrap();
        let speeds = WaveSpeedField::constant(&mesh, 1.0);
        let omega = 8.0;
        let d = [1.0, 0.0];
        let exact = ExactSolution::PlaneWave { kappa: omega, direction: d };
        PwlsProblem::from_parts(
            mesh,
            speeds,
            omega,
            p,
            BoundaryData::Exact(exact.clone()),
            Some(exact),
            Multipliers::default(),
            1,
            1,
        )
        .unwrap()
    }

    #[test]
    fn basis_plane_wave_is_recovered() {
        let prob = plane_wave_problem(2, 2, 5);
        let f = factorize(prob.system.a.matrix(), FactorKind::Cholesky).unwrap();
        let u = f.solve(&prob.system.rhs);
        let want = prob.plane_wave_coefficients(0);
        let err = u.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "coefficient error {err}");
        assert!(prob.evaluate_error(&want).unwrap() < 1e-10);
        let zero = vec![C::new(0.0, 0.0); prob.num_dofs()];
        assert!((prob.evaluate_error(&zero).unwrap() - 1.0).abs() < 1e-12);
        let residual = prob.system.a.quad_form(&want).re - 2.0 * crate::scalar::dot(&want, &prob.system.rhs).re;
        // functional value at the exact solution equals -|g|^2 term, so the
        // gradient vanishes: A u = f
        let au = prob.system.a.matvec(&want);
        let g = au.iter().zip(&prob.system.rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(g < 1e-9, "gradient {g} (functional {residual})");
    }

    #[test]
    fn assembled_operator_is_hermitian_positive() {
        let prob = plane_wave_problem(2, 2, 4);
        let a = prob.system.a.matrix();
        assert!(a.hermitian_defect() <= 1e-12 * a.max_abs());
        let ev = crate::numerics::dense::hermitian_eigenvalues(&a.to_dense()).unwrap();
        assert!(ev[0] > 0.0);
    }

    #[test]
    fn channel_solution_satisfies_left_condition() {
        let s = ExactSolution::channel(20.0 * PI).unwrap();
        if let ExactSolution::Channel { omega_x, .. } = s {
            assert!((omega_x - 16.0 * PI).abs() < 1e-10);
        }
        // Helmholtz: laplacian + omega^2 u = 0, checked by finite differences
        let x = [0.37, 0.21];
        let hstep = 1e-4;
        let (u, _) = s.eval(x);
        let mut lap = C::new(0.0, 0.0);
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += hstep;
            xm[a] -= hstep;
            lap += (s.eval(xp).0 + s.eval(xm).0 - 2.0 * u) / (hstep * hstep);
        }
        let res = (lap + (20.0 * PI).powi(2) * u).norm() / ((20.0 * PI).powi(2) * u.norm());
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn local_s_is_psd_and_local_sum_is_pd() {
        let prob = plane_wave_problem(3, 2, 4);
        for i in 0..prob.decomp.num_subdomains {
            let s = prob.system.local_s[i].to_dense();
            let a = prob.system.local_a[i].to_dense();
            let es = crate::numerics::dense::hermitian_eigenvalues(&s).unwrap();
            assert!(es[0] > -1e-12 * es.last().unwrap().abs());
            let sum = &a + &s;
            let e = crate::numerics::dense::hermitian_eigenvalues(&sum).unwrap();
            assert!(e[0] > 0.0);
        }
    }
}
