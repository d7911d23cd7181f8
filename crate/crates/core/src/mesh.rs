//! Structured meshes of boxes: Kuhn simplices for the elliptic problems and
//! axis-aligned quadrilaterals for the plane-wave discretization.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshConvention {
    /// `n*m` cells per axis, each subdomain covers exactly `m` of them.
    Elliptic,
    /// `n*m + n - 1` cells per axis; each subdomain owns `m` complete cells
    /// and interfaces run through the midpoints of the cells in between.
    Pwls,
}

/// Edge of a quadrilateral mesh. `right` is `None` on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub vertices: [usize; 2],
    /// Interior: element on the low-coordinate side. Boundary: the element.
    pub left: usize,
    pub right: Option<usize>,
    /// Normal axis (0 = x, 1 = y).
    pub axis: usize,
    /// Normal is `sign * e_axis`; for interior faces it points from `left`
    /// to `right` and is always `+1`.
    pub sign: f64,
}

#[derive(Clone, Debug)]
pub struct StructuredMesh {
    pub dim: usize,
    pub convention: MeshConvention,
    /// Subdomains along each axis (unused axes hold 1).
    pub subdomains: [usize; 3],
    pub m: usize,
    pub extent: [f64; 3],
    /// Cells along each axis (unused axes hold 1).
    pub cells: [usize; 3],
    pub h: [f64; 3],
    pub vertices: Vec<[f64; 3]>,
    elem_vertices: Vec<usize>,
    verts_per_elem: usize,
    elems_per_cell: usize,
    pub interior_faces: Vec<Face>,
    pub boundary_faces: Vec<Face>,
    vertex_elem_ptr: Vec<usize>,
    vertex_elem_idx: Vec<usize>,
}

/// Square or cube mesh of the unit box with `n` subdomains per axis and
/// `m` complete cells per subdomain per axis.
pub fn build_structured_mesh(dim: usize, n: usize, m: usize, convention: MeshConvention) -> Result<StructuredMesh> {
    let extent = [1.0; 3];
    let subs = [n, if dim >= 2 { n } else { 1 }, if dim >= 3 { n } else { 1 }];
    StructuredMesh::new(dim, subs, m, extent, convention)
}

/// Rectangular plane-wave mesh of `(0, lx) x (0, ly)`.
pub fn build_pwls_mesh(extent: [f64; 2], subdomains: [usize; 2], m: usize) -> Result<StructuredMesh> {
    StructuredMesh::new(
        2,
        [subdomains[0], subdomains[1], 1],
        m,
        [extent[0], extent[1], 1.0],
        MeshConvention::Pwls,
    )
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..used.len() {
            if !used[a] {
                used[a] = true;
                cur.push(a);
                rec(cur, used, out);
                cur.pop();
                used[a] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

impl StructuredMesh {
    pub fn new(
        dim: usize,
        subdomains: [usize; 3],
        m: usize,
        extent: [f64; 3],
        convention: MeshConvention,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if convention == MeshConvention::Pwls && dim != 2 {
            return Err(Error::invalid("plane-wave meshes are two-dimensional"));
        }
        if m < 1 {
            return Err(Error::invalid("m must be at least 1"));
        }
        for a in 0..dim {
            if subdomains[a] < 1 {
                return Err(Error::invalid("at least one subdomain per axis is required"));
            }
            if !(extent[a] > 0.0 && extent[a].is_finite()) {
                return Err(Error::invalid("domain extent must be positive"));
            }
        }
        let mut cells = [1usize; 3];
        let mut h = [1.0f64; 3];
        for a in 0..dim {
            let n = subdomains[a];
            cells[a] = match convention {
                MeshConvention::Elliptic => n * m,
                MeshConvention::Pwls => n * m + n - 1,
            };
            h[a] = extent[a] / cells[a] as f64;
        }
        let subdomains = [
            subdomains[0],
            subdomains[1],
            if dim == 3 { subdomains[2] } else { 1 },
        ];
        let nv = [cells[0] + 1, cells[1] + 1, if dim == 3 { cells[2] + 1 } else { 1 }];
        let mut vertices = Vec::with_capacity(nv[0] * nv[1] * nv[2]);
        for k in 0..nv[2] {
            for j in 0..nv[1] {
                for i in 0..nv[0] {
                    let z = if dim == 3 { k as f64 * h[2] } else { 0.0 };
                    vertices.push([i as f64 * h[0], j as f64 * h[1], z]);
                }
            }
        }
        let vid = |i: usize, j: usize, k: usize| i + nv[0] * (j + nv[1] * k);
        let ncells = cells[0] * cells[1] * cells[2];
        let (verts_per_elem, elems_per_cell) = match convention {
            MeshConvention::Elliptic => (dim + 1, if dim == 2 { 2 } else { 6 }),
            MeshConvention::Pwls => (4, 1),
        };
        let mut elem_vertices = Vec::with_capacity(ncells * elems_per_cell * verts_per_elem);
        let perms = permutations(dim);
        for ck in 0..cells[2] {
            for cj in 0..cells[1] {
                for ci in 0..cells[0] {
                    match convention {
                        MeshConvention::Pwls => {
                            elem_vertices.extend([
                                vid(ci, cj, 0),
                                vid(ci + 1, cj, 0),
                                vid(ci + 1, cj + 1, 0),
                                vid(ci, cj + 1, 0),
                            ]);
                        }
                        MeshConvention::Elliptic => {
                            for p in &perms {
                                let mut off = [0usize; 3];
                                elem_vertices.push(vid(ci, cj, ck));
                                for &a in p {
                                    off[a] = 1;
                                    elem_vertices.push(vid(ci + off[0], cj + off[1], ck + off[2]));
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut mesh = Self {
            dim,
            convention,
            subdomains,
            m,
            extent,
            cells,
            h,
            vertices,
            elem_vertices,
            verts_per_elem,
            elems_per_cell,
            interior_faces: Vec::new(),
            boundary_faces: Vec::new(),
            vertex_elem_ptr: Vec::new(),
            vertex_elem_idx: Vec::new(),
        };
        if convention == MeshConvention::Pwls {
            mesh.build_quad_faces();
        }
        mesh.build_vertex_incidence();
        Ok(mesh)
    }

    fn build_quad_faces(&mut self) {
        let [nx, ny, _] = self.cells;
        let vid = |i: usize, j: usize| i + (nx + 1) * j;
        let el = |i: usize, j: usize| i + nx * j;
        for j in 0..ny {
            for i in 0..=nx {
                let vertices = [vid(i, j), vid(i, j + 1)];
                if i == 0 || i == nx {
                    let (e, sign) = if i == 0 { (el(0, j), -1.0) } else { (el(nx - 1, j), 1.0) };
                    self.boundary_faces.push(Face { vertices, left: e, right: None, axis: 0, sign });
                } else {
                    self.interior_faces.push(Face {
                        vertices,
                        left: el(i - 1, j),
                        right: Some(el(i, j)),
                        axis: 0,
                        sign: 1.0,
                    });
                }
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                let vertices = [vid(i, j), vid(i + 1, j)];
                if j == 0 || j == ny {
                    let (e, sign) = if j == 0 { (el(i, 0), -1.0) } else { (el(i, ny - 1), 1.0) };
                    self.boundary_faces.push(Face { vertices, left: e, right: None, axis: 1, sign });
                } else {
                    self.interior_faces.push(Face {
                        vertices,
                        left: el(i, j - 1),
                        right: Some(el(i, j)),
                        axis: 1,
                        sign: 1.0,
                    });
                }
            }
        }
    }

    fn build_vertex_incidence(&mut self) {
        let nv = self.vertices.len();
        let mut counts = vec![0usize; nv + 1];
        for &v in &self.elem_vertices {
            counts[v + 1] += 1;
        }
        for i in 0..nv {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut idx = vec![0usize; self.elem_vertices.len()];
        for e in 0..self.num_elements() {
            for &v in self.element(e) {
                idx[fill[v]] = e;
                fill[v] += 1;
            }
        }
        self.vertex_elem_ptr = counts;
        self.vertex_elem_idx = idx;
    }

    #[inline]
    pub fn num_elements(&self) -> usize {
        self.elem_vertices.len() / self.verts_per_elem
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    #[inline]
    pub fn element(&self, e: usize) -> &[usize] {
        &self.elem_vertices[e * self.verts_per_elem..(e + 1) * self.verts_per_elem]
    }

    pub fn verts_per_element(&self) -> usize {
        self.verts_per_elem
    }

    /// Elements containing vertex `v`.
    #[inline]
    pub fn vertex_elements(&self, v: usize) -> &[usize] {
        &self.vertex_elem_idx[self.vertex_elem_ptr[v]..self.vertex_elem_ptr[v + 1]]
    }

    #[inline]
    pub fn cell_of(&self, e: usize) -> usize {
        e / self.elems_per_cell
    }

    pub fn elements_of_cell(&self, c: usize) -> std::ops::Range<usize> {
        c * self.elems_per_cell..(c + 1) * self.elems_per_cell
    }

    #[inline]
    pub fn cell_coords(&self, c: usize) -> [usize; 3] {
        let [nx, ny, _] = self.cells;
        [c % nx, (c / nx) % ny, c / (nx * ny)]
    }

    pub fn cell_index(&self, coords: [usize; 3]) -> usize {
        coords[0] + self.cells[0] * (coords[1] + self.cells[1] * coords[2])
    }

    pub fn centroid(&self, e: usize) -> [f64; 3] {
        let vs = self.element(e);
        let mut c = [0.0; 3];
        for &v in vs {
            for a in 0..3 {
                c[a] += self.vertices[v][a];
            }
        }
        c.map(|x| x / vs.len() as f64)
    }

    /// Lower-left corner of a quadrilateral element.
    pub fn quad_origin(&self, e: usize) -> [f64; 2] {
        let [i, j, _] = self.cell_coords(e);
        [i as f64 * self.h[0], j as f64 * self.h[1]]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        let x = self.vertices[v];
        let tol = 1e-12;
        (0..self.dim).any(|a| x[a] < tol * self.extent[a] || x[a] > self.extent[a] * (1.0 - tol))
    }

    /// Volume and gradients of the barycentric coordinates of a simplex.
    pub fn simplex_geometry(&self, e: usize) -> (f64, [[f64; 3]; 4]) {
        let vs = self.element(e);
        let d = self.dim;
        let x0 = self.vertices[vs[0]];
        // J columns are edge vectors x_k - x_0
        let mut j = [[0.0f64; 3]; 3];
        for k in 0..d {
            let xk = self.vertices[vs[k + 1]];
            for a in 0..d {
                j[a][k] = xk[a] - x0[a];
            }
        }
        let mut grads = [[0.0f64; 3]; 4];
        let vol;
        if d == 2 {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            vol = det.abs() / 2.0;
            // rows of J^{-1} are gradients of lambda_1, lambda_2
            let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
            for k in 0..2 {
                grads[k + 1] = [inv[k][0], inv[k][1], 0.0];
            }
        } else {
            let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            vol = det.abs() / 6.0;
            let c = |r: usize, s: usize| {
                let rs: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                let cs: Vec<usize> = (0..3).filter(|&x| x != s).collect();
                let m = j[rs[0]][cs[0]] * j[rs[1]][cs[1]] - j[rs[0]][cs[1]] * j[rs[1]][cs[0]];
                if (r + s) % 2 == 0 {
                    m
                } else {
                    -m
                }
            };
            // inverse = adj / det, adj[k][a] = cofactor(a, k)
            for k in 0..3 {
                for a in 0..3 {
                    grads[k + 1][a] = c(a, k) / det;
                }
            }
        }
        for a in 0..3 {
            grads[0][a] = -(1..=d).map(|k| grads[k][a]).sum::<f64>();
        }
        (vol, grads)
    }

    /// Plain-text export: `dim nv ne`, coordinates, then 0-based element
    /// vertex lists.
    pub fn write_text<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {} {}", self.dim, self.num_vertices(), self.num_elements())?;
        for x in &self.vertices {
            let coords: Vec<String> = x[..self.dim].iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(w, "{}", coords.join(" "))?;
        }
        for e in 0..self.num_elements() {
            let vs: Vec<String> = self.element(e).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", vs.join(" "))?;
        }
        Ok(())
    }
}
