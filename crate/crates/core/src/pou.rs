//! Partitions of unity subordinate to the overlapping subdomains.
//!
//! The nodal variant is piecewise linear on the simplicial mesh with nodes at
//! mesh vertices. The dual variant lives on quadrilateral meshes with nodes at
//! element midpoints and is bilinear between them, constant in the normal
//! direction beyond the outermost midpoints.

use crate::decomposition::Decomposition;
use crate::mesh::{MeshConvention, StructuredMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PouKind {
    Nodal,
    Dual,
}

#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    pub kind: PouKind,
    /// Per node: `(subdomain, value)` pairs with nonzero value.
    node_values: Vec<Vec<(usize, f64)>>,
    // dual layout
    grid: [usize; 2],
    h: [f64; 2],
}

impl PartitionOfUnity {
    pub fn build(mesh: &StructuredMesh, decomp: &Decomposition) -> Self {
        match mesh.convention {
            MeshConvention::Elliptic => Self::nodal(mesh, decomp),
            MeshConvention::Pwls => Self::dual(mesh, decomp),
        }
    }

    fn from_counts(counts: Vec<Vec<usize>>) -> Vec<Vec<(usize, f64)>> {
        counts
            .into_iter()
            .map(|subs| {
                let w = if subs.is_empty() { 0.0 } else { 1.0 / subs.len() as f64 };
                subs.into_iter().map(|s| (s, w)).collect()
            })
            .collect()
    }

    /// A vertex counts for subdomain `i` when every element around it lies
    /// in the overlapping subdomain.
    fn nodal(mesh: &StructuredMesh, decomp: &Decomposition) -> Self {
        let ne = mesh.num_elements();
        let mut counts: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
        let mut mark = vec![false; ne];
        for (i, set) in decomp.omega_prime.iter().enumerate() {
            for &e in set {
                mark[e] = true;
            }
            let mut seen = vec![false; mesh.num_vertices()];
            for &e in set {
                for &v in mesh.element(e) {
                    if !seen[v] {
                        seen[v] = true;
                        if mesh.vertex_elements(v).iter().all(|&f| mark[f]) {
                            counts[v].push(i);
                        }
                    }
                }
            }
            for &e in set {
                mark[e] = false;
            }
        }
        Self {
            kind: PouKind::Nodal,
            node_values: Self::from_counts(counts),
            grid: [0, 0],
            h: [0.0, 0.0],
        }
    }

    /// Dual nodes are element midpoints; a node counts for `i` when its
    /// element lies in the overlapping subdomain.
    fn dual(mesh: &StructuredMesh, decomp: &Decomposition) -> Self {
        let mut counts: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_elements()];
        for (i, set) in decomp.omega_prime.iter().enumerate() {
            for &e in set {
                counts[e].push(i);
            }
        }
        Self {
            kind: PouKind::Dual,
            node_values: Self::from_counts(counts),
            grid: [mesh.cells[0], mesh.cells[1]],
            h: [mesh.h[0], mesh.h[1]],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.node_values.len()
    }

    /// Nonzero `(subdomain, value)` pairs at a node.
    pub fn node(&self, node: usize) -> &[(usize, f64)] {
        &self.node_values[node]
    }

    pub fn node_value(&self, node: usize, subdomain: usize) -> f64 {
        self.node_values[node]
            .iter()
            .find(|(s, _)| *s == subdomain)
            .map_or(0.0, |(_, v)| *v)
    }

    /// Nodal values of one subdomain's function.
    pub fn theta(&self, subdomain: usize) -> Vec<(usize, f64)> {
        self.node_values
            .iter()
            .enumerate()
            .filter_map(|(n, list)| {
                list.iter()
                    .find(|(s, _)| *s == subdomain)
                    .map(|(_, v)| (n, *v))
            })
            .collect()
    }

    /// Per-element gradients of every nonzero function (nodal kind).
    pub fn element_gradients(&self, mesh: &StructuredMesh, e: usize) -> Vec<(usize, [f64; 3])> {
        debug_assert_eq!(self.kind, PouKind::Nodal);
        let (_, g) = mesh.simplex_geometry(e);
        let mut out: Vec<(usize, [f64; 3])> = Vec::new();
        for (k, &v) in mesh.element(e).iter().enumerate() {
            for &(s, val) in &self.node_values[v] {
                let slot = match out.iter().position(|(t, _)| *t == s) {
                    Some(p) => p,
                    None => {
                        out.push((s, [0.0; 3]));
                        out.len() - 1
                    }
                };
                for a in 0..3 {
                    out[slot].1[a] += val * g[k][a];
                }
            }
        }
        out
    }

    /// Bilinear stencil at a point (dual kind): the four surrounding nodes,
    /// their interpolation weights and weight gradients.
    fn dual_stencil(&self, x: [f64; 2]) -> [(usize, f64, [f64; 2]); 4] {
        let mut idx = [0usize; 2];
        let mut step = [1usize; 2];
        let mut t = [0.0f64; 2];
        let mut dt = [0.0f64; 2];
        for a in 0..2 {
            let n = self.grid[a];
            let u = x[a] / self.h[a] - 0.5;
            let top = (n - 1) as f64;
            let inside = u > 0.0 && u < top;
            let uc = u.clamp(0.0, top);
            let i0 = (uc.floor() as usize).min(n.saturating_sub(2));
            idx[a] = i0;
            // a single midpoint along this axis: both stencil rows coincide
            step[a] = usize::from(n > 1);
            t[a] = uc - i0 as f64;
            dt[a] = if inside { 1.0 / self.h[a] } else { 0.0 };
        }
        let node = |i: usize, j: usize| (idx[0] + i * step[0]) + self.grid[0] * (idx[1] + j * step[1]);
        [
            (node(0, 0), (1.0 - t[0]) * (1.0 - t[1]), [-dt[0] * (1.0 - t[1]), -(1.0 - t[0]) * dt[1]]),
            (node(1, 0), t[0] * (1.0 - t[1]), [dt[0] * (1.0 - t[1]), -t[0] * dt[1]]),
            (node(0, 1), (1.0 - t[0]) * t[1], [-dt[0] * t[1], (1.0 - t[0]) * dt[1]]),
            (node(1, 1), t[0] * t[1], [dt[0] * t[1], t[0] * dt[1]]),
        ]
    }

    /// Values and gradients of every nonzero function at a point (dual kind).
    pub fn dual_eval(&self, x: [f64; 2]) -> Vec<(usize, f64, [f64; 2])> {
        debug_assert_eq!(self.kind, PouKind::Dual);
        let mut out: Vec<(usize, f64, [f64; 2])> = Vec::new();
        for (node, w, dw) in self.dual_stencil(x) {
            for &(s, val) in &self.node_values[node] {
                let slot = match out.iter().position(|(t, _, _)| *t == s) {
                    Some(p) => p,
                    None => {
                        out.push((s, 0.0, [0.0; 2]));
                        out.len() - 1
                    }
                };
                out[slot].1 += w * val;
                out[slot].2[0] += dw[0] * val;
                out[slot].2[1] += dw[1] * val;
            }
        }
        out
    }

    /// Largest deviation of `sum_i theta_i` from one over the nodes.
    pub fn max_sum_defect(&self) -> f64 {
        self.node_values
            .iter()
            .filter(|l| !l.is_empty())
            .map(|l| (l.iter().map(|(_, v)| v).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_mesh;

    #[test]
    fn dual_sum_is_one_everywhere() {
        let mesh = build_structured_mesh(2, 3, 3, MeshConvention::Pwls).unwrap();
        let d = Decomposition::build(&mesh, 1, 1).unwrap();
        let pou = PartitionOfUnity::build(&mesh, &d);
        for k in 0..50 {
            let x = [(k as f64 * 0.37).fract(), (k as f64 * 0.61).fract()];
            let vals = pou.dual_eval(x);
            let s: f64 = vals.iter().map(|v| v.1).sum();
            let g: [f64; 2] = [vals.iter().map(|v| v.2[0]).sum(), vals.iter().map(|v| v.2[1]).sum()];
            assert!((s - 1.0).abs() < 1e-12 && g[0].abs() < 1e-9 && g[1].abs() < 1e-9);
        }
    }

    #[test]
    fn nodal_support_stays_inside_overlap() {
        let mesh = build_structured_mesh(2, 2, 3, MeshConvention::Elliptic).unwrap();
        let d = Decomposition::build(&mesh, 1, 1).unwrap();
        let pou = PartitionOfUnity::build(&mesh, &d);
        for i in 0..d.num_subdomains {
            for e in 0..mesh.num_elements() {
                let touches = mesh.element(e).iter().any(|&v| pou.node_value(v, i) != 0.0);
                if touches {
                    assert!(d.omega_prime[i].binary_search(&e).is_ok());
                }
            }
        }
    }
}
