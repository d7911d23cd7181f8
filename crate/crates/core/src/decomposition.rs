//! Non-overlapping subdomains, overlapping extensions, neighbour sets and
//! oversampled regions on the structured subdomain grid.

use crate::error::{Error, Result};
use crate::mesh::{MeshConvention, StructuredMesh};

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub num_subdomains: usize,
    /// Subdomains per axis (unused axes hold 1).
    pub grid: [usize; 3],
    pub overlap_layers: usize,
    pub max_oversample: usize,
    /// Elements assigned to each subdomain (a partition of the mesh).
    pub omega: Vec<Vec<usize>>,
    /// Elements meeting the closure of each subdomain.
    pub omega_closed: Vec<Vec<usize>>,
    /// Overlapping subdomains: the closed set grown by `overlap_layers`
    /// layers of vertex neighbours.
    pub omega_prime: Vec<Vec<usize>>,
    /// `neighbors[i]` lists every `j` whose overlapping subdomain shares an
    /// element with that of `i` (including `i`).
    pub neighbors: Vec<Vec<usize>>,
    /// Largest neighbour count.
    pub max_neighbors: usize,
    /// Set when some overlapping subdomain covers the whole mesh.
    pub degenerate_overlap: bool,
    convention: MeshConvention,
    m: usize,
    cells: [usize; 3],
    elems_per_cell: usize,
    dim: usize,
}

impl Decomposition {
    pub fn build(mesh: &StructuredMesh, overlap_layers: usize, max_oversample: usize) -> Result<Self> {
        if overlap_layers < 1 {
            return Err(Error::invalid("overlap must be at least one layer"));
        }
        let grid = mesh.subdomains;
        let num_subdomains = grid[0] * grid[1] * grid[2];
        let ne = mesh.num_elements();
        let elems_per_cell = ne / mesh.num_cells();
        let mut d = Self {
            num_subdomains,
            grid,
            overlap_layers,
            max_oversample,
            omega: vec![Vec::new(); num_subdomains],
            omega_closed: vec![Vec::new(); num_subdomains],
            omega_prime: Vec::new(),
            neighbors: Vec::new(),
            max_neighbors: 0,
            degenerate_overlap: false,
            convention: mesh.convention,
            m: mesh.m,
            cells: mesh.cells,
            elems_per_cell,
            dim: mesh.dim,
        };
        for c in 0..mesh.num_cells() {
            let coords = mesh.cell_coords(c);
            let owner = d.subdomain_index(d.assigned_coords(coords));
            let closure = d.closure_owners(coords);
            for e in mesh.elements_of_cell(c) {
                d.omega[owner].push(e);
                for &s in &closure {
                    d.omega_closed[s].push(e);
                }
            }
        }
        for s in &mut d.omega_closed {
            s.sort_unstable();
        }

        let mut mark = vec![false; ne];
        let mut covers: Vec<Vec<u32>> = vec![Vec::new(); ne];
        for i in 0..num_subdomains {
            mark.iter_mut().for_each(|x| *x = false);
            let mut current: Vec<usize> = d.omega_closed[i].clone();
            for &e in &current {
                mark[e] = true;
            }
            for _ in 0..overlap_layers {
                let mut added = Vec::new();
                for &e in &current {
                    for &v in mesh.element(e) {
                        for &f in mesh.vertex_elements(v) {
                            if !mark[f] {
                                mark[f] = true;
                                added.push(f);
                            }
                        }
                    }
                }
                current.extend(added);
            }
            current.sort_unstable();
            if current.len() == ne {
                d.degenerate_overlap = true;
            }
            for &e in &current {
                covers[e].push(i as u32);
            }
            d.omega_prime.push(current);
        }

        let mut nb: Vec<Vec<bool>> = vec![vec![false; num_subdomains]; num_subdomains];
        for list in &covers {
            for &a in list {
                for &b in list {
                    nb[a as usize][b as usize] = true;
                }
            }
        }
        d.neighbors = nb
            .iter()
            .map(|row| (0..num_subdomains).filter(|&j| row[j]).collect())
            .collect();
        d.max_neighbors = d.neighbors.iter().map(Vec::len).max().unwrap_or(0);
        Ok(d)
    }

    pub fn subdomain_index(&self, c: [usize; 3]) -> usize {
        c[0] + self.grid[0] * (c[1] + self.grid[1] * c[2])
    }

    pub fn subdomain_coords(&self, i: usize) -> [usize; 3] {
        [i % self.grid[0], (i / self.grid[0]) % self.grid[1], i / (self.grid[0] * self.grid[1])]
    }

    /// Subdomains (along one axis) whose closure contains cell `c`; the
    /// first entry is the one the cell is assigned to.
    fn axis_owners(&self, c: usize) -> (usize, Option<usize>) {
        match self.convention {
            MeshConvention::Elliptic => (c / self.m, None),
            MeshConvention::Pwls => {
                let s = c / (self.m + 1);
                if c % (self.m + 1) == self.m {
                    (s, Some(s + 1))
                } else {
                    (s, None)
                }
            }
        }
    }

    fn assigned_coords(&self, cell: [usize; 3]) -> [usize; 3] {
        let mut out = [0; 3];
        for a in 0..self.dim {
            out[a] = self.axis_owners(cell[a]).0;
        }
        out
    }

    fn closure_owners(&self, cell: [usize; 3]) -> Vec<usize> {
        let mut per_axis: Vec<Vec<usize>> = vec![vec![0]; 3];
        for a in 0..self.dim {
            let (s, t) = self.axis_owners(cell[a]);
            per_axis[a] = std::iter::once(s).chain(t).collect();
        }
        let mut out = Vec::new();
        for &z in &per_axis[2] {
            for &y in &per_axis[1] {
                for &x in &per_axis[0] {
                    out.push(self.subdomain_index([x, y, z]));
                }
            }
        }
        out
    }

    /// Box of subdomain coordinates within Chebyshev distance `k` of `i`.
    fn member_box(&self, i: usize, k: usize) -> ([usize; 3], [usize; 3]) {
        let c = self.subdomain_coords(i);
        let mut lo = [0; 3];
        let mut hi = [0; 3];
        for a in 0..3 {
            lo[a] = c[a].saturating_sub(k);
            hi[a] = (c[a] + k).min(self.grid[a] - 1);
        }
        (lo, hi)
    }

    /// Subdomains forming the oversampled region of level `k` around `i`.
    pub fn oversample_members(&self, i: usize, k: usize) -> Vec<usize> {
        let (lo, hi) = self.member_box(i, k);
        let mut out = Vec::new();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    out.push(self.subdomain_index([x, y, z]));
                }
            }
        }
        out
    }

    /// Cell range along one axis whose owners all lie in `lo..=hi`.
    fn axis_cell_range(&self, lo: usize, hi: usize) -> std::ops::Range<usize> {
        match self.convention {
            MeshConvention::Elliptic => lo * self.m..(hi + 1) * self.m,
            MeshConvention::Pwls => lo * (self.m + 1)..hi * (self.m + 1) + self.m,
        }
    }

    /// Elements of the oversampled region: for `k = 0` the subdomain itself,
    /// otherwise every element whose closure owners are all members.
    pub fn oversampled_elements(&self, i: usize, k: usize) -> Result<Vec<usize>> {
        if i >= self.num_subdomains {
            return Err(Error::invalid(format!("subdomain {i} out of range")));
        }
        if k > self.max_oversample {
            return Err(Error::invalid(format!(
                "oversampling level {k} exceeds the configured maximum {}",
                self.max_oversample
            )));
        }
        if k == 0 {
            return Ok(self.omega[i].clone());
        }
        let (lo, hi) = self.member_box(i, k);
        let mut ranges = [0..1, 0..1, 0..1];
        for a in 0..self.dim {
            ranges[a] = self.axis_cell_range(lo[a], hi[a]);
        }
        let mut out = Vec::new();
        for z in ranges[2].clone() {
            for y in ranges[1].clone() {
                for x in ranges[0].clone() {
                    let c = x + self.cells[0] * (y + self.cells[1] * z);
                    out.extend(c * self.elems_per_cell..(c + 1) * self.elems_per_cell);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn sum_over_subdomains<F: Fn(usize) -> usize>(&self, f: F) -> usize {
        (0..self.num_subdomains).map(f).sum()
    }
}

/// Dof-to-element incidence shared by both discretizations.
#[derive(Clone, Debug)]
pub struct DofIncidence {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    num_elements: usize,
}

impl DofIncidence {
    pub fn new(dof_elements: Vec<Vec<usize>>, num_elements: usize) -> Self {
        let mut ptr = Vec::with_capacity(dof_elements.len() + 1);
        ptr.push(0);
        let mut idx = Vec::new();
        for list in dof_elements {
            idx.extend(list);
            ptr.push(idx.len());
        }
        Self { ptr, idx, num_elements }
    }

    pub fn num_dofs(&self) -> usize {
        self.ptr.len() - 1
    }

    pub fn elements(&self, dof: usize) -> &[usize] {
        &self.idx[self.ptr[dof]..self.ptr[dof + 1]]
    }

    fn mark(&self, elements: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.num_elements];
        for &e in elements {
            mark[e] = true;
        }
        mark
    }

    /// Dofs all of whose incident elements lie in the set.
    pub fn interior_dofs(&self, elements: &[usize]) -> Vec<usize> {
        let mark = self.mark(elements);
        (0..self.num_dofs())
            .filter(|&d| {
                let es = self.elements(d);
                !es.is_empty() && es.iter().all(|&e| mark[e])
            })
            .collect()
    }

    /// Dofs with at least one incident element in the set.
    pub fn closed_dofs(&self, elements: &[usize]) -> Vec<usize> {
        let mark = self.mark(elements);
        (0..self.num_dofs())
            .filter(|&d| self.elements(d).iter().any(|&e| mark[e]))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_structured_mesh;

    #[test]
    fn partition_is_disjoint_and_complete() {
        for conv in [MeshConvention::Elliptic, MeshConvention::Pwls] {
            let mesh = build_structured_mesh(2, 3, 3, conv).unwrap();
            let d = Decomposition::build(&mesh, 1, 2).unwrap();
            let mut seen = vec![0; mesh.num_elements()];
            for s in &d.omega {
                for &e in s {
                    seen[e] += 1;
                }
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn neighbour_counts_in_2d() {
        let mesh = build_structured_mesh(2, 4, 4, MeshConvention::Elliptic).unwrap();
        let d = Decomposition::build(&mesh, 1, 1).unwrap();
        assert_eq!(d.max_neighbors, 9);
        assert_eq!(d.neighbors[0].len(), 4);
    }

    #[test]
    fn pwls_cut_cells_belong_to_both_closures() {
        let mesh = build_structured_mesh(2, 2, 3, MeshConvention::Pwls).unwrap();
        let d = Decomposition::build(&mesh, 1, 1).unwrap();
        // 7 cells per axis, cut cell column 3
        let cut = mesh.cell_index([3, 0, 0]);
        assert!(d.omega[0].contains(&cut));
        assert!(d.omega_closed[0].contains(&cut) && d.omega_closed[1].contains(&cut));
        assert_eq!(d.omega_closed[0].len(), 4 * 4);
    }

    #[test]
    fn oversampled_regions_grow() {
        let mesh = build_structured_mesh(2, 5, 2, MeshConvention::Pwls).unwrap();
        let d = Decomposition::build(&mesh, 1, 3).unwrap();
        let centre = d.subdomain_index([2, 2, 0]);
        let r0 = d.oversampled_elements(centre, 0).unwrap().len();
        let r1 = d.oversampled_elements(centre, 1).unwrap().len();
        let r2 = d.oversampled_elements(centre, 2).unwrap().len();
        assert!(r0 < r1 && r1 < r2);
        assert_eq!(r1, 8 * 8);
        assert_eq!(r2, mesh.num_elements());
        assert!(d.oversampled_elements(centre, 4).is_err());
    }
}
