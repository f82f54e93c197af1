//! Continuous Galerkin discretization of the phase-field model on Q1
//! elements with a lumped (collocated) mass matrix.
//!
//! The stiffness operator -int grad(phi_i).grad(phi_j) is assembled once
//! into CSR. The nonlinear reaction term is reassembled on every right-hand
//! side evaluation by the generic element loop: gather local coefficients,
//! evaluate the geometry jacobian at each quadrature point, contract with
//! the tabulated basis, scatter. Nothing in that loop assumes the mesh is
//! affine or the basis collocated, which is exactly the cost profile a
//! general unstructured mesh would pay.

use crate::mesh::reference::{build_reference_element, Primitive, QuadratureKind, ReferenceElement};
use crate::mesh::{
    build_quad_mesh_from_grid, physical_gradient, CartesianGrid, DofMap, MeshError, QuadMesh,
};
use crate::solver_fd::{potential_derivative, AllenCahnParams};

/// Square sparse matrix in compressed sparse row form with sorted columns.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub n_rows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseOperator {
    /// Builds CSR from unordered (row, col, value) triplets, summing
    /// duplicates. Accumulated zeros are kept so the stored sparsity pattern
    /// is the full stencil.
    pub fn from_triplets(n_rows: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut counts = vec![0usize; n_rows];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            let mut j = i + 1;
            while j < triplets.len() && triplets[j].0 == r && triplets[j].1 == c {
                v += triplets[j].2;
                j += 1;
            }
            counts[r] += 1;
            col_idx.push(c);
            values.push(v);
            i = j;
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for r in 0..n_rows {
            row_ptr[r + 1] = row_ptr[r] + counts[r];
        }
        SparseOperator { n_rows, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for r in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    /// Entry (i, j), zero when outside the stored pattern.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn allocated_bytes(&self) -> usize {
        self.row_ptr.len() * std::mem::size_of::<usize>()
            + self.col_idx.len() * std::mem::size_of::<usize>()
            + self.values.len() * std::mem::size_of::<f64>()
    }
}

/// Galerkin system bound to one mesh. Owns the assembled operators, the
/// solution vector, and the scratch buffers used by the per-step reaction
/// assembly, so repeated right-hand-side evaluations never allocate.
pub struct CgSystem {
    pub mesh: QuadMesh,
    pub element: ReferenceElement,
    pub dofmap: DofMap,
    /// Assembled -int grad(phi_i).grad(phi_j); rows sum to zero.
    pub stiffness: SparseOperator,
    /// Lumped mass: row sums of the consistent mass matrix.
    pub mass_diag: Vec<f64>,
    pub params: AllenCahnParams,
    pub state: Vec<f64>,
    ku: Vec<f64>,
    reaction: Vec<f64>,
    local_u: Vec<f64>,
}

/// Jacobian determinant at one quadrature point and the physical gradients
/// of every basis function there.
fn cell_geometry(
    mesh: &QuadMesh,
    element: &ReferenceElement,
    cell: usize,
    q: usize,
    grads: &mut [[f64; 2]],
) -> f64 {
    let nd = element.ndofs;
    match mesh.dim {
        1 => {
            let len = mesh.jacobian_1d(cell);
            for i in 0..nd {
                grads[i] = [element.grad_at_quad[q * nd + i][0] / len, 0.0];
            }
            len
        }
        _ => {
            let (j, det) = mesh.jacobian_2d(cell, element.quad_points[q]);
            for i in 0..nd {
                grads[i] = physical_gradient(&j, det, element.grad_at_quad[q * nd + i]);
            }
            det
        }
    }
}

pub fn build_cg_system(grid: &CartesianGrid, params: AllenCahnParams) -> Result<CgSystem, MeshError> {
    let mesh = build_quad_mesh_from_grid(grid);
    let primitive = if mesh.dim == 1 { Primitive::Interval } else { Primitive::Quad };
    let element = build_reference_element(primitive, 1, QuadratureKind::GaussLobattoCollocation)?;
    let dofmap = DofMap::continuous_q1(&mesh);
    let n = dofmap.n_dofs;
    let nd = element.ndofs;
    let nq = element.quad_points.len();

    let mut triplets = Vec::with_capacity(mesh.n_cells() * nd * nd * nq);
    let mut mass_diag = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; nd];
    for c in 0..mesh.n_cells() {
        let dofs = dofmap.cell_dofs(c);
        for q in 0..nq {
            let det = cell_geometry(&mesh, &element, c, q, &mut grads);
            let w = element.quad_weights[q] * det;
            for a in 0..nd {
                mass_diag[dofs[a]] += w * element.basis_at_quad[q * nd + a];
                for b in 0..nd {
                    let gg = grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1];
                    triplets.push((dofs[a], dofs[b], -w * gg));
                }
            }
        }
    }
    let stiffness = SparseOperator::from_triplets(n, triplets);
    Ok(CgSystem {
        mesh,
        element,
        dofmap,
        stiffness,
        mass_diag,
        params,
        state: vec![0.0; n],
        ku: vec![0.0; n],
        reaction: vec![0.0; n],
        local_u: vec![0.0; nd],
    })
}

impl CgSystem {
    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    /// int phi_i w'(u_h) by the full element loop, written into `reaction`.
    fn assemble_reaction(&mut self, u: &[f64]) {
        let CgSystem { mesh, element, dofmap, params, reaction, local_u, .. } = self;
        reaction.fill(0.0);
        let nd = element.ndofs;
        let nq = element.quad_points.len();
        for c in 0..mesh.n_cells() {
            let dofs = dofmap.cell_dofs(c);
            for (k, d) in dofs.iter().enumerate() {
                local_u[k] = u[*d];
            }
            for q in 0..nq {
                let det = match mesh.dim {
                    1 => mesh.jacobian_1d(c),
                    _ => mesh.jacobian_2d(c, element.quad_points[q]).1,
                };
                let mut uq = 0.0;
                for k in 0..nd {
                    uq += element.basis_at_quad[q * nd + k] * local_u[k];
                }
                let s = element.quad_weights[q] * det * potential_derivative(uq, params);
                for k in 0..nd {
                    reaction[dofs[k]] += s * element.basis_at_quad[q * nd + k];
                }
            }
        }
    }

    /// Full right-hand side: du_i = mobility * ((K u)_i - F_i) / M_i.
    pub fn rhs(&mut self, u: &[f64], du: &mut [f64]) {
        self.assemble_reaction(u);
        let CgSystem { stiffness, mass_diag, params, ku, reaction, .. } = self;
        stiffness.matvec(u, ku);
        let m = params.mobility;
        for i in 0..u.len() {
            du[i] = m * (ku[i] - reaction[i]) / mass_diag[i];
        }
    }

    /// Mass-scaled stiffness action (K u)_i / M_i, the Galerkin counterpart
    /// of the finite-difference Laplacian.
    pub fn laplacian_nodal(&mut self, u: &[f64], out: &mut [f64]) {
        self.stiffness.matvec(u, &mut self.ku);
        for i in 0..u.len() {
            out[i] = self.ku[i] / self.mass_diag[i];
        }
    }

    pub fn allocated_bytes(&self) -> usize {
        let f = std::mem::size_of::<f64>();
        let u = std::mem::size_of::<usize>();
        self.stiffness.allocated_bytes()
            + (self.mass_diag.len() + self.state.len() + self.ku.len() + self.reaction.len() + self.local_u.len()) * f
            + self.mesh.vertices.len() * 2 * f
            + self.mesh.n_cells() * self.element.ndofs * u // connectivity
            + self.mesh.n_cells() * self.element.ndofs * u // dof map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cartesian_grid;
    use crate::solver_fd::FdSystem;

    fn params(mu0: f64) -> AllenCahnParams {
        AllenCahnParams { gamma: 1.0, xi: 1.5, mobility: 1.0, mu0 }
    }

    fn grid_2d(nx_cells: usize, h: f64) -> CartesianGrid {
        let l = nx_cells as f64 * h;
        build_cartesian_grid(2, &[[0.0, l], [0.0, l]], h).unwrap()
    }

    #[test]
    fn csr_merges_duplicates_and_sorts_columns() {
        let a = SparseOperator::from_triplets(
            3,
            vec![(0, 2, 1.0), (0, 0, 2.0), (0, 2, 3.0), (2, 1, -1.0), (1, 1, 5.0)],
        );
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.row(0), (&[0usize, 2][..], &[2.0, 4.0][..]));
        assert_eq!(a.get(0, 2), 4.0);
        assert_eq!(a.get(0, 1), 0.0);
        let mut y = vec![0.0; 3];
        a.matvec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![14.0, 10.0, -2.0]);
    }

    #[test]
    fn interior_stiffness_row_is_the_five_point_star() {
        let sys = build_cg_system(&grid_2d(4, 1.0), params(0.0)).unwrap();
        let center = 2 * 5 + 2; // vertex (2,2) on a 5x5 vertex grid
        assert!((sys.stiffness.get(center, center) + 4.0).abs() < 1e-12);
        for nb in [center - 1, center + 1, center - 5, center + 5] {
            assert!((sys.stiffness.get(center, nb) - 1.0).abs() < 1e-12);
        }
        for diag in [center - 6, center - 4, center + 4, center + 6] {
            assert_eq!(sys.stiffness.get(center, diag), 0.0);
        }
    }

    #[test]
    fn stiffness_rows_sum_to_zero_and_matrix_is_symmetric() {
        let sys = build_cg_system(&grid_2d(3, 0.5), params(0.0)).unwrap();
        let n = sys.n_dofs();
        for i in 0..n {
            let (_, vals) = sys.stiffness.row(i);
            let s: f64 = vals.iter().sum();
            assert!(s.abs() < 1e-12, "row {i} sums to {s}");
            for j in 0..n {
                assert!((sys.stiffness.get(i, j) - sys.stiffness.get(j, i)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn one_dimensional_interior_row() {
        let grid = build_cartesian_grid(1, &[[0.0, 1.0]], 0.25).unwrap();
        let sys = build_cg_system(&grid, params(0.0)).unwrap();
        assert!((sys.stiffness.get(2, 2) + 2.0 / 0.25).abs() < 1e-12);
        assert!((sys.stiffness.get(2, 1) - 1.0 / 0.25).abs() < 1e-12);
        assert!((sys.stiffness.get(2, 3) - 1.0 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn lumped_mass_matches_trapezoid_weights() {
        let grid = grid_2d(4, 1.0);
        let sys = build_cg_system(&grid, params(0.0)).unwrap();
        assert!((sys.mass_diag[0] - 0.25).abs() < 1e-13); // corner
        assert!((sys.mass_diag[1] - 0.5).abs() < 1e-13); // edge
        assert!((sys.mass_diag[6] - 1.0).abs() < 1e-13); // interior
        let total: f64 = sys.mass_diag.iter().sum();
        assert!((total - 16.0).abs() < 1e-12);
        let trap = grid.mass_weights();
        for (a, b) in sys.mass_diag.iter().zip(&trap) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn collocated_reaction_reduces_to_nodal_values() {
        let grid = grid_2d(3, 1.0);
        let mut sys = build_cg_system(&grid, params(0.1)).unwrap();
        let n = sys.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| 0.1 + 0.05 * (i as f64)).collect();
        sys.assemble_reaction(&u);
        for i in 0..n {
            let expect = sys.mass_diag[i] * potential_derivative(u[i], &sys.params);
            assert!((sys.reaction[i] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn galerkin_rhs_matches_finite_differences_everywhere() {
        for (dim, extents, h) in [
            (1, vec![[0.0, 12.0]], 0.5),
            (2, vec![[0.0, 6.0], [0.0, 4.0]], 0.5),
        ] {
            let grid = build_cartesian_grid(dim, &extents, h).unwrap();
            let p = AllenCahnParams { gamma: 1.0, xi: 1.5, mobility: 0.7, mu0: 0.1 };
            let fd = FdSystem::new(grid.clone(), p);
            let mut cg = build_cg_system(&grid, p).unwrap();
            let n = grid.vertex_count();
            let u: Vec<f64> = (0..n).map(|i| 0.5 + 0.4 * ((i * 37 % 17) as f64 / 17.0 - 0.5)).collect();
            let mut du_fd = vec![0.0; n];
            let mut du_cg = vec![0.0; n];
            fd.rhs(&u, &mut du_fd);
            cg.rhs(&u, &mut du_cg);
            for i in 0..n {
                assert!(
                    (du_fd[i] - du_cg[i]).abs() < 1e-11,
                    "dim {dim} node {i}: fd {} vs cg {}",
                    du_fd[i],
                    du_cg[i]
                );
            }
        }
    }

    #[test]
    fn constant_state_rhs_is_pure_reaction() {
        let mut sys = build_cg_system(&grid_2d(3, 1.0), params(0.1)).unwrap();
        let u = vec![0.5; sys.n_dofs()];
        let mut du = vec![0.0; u.len()];
        sys.rhs(&u, &mut du);
        let expect = -potential_derivative(0.5, &sys.params);
        for v in &du {
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn byte_accounting_dwarfs_the_finite_difference_footprint() {
        let grid = grid_2d(32, 1.0);
        let cg = build_cg_system(&grid, params(0.0)).unwrap();
        let fd = FdSystem::new(grid, params(0.0));
        assert!(cg.allocated_bytes() > 5 * fd.allocated_bytes());
    }
}
