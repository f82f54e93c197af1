//! Nodal discontinuous Galerkin discretization of constant-velocity scalar
//! advection on a periodic rectangle.
//!
//! The basis is tensor-product Lagrange on Gauss-Lobatto nodes with
//! collocated quadrature, which makes the mass matrix diagonal and lets the
//! facet integrals touch only the nodes that live on each facet. Interface
//! values are coupled by the global Lax-Friedrichs flux. At order zero the
//! scheme collapses to a first-order finite-volume method on cell averages,
//! which is exactly how the finite-volume branch of the kit is realized.

use crate::mesh::reference::{build_reference_element, Primitive, QuadratureKind, ReferenceElement};
use crate::mesh::{build_quad_mesh_from_grid, CartesianGrid, DofMap, MeshError, QuadMesh, Side};

/// Lax-Friedrichs numerical flux through a facet with normal velocity `un`
/// (normal pointing owner to neighbor) and dissipation speed `c`.
#[inline]
pub fn lax_friedrichs_flux(un: f64, c: f64, a_owner: f64, a_neighbor: f64) -> f64 {
    0.5 * un * (a_owner + a_neighbor) + 0.5 * c * (a_owner - a_neighbor)
}

/// One periodic facet, fully resolved to global dof indices. Entry k of the
/// owner and neighbor lists sit at the same physical point.
#[derive(Debug, Clone)]
struct PeriodicFacet {
    owner_dofs: Vec<usize>,
    neighbor_dofs: Vec<usize>,
    /// u . n with the normal pointing owner to neighbor.
    un: f64,
    /// Facet quadrature weights, already scaled by facet length.
    weights: Vec<f64>,
}

pub struct DgSystem {
    pub mesh: QuadMesh,
    pub element: ReferenceElement,
    pub dofmap: DofMap,
    pub velocity: [f64; 2],
    /// Collocated mass diagonal; entry = quadrature weight times cell area.
    pub mass_diag: Vec<f64>,
    pub state: Vec<f64>,
    /// Physical coordinates of every dof.
    pub dof_coords: Vec<[f64; 2]>,
    facets: Vec<PeriodicFacet>,
    /// Global dissipation speed |ux| + |uy|.
    pub c_speed: f64,
    /// Precomputed volume kernel [i * ndofs + q]: contribution of the nodal
    /// value at q to row i, all affine-cell factors folded in.
    vol_op: Vec<f64>,
    hx: f64,
    hy: f64,
}

pub fn build_dg_system(
    grid: &CartesianGrid,
    order: usize,
    velocity: [f64; 2],
) -> Result<DgSystem, MeshError> {
    if grid.dim != 2 {
        return Err(MeshError::InvalidDimension(grid.dim));
    }
    let mesh = build_quad_mesh_from_grid(grid);
    let element = build_reference_element(Primitive::Quad, order, QuadratureKind::GaussLobattoCollocation)?;
    let dofmap = DofMap::discontinuous(&mesh, element.ndofs);
    let (ncx, ncy) = (mesh.cells_per_axis[0], mesh.cells_per_axis[1]);
    let (hx, hy) = (grid.h[0], grid.h[1]);
    let nd = element.ndofs;

    let mut mass_diag = vec![0.0; dofmap.n_dofs];
    let mut dof_coords = vec![[0.0, 0.0]; dofmap.n_dofs];
    for cy in 0..ncy {
        for cx in 0..ncx {
            let c = cy * ncx + cx;
            let dofs = dofmap.cell_dofs(c);
            for k in 0..nd {
                mass_diag[dofs[k]] = element.quad_weights[k] * hx * hy;
                let r = element.nodes[k];
                dof_coords[dofs[k]] = [
                    grid.mins[0] + (cx as f64 + r[0]) * hx,
                    grid.mins[1] + (cy as f64 + r[1]) * hy,
                ];
            }
        }
    }

    // volume kernel: w_q detJ grad(phi_i)(q) . u, with the affine jacobian
    // folded in; identically zero for the piecewise-constant space
    let mut vol_op = vec![0.0; nd * nd];
    if order > 0 {
        for q in 0..nd {
            let w = element.quad_weights[q] * hx * hy;
            for i in 0..nd {
                let g = element.grad_at_quad[q * nd + i];
                vol_op[i * nd + q] = w * (g[0] / hx * velocity[0] + g[1] / hy * velocity[1]);
            }
        }
    }

    // periodic facet list straight from the grid layout
    let cell_id = |cx: usize, cy: usize| cy * ncx + cx;
    let left = element.facet_local_nodes(Side::Left);
    let right = element.facet_local_nodes(Side::Right);
    let bottom = element.facet_local_nodes(Side::Bottom);
    let top = element.facet_local_nodes(Side::Top);
    let mut facets = Vec::with_capacity(2 * ncx * ncy);
    for cy in 0..ncy {
        for ix in 0..ncx {
            let owner = cell_id((ix + ncx - 1) % ncx, cy);
            let neighbor = cell_id(ix, cy);
            facets.push(PeriodicFacet {
                owner_dofs: right.iter().map(|l| dofmap.cell_dofs(owner)[*l]).collect(),
                neighbor_dofs: left.iter().map(|l| dofmap.cell_dofs(neighbor)[*l]).collect(),
                un: velocity[0],
                weights: element.node_weights_1d.iter().map(|w| w * hy).collect(),
            });
        }
    }
    for iy in 0..ncy {
        for cx in 0..ncx {
            let owner = cell_id(cx, (iy + ncy - 1) % ncy);
            let neighbor = cell_id(cx, iy);
            facets.push(PeriodicFacet {
                owner_dofs: top.iter().map(|l| dofmap.cell_dofs(owner)[*l]).collect(),
                neighbor_dofs: bottom.iter().map(|l| dofmap.cell_dofs(neighbor)[*l]).collect(),
                un: velocity[1],
                weights: element.node_weights_1d.iter().map(|w| w * hx).collect(),
            });
        }
    }

    let n = dofmap.n_dofs;
    Ok(DgSystem {
        mesh,
        element,
        dofmap,
        velocity,
        mass_diag,
        state: vec![0.0; n],
        dof_coords,
        facets,
        c_speed: velocity[0].abs() + velocity[1].abs(),
        vol_op,
        hx,
        hy,
    })
}

impl DgSystem {
    pub fn n_dofs(&self) -> usize {
        self.dofmap.n_dofs
    }

    /// Nodal interpolation of an initial profile; for the order-zero space
    /// this samples cell centers.
    pub fn project_initial_condition<G: Fn([f64; 2]) -> f64>(&mut self, f: G) {
        for i in 0..self.state.len() {
            self.state[i] = f(self.dof_coords[i]);
        }
    }

    /// Integral of the discrete field over the domain.
    pub fn total_mass(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass_diag).map(|(v, m)| v * m).sum()
    }

    /// Largest stable explicit step for the three-stage integrator, scaled
    /// by a safety factor. The measured blow-up boundary of the collocated
    /// operator sits near dt (|ux|+|uy|) / h = 1.65 / (p+1)^2 for p >= 2 and
    /// higher at p <= 1; the constants below stay ~25% under it everywhere.
    pub fn max_stable_dt(&self, safety: f64) -> f64 {
        let h = self.hx.min(self.hy);
        let p1 = (self.element.order + 1) as f64;
        let s = (1.4 / (p1 * p1)).min(0.45);
        safety * s * h / self.c_speed
    }

    /// Semi-discrete right-hand side: du_i = (volume_i - facet_i) / M_i.
    pub fn rhs(&self, u: &[f64], du: &mut [f64]) {
        let nd = self.element.ndofs;
        if self.element.order == 0 {
            du.fill(0.0);
        } else {
            for c in 0..self.mesh.n_cells() {
                let dofs = self.dofmap.cell_dofs(c);
                for i in 0..nd {
                    let mut acc = 0.0;
                    for q in 0..nd {
                        acc += self.vol_op[i * nd + q] * u[dofs[q]];
                    }
                    du[dofs[i]] = acc;
                }
            }
        }
        for f in &self.facets {
            for k in 0..f.owner_dofs.len() {
                let flux = lax_friedrichs_flux(f.un, self.c_speed, u[f.owner_dofs[k]], u[f.neighbor_dofs[k]]);
                let wf = f.weights[k] * flux;
                du[f.owner_dofs[k]] -= wf;
                du[f.neighbor_dofs[k]] += wf;
            }
        }
        for i in 0..u.len() {
            du[i] /= self.mass_diag[i];
        }
    }

    pub fn allocated_bytes(&self) -> usize {
        let f = std::mem::size_of::<f64>();
        let u = std::mem::size_of::<usize>();
        let facet_bytes: usize = self
            .facets
            .iter()
            .map(|fc| (fc.owner_dofs.len() + fc.neighbor_dofs.len()) * u + fc.weights.len() * f + f)
            .sum();
        (self.state.len() + self.mass_diag.len() + self.vol_op.len()) * f
            + self.dof_coords.len() * 2 * f
            + facet_bytes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_cartesian_grid;
    use crate::time_integrator::integrate_ssprk3;

    fn grid(n: usize) -> CartesianGrid {
        build_cartesian_grid(2, &[[0.0, 5.0], [0.0, 5.0]], 5.0 / n as f64).unwrap()
    }

    #[test]
    fn mass_diagonal_tiles_the_domain() {
        for p in [0, 1, 3] {
            let sys = build_dg_system(&grid(4), p, [1.0, 1.0]).unwrap();
            let total: f64 = sys.mass_diag.iter().sum();
            assert!((total - 25.0).abs() < 1e-12, "p={p}: {total}");
            assert!(sys.mass_diag.iter().all(|m| *m > 0.0));
        }
    }

    #[test]
    fn constant_fields_are_stationary() {
        for p in [0, 1, 2, 3] {
            let sys = build_dg_system(&grid(3), p, [1.0, 1.0]).unwrap();
            let u = vec![0.7; sys.n_dofs()];
            let mut du = vec![1.0; u.len()];
            sys.rhs(&u, &mut du);
            let worst = du.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(worst < 1e-13, "p={p}: residual {worst}");
        }
    }

    #[test]
    fn order_zero_flux_balance_by_hand() {
        // 2x2 cells on [0,2]^2, u = (1,0); C = 1 makes x-facets pure upwind
        // and y-facets purely dissipative
        let g = build_cartesian_grid(2, &[[0.0, 2.0], [0.0, 2.0]], 1.0).unwrap();
        let sys = build_dg_system(&g, 0, [1.0, 0.0]).unwrap();
        let u = [1.0, 0.0, 0.0, 0.0];
        let mut du = [0.0; 4];
        sys.rhs(&u, &mut du);
        assert!((du[0] + 2.0).abs() < 1e-14);
        assert!((du[1] - 1.0).abs() < 1e-14);
        assert!((du[2] - 1.0).abs() < 1e-14);
        assert!(du[3].abs() < 1e-14);
    }

    #[test]
    fn right_hand_side_is_conservative() {
        for p in [0, 1, 3] {
            let sys = build_dg_system(&grid(6), p, [1.0, 1.0]).unwrap();
            let mut seed = 88172645463325252_u64;
            let mut rand = || {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                (seed >> 11) as f64 / (1u64 << 53) as f64
            };
            let u: Vec<f64> = (0..sys.n_dofs()).map(|_| rand()).collect();
            let mut du = vec![0.0; u.len()];
            sys.rhs(&u, &mut du);
            let drift = sys.total_mass(&du);
            assert!(drift.abs() < 1e-12, "p={p}: mass rate {drift}");
        }
    }

    #[test]
    fn projection_hits_nodes_and_cell_centers() {
        let mut sys = build_dg_system(&grid(5), 0, [1.0, 1.0]).unwrap();
        sys.project_initial_condition(|p| p[0]);
        assert!((sys.state[0] - 0.5).abs() < 1e-14);

        let mut sys = build_dg_system(&grid(5), 2, [1.0, 1.0]).unwrap();
        sys.project_initial_condition(|p| 3.0 * p[0] + p[1]);
        for i in 0..sys.n_dofs() {
            let c = sys.dof_coords[i];
            assert!((sys.state[i] - (3.0 * c[0] + c[1])).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_step_formula() {
        let sys = build_dg_system(&grid(16), 3, [1.0, 1.0]).unwrap();
        let expect = 0.9 * (1.4 / 16.0) * (5.0 / 16.0) / 2.0;
        assert!((sys.max_stable_dt(0.9) - expect).abs() < 1e-15);
        let fv = build_dg_system(&grid(16), 0, [1.0, 1.0]).unwrap();
        let expect_fv = 0.9 * 0.45 * (5.0 / 16.0) / 2.0;
        assert!((fv.max_stable_dt(0.9) - expect_fv).abs() < 1e-15);
    }

    #[test]
    fn mass_is_conserved_through_time_integration() {
        let mut sys = build_dg_system(&grid(8), 1, [1.0, 1.0]).unwrap();
        sys.project_initial_condition(|p| if (2.0..3.0).contains(&p[0]) && (2.0..3.0).contains(&p[1]) { 1.0 } else { 0.0 });
        let m0 = sys.total_mass(&sys.state);
        let dt = sys.max_stable_dt(0.9);
        let mut y = sys.state.clone();
        let sys_ref = &sys;
        integrate_ssprk3(|u, _, du| sys_ref.rhs(u, du), &mut y, 0.0, 20.0 * dt, 20).unwrap();
        let m1 = sys.total_mass(&y);
        assert!((m1 - m0).abs() < 1e-12, "mass drifted {m0} -> {m1}");
    }

    #[test]
    fn refinement_shrinks_the_transport_error() {
        let run = |n: usize| -> f64 {
            let mut sys = build_dg_system(&grid(n), 1, [1.0, 1.0]).unwrap();
            let wave = |p: [f64; 2]| {
                let s = 2.0 * std::f64::consts::PI / 5.0;
                (s * p[0]).sin() * (s * p[1]).sin()
            };
            sys.project_initial_condition(wave);
            let t_end = 1.0;
            let dt = sys.max_stable_dt(0.5);
            let n_steps = (t_end / dt).ceil() as usize;
            let mut y = sys.state.clone();
            let sys_ref = &sys;
            integrate_ssprk3(|u, _, du| sys_ref.rhs(u, du), &mut y, 0.0, t_end, n_steps).unwrap();
            // exact solution is the initial wave shifted by (t, t)
            let mut err2 = 0.0;
            for i in 0..y.len() {
                let c = sys.dof_coords[i];
                let e = y[i] - wave([c[0] - t_end, c[1] - t_end]);
                err2 += sys.mass_diag[i] * e * e;
            }
            err2.sqrt()
        };
        let coarse = run(8);
        let fine = run(16);
        assert!(
            fine < coarse / 2.5,
            "expected better than factor 2.5 from refinement: {coarse} -> {fine}"
        );
    }
}
