//! Matrix-free finite differences for the reaction-diffusion problems.
//!
//! The Laplacian is the standard second-order star stencil on a uniform
//! grid with mirror-ghost (homogeneous Neumann) boundaries: the ghost value
//! u[-1] equals u[1], which folds into a doubled off-diagonal coefficient on
//! boundary rows. Interior rows are swept with plain index arithmetic in
//! tight loops so the compiler can vectorize them; boundary rows live in
//! separate loops and never branch inside the hot sweep.

use crate::mesh::CartesianGrid;

/// Parameters of the scalar phase-field model
///     du/dt = mobility * (lap(u) - w'(u))
/// where w'(u) bundles the double-well derivative and the driving-force term.
#[derive(Debug, Clone, Copy)]
pub struct AllenCahnParams {
    /// Interface energy coefficient.
    pub gamma: f64,
    /// Interface width.
    pub xi: f64,
    pub mobility: f64,
    /// Constant driving force; zero for curvature-driven shrinkage.
    pub mu0: f64,
}

/// Derivative of the double-well potential minus the driving-force tilt:
///     (2/xi^2) * 2 u (1-u)(1-2u) - (mu0 / (3 gamma xi)) * 6 u (1-u)
/// Positive mu0 lowers the potential of the u = 1 phase, so that phase grows.
#[inline]
pub fn potential_derivative(u: f64, p: &AllenCahnParams) -> f64 {
    let well = (2.0 / (p.xi * p.xi)) * 2.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
    let tilt = (p.mu0 / (3.0 * p.gamma * p.xi)) * 6.0 * u * (1.0 - u);
    well - tilt
}

/// Finite-difference discretization bound to one grid. Owns its solution
/// vector; the right-hand-side routines are allocation-free.
#[derive(Debug, Clone)]
pub struct FdSystem {
    pub grid: CartesianGrid,
    pub params: AllenCahnParams,
    pub state: Vec<f64>,
}

impl FdSystem {
    pub fn new(grid: CartesianGrid, params: AllenCahnParams) -> Self {
        let n = grid.vertex_count();
        FdSystem { grid, params, state: vec![0.0; n] }
    }

    pub fn n_dofs(&self) -> usize {
        self.grid.vertex_count()
    }

    /// Five-point (or three-point) Laplacian with mirror boundaries.
    pub fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        match self.grid.dim {
            1 => {
                let n = self.grid.verts[0];
                let inv_h2 = 1.0 / (self.grid.h[0] * self.grid.h[0]);
                for i in 1..n - 1 {
                    out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2;
                }
                out[0] = 2.0 * (u[1] - u[0]) * inv_h2;
                out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * inv_h2;
            }
            _ => {
                let nx = self.grid.verts[0];
                let ny = self.grid.verts[1];
                let inv_h2 = 1.0 / (self.grid.h[0] * self.grid.h[0]);
                for iy in 1..ny - 1 {
                    let row = iy * nx;
                    for ix in 1..nx - 1 {
                        let i = row + ix;
                        out[i] = (u[i - 1] + u[i + 1] + u[i - nx] + u[i + nx] - 4.0 * u[i]) * inv_h2;
                    }
                }
                // horizontal edges (mirror across y)
                let top = (ny - 1) * nx;
                for ix in 1..nx - 1 {
                    out[ix] = (u[ix - 1] + u[ix + 1] + 2.0 * u[ix + nx] - 4.0 * u[ix]) * inv_h2;
                    let i = top + ix;
                    out[i] = (u[i - 1] + u[i + 1] + 2.0 * u[i - nx] - 4.0 * u[i]) * inv_h2;
                }
                // vertical edges (mirror across x)
                for iy in 1..ny - 1 {
                    let i = iy * nx;
                    out[i] = (2.0 * u[i + 1] + u[i - nx] + u[i + nx] - 4.0 * u[i]) * inv_h2;
                    let j = i + nx - 1;
                    out[j] = (2.0 * u[j - 1] + u[j - nx] + u[j + nx] - 4.0 * u[j]) * inv_h2;
                }
                // corners (mirror across both)
                let c = nx - 1;
                out[0] = (2.0 * u[1] + 2.0 * u[nx] - 4.0 * u[0]) * inv_h2;
                out[c] = (2.0 * u[c - 1] + 2.0 * u[c + nx] - 4.0 * u[c]) * inv_h2;
                out[top] = (2.0 * u[top + 1] + 2.0 * u[top - nx] - 4.0 * u[top]) * inv_h2;
                let tc = top + c;
                out[tc] = (2.0 * u[tc - 1] + 2.0 * u[tc - nx] - 4.0 * u[tc]) * inv_h2;
            }
        }
    }

    /// Full right-hand side: mobility * (lap(u) - w'(u)).
    pub fn rhs(&self, u: &[f64], du: &mut [f64]) {
        self.laplacian(u, du);
        let p = self.params;
        for i in 0..u.len() {
            du[i] = p.mobility * (du[i] - potential_derivative(u[i], &p));
        }
    }

    /// Bytes held in problem-owned arrays: the solution vector plus the
    /// per-axis coordinate tables.
    pub fn allocated_bytes(&self) -> usize {
        let coords: usize = self.grid.coords.iter().map(|c| c.len()).sum();
        (self.state.len() + coords) * std::mem::size_of::<f64>()
    }
}
