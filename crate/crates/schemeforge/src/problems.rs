//! The built-in benchmark families and their canonical configurations.
//!
//! A parsed problem description is mapped to a family structurally: one
//! governed scalar field whose equation carries second-order spatial terms
//! is a phase-field problem (split by dimension), one carrying only
//! first-order spatial terms is the periodic advection problem. Everything
//! else is outside what the bundled solvers can run.

use crate::mesh::{build_cartesian_grid, CartesianGrid, MeshError};
use crate::problem_spec::ProblemSpec;
use crate::solver_cg::{build_cg_system, CgSystem};
use crate::solver_dg::{build_dg_system, DgSystem};
use crate::solver_fd::{AllenCahnParams, FdSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemFamily {
    AllenCahn1d,
    AllenCahn2d,
    Advection2d,
}

impl ProblemFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemFamily::AllenCahn1d => "allen_cahn_1d",
            ProblemFamily::AllenCahn2d => "allen_cahn_2d",
            ProblemFamily::Advection2d => "advection_2d",
        }
    }
}

impl std::fmt::Display for ProblemFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structural match of a problem description against the built-in families.
pub fn detect_family(spec: &ProblemSpec) -> Option<ProblemFamily> {
    let governed: Vec<_> = spec.governed_fields().collect();
    if governed.len() != 1 {
        return None;
    }
    let eq = spec.equation_for(&governed[0].name)?;
    let spatial = spec.spatial_axes();
    let is_spatial = |a: &String| spatial.contains(&a.as_str());
    let has_second =
        eq.terms.iter().any(|t| t.order == 2 && t.axes.iter().all(is_spatial));
    let spatial_orders: Vec<u8> = eq
        .terms
        .iter()
        .filter(|t| t.axes.iter().any(is_spatial))
        .map(|t| t.order)
        .collect();
    if has_second {
        match spec.domain.dim {
            1 => Some(ProblemFamily::AllenCahn1d),
            2 => Some(ProblemFamily::AllenCahn2d),
            _ => None,
        }
    } else if !spatial_orders.is_empty() && spatial_orders.iter().all(|o| *o == 1) && spec.domain.dim == 2 {
        Some(ProblemFamily::Advection2d)
    } else {
        None
    }
}

/// Traveling-front configuration: a flat interface on [0, 100] pushed by a
/// constant driving force, ending at x = 30 after t = 100.
#[derive(Debug, Clone, Copy)]
pub struct AllenCahn1dSetup {
    pub params: AllenCahnParams,
    pub extent: [f64; 2],
    pub h: f64,
    pub x0: f64,
    pub t_end: f64,
    pub dt_max: f64,
}

impl Default for AllenCahn1dSetup {
    fn default() -> Self {
        AllenCahn1dSetup {
            params: AllenCahnParams { gamma: 1.0, xi: 1.5, mobility: 1.0, mu0: 0.1 },
            extent: [0.0, 100.0],
            h: 1.0,
            x0: 20.0,
            t_end: 100.0,
            dt_max: 0.1,
        }
    }
}

impl AllenCahn1dSetup {
    pub fn grid(&self) -> Result<CartesianGrid, MeshError> {
        build_cartesian_grid(1, &[self.extent], self.h)
    }

    pub fn initial_profile(&self, x: f64) -> f64 {
        crate::metrics::analytic_profile(x, self.x0, self.params.xi)
    }

    pub fn build_fd(&self) -> Result<FdSystem, MeshError> {
        let grid = self.grid()?;
        let mut sys = FdSystem::new(grid, self.params);
        for i in 0..sys.n_dofs() {
            sys.state[i] = self.initial_profile(sys.grid.coords[0][i]);
        }
        Ok(sys)
    }

    pub fn build_cg(&self) -> Result<CgSystem, MeshError> {
        let grid = self.grid()?;
        let mut sys = build_cg_system(&grid, self.params)?;
        for i in 0..sys.n_dofs() {
            sys.state[i] = self.initial_profile(sys.mesh.vertices[i][0]);
        }
        Ok(sys)
    }
}

/// Shrinking-grain configuration: a quarter disc anchored at the corner of
/// [0, 64]^2, shrinking under curvature with no driving force.
#[derive(Debug, Clone, Copy)]
pub struct AllenCahn2dSetup {
    pub params: AllenCahnParams,
    pub extent: [f64; 2],
    pub h: f64,
    pub r0: f64,
    pub t_end: f64,
    pub dt_max: f64,
}

impl Default for AllenCahn2dSetup {
    fn default() -> Self {
        AllenCahn2dSetup {
            params: AllenCahnParams { gamma: 50.0, xi: 4.0, mobility: 1.0, mu0: 0.0 },
            extent: [0.0, 64.0],
            h: 1.0,
            r0: 32.0,
            t_end: 100.0,
            dt_max: 0.05,
        }
    }
}

impl AllenCahn2dSetup {
    pub fn grid(&self) -> Result<CartesianGrid, MeshError> {
        build_cartesian_grid(2, &[self.extent, self.extent], self.h)
    }

    pub fn initial_profile(&self, p: [f64; 2]) -> f64 {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        0.5 * (1.0 - ((rho - self.r0) / self.params.xi).tanh())
    }

    pub fn build_fd(&self) -> Result<FdSystem, MeshError> {
        let grid = self.grid()?;
        let mut sys = FdSystem::new(grid, self.params);
        for i in 0..sys.n_dofs() {
            sys.state[i] = self.initial_profile(sys.grid.vertex_coords(i));
        }
        Ok(sys)
    }

    pub fn build_cg(&self) -> Result<CgSystem, MeshError> {
        let grid = self.grid()?;
        let mut sys = build_cg_system(&grid, self.params)?;
        for i in 0..sys.n_dofs() {
            sys.state[i] = self.initial_profile(sys.mesh.vertices[i]);
        }
        Ok(sys)
    }
}

/// Periodic transport of a square pulse across [0, 5]^2 at velocity (1, 1);
/// after t = 5 the exact solution is back where it started.
#[derive(Debug, Clone, Copy)]
pub struct Advection2dSetup {
    pub velocity: [f64; 2],
    pub extent: [f64; 2],
    pub order: usize,
    pub cells_per_axis: usize,
    pub t_end: f64,
    pub safety: f64,
}

/// Cell count that keeps the total dof budget fixed at 192 per axis across
/// orders: 192 cells at order 0, 96 at order 1, 48 at order 3.
pub fn advection_cells_for_order(order: usize) -> usize {
    (192 / (order + 1)).max(1)
}

impl Default for Advection2dSetup {
    fn default() -> Self {
        Advection2dSetup {
            velocity: [1.0, 1.0],
            extent: [0.0, 5.0],
            order: 3,
            cells_per_axis: advection_cells_for_order(3),
            t_end: 5.0,
            safety: 0.9,
        }
    }
}

/// Unit pulse on [2,3]^2, the transported initial condition.
pub fn square_pulse(p: [f64; 2]) -> f64 {
    if (2.0..3.0).contains(&p[0]) && (2.0..3.0).contains(&p[1]) {
        1.0
    } else {
        0.0
    }
}

impl Advection2dSetup {
    pub fn with_order(order: usize) -> Self {
        Advection2dSetup {
            order,
            cells_per_axis: advection_cells_for_order(order),
            ..Default::default()
        }
    }

    pub fn grid(&self) -> Result<CartesianGrid, MeshError> {
        let h = (self.extent[1] - self.extent[0]) / self.cells_per_axis as f64;
        build_cartesian_grid(2, &[self.extent, self.extent], h)
    }

    pub fn build(&self) -> Result<DgSystem, MeshError> {
        let grid = self.grid()?;
        let mut sys = build_dg_system(&grid, self.order, self.velocity)?;
        sys.project_initial_condition(square_pulse);
        Ok(sys)
    }
}
