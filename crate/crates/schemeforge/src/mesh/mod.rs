//! Structured grids and the quadrilateral mesh layer on top of them.
//!
//! The finite-difference path works directly on [`CartesianGrid`]. The
//! Galerkin paths (continuous and discontinuous) consume a [`QuadMesh`],
//! which stores explicit vertex coordinates, flat cell connectivity, and a
//! facet list with owner/neighbor orientation. Meshes built from a grid are
//! affine, but the assembly code only ever sees the generic interface, so an
//! irregular mesh source could be dropped in without touching the solvers.

pub mod reference;

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum MeshError {
    /// The extent along `axis` is not an integer multiple of the spacing.
    NonDivisibleExtent { axis: usize, extent: f64, h: f64 },
    InvalidDimension(usize),
    InvalidExtent { axis: usize },
    UnsupportedOrder(usize),
}

impl fmt::Display for MeshError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshError::NonDivisibleExtent { axis, extent, h } => write!(
                f,
                "axis {axis}: extent {extent} is not an integer multiple of spacing {h}"
            ),
            MeshError::InvalidDimension(d) => write!(f, "unsupported mesh dimension {d}"),
            MeshError::InvalidExtent { axis } => write!(f, "axis {axis}: extent must be finite with max > min"),
            MeshError::UnsupportedOrder(p) => write!(f, "unsupported element order {p}"),
        }
    }
}

impl std::error::Error for MeshError {}

/// Tensor-product vertex grid with uniform spacing per axis. Vertices are
/// numbered x-fastest: in 2D, vertex (ix, iy) has index iy*nx + ix.
#[derive(Debug, Clone)]
pub struct CartesianGrid {
    pub dim: usize,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub h: Vec<f64>,
    /// Vertex count per axis (cells per axis + 1).
    pub verts: Vec<usize>,
    /// Vertex coordinates per axis.
    pub coords: Vec<Vec<f64>>,
}

impl CartesianGrid {
    pub fn vertex_count(&self) -> usize {
        self.verts.iter().product()
    }

    pub fn cells_per_axis(&self, axis: usize) -> usize {
        self.verts[axis] - 1
    }

    pub fn index2(&self, ix: usize, iy: usize) -> usize {
        iy * self.verts[0] + ix
    }

    /// Coordinates of a vertex by flat index; the y entry is 0 in 1D.
    pub fn vertex_coords(&self, idx: usize) -> [f64; 2] {
        match self.dim {
            1 => [self.coords[0][idx], 0.0],
            _ => {
                let nx = self.verts[0];
                [self.coords[0][idx % nx], self.coords[1][idx / nx]]
            }
        }
    }

    /// Trapezoid-rule vertex weights: h^dim in the interior, halved per
    /// boundary face touched. Sums to the domain measure, and coincides with
    /// the lumped Q1 mass of the matching quad mesh.
    pub fn mass_weights(&self) -> Vec<f64> {
        let axis_w = |n: usize, h: f64| -> Vec<f64> {
            (0..n)
                .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
                .collect()
        };
        match self.dim {
            1 => axis_w(self.verts[0], self.h[0]),
            _ => {
                let wx = axis_w(self.verts[0], self.h[0]);
                let wy = axis_w(self.verts[1], self.h[1]);
                let mut out = Vec::with_capacity(wx.len() * wy.len());
                for y in &wy {
                    for x in &wx {
                        out.push(x * y);
                    }
                }
                out
            }
        }
    }
}

pub fn build_cartesian_grid(dim: usize, extents: &[[f64; 2]], h: f64) -> Result<CartesianGrid, MeshError> {
    if dim == 0 || dim > 2 {
        return Err(MeshError::InvalidDimension(dim));
    }
    assert_eq!(extents.len(), dim, "one extent pair per axis");
    let mut mins = Vec::new();
    let mut maxs = Vec::new();
    let mut verts = Vec::new();
    let mut coords = Vec::new();
    for (axis, e) in extents.iter().enumerate() {
        let len = e[1] - e[0];
        if !len.is_finite() || len <= 0.0 {
            return Err(MeshError::InvalidExtent { axis });
        }
        let n = (len / h).round();
        if n < 1.0 || (n * h - len).abs() > 1e-9 * len.max(1.0) {
            return Err(MeshError::NonDivisibleExtent { axis, extent: len, h });
        }
        let n = n as usize;
        mins.push(e[0]);
        maxs.push(e[1]);
        verts.push(n + 1);
        coords.push((0..=n).map(|i| e[0] + i as f64 * h).collect());
    }
    Ok(CartesianGrid { dim, mins, maxs, h: vec![h; dim], verts, coords })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FacetKind {
    Interior { neighbor: usize },
    Boundary,
}

/// One mesh facet. For interior facets the normal points from owner into
/// neighbor; for boundary facets it points out of the domain.
#[derive(Debug, Clone, Copy)]
pub struct Facet {
    pub owner: usize,
    pub kind: FacetKind,
    /// Side of the owner cell this facet lies on.
    pub owner_side: Side,
    pub normal: [f64; 2],
    /// Length in 2D, 1 for the point facets of a 1D mesh.
    pub measure: f64,
}

/// Quadrilateral (or interval) mesh with explicit connectivity.
///
/// Cell vertices are stored in tensor order, matching local node layout of
/// the reference elements: in 2D [ (0,0), (1,0), (0,1), (1,1) ].
#[derive(Debug, Clone)]
pub struct QuadMesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    verts_per_cell: usize,
    cells: Vec<usize>,
    pub facets: Vec<Facet>,
    /// Cell counts per axis when the mesh came from a structured grid.
    pub cells_per_axis: Vec<usize>,
}

impl QuadMesh {
    pub fn n_cells(&self) -> usize {
        self.cells.len() / self.verts_per_cell
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * self.verts_per_cell..(c + 1) * self.verts_per_cell]
    }

    pub fn cell_vertex_coords(&self, c: usize) -> Vec<[f64; 2]> {
        self.cell(c).iter().map(|v| self.vertices[*v]).collect()
    }

    /// 1D jacobian: cell length.
    pub fn jacobian_1d(&self, c: usize) -> f64 {
        let vs = self.cell(c);
        self.vertices[vs[1]][0] - self.vertices[vs[0]][0]
    }

    /// Bilinear geometry jacobian at a reference point: (J row-major, det J).
    pub fn jacobian_2d(&self, c: usize, r: [f64; 2]) -> ([f64; 4], f64) {
        let vs = self.cell(c);
        let p = [self.vertices[vs[0]], self.vertices[vs[1]], self.vertices[vs[2]], self.vertices[vs[3]]];
        let [x, y] = r;
        // d/dx and d/dy of the four bilinear shape functions in tensor order
        let dnx = [-(1.0 - y), 1.0 - y, -y, y];
        let dny = [-(1.0 - x), -x, 1.0 - x, x];
        let mut j = [0.0; 4];
        for k in 0..4 {
            j[0] += p[k][0] * dnx[k];
            j[1] += p[k][0] * dny[k];
            j[2] += p[k][1] * dnx[k];
            j[3] += p[k][1] * dny[k];
        }
        let det = j[0] * j[3] - j[1] * j[2];
        (j, det)
    }
}

/// Maps a reference gradient through J^{-T} to a physical gradient.
pub fn physical_gradient(j: &[f64; 4], det: f64, g: [f64; 2]) -> [f64; 2] {
    [(j[3] * g[0] - j[2] * g[1]) / det, (-j[1] * g[0] + j[0] * g[1]) / det]
}

pub fn build_quad_mesh_from_grid(grid: &CartesianGrid) -> QuadMesh {
    match grid.dim {
        1 => {
            let n = grid.cells_per_axis(0);
            let vertices: Vec<[f64; 2]> = grid.coords[0].iter().map(|x| [*x, 0.0]).collect();
            let mut cells = Vec::with_capacity(2 * n);
            for c in 0..n {
                cells.push(c);
                cells.push(c + 1);
            }
            let mut facets = Vec::with_capacity(n + 1);
            facets.push(Facet {
                owner: 0,
                kind: FacetKind::Boundary,
                owner_side: Side::Left,
                normal: [-1.0, 0.0],
                measure: 1.0,
            });
            for v in 1..n {
                facets.push(Facet {
                    owner: v - 1,
                    kind: FacetKind::Interior { neighbor: v },
                    owner_side: Side::Right,
                    normal: [1.0, 0.0],
                    measure: 1.0,
                });
            }
            facets.push(Facet {
                owner: n - 1,
                kind: FacetKind::Boundary,
                owner_side: Side::Right,
                normal: [1.0, 0.0],
                measure: 1.0,
            });
            QuadMesh { dim: 1, vertices, verts_per_cell: 2, cells, facets, cells_per_axis: vec![n] }
        }
        2 => {
            let (ncx, ncy) = (grid.cells_per_axis(0), grid.cells_per_axis(1));
            let nx = grid.verts[0];
            let mut vertices = Vec::with_capacity(grid.vertex_count());
            for y in &grid.coords[1] {
                for x in &grid.coords[0] {
                    vertices.push([*x, *y]);
                }
            }
            let mut cells = Vec::with_capacity(4 * ncx * ncy);
            for cy in 0..ncy {
                for cx in 0..ncx {
                    let v = cy * nx + cx;
                    cells.extend_from_slice(&[v, v + 1, v + nx, v + nx + 1]);
                }
            }
            let cell_id = |cx: usize, cy: usize| cy * ncx + cx;
            let (hx, hy) = (grid.h[0], grid.h[1]);
            let mut facets = Vec::with_capacity(ncy * (ncx + 1) + ncx * (ncy + 1));
            for cy in 0..ncy {
                for ix in 0..=ncx {
                    facets.push(if ix == 0 {
                        Facet {
                            owner: cell_id(0, cy),
                            kind: FacetKind::Boundary,
                            owner_side: Side::Left,
                            normal: [-1.0, 0.0],
                            measure: hy,
                        }
                    } else if ix == ncx {
                        Facet {
                            owner: cell_id(ncx - 1, cy),
                            kind: FacetKind::Boundary,
                            owner_side: Side::Right,
                            normal: [1.0, 0.0],
                            measure: hy,
                        }
                    } else {
                        Facet {
                            owner: cell_id(ix - 1, cy),
                            kind: FacetKind::Interior { neighbor: cell_id(ix, cy) },
                            owner_side: Side::Right,
                            normal: [1.0, 0.0],
                            measure: hy,
                        }
                    });
                }
            }
            for iy in 0..=ncy {
                for cx in 0..ncx {
                    facets.push(if iy == 0 {
                        Facet {
                            owner: cell_id(cx, 0),
                            kind: FacetKind::Boundary,
                            owner_side: Side::Bottom,
                            normal: [0.0, -1.0],
                            measure: hx,
                        }
                    } else if iy == ncy {
                        Facet {
                            owner: cell_id(cx, ncy - 1),
                            kind: FacetKind::Boundary,
                            owner_side: Side::Top,
                            normal: [0.0, 1.0],
                            measure: hx,
                        }
                    } else {
                        Facet {
                            owner: cell_id(cx, iy - 1),
                            kind: FacetKind::Interior { neighbor: cell_id(cx, iy) },
                            owner_side: Side::Top,
                            normal: [0.0, 1.0],
                            measure: hx,
                        }
                    });
                }
            }
            QuadMesh { dim: 2, vertices, verts_per_cell: 4, cells, facets, cells_per_axis: vec![ncx, ncy] }
        }
        d => panic!("mesh dimension {d} not supported"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofMode {
    /// One dof per mesh vertex, shared across cells.
    ContinuousQ1,
    /// A private block of dofs per cell.
    Discontinuous,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub mode: DofMode,
    pub n_dofs: usize,
    per_cell: usize,
    dofs: Vec<usize>,
}

impl DofMap {
    pub fn continuous_q1(mesh: &QuadMesh) -> Self {
        let per_cell = mesh.verts_per_cell;
        let mut dofs = Vec::with_capacity(per_cell * mesh.n_cells());
        for c in 0..mesh.n_cells() {
            dofs.extend_from_slice(mesh.cell(c));
        }
        DofMap { mode: DofMode::ContinuousQ1, n_dofs: mesh.vertices.len(), per_cell, dofs }
    }

    pub fn discontinuous(mesh: &QuadMesh, ndofs_per_cell: usize) -> Self {
        let n_cells = mesh.n_cells();
        let dofs = (0..n_cells * ndofs_per_cell).collect();
        DofMap {
            mode: DofMode::Discontinuous,
            n_dofs: n_cells * ndofs_per_cell,
            per_cell: ndofs_per_cell,
            dofs,
        }
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.dofs[c * self.per_cell..(c + 1) * self.per_cell]
    }
}
