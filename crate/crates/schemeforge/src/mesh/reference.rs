//! Reference elements on [0,1] and [0,1]^2: tensor-product Lagrange bases on
//! Gauss-Lobatto nodes with either collocated Gauss-Lobatto quadrature (the
//! default, which makes mass matrices diagonal and basis evaluation a
//! Kronecker delta) or Gauss-Legendre quadrature for cross-checks.

use super::{MeshError, Side};

/// Highest supported polynomial degree. The node computation is accurate
/// well beyond this; the cap keeps conditioning comfortably boring.
pub const MAX_ORDER: usize = 8;

/// Legendre P_n(x) and its derivative via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = if x.abs() < 1.0 - 1e-14 {
        (n as f64) * (p_prev - x * p) / (1.0 - x * x)
    } else {
        // P'_n(+-1) = (+-1)^(n-1) n(n+1)/2
        let sign = if x > 0.0 { 1.0 } else { (-1.0_f64).powi(n as i32 - 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    };
    (p, dp)
}

/// Gauss-Lobatto nodes and weights on [0,1], ascending. Needs n >= 2 points.
pub fn gauss_lobatto_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "a Lobatto rule needs at least the two endpoints");
    let m = n - 1;
    let mut xs = vec![0.0; n];
    xs[0] = -1.0;
    xs[n - 1] = 1.0;
    for k in 1..m {
        // interior nodes are the roots of P'_m; Chebyshev-Lobatto start
        let mut x = -(std::f64::consts::PI * k as f64 / m as f64).cos();
        for _ in 0..50 {
            let (p, dp) = legendre(m, x);
            // P''_m from the Legendre ODE
            let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let step = dp / d2p;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        xs[k] = x;
    }
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let (p, _) = legendre(m, xs[i]);
        ws[i] = 2.0 / ((n * m) as f64 * p * p);
    }
    // map [-1,1] -> [0,1]
    let nodes = xs.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights = ws.iter().map(|w| 0.5 * w).collect();
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on [0,1], ascending.
pub fn gauss_legendre_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for k in 0..n {
        let mut x = -(std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..50 {
            let (p, dp) = legendre(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        xs[k] = x;
        ws[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    let nodes = xs.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let weights = ws.iter().map(|w| 0.5 * w).collect();
    (nodes, weights)
}

/// Barycentric weights 1 / prod_{j != i} (x_i - x_j).
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if j != i {
                w[i] *= nodes[i] - nodes[j];
            }
        }
        w[i] = 1.0 / w[i];
    }
    w
}

/// All 1D Lagrange basis values at x. Exact Kronecker delta when x equals a
/// node bit for bit.
fn lagrange_values(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    if let Some(hit) = nodes.iter().position(|n| *n == x) {
        out.fill(0.0);
        out[hit] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for (i, n) in nodes.iter().enumerate() {
        out[i] = bary[i] / (x - n);
        denom += out[i];
    }
    for v in out.iter_mut() {
        *v /= denom;
    }
}

/// All 1D Lagrange basis derivatives at x.
fn lagrange_derivs(nodes: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    let n = nodes.len();
    if n == 1 {
        out[0] = 0.0;
        return;
    }
    if let Some(q) = nodes.iter().position(|v| *v == x) {
        // differentiation-matrix row at a node
        let mut sum = 0.0;
        for i in 0..n {
            if i != q {
                out[i] = (bary[i] / bary[q]) / (nodes[q] - nodes[i]);
                sum += out[i];
            }
        }
        out[q] = -sum;
        return;
    }
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            if k == i {
                continue;
            }
            let mut prod = 1.0 / (nodes[i] - nodes[k]);
            for j in 0..n {
                if j != i && j != k {
                    prod *= (x - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            acc += prod;
        }
        out[i] = acc;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitive {
    Interval,
    Quad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussLobattoCollocation,
    GaussLegendre,
}

/// Tensor-product Lagrange element with tabulated basis data. Node and
/// quadrature-point ordering is x-fastest: local index i = iy*(p+1) + ix.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub primitive: Primitive,
    pub order: usize,
    pub ndofs: usize,
    pub quadrature: QuadratureKind,
    /// 1D interpolation nodes on [0,1].
    pub nodes_1d: Vec<f64>,
    /// Barycentric coefficients of the 1D basis.
    pub bary_1d: Vec<f64>,
    /// Gauss-Lobatto weights at `nodes_1d`; also the facet quadrature rule.
    pub node_weights_1d: Vec<f64>,
    /// Tensor node coordinates ([x, 0] on the interval).
    pub nodes: Vec<[f64; 2]>,
    pub quad_points: Vec<[f64; 2]>,
    pub quad_weights: Vec<f64>,
    /// Row-major [q * ndofs + i]: basis i at quadrature point q.
    pub basis_at_quad: Vec<f64>,
    /// Row-major [q * ndofs + i]: reference gradient of basis i at point q.
    pub grad_at_quad: Vec<[f64; 2]>,
}

pub fn build_reference_element(
    primitive: Primitive,
    order: usize,
    quadrature: QuadratureKind,
) -> Result<ReferenceElement, MeshError> {
    if order > MAX_ORDER {
        return Err(MeshError::UnsupportedOrder(order));
    }
    let (nodes_1d, node_weights_1d) = if order == 0 {
        (vec![0.5], vec![1.0])
    } else {
        gauss_lobatto_1d(order + 1)
    };
    let bary_1d = if order == 0 { vec![1.0] } else { barycentric_weights(&nodes_1d) };
    let n1 = nodes_1d.len();

    let tensor = |pts: &[f64]| -> Vec<[f64; 2]> {
        match primitive {
            Primitive::Interval => pts.iter().map(|x| [*x, 0.0]).collect(),
            Primitive::Quad => {
                let mut out = Vec::with_capacity(pts.len() * pts.len());
                for y in pts {
                    for x in pts {
                        out.push([*x, *y]);
                    }
                }
                out
            }
        }
    };
    let nodes = tensor(&nodes_1d);
    let ndofs = nodes.len();

    let (q1, w1) = match quadrature {
        QuadratureKind::GaussLobattoCollocation => (nodes_1d.clone(), node_weights_1d.clone()),
        QuadratureKind::GaussLegendre => gauss_legendre_1d(order + 1),
    };
    let quad_points = tensor(&q1);
    let quad_weights: Vec<f64> = match primitive {
        Primitive::Interval => w1.clone(),
        Primitive::Quad => {
            let mut out = Vec::with_capacity(w1.len() * w1.len());
            for wy in &w1 {
                for wx in &w1 {
                    out.push(wx * wy);
                }
            }
            out
        }
    };

    let nq = quad_points.len();
    let mut basis_at_quad = vec![0.0; nq * ndofs];
    let mut grad_at_quad = vec![[0.0, 0.0]; nq * ndofs];
    let mut vx = vec![0.0; n1];
    let mut vy = vec![0.0; n1];
    let mut dx = vec![0.0; n1];
    let mut dy = vec![0.0; n1];
    for (q, pt) in quad_points.iter().enumerate() {
        lagrange_values(&nodes_1d, &bary_1d, pt[0], &mut vx);
        lagrange_derivs(&nodes_1d, &bary_1d, pt[0], &mut dx);
        match primitive {
            Primitive::Interval => {
                for i in 0..ndofs {
                    basis_at_quad[q * ndofs + i] = vx[i];
                    grad_at_quad[q * ndofs + i] = [dx[i], 0.0];
                }
            }
            Primitive::Quad => {
                lagrange_values(&nodes_1d, &bary_1d, pt[1], &mut vy);
                lagrange_derivs(&nodes_1d, &bary_1d, pt[1], &mut dy);
                for iy in 0..n1 {
                    for ix in 0..n1 {
                        let i = iy * n1 + ix;
                        basis_at_quad[q * ndofs + i] = vx[ix] * vy[iy];
                        grad_at_quad[q * ndofs + i] = [dx[ix] * vy[iy], vx[ix] * dy[iy]];
                    }
                }
            }
        }
    }

    Ok(ReferenceElement {
        primitive,
        order,
        ndofs,
        quadrature: quadrature,
        nodes_1d,
        bary_1d,
        node_weights_1d,
        nodes,
        quad_points,
        quad_weights,
        basis_at_quad,
        grad_at_quad,
    })
}

impl ReferenceElement {
    /// Evaluate every basis function at an arbitrary reference point.
    pub fn eval_basis(&self, pt: [f64; 2]) -> Vec<f64> {
        let n1 = self.nodes_1d.len();
        if self.order == 0 {
            return vec![1.0];
        }
        let mut vx = vec![0.0; n1];
        lagrange_values(&self.nodes_1d, &self.bary_1d, pt[0], &mut vx);
        match self.primitive {
            Primitive::Interval => vx,
            Primitive::Quad => {
                let mut vy = vec![0.0; n1];
                lagrange_values(&self.nodes_1d, &self.bary_1d, pt[1], &mut vy);
                let mut out = vec![0.0; self.ndofs];
                for iy in 0..n1 {
                    for ix in 0..n1 {
                        out[iy * n1 + ix] = vx[ix] * vy[iy];
                    }
                }
                out
            }
        }
    }

    /// Local node indices on one side of the element, ascending along the
    /// facet. For order 0 every side sees the single cell value.
    pub fn facet_local_nodes(&self, side: Side) -> Vec<usize> {
        let p = self.order;
        let n1 = p + 1;
        if p == 0 {
            return vec![0];
        }
        match self.primitive {
            Primitive::Interval => match side {
                Side::Left => vec![0],
                Side::Right => vec![p],
                _ => panic!("interval elements have no {side:?} side"),
            },
            Primitive::Quad => match side {
                Side::Left => (0..n1).map(|iy| iy * n1).collect(),
                Side::Right => (0..n1).map(|iy| iy * n1 + p).collect(),
                Side::Bottom => (0..n1).collect(),
                Side::Top => (0..n1).map(|ix| p * n1 + ix).collect(),
            },
        }
    }
}
