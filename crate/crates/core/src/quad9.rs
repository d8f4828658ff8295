//! Nine-node Lagrange quadrilateral: shape functions, Gauss rules and edge topology.
//!
//! Local node ordering: corners counterclockwise from (-1,-1), then the mid-edge
//! nodes counterclockwise starting with the bottom edge, then the center node.
//!
//! ```text
//!  3 --- 6 --- 2
//!  |           |
//!  7     8     5
//!  |           |
//!  0 --- 4 --- 1
//! ```

/// Parametric coordinates of the nine local nodes.
pub const NODE_COORDS: [(f64, f64); 9] = [
    (-1.0, -1.0),
    (1.0, -1.0),
    (1.0, 1.0),
    (-1.0, 1.0),
    (0.0, -1.0),
    (1.0, 0.0),
    (0.0, 1.0),
    (-1.0, 0.0),
    (0.0, 0.0),
];

/// Local node triples of the four edges, ordered from start corner through
/// mid-edge node to end corner so that the interior lies on the left.
pub const EDGE_NODES: [[usize; 3]; 4] = [[0, 4, 1], [1, 5, 2], [2, 6, 3], [3, 7, 0]];

/// 3-point Gauss-Legendre abscissae on [-1, 1].
pub const GAUSS_3: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
/// Matching weights.
pub const GAUSS_3_W: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// The 3x3 tensor-product rule as `(xi, eta, weight)`, eta-major.
pub fn gauss_3x3() -> [(f64, f64, f64); 9] {
    let mut out = [(0.0, 0.0, 0.0); 9];
    for (j, (&eta, &we)) in GAUSS_3.iter().zip(GAUSS_3_W.iter()).enumerate() {
        for (i, (&xi, &wx)) in GAUSS_3.iter().zip(GAUSS_3_W.iter()).enumerate() {
            out[3 * j + i] = (xi, eta, wx * we);
        }
    }
    out
}

#[inline]
fn lagrange3(s: f64, node: f64) -> f64 {
    if node < -0.5 {
        0.5 * s * (s - 1.0)
    } else if node > 0.5 {
        0.5 * s * (s + 1.0)
    } else {
        1.0 - s * s
    }
}

#[inline]
fn lagrange3_d(s: f64, node: f64) -> f64 {
    if node < -0.5 {
        s - 0.5
    } else if node > 0.5 {
        s + 0.5
    } else {
        -2.0 * s
    }
}

/// Quadratic shape functions at `(xi, eta)`.
pub fn shape(xi: f64, eta: f64) -> [f64; 9] {
    let mut n = [0.0; 9];
    for (a, &(xa, ya)) in NODE_COORDS.iter().enumerate() {
        n[a] = lagrange3(xi, xa) * lagrange3(eta, ya);
    }
    n
}

/// Parametric derivatives `(dN/dxi, dN/deta)` at `(xi, eta)`.
pub fn shape_derivs(xi: f64, eta: f64) -> ([f64; 9], [f64; 9]) {
    let mut dxi = [0.0; 9];
    let mut deta = [0.0; 9];
    for (a, &(xa, ya)) in NODE_COORDS.iter().enumerate() {
        dxi[a] = lagrange3_d(xi, xa) * lagrange3(eta, ya);
        deta[a] = lagrange3(xi, xa) * lagrange3_d(eta, ya);
    }
    (dxi, deta)
}

/// Bilinear corner functions `(1±xi)(1±eta)/4` in corner order 0..4.
pub fn bilinear(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// 1D quadratic shape functions on an edge, nodes at s = -1, 0, 1 in edge order.
pub fn edge_shape(s: f64) -> [f64; 3] {
    [0.5 * s * (s - 1.0), 1.0 - s * s, 0.5 * s * (s + 1.0)]
}

pub fn edge_shape_deriv(s: f64) -> [f64; 3] {
    [s - 0.5, -2.0 * s, s + 0.5]
}

/// Physical-space geometry of one element evaluated at a parametric point.
#[derive(Debug, Clone, Copy)]
pub struct PointGeometry {
    pub n: [f64; 9],
    pub dndx: [f64; 9],
    pub dndy: [f64; 9],
    pub det_j: f64,
    pub x: f64,
    pub y: f64,
}

/// Evaluates shape functions, global derivatives and the Jacobian determinant.
pub fn point_geometry(coords: &[[f64; 2]; 9], xi: f64, eta: f64) -> PointGeometry {
    let n = shape(xi, eta);
    let (dxi, deta) = shape_derivs(xi, eta);
    let (mut j11, mut j12, mut j21, mut j22) = (0.0, 0.0, 0.0, 0.0);
    let (mut x, mut y) = (0.0, 0.0);
    for a in 0..9 {
        let [xa, ya] = coords[a];
        j11 += dxi[a] * xa;
        j12 += dxi[a] * ya;
        j21 += deta[a] * xa;
        j22 += deta[a] * ya;
        x += n[a] * xa;
        y += n[a] * ya;
    }
    let det_j = j11 * j22 - j12 * j21;
    let inv = 1.0 / det_j;
    let mut dndx = [0.0; 9];
    let mut dndy = [0.0; 9];
    for a in 0..9 {
        dndx[a] = inv * (j22 * dxi[a] - j12 * deta[a]);
        dndy[a] = inv * (-j21 * dxi[a] + j11 * deta[a]);
    }
    PointGeometry {
        n,
        dndx,
        dndy,
        det_j,
        x,
        y,
    }
}
