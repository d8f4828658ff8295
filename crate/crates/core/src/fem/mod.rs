//! Steady heat conduction and plane thermoelasticity on nine-node meshes.

mod elastic;
mod thermal;

use serde::{Deserialize, Serialize};

pub use elastic::{
    assemble_and_solve_elastic, element_stiffness, internal_forces, max_von_mises, von_mises, Axis,
    DisplacementBc, ElasticSolution, MechanicalBcs, TractionBc,
};
pub use thermal::{
    assemble_and_solve_thermal, element_conductivity, temperature_at_gauss_points,
    thermal_residual, ConvectionBc, DirichletBc, FluxBc, TemperatureField, ThermalBcs,
};

use crate::mesh::Mesh;
use crate::quad9;

/// A scalar function of position used for prescribed data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarProfile {
    Constant {
        value: f64,
    },
    /// `amplitude * sin(pi * x / (2 * length))`.
    SineX {
        amplitude: f64,
        length: f64,
    },
    /// Sum of `coeff * x^px * y^py` terms.
    Polynomial {
        terms: Vec<(f64, i32, i32)>,
    },
}

impl ScalarProfile {
    pub fn constant(value: f64) -> Self {
        ScalarProfile::Constant { value }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            ScalarProfile::Constant { value } => *value,
            ScalarProfile::SineX { amplitude, length } => {
                amplitude * (std::f64::consts::PI * x / (2.0 * length)).sin()
            }
            ScalarProfile::Polynomial { terms } => terms
                .iter()
                .map(|&(c, px, py)| c * x.powi(px) * y.powi(py))
                .sum(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ScalarProfile::Constant { value } => *value == 0.0,
            ScalarProfile::SineX { amplitude, .. } => *amplitude == 0.0,
            ScalarProfile::Polynomial { terms } => terms.iter().all(|t| t.0 == 0.0),
        }
    }
}

impl Default for ScalarProfile {
    fn default() -> Self {
        ScalarProfile::constant(0.0)
    }
}

/// One quadrature point on an element edge.
pub(crate) struct EdgePoint {
    pub n: [f64; 3],
    /// Weight times arc-length Jacobian.
    pub w_ds: f64,
}

pub(crate) fn edge_points(mesh: &Mesh, element: usize, local_edge: usize) -> [EdgePoint; 3] {
    let ids = mesh.elements()[element].edge_nodes(local_edge);
    let pts = ids.map(|id| mesh.nodes()[id]);
    std::array::from_fn(|q| {
        let s = quad9::GAUSS_3[q];
        let n = quad9::edge_shape(s);
        let dn = quad9::edge_shape_deriv(s);
        let (mut dx, mut dy) = (0.0, 0.0);
        for a in 0..3 {
            dx += dn[a] * pts[a].x;
            dy += dn[a] * pts[a].y;
        }
        EdgePoint {
            n,
            w_ds: quad9::GAUSS_3_W[q] * dx.hypot(dy),
        }
    })
}
