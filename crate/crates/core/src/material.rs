//! Volume-fraction fields and rule-of-mixtures property blending.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Quad9Element};
use crate::quad9;

/// Ceramic volume fraction at each element corner node, in
/// [`Mesh::corner_node_ids`] order. This is the GA chromosome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeFractionField {
    values: Vec<f64>,
}

impl VolumeFractionField {
    /// Wraps raw values, clamping each into `[0, 1]`.
    pub fn new(values: Vec<f64>) -> Self {
        let mut f = VolumeFractionField { values };
        f.clamp();
        f
    }

    /// Builds a field for `mesh` from a function of position.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh
            .corner_node_ids()
            .iter()
            .map(|&id| {
                let n = mesh.nodes()[id];
                f(n.x, n.y)
            })
            .collect();
        Self::new(values)
    }

    pub fn uniform(len: usize, value: f64) -> Self {
        Self::new(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn clamp(&mut self) {
        for v in &mut self.values {
            *v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
        }
    }

    pub fn check_matches(&self, mesh: &Mesh) -> Result<()> {
        if self.len() != mesh.corner_count() {
            return Err(Error::InvalidArgument(format!(
                "volume fraction field has {} values but the mesh has {} corner nodes",
                self.len(),
                mesh.corner_count()
            )));
        }
        Ok(())
    }

    /// Corner values of one element, in local corner order.
    pub fn element_corners(&self, mesh: &Mesh, element: usize) -> [f64; 4] {
        mesh.element_corner_slots(element).map(|i| self.values[i])
    }

    /// Domain average of V_c: the area integral divided by the area.
    pub fn volume_average(&self, mesh: &Mesh) -> f64 {
        let mut integral = 0.0;
        let mut area = 0.0;
        for e in 0..mesh.element_count() {
            let corners = self.element_corners(mesh, e);
            let coords = mesh.element_coords(e);
            for (xi, eta, w) in quad9::gauss_3x3() {
                let dv = w * quad9::point_geometry(&coords, xi, eta).det_j;
                let n = quad9::bilinear(xi, eta);
                integral += dv * (0..4).map(|a| n[a] * corners[a]).sum::<f64>();
                area += dv;
            }
        }
        integral / area
    }

    pub fn node_average(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Bilinear interpolation of the corner values of `element` at `(xi, eta)`.
pub fn interpolate_vf(
    mesh: &Mesh,
    field: &VolumeFractionField,
    element: &Quad9Element,
    xi: f64,
    eta: f64,
) -> Result<f64> {
    if !(-1.0..=1.0).contains(&xi) || !(-1.0..=1.0).contains(&eta) {
        return Err(Error::InvalidArgument(format!(
            "parametric point ({xi}, {eta}) outside [-1, 1]^2"
        )));
    }
    let corners = element.corners().map(|id| {
        mesh.corner_index(id)
            .map(|i| field.values()[i])
            .expect("element corner is a corner node")
    });
    Ok(interpolate_corners(&corners, xi, eta))
}

#[inline]
pub fn interpolate_corners(corners: &[f64; 4], xi: f64, eta: f64) -> f64 {
    let n = quad9::bilinear(xi, eta);
    n[0] * corners[0] + n[1] * corners[1] + n[2] * corners[2] + n[3] * corners[3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constituent {
    /// Young's modulus, Pa.
    pub e: f64,
    pub nu: f64,
    /// Thermal expansion, 1/K.
    pub alpha: f64,
    /// Conductivity, W/(m K).
    pub k: f64,
    /// Density, kg/m^3. Carried for completeness; no load case uses it.
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialPair {
    pub metal: Constituent,
    pub ceramic: Constituent,
}

impl MaterialPair {
    /// Aluminium / zirconia.
    pub fn al_zro2() -> Self {
        MaterialPair {
            metal: Constituent {
                e: 70.0e9,
                nu: 0.3,
                alpha: 23.4e-6,
                k: 233.0,
                rho: 2707.0,
            },
            ceramic: Constituent {
                e: 200.0e9,
                nu: 0.3,
                alpha: 10.0e-6,
                k: 2.2,
                rho: 5700.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("metal", &self.metal), ("ceramic", &self.ceramic)] {
            if !(c.e > 0.0 && c.nu >= 0.0 && c.nu < 0.5 && c.k > 0.0) {
                return Err(Error::Config(format!(
                    "{name} properties out of range: need E > 0, 0 <= nu < 0.5, k > 0"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarAssumption {
    PlaneStress,
    PlaneStrain,
}

/// Material state at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendedPointProps {
    pub e: f64,
    pub nu: f64,
    pub alpha: f64,
    pub k: f64,
    /// Stress-temperature coefficient, Pa/K.
    pub beta: f64,
    pub lambda_lame: f64,
    pub mu_lame: f64,
}

/// Rule of mixtures on E, nu, alpha, k; beta and the Lame constants follow
/// from the blended values.
pub fn blend(pair: &MaterialPair, vc: f64, plane: PlanarAssumption) -> BlendedPointProps {
    let mix = |m: f64, c: f64| m * (1.0 - vc) + c * vc;
    let e = mix(pair.metal.e, pair.ceramic.e);
    let nu = mix(pair.metal.nu, pair.ceramic.nu);
    let alpha = mix(pair.metal.alpha, pair.ceramic.alpha);
    let k = mix(pair.metal.k, pair.ceramic.k);
    let beta = match plane {
        PlanarAssumption::PlaneStress => e * alpha / (1.0 - nu),
        PlanarAssumption::PlaneStrain => e * alpha / (1.0 - 2.0 * nu),
    };
    BlendedPointProps {
        e,
        nu,
        alpha,
        k,
        beta,
        lambda_lame: e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)),
        mu_lame: e / (2.0 * (1.0 + nu)),
    }
}
