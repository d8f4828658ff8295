use serde::{Deserialize, Serialize};

use super::{edge_points, ScalarProfile};
use crate::error::{Error, Result};
use crate::linalg::{DofNumbering, SkylineMatrix};
use crate::material::{
    blend, interpolate_corners, MaterialPair, PlanarAssumption, VolumeFractionField,
};
use crate::mesh::Mesh;
use crate::quad9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletBc {
    pub set: String,
    pub value: ScalarProfile,
}

/// Heat flux entering the body, W/m^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxBc {
    pub set: String,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvectionBc {
    pub set: String,
    /// Film coefficient, W/(m^2 K).
    pub h: f64,
    pub ambient: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThermalBcs {
    #[serde(default)]
    pub dirichlet: Vec<DirichletBc>,
    #[serde(default)]
    pub flux: Vec<FluxBc>,
    #[serde(default)]
    pub convection: Vec<ConvectionBc>,
    /// Volumetric heat source, W/m^3.
    #[serde(default)]
    pub source: ScalarProfile,
}

/// Nodal temperature rise over all mesh nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    pub theta: Vec<f64>,
}

impl TemperatureField {
    pub fn uniform(mesh: &Mesh, value: f64) -> Self {
        TemperatureField {
            theta: vec![value; mesh.node_count()],
        }
    }

    pub fn from_fn(mesh: &Mesh, f: impl Fn(f64, f64) -> f64) -> Self {
        TemperatureField {
            theta: mesh.nodes().iter().map(|n| f(n.x, n.y)).collect(),
        }
    }
}

/// Conductivity matrix and source vector of one element (no boundary terms).
pub fn element_conductivity(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    source: &ScalarProfile,
    element: usize,
) -> ([[f64; 9]; 9], [f64; 9]) {
    let coords = mesh.element_coords(element);
    let corners = field.element_corners(mesh, element);
    let mut ke = [[0.0; 9]; 9];
    let mut fe = [0.0; 9];
    let has_source = !source.is_zero();
    for (xi, eta, w) in quad9::gauss_3x3() {
        let g = quad9::point_geometry(&coords, xi, eta);
        let vc = interpolate_corners(&corners, xi, eta);
        // Plane assumption does not enter conductivity.
        let k = blend(pair, vc, PlanarAssumption::PlaneStress).k;
        let dv = w * g.det_j;
        for a in 0..9 {
            for b in a..9 {
                let v = k * (g.dndx[a] * g.dndx[b] + g.dndy[a] * g.dndy[b]) * dv;
                ke[a][b] += v;
            }
            if has_source {
                fe[a] += g.n[a] * source.eval(g.x, g.y) * dv;
            }
        }
    }
    for a in 0..9 {
        for b in 0..a {
            ke[a][b] = ke[b][a];
        }
    }
    (ke, fe)
}

/// Adds convection stiffness and all boundary loads into per-edge contributions.
fn for_each_boundary_term(
    mesh: &Mesh,
    bcs: &ThermalBcs,
    mut visit: impl FnMut([usize; 3], [[f64; 3]; 3], [f64; 3]),
) -> Result<()> {
    for c in &bcs.convection {
        let set = mesh.boundary_set(&c.set)?;
        for &(e, k) in &set.edges {
            let ids = mesh.elements()[e].edge_nodes(k);
            let mut ke = [[0.0; 3]; 3];
            let mut fe = [0.0; 3];
            for p in edge_points(mesh, e, k) {
                for a in 0..3 {
                    for b in 0..3 {
                        ke[a][b] += c.h * p.n[a] * p.n[b] * p.w_ds;
                    }
                    fe[a] += c.h * c.ambient * p.n[a] * p.w_ds;
                }
            }
            visit(ids, ke, fe);
        }
    }
    for f in &bcs.flux {
        let set = mesh.boundary_set(&f.set)?;
        for &(e, k) in &set.edges {
            let ids = mesh.elements()[e].edge_nodes(k);
            let mut fe = [0.0; 3];
            for p in edge_points(mesh, e, k) {
                for a in 0..3 {
                    fe[a] += f.q * p.n[a] * p.w_ds;
                }
            }
            visit(ids, [[0.0; 3]; 3], fe);
        }
    }
    Ok(())
}

/// Prescribed temperatures per node (`NaN` where free).
fn dirichlet_values(mesh: &Mesh, bcs: &ThermalBcs) -> Result<Vec<f64>> {
    let mut values = vec![f64::NAN; mesh.node_count()];
    for d in &bcs.dirichlet {
        for &id in &mesh.boundary_set(&d.set)?.node_ids {
            let n = mesh.nodes()[id];
            let v = d.value.eval(n.x, n.y);
            let prev = values[id];
            // Agreement up to round-off is not a conflict (e.g. sin(pi) vs 0).
            if !prev.is_nan() && (prev - v).abs() > 1e-9 * prev.abs().max(v.abs()).max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "node {id} receives conflicting prescribed temperatures"
                )));
            }
            values[id] = v;
        }
    }
    Ok(values)
}

/// Galerkin solution of steady conduction with quadratic temperature
/// interpolation and conductivity blended at each Gauss point.
pub fn assemble_and_solve_thermal(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    bcs: &ThermalBcs,
) -> Result<TemperatureField> {
    field.check_matches(mesh)?;
    for c in &bcs.convection {
        if c.h < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "negative film coefficient on `{}`",
                c.set
            )));
        }
    }
    let fixed = dirichlet_values(mesh, bcs)?;
    let prescribed: Vec<bool> = fixed.iter().map(|v| !v.is_nan()).collect();
    let has_convection = bcs
        .convection
        .iter()
        .any(|c| c.h > 0.0 && mesh.boundary_set(&c.set).is_ok_and(|s| !s.edges.is_empty()));
    if !prescribed.iter().any(|&p| p) && !has_convection {
        return Err(Error::FloatingThermal);
    }

    let connectivity: Vec<[usize; 9]> = mesh.elements().iter().map(|e| e.node_ids).collect();
    let numbering = DofNumbering::build(mesh.node_count(), 1, &connectivity, &prescribed);
    let eq = &numbering.equation;
    let mut k = SkylineMatrix::new(numbering.first.clone());
    let mut rhs = vec![0.0; numbering.n_equations];

    let mut scatter = |ids: &[usize], ke: &dyn Fn(usize, usize) -> f64, fe: &[f64]| {
        for (a, &ia) in ids.iter().enumerate() {
            let Some(ra) = eq[ia] else { continue };
            rhs[ra] += fe[a];
            for (b, &ib) in ids.iter().enumerate() {
                match eq[ib] {
                    Some(rb) if rb <= ra => k.add(ra, rb, ke(a, b)),
                    Some(_) => {}
                    None => rhs[ra] -= ke(a, b) * fixed[ib],
                }
            }
        }
    };

    for (e, el) in mesh.elements().iter().enumerate() {
        let (ke, fe) = element_conductivity(mesh, field, pair, &bcs.source, e);
        scatter(&el.node_ids, &|a, b| ke[a][b], &fe);
    }
    let mut edge_terms = Vec::new();
    for_each_boundary_term(mesh, bcs, |ids, ke, fe| edge_terms.push((ids, ke, fe)))?;
    for (ids, ke, fe) in &edge_terms {
        scatter(ids, &|a, b| ke[a][b], fe);
    }

    k.factor().map_err(|e| e.context("thermal solve"))?;
    k.solve_in_place(&mut rhs);
    let theta = (0..mesh.node_count())
        .map(|i| match eq[i] {
            Some(r) => rhs[r],
            None => fixed[i],
        })
        .collect();
    Ok(TemperatureField { theta })
}

/// `K theta - f` over all nodes, including prescribed ones (where it equals the
/// heat supplied through the Dirichlet boundary).
pub fn thermal_residual(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    bcs: &ThermalBcs,
    theta: &TemperatureField,
) -> Result<Vec<f64>> {
    let mut r = vec![0.0; mesh.node_count()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let (ke, fe) = element_conductivity(mesh, field, pair, &bcs.source, e);
        for a in 0..9 {
            let ia = el.node_ids[a];
            r[ia] -= fe[a];
            for b in 0..9 {
                r[ia] += ke[a][b] * theta.theta[el.node_ids[b]];
            }
        }
    }
    for_each_boundary_term(mesh, bcs, |ids, ke, fe| {
        for a in 0..3 {
            r[ids[a]] -= fe[a];
            for b in 0..3 {
                r[ids[a]] += ke[a][b] * theta.theta[ids[b]];
            }
        }
    })?;
    Ok(r)
}

/// Temperature at the 3x3 Gauss points of every element (eta-major order).
pub fn temperature_at_gauss_points(mesh: &Mesh, theta: &TemperatureField) -> Vec<[f64; 9]> {
    let shapes: Vec<[f64; 9]> = quad9::gauss_3x3()
        .iter()
        .map(|&(xi, eta, _)| quad9::shape(xi, eta))
        .collect();
    mesh.elements()
        .iter()
        .map(|el| {
            std::array::from_fn(|q| {
                (0..9)
                    .map(|a| shapes[q][a] * theta.theta[el.node_ids[a]])
                    .sum()
            })
        })
        .collect()
}
