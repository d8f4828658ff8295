use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{edge_points, TemperatureField};
use crate::error::{Error, Result};
use crate::linalg::{DofNumbering, SkylineMatrix};
use crate::material::{
    blend, interpolate_corners, BlendedPointProps, MaterialPair, PlanarAssumption,
    VolumeFractionField,
};
use crate::mesh::Mesh;
use crate::quad9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementBc {
    pub set: String,
    pub component: Axis,
    #[serde(default)]
    pub value: f64,
}

/// Surface traction, N/m^2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractionBc {
    pub set: String,
    pub traction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MechanicalBcs {
    #[serde(default)]
    pub displacement: Vec<DisplacementBc>,
    #[serde(default)]
    pub traction: Vec<TractionBc>,
    /// N/m^3.
    #[serde(default)]
    pub body_force: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct ElasticSolution {
    /// Interleaved `(ux, uy)` per node, m.
    pub u: Vec<f64>,
    /// `(sxx, syy, sxy, szz)` per element per Gauss point, Pa.
    pub gauss_stress: Vec<[[f64; 4]; 9]>,
    pub von_mises: Vec<[f64; 9]>,
    pub sigma_v_max: f64,
}

impl ElasticSolution {
    pub fn element_mean_von_mises(&self) -> Vec<f64> {
        let w = quad9::gauss_3x3();
        self.von_mises
            .iter()
            .map(|vm| vm.iter().zip(&w).map(|(v, g)| v * g.2).sum::<f64>() / 4.0)
            .collect()
    }
}

/// J2 equivalent stress of `(sxx, syy, sxy, szz)`.
pub fn von_mises(s: [f64; 4]) -> f64 {
    let [sxx, syy, sxy, szz] = s;
    (0.5 * ((sxx - syy).powi(2) + (syy - szz).powi(2) + (szz - sxx).powi(2)) + 3.0 * sxy * sxy)
        .sqrt()
}

/// Maximum Gauss-point von Mises stress over `region` (all elements if `None`).
pub fn max_von_mises(solution: &ElasticSolution, region: Option<&[usize]>) -> Result<f64> {
    let peak = |e: usize| {
        solution.von_mises[e]
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max)
    };
    match region {
        None => Ok(solution.sigma_v_max),
        Some([]) => Err(Error::InvalidArgument("empty evaluation region".into())),
        Some(ids) => {
            if let Some(&bad) = ids.iter().find(|&&e| e >= solution.von_mises.len()) {
                return Err(Error::InvalidArgument(format!(
                    "element {bad} out of range"
                )));
            }
            Ok(ids.iter().map(|&e| peak(e)).fold(f64::MIN, f64::max))
        }
    }
}

/// In-plane constitutive matrix (Voigt xx, yy, xy with engineering shear).
fn constitutive(p: &BlendedPointProps, plane: PlanarAssumption) -> [[f64; 3]; 3] {
    let mu = p.mu_lame;
    let lambda = match plane {
        PlanarAssumption::PlaneStrain => p.lambda_lame,
        // Through-thickness stress free: effective lambda = 2 lambda mu / (lambda + 2 mu).
        PlanarAssumption::PlaneStress => 2.0 * p.lambda_lame * mu / (p.lambda_lame + 2.0 * mu),
    };
    [
        [lambda + 2.0 * mu, lambda, 0.0],
        [lambda, lambda + 2.0 * mu, 0.0],
        [0.0, 0.0, mu],
    ]
}

struct GaussState {
    g: quad9::PointGeometry,
    props: BlendedPointProps,
    d: [[f64; 3]; 3],
    theta: f64,
    dv: f64,
}

fn gauss_states(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    theta: &TemperatureField,
    plane: PlanarAssumption,
    element: usize,
) -> impl Iterator<Item = GaussState> {
    let coords = mesh.element_coords(element);
    let corners = field.element_corners(mesh, element);
    let node_theta = mesh.elements()[element].node_ids.map(|id| theta.theta[id]);
    let pair = *pair;
    quad9::gauss_3x3().into_iter().map(move |(xi, eta, w)| {
        let g = quad9::point_geometry(&coords, xi, eta);
        let props = blend(&pair, interpolate_corners(&corners, xi, eta), plane);
        let theta = (0..9).map(|a| g.n[a] * node_theta[a]).sum();
        GaussState {
            d: constitutive(&props, plane),
            dv: w * g.det_j,
            g,
            props,
            theta,
        }
    })
}

/// Element stiffness (18x18, DOFs interleaved per node) and thermal load vector.
pub fn element_stiffness(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    theta: &TemperatureField,
    plane: PlanarAssumption,
    body_force: [f64; 2],
    element: usize,
) -> (Vec<[f64; 18]>, [f64; 18]) {
    let mut ke = vec![[0.0; 18]; 18];
    let mut fe = [0.0; 18];
    for s in gauss_states(mesh, field, pair, theta, plane, element) {
        let (dx, dy, d) = (&s.g.dndx, &s.g.dndy, &s.d);
        for a in 0..9 {
            // B_a^T D for node a: rows (ux, uy), columns (xx, yy, xy).
            let bd = [
                [
                    dx[a] * d[0][0] + dy[a] * d[2][0],
                    dx[a] * d[0][1] + dy[a] * d[2][1],
                    dx[a] * d[0][2] + dy[a] * d[2][2],
                ],
                [
                    dy[a] * d[1][0] + dx[a] * d[2][0],
                    dy[a] * d[1][1] + dx[a] * d[2][1],
                    dy[a] * d[1][2] + dx[a] * d[2][2],
                ],
            ];
            for b in 0..9 {
                let bb = [[dx[b], 0.0], [0.0, dy[b]], [dy[b], dx[b]]];
                for i in 0..2 {
                    for j in 0..2 {
                        let v = bd[i][0] * bb[0][j] + bd[i][1] * bb[1][j] + bd[i][2] * bb[2][j];
                        ke[2 * a + i][2 * b + j] += v * s.dv;
                    }
                }
            }
            let bt = s.props.beta * s.theta * s.dv;
            fe[2 * a] += dx[a] * bt + s.g.n[a] * body_force[0] * s.dv;
            fe[2 * a + 1] += dy[a] * bt + s.g.n[a] * body_force[1] * s.dv;
        }
    }
    (ke, fe)
}

fn gauss_stresses(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    theta: &TemperatureField,
    plane: PlanarAssumption,
    u: &[f64],
    element: usize,
) -> [[f64; 4]; 9] {
    let ids = mesh.elements()[element].node_ids;
    let mut out = [[0.0; 4]; 9];
    for (q, s) in gauss_states(mesh, field, pair, theta, plane, element).enumerate() {
        let (mut exx, mut eyy, mut gxy) = (0.0, 0.0, 0.0);
        for a in 0..9 {
            let (ux, uy) = (u[2 * ids[a]], u[2 * ids[a] + 1]);
            exx += s.g.dndx[a] * ux;
            eyy += s.g.dndy[a] * uy;
            gxy += s.g.dndy[a] * ux + s.g.dndx[a] * uy;
        }
        let d = &s.d;
        let bt = s.props.beta * s.theta;
        let sxx = d[0][0] * exx + d[0][1] * eyy - bt;
        let syy = d[1][0] * exx + d[1][1] * eyy - bt;
        let sxy = d[2][2] * gxy;
        let szz = match plane {
            PlanarAssumption::PlaneStress => 0.0,
            PlanarAssumption::PlaneStrain => s.props.lambda_lame * (exx + eyy) - bt,
        };
        out[q] = [sxx, syy, sxy, szz];
    }
    out
}

/// Nodal internal force `sum B^T sigma dV` from the recovered Gauss stresses.
pub fn internal_forces(mesh: &Mesh, solution: &ElasticSolution) -> Vec<f64> {
    let mut f = vec![0.0; 2 * mesh.node_count()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let coords = mesh.element_coords(e);
        for (q, &(xi, eta, w)) in quad9::gauss_3x3().iter().enumerate() {
            let g = quad9::point_geometry(&coords, xi, eta);
            let [sxx, syy, sxy, _] = solution.gauss_stress[e][q];
            let dv = w * g.det_j;
            for a in 0..9 {
                f[2 * el.node_ids[a]] += (g.dndx[a] * sxx + g.dndy[a] * sxy) * dv;
                f[2 * el.node_ids[a] + 1] += (g.dndy[a] * syy + g.dndx[a] * sxy) * dv;
            }
        }
    }
    f
}

/// Rejects constraint sets that leave a planar rigid-body mode free.
fn check_rigid_body(mesh: &Mesh, prescribed: &[bool]) -> Result<()> {
    let n = mesh.node_count() as f64;
    let cx = mesh.nodes().iter().map(|p| p.x).sum::<f64>() / n;
    let cy = mesh.nodes().iter().map(|p| p.y).sum::<f64>() / n;
    let rows: Vec<[f64; 3]> = prescribed
        .iter()
        .enumerate()
        .filter(|(_, &p)| p)
        .map(|(dof, _)| {
            let node = mesh.nodes()[dof / 2];
            if dof % 2 == 0 {
                [1.0, 0.0, -(node.y - cy)]
            } else {
                [0.0, 1.0, node.x - cx]
            }
        })
        .collect();
    let describe = |c: [f64; 3]| {
        let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let c = c.map(|v| v / norm);
        if c[2].abs() < 1e-6 {
            if c[1].abs() < 1e-6 {
                "translation along x".to_string()
            } else if c[0].abs() < 1e-6 {
                "translation along y".to_string()
            } else {
                format!("translation along ({:.3}, {:.3})", c[0], c[1])
            }
        } else {
            let px = cx - c[1] / c[2];
            let py = cy + c[0] / c[2];
            format!("rotation about ({px:.4}, {py:.4})")
        }
    };
    if rows.is_empty() {
        return Err(Error::RigidBodyMode(
            "no displacement constraints: translations along x and y and rotation".into(),
        ));
    }
    let r = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let scale = (mesh.area()).sqrt().max(1e-12);
    let svd = (r.transpose() * &r).symmetric_eigen();
    for (k, &lambda) in svd.eigenvalues.iter().enumerate() {
        if lambda.abs() <= 1e-10 * rows.len() as f64 * scale.max(1.0).powi(2) {
            let v = svd.eigenvectors.column(k);
            return Err(Error::RigidBodyMode(describe([v[0], v[1], v[2]])));
        }
    }
    Ok(())
}

/// Plane thermoelastic solve with the temperature rise as load; stresses are
/// recovered at Gauss points as `D eps - beta theta I`.
pub fn assemble_and_solve_elastic(
    mesh: &Mesh,
    field: &VolumeFractionField,
    pair: &MaterialPair,
    theta: &TemperatureField,
    bcs: &MechanicalBcs,
    plane: PlanarAssumption,
) -> Result<ElasticSolution> {
    field.check_matches(mesh)?;
    if theta.theta.len() != mesh.node_count() {
        return Err(Error::InvalidArgument(
            "temperature field does not match mesh".into(),
        ));
    }
    let n_dof = 2 * mesh.node_count();
    let mut fixed = vec![f64::NAN; n_dof];
    for d in &bcs.displacement {
        let c = match d.component {
            Axis::X => 0,
            Axis::Y => 1,
        };
        for &id in &mesh.boundary_set(&d.set)?.node_ids {
            let dof = 2 * id + c;
            if !fixed[dof].is_nan() && fixed[dof] != d.value {
                return Err(Error::InvalidArgument(format!(
                    "conflicting displacement constraints on node {id}"
                )));
            }
            fixed[dof] = d.value;
        }
    }
    let prescribed: Vec<bool> = fixed.iter().map(|v| !v.is_nan()).collect();
    check_rigid_body(mesh, &prescribed)?;

    let connectivity: Vec<[usize; 9]> = mesh.elements().iter().map(|e| e.node_ids).collect();
    let numbering = DofNumbering::build(mesh.node_count(), 2, &connectivity, &prescribed);
    let eq = &numbering.equation;
    let mut k = SkylineMatrix::new(numbering.first.clone());
    let mut rhs = vec![0.0; numbering.n_equations];

    for (e, el) in mesh.elements().iter().enumerate() {
        let (ke, fe) = element_stiffness(mesh, field, pair, theta, plane, bcs.body_force, e);
        let dofs: [usize; 18] = std::array::from_fn(|i| 2 * el.node_ids[i / 2] + i % 2);
        for (a, &da) in dofs.iter().enumerate() {
            let Some(ra) = eq[da] else { continue };
            rhs[ra] += fe[a];
            for (b, &db) in dofs.iter().enumerate() {
                match eq[db] {
                    Some(rb) if rb <= ra => k.add(ra, rb, ke[a][b]),
                    Some(_) => {}
                    None => rhs[ra] -= ke[a][b] * fixed[db],
                }
            }
        }
    }
    for t in &bcs.traction {
        for &(e, kk) in &mesh.boundary_set(&t.set)?.edges {
            let ids = mesh.elements()[e].edge_nodes(kk);
            for p in edge_points(mesh, e, kk) {
                for a in 0..3 {
                    for c in 0..2 {
                        if let Some(r) = eq[2 * ids[a] + c] {
                            rhs[r] += t.traction[c] * p.n[a] * p.w_ds;
                        }
                    }
                }
            }
        }
    }

    k.factor().map_err(|e| match e {
        Error::Factorization { .. } => Error::RigidBodyMode(format!(
            "stiffness singular after constraints ({e}); check supports"
        )),
        other => other,
    })?;
    k.solve_in_place(&mut rhs);
    let u: Vec<f64> = (0..n_dof)
        .map(|i| match eq[i] {
            Some(r) => rhs[r],
            None => fixed[i],
        })
        .collect();

    let gauss_stress: Vec<[[f64; 4]; 9]> = (0..mesh.element_count())
        .map(|e| gauss_stresses(mesh, field, pair, theta, plane, &u, e))
        .collect();
    let von_mises: Vec<[f64; 9]> = gauss_stress.iter().map(|pts| pts.map(von_mises)).collect();
    let sigma_v_max = von_mises.iter().flatten().cloned().fold(0.0, f64::max);
    Ok(ElasticSolution {
        u,
        gauss_stress,
        von_mises,
        sigma_v_max,
    })
}
