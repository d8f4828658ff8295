//! The three benchmark problems.
//!
//! Problem 1 is the left half (0.2 m x 0.1 m) of a 0.4 m x 0.1 m plate heated
//! along the top edge, Problem 2 the right half of a 1 m square plate with a
//! 0.25 m hole on the symmetry edge, and Problem 3 a half ellipse (semi-axes
//! 0.5 m and 1 m) with two 0.1 m holes.

use super::{
    ConstraintSpec, MeshSource, Objective, ProblemSpec, Region, StressCalibration, VcBoundary,
};
use crate::error::{Error, Result};
use crate::fem::{
    Axis, ConvectionBc, DirichletBc, DisplacementBc, MechanicalBcs, ScalarProfile, ThermalBcs,
};
use crate::ga::GaConfig;
use crate::gpr::KernelConfig;
use crate::material::{MaterialPair, PlanarAssumption};

const NAMES: [&str; 6] = [
    "problem1-case1",
    "problem1-case2-400",
    "problem1-case2-300",
    "problem2",
    "problem3-case1",
    "problem3-case2",
];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

pub fn builtin(name: &str) -> Result<ProblemSpec> {
    match name {
        "problem1-case1" => Ok(problem1(name, None)),
        "problem1-case2-400" => Ok(problem1(name, Some(400.0))),
        "problem1-case2-300" => Ok(problem1(name, Some(300.0))),
        "problem2" => Ok(problem2()),
        "problem3-case1" => Ok(problem3(name, false)),
        "problem3-case2" => Ok(problem3(name, true)),
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}

fn convection(set: &str) -> ConvectionBc {
    ConvectionBc {
        set: set.into(),
        h: 50.0,
        ambient: 0.0,
    }
}

fn fixed(set: &str, component: Axis) -> DisplacementBc {
    DisplacementBc {
        set: set.into(),
        component,
        value: 0.0,
    }
}

fn hot(set: &str) -> DirichletBc {
    DirichletBc {
        set: set.into(),
        value: ScalarProfile::constant(500.0),
    }
}

fn vc(set: &str, value: f64) -> VcBoundary {
    VcBoundary {
        set: set.into(),
        value,
        region: None,
    }
}

fn ga(stall_tolerance: f64) -> GaConfig {
    GaConfig {
        stall_tolerance,
        ..GaConfig::default()
    }
}

/// Half-width and height of the Problem 1 plate, m.
pub(crate) const PROBLEM1_SIZE: (f64, f64) = (0.2, 0.1);

fn problem1(name: &str, theta_star: Option<f64>) -> ProblemSpec {
    let (w, h) = PROBLEM1_SIZE;
    ProblemSpec {
        name: name.into(),
        planar: PlanarAssumption::PlaneStress,
        objective: Objective::MinMaxVonMises,
        ceramic_measure: Default::default(),
        constraints: theta_star
            .map(|t| ConstraintSpec::VfAboveThresholdWhereHot {
                theta_star: t,
                vc_star: 0.95,
            })
            .into_iter()
            .collect(),
        evaluation_region: None,
        mesh: MeshSource::Rectangle {
            width: w,
            height: h,
            nx: 20,
            ny: 20,
        },
        material: MaterialPair::al_zro2(),
        thermal: ThermalBcs {
            dirichlet: vec![DirichletBc {
                set: "top".into(),
                value: ScalarProfile::SineX {
                    amplitude: 500.0,
                    length: w,
                },
            }],
            convection: vec![convection("left"), convection("bottom")],
            ..Default::default()
        },
        mechanical: MechanicalBcs {
            displacement: vec![fixed("right", Axis::X), fixed("bottom_left", Axis::Y)],
            ..Default::default()
        },
        vc_boundary: vec![
            vc("bottom", 0.0),
            VcBoundary {
                set: "top".into(),
                value: 1.0,
                // Rightmost tenth of the top edge.
                region: Some(Region {
                    x_min: Some(0.18),
                    ..Default::default()
                }),
            },
        ],
        kernel: KernelConfig::new(0.05, 1.0),
        ga: ga(0.1),
    }
}

fn problem2() -> ProblemSpec {
    ProblemSpec {
        name: "problem2".into(),
        planar: PlanarAssumption::PlaneStress,
        objective: Objective::MinMaxVonMises,
        ceramic_measure: Default::default(),
        constraints: vec![],
        evaluation_region: None,
        mesh: MeshSource::PlateWithHalfHole {
            width: 1.0,
            height: 1.0,
            radius: 0.25,
            per_side: 10,
            layers: 12,
        },
        material: MaterialPair::al_zro2(),
        thermal: ThermalBcs {
            dirichlet: vec![hot("hole")],
            convection: vec![convection("top"), convection("bottom"), convection("right")],
            ..Default::default()
        },
        mechanical: MechanicalBcs {
            displacement: vec![fixed("left", Axis::X), fixed("bottom_left", Axis::Y)],
            ..Default::default()
        },
        vc_boundary: vec![vc("hole", 1.0), vc("top", 0.0), vc("bottom", 0.0)],
        kernel: KernelConfig::new(0.3, 1.0),
        ga: ga(0.1),
    }
}

fn problem3(name: &str, min_ceramic: bool) -> ProblemSpec {
    let (objective, constraints, tol) = if min_ceramic {
        (
            Objective::MinCeramicContent,
            vec![ConstraintSpec::MaxStressBelow {
                sigma_star: 175.0,
                calibrate: Some(StressCalibration {
                    samples: 200,
                    reference_floor: 180.0,
                }),
            }],
            0.001,
        )
    } else {
        (Objective::MinMaxVonMises, vec![], 0.01)
    };
    ProblemSpec {
        name: name.into(),
        planar: PlanarAssumption::PlaneStress,
        objective,
        ceramic_measure: Default::default(),
        constraints,
        evaluation_region: None,
        mesh: MeshSource::HalfEllipseTwoHoles {
            semi_x: 0.5,
            semi_y: 1.0,
            hole_x: 0.2,
            hole_y: 0.45,
            radius: 0.1,
            arc_elements: [18, 15, 7],
            layers: 8,
        },
        material: MaterialPair::al_zro2(),
        thermal: ThermalBcs {
            dirichlet: vec![hot("holes")],
            convection: vec![convection("curved")],
            ..Default::default()
        },
        mechanical: MechanicalBcs {
            displacement: vec![
                fixed("left", Axis::X),
                fixed("bottom_left", Axis::X),
                fixed("bottom_left", Axis::Y),
            ],
            ..Default::default()
        },
        vc_boundary: vec![vc("holes", 1.0), vc("curved", 0.0)],
        kernel: KernelConfig::new(0.3, 1.0),
        ga: ga(tol),
    }
}
