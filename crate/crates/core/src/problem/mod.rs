//! Problem definitions: geometry, loads, design-space constraints, objective
//! and GA settings, plus the orchestration that turns them into a run.

mod builtins;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_and_solve_elastic, assemble_and_solve_thermal, max_von_mises, ElasticSolution,
    MechanicalBcs, TemperatureField, ThermalBcs,
};
use crate::ga::{
    evolve_with_observer, Evaluation, FitnessProblem, GaConfig, GenerationRecord, Individual,
};
use crate::gpr::{BoundaryConstraint, KernelConfig, PosteriorModel};
use crate::material::{MaterialPair, PlanarAssumption, VolumeFractionField};
use crate::mesh::{self, Mesh};

pub use builtins::{builtin, builtin_names};

/// Where the mesh comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshSource {
    Rectangle {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
    },
    PlateWithHalfHole {
        width: f64,
        height: f64,
        radius: f64,
        per_side: usize,
        layers: usize,
    },
    HalfEllipseTwoHoles {
        semi_x: f64,
        semi_y: f64,
        hole_x: f64,
        hole_y: f64,
        radius: f64,
        arc_elements: [usize; 3],
        layers: usize,
    },
    File {
        path: std::path::PathBuf,
    },
}

impl MeshSource {
    pub fn build(&self) -> Result<Mesh> {
        match self {
            MeshSource::Rectangle {
                width,
                height,
                nx,
                ny,
            } => mesh::generate_rectangle(*width, *height, *nx, *ny),
            MeshSource::PlateWithHalfHole {
                width,
                height,
                radius,
                per_side,
                layers,
            } => mesh::plate_with_half_hole(*width, *height, *radius, *per_side, *layers),
            MeshSource::HalfEllipseTwoHoles {
                semi_x,
                semi_y,
                hole_x,
                hole_y,
                radius,
                arc_elements,
                layers,
            } => mesh::half_ellipse_two_holes(
                *semi_x,
                *semi_y,
                *hole_x,
                *hole_y,
                *radius,
                *arc_elements,
                *layers,
            ),
            MeshSource::File { path } => mesh::load_mesh(path),
        }
    }
}

/// Axis-aligned box; missing bounds are unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Region {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
}

impl Region {
    const SLACK: f64 = 1e-9;

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x_min.is_none_or(|v| x >= v - Self::SLACK)
            && self.x_max.is_none_or(|v| x <= v + Self::SLACK)
            && self.y_min.is_none_or(|v| y >= v - Self::SLACK)
            && self.y_max.is_none_or(|v| y <= v + Self::SLACK)
    }
}

/// Prescribed ceramic fraction on the corner nodes of a boundary set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcBoundary {
    pub set: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximum Gauss-point von Mises stress, MPa.
    MinMaxVonMises,
    /// Ceramic content of the profile.
    MinCeramicContent,
}

/// How ceramic content is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeramicMeasure {
    /// Area integral of V_c divided by the domain area.
    #[default]
    VolumeAverage,
    /// Plain mean over corner nodes.
    NodeMean,
}

/// Sets the stress bound relative to the stress floor of random designs:
/// `sigma_star * (observed floor / reference_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressCalibration {
    pub samples: usize,
    /// Floor the nominal bound was chosen against, MPa.
    pub reference_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec {
    /// `V_c >= vc_star` wherever `theta >= theta_star`, checked at corner nodes.
    VfAboveThresholdWhereHot { theta_star: f64, vc_star: f64 },
    /// `sigma_v_max <= sigma_star` (MPa).
    MaxStressBelow {
        sigma_star: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        calibrate: Option<StressCalibration>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub planar: PlanarAssumption,
    pub objective: Objective,
    #[serde(default)]
    pub ceramic_measure: CeramicMeasure,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
    /// Element centroids that count toward the stress maximum; whole domain if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluation_region: Option<Region>,
    pub mesh: MeshSource,
    #[serde(default = "MaterialPair::al_zro2")]
    pub material: MaterialPair,
    pub thermal: ThermalBcs,
    pub mechanical: MechanicalBcs,
    pub vc_boundary: Vec<VcBoundary>,
    pub kernel: KernelConfig,
    pub ga: GaConfig,
}

impl ProblemSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    /// A built-in name or a path to a TOML file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if std::path::Path::new(name_or_path).is_file() {
            Self::load(name_or_path)
        } else {
            builtin(name_or_path)
        }
    }

    fn check_sets(&self, mesh: &Mesh) -> Result<()> {
        let mut names: Vec<&str> = Vec::new();
        names.extend(self.thermal.dirichlet.iter().map(|b| b.set.as_str()));
        names.extend(self.thermal.flux.iter().map(|b| b.set.as_str()));
        names.extend(self.thermal.convection.iter().map(|b| b.set.as_str()));
        names.extend(self.mechanical.displacement.iter().map(|b| b.set.as_str()));
        names.extend(self.mechanical.traction.iter().map(|b| b.set.as_str()));
        names.extend(self.vc_boundary.iter().map(|b| b.set.as_str()));
        for n in names {
            mesh.boundary_set(n)?;
        }
        Ok(())
    }

    /// Prescribed corner-node values collected from `vc_boundary`.
    pub fn boundary_constraint(&self, mesh: &Mesh) -> Result<BoundaryConstraint> {
        let mut bc = BoundaryConstraint::default();
        for b in &self.vc_boundary {
            if !(0.0..=1.0).contains(&b.value) {
                return Err(Error::Config(format!(
                    "prescribed V_c {} on `{}` outside [0, 1]",
                    b.value, b.set
                )));
            }
            for &id in &mesh.boundary_set(&b.set)?.node_ids {
                let n = mesh.nodes()[id];
                if mesh.corner_index(id).is_none() || !b.region.is_none_or(|r| r.contains(n.x, n.y))
                {
                    continue;
                }
                if let Some(i) = bc.node_ids.iter().position(|&m| m == id) {
                    if bc.values[i] != b.value {
                        return Err(Error::Config(format!(
                            "node {id} receives conflicting V_c values {} and {}",
                            bc.values[i], b.value
                        )));
                    }
                }
                bc.push(id, b.value);
            }
        }
        Ok(bc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Constraint {
    HotZone { theta_star: f64, vc_star: f64 },
    MaxStress { sigma_star: f64 },
}

/// Thermal and mechanical response of one profile.
#[derive(Debug, Clone)]
pub struct ProfileEvaluation {
    pub objective: f64,
    pub violations: Vec<f64>,
    pub sigma_v_max_mpa: f64,
    pub ceramic_content: f64,
    pub temperature: TemperatureField,
    pub elastic: ElasticSolution,
}

/// A validated problem with its mesh and design space ready.
#[derive(Debug)]
pub struct Problem {
    spec: ProblemSpec,
    mesh: Mesh,
    model: PosteriorModel,
    region: Option<Vec<usize>>,
    constraints: Vec<Constraint>,
    evaluations: AtomicUsize,
}

impl Problem {
    pub fn build(spec: ProblemSpec) -> Result<Self> {
        let name = spec.name.clone();
        Self::build_inner(spec).map_err(|e| e.context(format!("problem `{name}`")))
    }

    fn build_inner(spec: ProblemSpec) -> Result<Self> {
        spec.material.validate()?;
        spec.ga.validate()?;
        let mesh = spec.mesh.build()?;
        spec.check_sets(&mesh)?;
        let bc = spec.boundary_constraint(&mesh)?;
        let model = PosteriorModel::condition(&mesh, &spec.kernel, &bc)?;
        let region = match &spec.evaluation_region {
            Some(r) => {
                let ids = mesh.elements_where(|x, y| r.contains(x, y));
                if ids.is_empty() {
                    return Err(Error::Config(
                        "evaluation region contains no element".into(),
                    ));
                }
                Some(ids)
            }
            None => None,
        };
        let mut problem = Problem {
            spec,
            mesh,
            model,
            region,
            constraints: Vec::new(),
            evaluations: AtomicUsize::new(0),
        };
        let mut constraints = Vec::new();
        for c in &problem.spec.constraints {
            constraints.push(match *c {
                ConstraintSpec::VfAboveThresholdWhereHot { theta_star, vc_star } => {
                    if !(0.0..=1.0).contains(&vc_star) {
                        return Err(Error::Config(format!("vc_star {vc_star} outside [0, 1]")));
                    }
                    Constraint::HotZone { theta_star, vc_star }
                }
                ConstraintSpec::MaxStressBelow {
                    sigma_star,
                    calibrate: None,
                } => Constraint::MaxStress { sigma_star },
                ConstraintSpec::MaxStressBelow {
                    sigma_star,
                    calibrate: Some(cal),
                } => {
                    let floor = problem.random_stress_floor(cal.samples)?;
                    let resolved = sigma_star * floor / cal.reference_floor;
                    log::info!(
                        "stress bound calibrated: floor {floor:.3} MPa over {} samples, sigma* = {resolved:.3} MPa",
                        cal.samples
                    );
                    Constraint::MaxStress { sigma_star: resolved }
                }
            });
        }
        problem.constraints = constraints;
        problem.evaluations.store(0, Ordering::Relaxed);
        Ok(problem)
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn model(&self) -> &PosteriorModel {
        &self.model
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Resolved stress bound, if the problem has one.
    pub fn sigma_star(&self) -> Option<f64> {
        self.constraints.iter().find_map(|c| match c {
            Constraint::MaxStress { sigma_star } => Some(*sigma_star),
            _ => None,
        })
    }

    /// Smallest stress over `count` design-space samples drawn with a seed
    /// independent of the GA stream.
    pub fn random_stress_floor(&self, count: usize) -> Result<f64> {
        if count == 0 {
            return Err(Error::Config(
                "calibration needs at least one sample".into(),
            ));
        }
        let base = self.spec.ga.rng_seed ^ 0x5eed_ca11_b0a7_0000;
        let stresses: Vec<f64> = (0..count as u64)
            .into_par_iter()
            .map(|i| {
                let field = self.model.sample(base.wrapping_add(i));
                self.respond(&field).map(|(_, _, s)| s)
            })
            .collect::<Result<_>>()?;
        Ok(stresses.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn ceramic_content(&self, field: &VolumeFractionField) -> f64 {
        match self.spec.ceramic_measure {
            CeramicMeasure::VolumeAverage => field.volume_average(&self.mesh),
            CeramicMeasure::NodeMean => field.node_average(),
        }
    }

    fn respond(
        &self,
        field: &VolumeFractionField,
    ) -> Result<(TemperatureField, ElasticSolution, f64)> {
        let s = &self.spec;
        let theta = assemble_and_solve_thermal(&self.mesh, field, &s.material, &s.thermal)?;
        let elastic = assemble_and_solve_elastic(
            &self.mesh,
            field,
            &s.material,
            &theta,
            &s.mechanical,
            s.planar,
        )?;
        let sigma = max_von_mises(&elastic, self.region.as_deref())? / 1e6;
        Ok((theta, elastic, sigma))
    }

    /// Full thermoelastic evaluation of one profile.
    pub fn evaluate_profile(&self, field: &VolumeFractionField) -> Result<ProfileEvaluation> {
        field.check_matches(&self.mesh)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let (temperature, elastic, sigma) = self.respond(field)?;
        let ceramic = self.ceramic_content(field);
        let objective = match self.spec.objective {
            Objective::MinMaxVonMises => sigma,
            Objective::MinCeramicContent => ceramic,
        };
        let violations = self
            .constraints
            .iter()
            .map(|c| match *c {
                Constraint::HotZone {
                    theta_star,
                    vc_star,
                } => hot_zone_violation(&self.mesh, field, &temperature, theta_star, vc_star),
                Constraint::MaxStress { sigma_star } => (sigma - sigma_star).max(0.0),
            })
            .collect();
        Ok(ProfileEvaluation {
            objective,
            violations,
            sigma_v_max_mpa: sigma,
            ceramic_content: ceramic,
            temperature,
            elastic,
        })
    }

    /// Runs the GA. `on_generation` sees every history record as it is made.
    pub fn run_with_observer(
        &self,
        on_generation: impl FnMut(&GenerationRecord),
    ) -> Result<RunResult> {
        let start = Instant::now();
        let before = self.evaluations();
        let out = evolve_with_observer(self, &self.model, &self.spec.ga, on_generation)
            .map_err(|e| e.context(format!("problem `{}`", self.spec.name)))?;
        let evaluation = self
            .evaluate_profile(&out.best.field)
            .map_err(|e| e.context("re-evaluating best profile"))?;
        let initial = &out.initial_population;
        let initial_mean_ceramic = initial
            .iter()
            .map(|i| self.ceramic_content(&i.field))
            .sum::<f64>()
            / initial.len() as f64;
        let feasible: Vec<f64> = initial
            .iter()
            .filter(|i| i.feasible)
            .map(|i| self.ceramic_content(&i.field))
            .collect();
        let initial_feasible_fraction = feasible.len() as f64 / initial.len() as f64;
        let initial_feasible_mean_ceramic =
            (!feasible.is_empty()).then(|| feasible.iter().sum::<f64>() / feasible.len() as f64);
        Ok(RunResult {
            name: self.spec.name.clone(),
            best: out.best,
            evaluation,
            history: out.history,
            evaluations: self.evaluations() - before,
            wall_clock: start.elapsed(),
            sigma_star: self.sigma_star(),
            initial_mean_ceramic,
            initial_feasible_fraction,
            initial_feasible_mean_ceramic,
        })
    }

    /// Runs the GA, logging one line per generation.
    pub fn run(&self) -> Result<RunResult> {
        self.run_with_observer(|r| {
            log::info!(
                "generation {:>4}: best {:.6} ({}), feasible fraction {:.2}",
                r.generation,
                r.best_objective,
                if r.best_feasible {
                    "feasible"
                } else {
                    "infeasible"
                },
                r.feasible_fraction
            )
        })
    }
}

impl FitnessProblem for Problem {
    fn evaluate(&self, field: &VolumeFractionField) -> Result<Evaluation> {
        let e = self.evaluate_profile(field)?;
        Ok(Evaluation {
            objective: e.objective,
            violations: e.violations,
        })
    }
}

/// Mean shortfall `V_c* - V_c` over hot corner nodes that fall short.
fn hot_zone_violation(
    mesh: &Mesh,
    field: &VolumeFractionField,
    theta: &TemperatureField,
    theta_star: f64,
    vc_star: f64,
) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for (slot, &id) in mesh.corner_node_ids().iter().enumerate() {
        if theta.theta[id] >= theta_star {
            let short = vc_star - field.values()[slot];
            if short > 0.0 {
                sum += short;
                count += 1;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Outcome of one optimization run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub name: String,
    pub best: Individual,
    pub evaluation: ProfileEvaluation,
    pub history: Vec<GenerationRecord>,
    pub evaluations: usize,
    pub wall_clock: Duration,
    pub sigma_star: Option<f64>,
    pub initial_mean_ceramic: f64,
    pub initial_feasible_fraction: f64,
    /// Mean ceramic content over the feasible members of the initial population.
    pub initial_feasible_mean_ceramic: Option<f64>,
}

/// Per-run overrides applied on top of a spec.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub max_generations: Option<usize>,
    pub population_size: Option<usize>,
}

impl RunOptions {
    pub fn apply(&self, spec: &mut ProblemSpec) {
        if let Some(s) = self.seed {
            spec.ga.rng_seed = s;
        }
        if let Some(m) = self.max_generations {
            spec.ga.max_generations = Some(m);
        }
        if let Some(p) = self.population_size {
            spec.ga.population_size = p;
        }
    }
}

/// Builds the problem and runs the GA, on a dedicated thread pool when
/// `threads` is given.
pub fn run(spec: &ProblemSpec, opts: &RunOptions) -> Result<(Problem, RunResult)> {
    let mut spec = spec.clone();
    opts.apply(&mut spec);
    let go = || -> Result<(Problem, RunResult)> {
        let problem = Problem::build(spec)?;
        let result = problem.run()?;
        Ok((problem, result))
    };
    match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
            .install(go),
        None => go(),
    }
}
