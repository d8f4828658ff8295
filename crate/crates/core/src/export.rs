//! Result files: legacy VTK for the final profile, CSV for the chromosome and
//! the convergence history, JSON for the run summary.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{ElasticSolution, TemperatureField};
use crate::ga::GenerationRecord;
use crate::material::{interpolate_corners, VolumeFractionField};
use crate::mesh::Mesh;
use crate::problem::{Problem, RunResult};
use crate::quad9;

/// VTK cell type of the biquadratic quadrilateral.
const VTK_BIQUADRATIC_QUAD: u8 = 28;

/// Volume fraction at every mesh node (mid-edge and center nodes interpolated).
pub fn nodal_volume_fraction(mesh: &Mesh, field: &VolumeFractionField) -> Result<Vec<f64>> {
    field.check_matches(mesh)?;
    let mut out = vec![f64::NAN; mesh.node_count()];
    for (e, el) in mesh.elements().iter().enumerate() {
        let corners = field.element_corners(mesh, e);
        for (k, &id) in el.node_ids.iter().enumerate() {
            let (xi, eta) = quad9::NODE_COORDS[k];
            out[id] = interpolate_corners(&corners, xi, eta);
        }
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn write_vtk(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    field: &VolumeFractionField,
    theta: &TemperatureField,
    elastic: &ElasticSolution,
) -> Result<()> {
    let path = path.as_ref();
    let vc = nodal_volume_fraction(mesh, field)?;
    let io = |e| Error::io(path, e);
    let mut w = create(path)?;
    let n = mesh.node_count();
    let ne = mesh.element_count();
    writeln!(w, "# vtk DataFile Version 3.0").map_err(io)?;
    writeln!(w, "fgm profile").map_err(io)?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID").map_err(io)?;
    writeln!(w, "POINTS {n} double").map_err(io)?;
    for p in mesh.nodes() {
        writeln!(w, "{:e} {:e} 0", p.x, p.y).map_err(io)?;
    }
    writeln!(w, "CELLS {ne} {}", ne * 10).map_err(io)?;
    for el in mesh.elements() {
        let ids: Vec<String> = el.node_ids.iter().map(|i| i.to_string()).collect();
        writeln!(w, "9 {}", ids.join(" ")).map_err(io)?;
    }
    writeln!(w, "CELL_TYPES {ne}").map_err(io)?;
    for _ in 0..ne {
        writeln!(w, "{VTK_BIQUADRATIC_QUAD}").map_err(io)?;
    }
    writeln!(w, "POINT_DATA {n}").map_err(io)?;
    writeln!(w, "SCALARS temperature double 1\nLOOKUP_TABLE default").map_err(io)?;
    for t in &theta.theta {
        writeln!(w, "{t:e}").map_err(io)?;
    }
    writeln!(w, "SCALARS ceramic_fraction double 1\nLOOKUP_TABLE default").map_err(io)?;
    for v in &vc {
        writeln!(w, "{v:e}").map_err(io)?;
    }
    writeln!(w, "VECTORS displacement double").map_err(io)?;
    for u in elastic.u.chunks_exact(2) {
        writeln!(w, "{:e} {:e} 0", u[0], u[1]).map_err(io)?;
    }
    writeln!(w, "CELL_DATA {ne}").map_err(io)?;
    writeln!(w, "SCALARS von_mises_mpa double 1\nLOOKUP_TABLE default").map_err(io)?;
    for s in elastic.element_mean_von_mises() {
        writeln!(w, "{:e}", s / 1e6).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Serialize, Deserialize)]
struct VcRow {
    node_id: usize,
    x: f64,
    y: f64,
    vc: f64,
}

/// One row per corner node, in chromosome order.
pub fn write_vc_csv(
    path: impl AsRef<Path>,
    mesh: &Mesh,
    field: &VolumeFractionField,
) -> Result<()> {
    let path = path.as_ref();
    field.check_matches(mesh)?;
    let mut w = csv::Writer::from_writer(create(path)?);
    for (&id, &vc) in mesh.corner_node_ids().iter().zip(field.values()) {
        let p = mesh.nodes()[id];
        w.serialize(VcRow {
            node_id: id,
            x: p.x,
            y: p.y,
            vc,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a profile written by [`write_vc_csv`]. Rows may come in any order
/// but every corner node must appear exactly once.
pub fn read_vc_csv(path: impl AsRef<Path>, mesh: &Mesh) -> Result<VolumeFractionField> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = vec![None; mesh.corner_count()];
    for row in csv::Reader::from_reader(file).deserialize() {
        let row: VcRow = row?;
        let slot = mesh.corner_index(row.node_id).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "node {} is not a corner node of the mesh",
                row.node_id
            ))
        })?;
        if !row.vc.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "non-finite vc at node {}",
                row.node_id
            )));
        }
        if values[slot].replace(row.vc).is_some() {
            return Err(Error::InvalidArgument(format!(
                "node {} listed twice",
                row.node_id
            )));
        }
    }
    let missing = values.iter().filter(|v| v.is_none()).count();
    if missing > 0 {
        return Err(Error::InvalidArgument(format!(
            "{missing} of {} corner nodes missing from {}",
            mesh.corner_count(),
            path.display()
        )));
    }
    Ok(VolumeFractionField::new(
        values.into_iter().flatten().collect(),
    ))
}

pub fn write_history_csv(path: impl AsRef<Path>, history: &[GenerationRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in history {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub seed: u64,
    pub objective: f64,
    pub feasible: bool,
    pub violations: Vec<f64>,
    pub sigma_v_max_mpa: f64,
    pub ceramic_content: f64,
    pub sigma_star_mpa: Option<f64>,
    pub generations: usize,
    pub evaluations: usize,
    pub wall_clock_s: f64,
    pub initial_mean_ceramic: f64,
    pub initial_feasible_fraction: f64,
    pub initial_feasible_mean_ceramic: Option<f64>,
}

impl RunSummary {
    pub fn new(problem: &Problem, result: &RunResult) -> Self {
        RunSummary {
            name: result.name.clone(),
            seed: problem.spec().ga.rng_seed,
            objective: result.best.objective,
            feasible: result.best.feasible,
            violations: result.best.violations.clone(),
            sigma_v_max_mpa: result.evaluation.sigma_v_max_mpa,
            ceramic_content: result.evaluation.ceramic_content,
            sigma_star_mpa: result.sigma_star,
            generations: result.history.len(),
            evaluations: result.evaluations,
            wall_clock_s: result.wall_clock.as_secs_f64(),
            initial_mean_ceramic: result.initial_mean_ceramic,
            initial_feasible_fraction: result.initial_feasible_fraction,
            initial_feasible_mean_ceramic: result.initial_feasible_mean_ceramic,
        }
    }
}

/// Writes `profile.vtk`, `vc.csv`, `history.csv` and `summary.json` into
/// `dir`, creating it if needed. Returns the paths written.
pub fn write_run_outputs(
    dir: impl AsRef<Path>,
    problem: &Problem,
    result: &RunResult,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mesh = problem.mesh();
    let field = &result.best.field;
    let paths: Vec<PathBuf> = ["profile.vtk", "vc.csv", "history.csv", "summary.json"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_vtk(
        &paths[0],
        mesh,
        field,
        &result.evaluation.temperature,
        &result.evaluation.elastic,
    )?;
    write_vc_csv(&paths[1], mesh, field)?;
    write_history_csv(&paths[2], &result.history)?;
    let summary = serde_json::to_string_pretty(&RunSummary::new(problem, result))
        .map_err(|e| Error::Config(format!("cannot serialize summary: {e}")))?;
    std::fs::write(&paths[3], summary).map_err(|e| Error::io(&paths[3], e))?;
    Ok(paths)
}
