use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use fgm_core::export::{read_vc_csv, write_run_outputs, write_vc_csv, write_vtk};
use fgm_core::problem::{builtin_names, ProfileEvaluation};
use fgm_core::{load_mesh, Problem, ProblemSpec, RunOptions};

#[derive(Parser)]
#[command(
    name = "fgm",
    version,
    about = "Optimize functionally graded material profiles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the genetic algorithm on a built-in problem or a TOML config.
    Run {
        /// Built-in name or path to a TOML problem file.
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for profile.vtk, vc.csv, history.csv, summary.json.
        #[arg(long, default_value = "fgm-out")]
        out: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Stop after this many generations regardless of convergence.
        #[arg(long)]
        max_generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
    },
    /// Evaluate one volume-fraction profile (node_id,x,y,vc CSV).
    Evaluate {
        config: String,
        vf_csv: PathBuf,
        /// Also write a VTK file of the solution.
        #[arg(long)]
        vtk: Option<PathBuf>,
    },
    /// Draw random profiles from the design space and evaluate them.
    Sample {
        config: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the sample_<i>.csv files.
        #[arg(long, default_value = "fgm-samples")]
        out: PathBuf,
    },
    /// Print node, element and boundary-set counts of a mesh file.
    MeshInfo { meshfile: PathBuf },
    /// Print the TOML of a built-in problem (or list them when omitted).
    ShowConfig { name: Option<String> },
}

fn load_spec(config: &str) -> Result<ProblemSpec> {
    if Path::new(config).is_file() {
        return ProblemSpec::load(config).with_context(|| format!("loading config {config}"));
    }
    ProblemSpec::resolve(config).with_context(|| {
        format!(
            "`{config}` is neither a file nor a built-in ({})",
            builtin_names().join(", ")
        )
    })
}

fn report(e: &ProfileEvaluation, sigma_star: Option<f64>) {
    println!("objective            {:.6}", e.objective);
    println!("max von Mises (MPa)  {:.3}", e.sigma_v_max_mpa);
    println!("ceramic content      {:.4}", e.ceramic_content);
    if let Some(s) = sigma_star {
        println!("stress limit (MPa)   {s:.3}");
    }
    let feasible = e.violations.iter().all(|&v| v == 0.0);
    println!(
        "violations           {:?} ({})",
        e.violations,
        if feasible { "feasible" } else { "infeasible" }
    );
}

fn run(
    config: &str,
    seed: Option<u64>,
    out: PathBuf,
    threads: Option<usize>,
    max_generations: Option<usize>,
    population_size: Option<usize>,
) -> Result<()> {
    if threads == Some(0) {
        bail!("--threads must be at least 1");
    }
    let spec = load_spec(config)?;
    let opts = RunOptions {
        seed,
        threads,
        max_generations,
        population_size,
    };
    let (problem, result) = fgm_core::run(&spec, &opts)?;
    let paths = write_run_outputs(&out, &problem, &result)?;
    println!("problem              {}", result.name);
    println!("generations          {}", result.history.len());
    println!("evaluations          {}", result.evaluations);
    println!(
        "wall clock (s)       {:.2}",
        result.wall_clock.as_secs_f64()
    );
    report(&result.evaluation, result.sigma_star);
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn evaluate(config: &str, csv: PathBuf, vtk: Option<PathBuf>) -> Result<()> {
    let problem = Problem::build(load_spec(config)?)?;
    let field = read_vc_csv(&csv, problem.mesh())?;
    let e = problem.evaluate_profile(&field)?;
    report(&e, problem.sigma_star());
    if let Some(path) = vtk {
        write_vtk(&path, problem.mesh(), &field, &e.temperature, &e.elastic)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn sample(config: &str, count: usize, seed: Option<u64>, out: PathBuf) -> Result<()> {
    let problem = Problem::build(load_spec(config)?)?;
    let seed = seed.unwrap_or(problem.spec().ga.rng_seed);
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    println!("sample,objective,sigma_v_max_mpa,ceramic_content,total_violation");
    for i in 0..count {
        let field = problem.model().sample(seed.wrapping_add(i as u64));
        let e = problem.evaluate_profile(&field)?;
        println!(
            "{i},{:.6},{:.3},{:.4},{:.6}",
            e.objective,
            e.sigma_v_max_mpa,
            e.ceramic_content,
            e.violations.iter().sum::<f64>()
        );
        write_vc_csv(out.join(format!("sample_{i}.csv")), problem.mesh(), &field)?;
    }
    Ok(())
}

fn mesh_info(path: PathBuf) -> Result<()> {
    let mesh = load_mesh(&path)?;
    println!("nodes         {}", mesh.node_count());
    println!("corner nodes  {}", mesh.corner_count());
    println!("elements      {}", mesh.element_count());
    println!("area          {:.6}", mesh.area());
    for (name, set) in mesh.boundary_sets() {
        println!(
            "set {name:<12} {} nodes, {} edges",
            set.node_ids.len(),
            set.edges.len()
        );
    }
    Ok(())
}

fn show_config(name: Option<String>) -> Result<()> {
    match name {
        Some(n) => print!("{}", load_spec(&n)?.to_toml()?),
        None => builtin_names().iter().for_each(|n| println!("{n}")),
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            out,
            threads,
            max_generations,
            population,
        } => run(&config, seed, out, threads, max_generations, population),
        Command::Evaluate {
            config,
            vf_csv,
            vtk,
        } => evaluate(&config, vf_csv, vtk),
        Command::Sample {
            config,
            count,
            seed,
            out,
        } => sample(&config, count, seed, out),
        Command::MeshInfo { meshfile } => mesh_info(meshfile),
        Command::ShowConfig { name } => show_config(name),
    }
}
