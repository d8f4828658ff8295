//! Functionally graded material profile optimization on arbitrary 2D domains.
//!
//! Volume-fraction profiles are drawn from a Gaussian process conditioned on
//! prescribed boundary values ([`gpr`]), scored by a steady thermoelastic
//! finite-element analysis ([`fem`]) and improved by a genetic algorithm whose
//! crossover and mutation stay inside the Gaussian-process design space ([`ga`]).
//! [`problem`] ties these together into runnable problem definitions.

pub mod error;
pub mod export;
pub mod fem;
pub mod ga;
pub mod gpr;
pub mod linalg;
pub mod material;
pub mod mesh;
pub mod problem;
pub mod quad9;

pub use error::{Error, Result};
pub use ga::{evolve, Evaluation, FitnessProblem, GaConfig, GaOutcome, Individual};
pub use gpr::{BoundaryConstraint, KernelConfig, PosteriorModel};
pub use material::{blend, interpolate_vf, MaterialPair, PlanarAssumption, VolumeFractionField};
pub use mesh::{generate_rectangle, load_mesh, Mesh};
pub use problem::{builtin, run, Problem, ProblemSpec, RunOptions, RunResult};
