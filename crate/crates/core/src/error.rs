use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the optimization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("element {element} is inverted or degenerate (det J = {det_j:.3e} at a Gauss point)")]
    InvertedElement { element: usize, det_j: f64 },

    #[error("covariance matrix is ill-conditioned: factorization failed even with jitter {jitter:e} (length scale {length_scale}, noise variance {noise_var})")]
    IllConditioned {
        jitter: f64,
        length_scale: f64,
        noise_var: f64,
    },

    #[error(
        "floating thermal problem: no Dirichlet or convection boundary fixes the temperature level"
    )]
    FloatingThermal,

    #[error("rigid body mode not restrained: {0}")]
    RigidBodyMode(String),

    #[error("factorization failed: non-positive pivot {pivot:.3e} at equation {equation}")]
    Factorization { equation: usize, pivot: f64 },

    #[error("unknown boundary set `{0}`")]
    UnknownBoundarySet(String),

    #[error("unknown built-in problem `{0}`")]
    UnknownProblem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
