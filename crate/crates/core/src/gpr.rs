//! Gaussian-process design space over the corner nodes of a mesh.
//!
//! The prior is zero-mean with a squared-exponential kernel. Conditioning on
//! prescribed boundary volume fractions gives the posterior `N(mean, K*)` that
//! all GA operators draw from; [`PosteriorModel::project`] pulls arbitrary
//! chromosomes back toward that space by damping the low-eigenvalue (rough)
//! components of their deviation from the posterior mean.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::VolumeFractionField;
use crate::mesh::Mesh;

/// Jitter ladder tried when a covariance factorization fails.
/// Default observation noise variance.
pub const DEFAULT_NOISE_VAR: f64 = 1e-3;

const JITTERS: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Correlation length, m.
    pub length_scale: f64,
    /// Kernel amplitude sigma (the kernel scales with its square).
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Observation noise variance used when conditioning.
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    /// Regularizer of the smoothing projection; defaults to `noise_var`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_var: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_noise_var() -> f64 {
    DEFAULT_NOISE_VAR
}

impl KernelConfig {
    pub fn new(length_scale: f64, amplitude: f64) -> Self {
        KernelConfig {
            length_scale,
            amplitude,
            noise_var: DEFAULT_NOISE_VAR,
            projection_var: None,
        }
    }

    pub fn projection_var(&self) -> f64 {
        self.projection_var.unwrap_or(self.noise_var)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.length_scale > 0.0
            && self.amplitude > 0.0
            && self.noise_var > 0.0
            && self.projection_var() > 0.0;
        if !ok {
            return Err(Error::Config(format!(
                "kernel parameters must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn eval_sq(&self, sq_dist: f64) -> f64 {
        self.amplitude.powi(2) * (-sq_dist / (2.0 * self.length_scale.powi(2))).exp()
    }
}

/// Prescribed volume fractions at a subset of corner nodes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryConstraint {
    /// Mesh node ids; each must be an element corner.
    pub node_ids: Vec<usize>,
    pub values: Vec<f64>,
}

impl BoundaryConstraint {
    pub fn push(&mut self, node_id: usize, value: f64) {
        if let Some(i) = self.node_ids.iter().position(|&n| n == node_id) {
            self.values[i] = value;
        } else {
            self.node_ids.push(node_id);
            self.values.push(value);
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

/// Kernel matrix between node lists `a` and `b`.
pub fn build_kernel(
    mesh: &Mesh,
    cfg: &KernelConfig,
    a: &[usize],
    b: &[usize],
) -> Result<DMatrix<f64>> {
    let mut k = mesh.pairwise_sq_distances(a, b)?;
    k.apply(|d| *d = cfg.eval_sq(*d));
    Ok(k)
}

fn cholesky_with_jitter(
    m: &DMatrix<f64>,
    cfg: &KernelConfig,
    first_try_exact: bool,
) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if first_try_exact {
        if let Some(c) = Cholesky::new(m.clone()) {
            return Ok((c, 0.0));
        }
    }
    for &jitter in &JITTERS {
        let mut shifted = m.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(shifted) {
            return Ok((c, jitter));
        }
    }
    Err(Error::IllConditioned {
        jitter: *JITTERS.last().unwrap(),
        length_scale: cfg.length_scale,
        noise_var: cfg.noise_var,
    })
}

/// The conditioned design space.
#[derive(Debug, Clone)]
pub struct PosteriorModel {
    cfg: KernelConfig,
    /// Chromosome slots with prescribed values.
    constrained: Vec<(usize, f64)>,
    free_ids: Vec<usize>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    cov_factor: DMatrix<f64>,
    cov_jitter: f64,
    kernel: DMatrix<f64>,
    proj_factor: Cholesky<f64, Dyn>,
}

impl PosteriorModel {
    /// Conditions the zero-mean prior over all corner nodes on `bc`.
    pub fn condition(mesh: &Mesh, cfg: &KernelConfig, bc: &BoundaryConstraint) -> Result<Self> {
        cfg.validate()?;
        if bc.node_ids.len() != bc.values.len() {
            return Err(Error::InvalidArgument(
                "boundary constraint ids and values differ in length".into(),
            ));
        }
        let corners = mesh.corner_node_ids();
        let n = corners.len();
        let mut constrained = Vec::with_capacity(bc.len());
        for (&id, &v) in bc.node_ids.iter().zip(&bc.values) {
            let slot = mesh.corner_index(id).ok_or_else(|| {
                Error::InvalidArgument(format!("constrained node {id} is not an element corner"))
            })?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "prescribed volume fraction {v} at node {id} outside [0, 1]"
                )));
            }
            constrained.push((slot, v));
        }
        constrained.sort_by_key(|c| c.0);
        constrained.dedup_by_key(|c| c.0);
        let mut is_constrained = vec![false; n];
        for &(s, _) in &constrained {
            is_constrained[s] = true;
        }
        let free_ids = (0..n).filter(|&s| !is_constrained[s]).collect();

        let kernel = build_kernel(mesh, cfg, corners, corners)?;
        let (mean, mut cov) = if constrained.is_empty() {
            (DVector::zeros(n), kernel.clone())
        } else {
            let b_nodes: Vec<usize> = constrained.iter().map(|&(s, _)| corners[s]).collect();
            let f_b = DVector::from_iterator(constrained.len(), constrained.iter().map(|c| c.1));
            let mut k_b = build_kernel(mesh, cfg, &b_nodes, &b_nodes)?;
            for i in 0..k_b.nrows() {
                k_b[(i, i)] += cfg.noise_var;
            }
            let (chol_b, _) = cholesky_with_jitter(&k_b, cfg, true)?;
            let l_b = chol_b.l();
            let k_star = build_kernel(mesh, cfg, &b_nodes, corners)?;
            // V = L_b^{-1} K_*, so K_*^T (K_b + s I)^{-1} K_* = V^T V.
            let v = l_b
                .solve_lower_triangular(&k_star)
                .expect("triangular factor is nonsingular");
            let w = l_b
                .solve_lower_triangular(&f_b)
                .expect("triangular factor is nonsingular");
            let mean = v.tr_mul(&w);
            let cov = &kernel - v.tr_mul(&v);
            (mean, cov)
        };
        // Enforce exact symmetry lost to round-off in the product.
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
        }
        let (chol_cov, cov_jitter) = cholesky_with_jitter(&cov, cfg, false)?;
        let cov_factor = chol_cov.l();

        let mut reg = kernel.clone();
        for i in 0..n {
            reg[(i, i)] += cfg.projection_var();
        }
        let (proj_factor, _) = cholesky_with_jitter(&reg, cfg, true)?;

        Ok(PosteriorModel {
            cfg: *cfg,
            constrained,
            free_ids,
            mean,
            cov,
            cov_factor,
            cov_jitter,
            kernel,
            proj_factor,
        })
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn mean_field(&self) -> VolumeFractionField {
        VolumeFractionField::new(self.mean.iter().copied().collect())
    }

    /// Posterior covariance `K*` (before jitter).
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Lower factor of `K* + jitter I`.
    pub fn covariance_factor(&self) -> &DMatrix<f64> {
        &self.cov_factor
    }

    pub fn jitter(&self) -> f64 {
        self.cov_jitter
    }

    /// Prior kernel over all corner nodes, used by the projection.
    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// `(slot, prescribed value)` pairs.
    pub fn constrained(&self) -> &[(usize, f64)] {
        &self.constrained
    }

    pub fn free_ids(&self) -> &[usize] {
        &self.free_ids
    }

    fn standard_normal(&self, rng: &mut impl Rng) -> DVector<f64> {
        DVector::from_fn(self.len(), |_, _| rng.sample(StandardNormal))
    }

    /// Raw posterior draw `mean + L z`, no clamping and no boundary overwrite.
    pub fn draw(&self, rng: &mut impl Rng) -> DVector<f64> {
        &self.mean + &self.cov_factor * self.standard_normal(rng)
    }

    /// A design-space profile: a posterior draw with the prescribed nodes set
    /// to their values, clamped to `[0, 1]`.
    pub fn sample_with(&self, rng: &mut impl Rng) -> VolumeFractionField {
        let mut v = self.draw(rng);
        for &(s, value) in &self.constrained {
            v[s] = value;
        }
        VolumeFractionField::new(v.iter().copied().collect())
    }

    pub fn sample(&self, rng_seed: u64) -> VolumeFractionField {
        self.sample_with(&mut ChaCha8Rng::seed_from_u64(rng_seed))
    }

    /// Zero-mean draw with covariance `K*`.
    pub fn perturbation_with(&self, rng: &mut impl Rng) -> DVector<f64> {
        &self.cov_factor * self.standard_normal(rng)
    }

    pub fn sample_perturbation(&self, rng_seed: u64) -> DVector<f64> {
        self.perturbation_with(&mut ChaCha8Rng::seed_from_u64(rng_seed))
    }

    /// `K (K + s I)^{-1} d` for a deviation vector `d`.
    pub fn project_deviation(&self, deviation: &DVector<f64>) -> DVector<f64> {
        &self.kernel * self.proj_factor.solve(deviation)
    }

    /// Smooths `field` by projecting its deviation from the posterior mean.
    pub fn project(&self, field: &VolumeFractionField) -> Result<VolumeFractionField> {
        self.project_values(field.values())
    }

    pub fn project_values(&self, values: &[f64]) -> Result<VolumeFractionField> {
        if values.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "field length {} does not match design space size {}",
                values.len(),
                self.len()
            )));
        }
        let d = DVector::from_column_slice(values) - &self.mean;
        let projected = &self.mean + self.project_deviation(&d);
        Ok(VolumeFractionField::new(
            projected.iter().copied().collect(),
        ))
    }
}
