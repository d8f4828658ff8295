//! Genetic algorithm over volume-fraction chromosomes.
//!
//! Every generation runs: evaluate, snapshot the elite, tournament selection,
//! pairwise SBX crossover with projection repair, posterior-covariance
//! mutation, evaluation of the offspring, and finally the elite replacing the
//! worst offspring. Random streams are derived from `(seed, generation, slot)`
//! so results do not depend on whether evaluation runs in parallel.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpr::PosteriorModel;
use crate::material::VolumeFractionField;

/// Crossover strength as a function of generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaSchedule {
    Constant {
        value: f64,
    },
    /// `base * (1 + (1 - exp(-g / timescale)) / 2)`.
    Saturating {
        base: f64,
        timescale: f64,
    },
}

impl Default for EtaSchedule {
    fn default() -> Self {
        EtaSchedule::Saturating {
            base: 1.5,
            timescale: 100.0,
        }
    }
}

impl EtaSchedule {
    pub fn eta(&self, generation: usize) -> f64 {
        match *self {
            EtaSchedule::Constant { value } => value,
            EtaSchedule::Saturating { base, timescale } => {
                base * (1.0 + 0.5 * (1.0 - (-(generation as f64) / timescale).exp()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub tournament_size: usize,
    pub eta_schedule: EtaSchedule,
    pub mutation_scale: f64,
    pub mutation_prob: f64,
    pub min_generations: usize,
    pub stall_window: usize,
    pub stall_tolerance: f64,
    /// Hard cap on generations regardless of the stall test.
    pub max_generations: Option<usize>,
    pub rng_seed: u64,
    /// Evaluate and breed individuals on the rayon pool.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 200,
            tournament_size: 4,
            eta_schedule: EtaSchedule::default(),
            mutation_scale: 0.25,
            mutation_prob: 0.3,
            min_generations: 100,
            stall_window: 10,
            stall_tolerance: 0.1,
            max_generations: None,
            rng_seed: 0,
            parallel: true,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.tournament_size == 0 {
            return fail("tournament_size must be at least 1".into());
        }
        if self.population_size % 2 != 0 || self.population_size < 2 * self.tournament_size {
            return fail(format!(
                "population_size must be even and at least twice tournament_size, got {} with k = {}",
                self.population_size, self.tournament_size
            ));
        }
        if !(self.mutation_scale > 0.0 && self.mutation_scale <= 1.0) {
            return fail(format!(
                "mutation_scale must lie in (0, 1], got {}",
                self.mutation_scale
            ));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return fail(format!(
                "mutation_prob must lie in [0, 1], got {}",
                self.mutation_prob
            ));
        }
        if self.stall_window == 0 {
            return fail("stall_window must be at least 1".into());
        }
        if !(self.stall_tolerance >= 0.0) {
            return fail("stall_tolerance must be non-negative".into());
        }
        if self.max_generations == Some(0) {
            return fail("max_generations must be at least 1".into());
        }
        Ok(())
    }
}

/// Objective value and per-constraint violation magnitudes (zero when met).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub violations: Vec<f64>,
}

/// A minimization problem over volume-fraction fields.
pub trait FitnessProblem: Sync {
    fn evaluate(&self, field: &VolumeFractionField) -> Result<Evaluation>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub field: VolumeFractionField,
    pub objective: f64,
    pub violations: Vec<f64>,
    pub fitness: f64,
    pub feasible: bool,
}

impl Individual {
    fn from_evaluation(field: VolumeFractionField, result: Result<Evaluation>) -> Self {
        match result {
            Ok(ev) => {
                let feasible = ev.objective.is_finite() && ev.violations.iter().all(|&v| v <= 0.0);
                Individual {
                    field,
                    objective: ev.objective,
                    violations: ev.violations,
                    fitness: f64::NAN,
                    feasible,
                }
            }
            Err(e) => {
                log::warn!("evaluation failed, individual gets worst fitness: {e}");
                Individual {
                    field,
                    objective: f64::INFINITY,
                    violations: vec![f64::INFINITY],
                    fitness: f64::INFINITY,
                    feasible: false,
                }
            }
        }
    }

    pub fn total_violation(&self) -> f64 {
        self.violations.iter().map(|v| v.max(0.0)).sum()
    }

    /// Ordering key that stays monotone across generations: any feasible
    /// individual beats any infeasible one.
    fn rank_key(&self) -> (bool, f64) {
        (!self.feasible, self.fitness)
    }
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank_key().partial_cmp(&b.rank_key()) == Some(std::cmp::Ordering::Less)
}

/// One row of the convergence history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_objective: f64,
    pub best_feasible: bool,
    pub mean_fitness: f64,
    pub feasible_fraction: f64,
}

impl GenerationRecord {
    /// Lexicographic `(infeasible, fitness)` key; non-increasing under elitism.
    pub fn key(&self) -> (bool, f64) {
        (!self.best_feasible, self.best_fitness)
    }
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub history: Vec<GenerationRecord>,
    pub initial_population: Vec<Individual>,
    pub final_population: Vec<Individual>,
}

/// Spread factor for one uniform draw `r` in `[0, 1)`.
pub fn spread_factor(r: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if r <= 0.5 {
        (2.0 * r).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - r))).powf(e)
    }
}

/// SBX children for given per-node draws `r`. Output is raw: neither
/// projected nor clamped.
pub fn sbx_with_draws(p1: &[f64], p2: &[f64], eta: f64, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(p1.len(), p2.len(), "parents differ in length");
    assert_eq!(p1.len(), r.len(), "draw vector differs in length");
    let mut c1 = Vec::with_capacity(p1.len());
    let mut c2 = Vec::with_capacity(p1.len());
    for i in 0..p1.len() {
        let b = spread_factor(r[i], eta);
        c1.push(0.5 * ((1.0 + b) * p1[i] + (1.0 - b) * p2[i]));
        c2.push(0.5 * ((1.0 - b) * p1[i] + (1.0 + b) * p2[i]));
    }
    (c1, c2)
}

pub fn sbx_crossover(
    p1: &VolumeFractionField,
    p2: &VolumeFractionField,
    eta: f64,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<f64>) {
    let r: Vec<f64> = (0..p1.len()).map(|_| rng.random::<f64>()).collect();
    sbx_with_draws(p1.values(), p2.values(), eta, &r)
}

/// SBX followed by projection onto the design space and clamping.
pub fn crossover_and_repair(
    p1: &VolumeFractionField,
    p2: &VolumeFractionField,
    eta: f64,
    model: &PosteriorModel,
    rng: &mut impl Rng,
) -> Result<(VolumeFractionField, VolumeFractionField)> {
    let (c1, c2) = sbx_crossover(p1, p2, eta, rng);
    Ok((model.project_values(&c1)?, model.project_values(&c2)?))
}

/// With probability `mutation_prob`, adds `eps` times a posterior perturbation.
pub fn mutate(
    field: &VolumeFractionField,
    model: &PosteriorModel,
    eps: f64,
    mutation_prob: f64,
    rng: &mut impl Rng,
) -> VolumeFractionField {
    if rng.random::<f64>() >= mutation_prob {
        return field.clone();
    }
    let p = model.perturbation_with(rng);
    VolumeFractionField::new(
        field
            .values()
            .iter()
            .zip(p.iter())
            .map(|(v, d)| v + eps * d)
            .collect(),
    )
}

/// Assigns Deb's feasibility-rule fitness in place.
pub fn deb_fitness(population: &mut [Individual]) {
    let f_max = population
        .iter()
        .filter(|i| i.feasible)
        .map(|i| i.objective)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .unwrap_or(0.0);
    for ind in population.iter_mut() {
        ind.fitness = if ind.feasible {
            ind.objective
        } else {
            let v = ind.total_violation();
            // A zero-violation individual can only be infeasible through a
            // non-finite objective; keep it behind every feasible one.
            if v > 0.0 {
                f_max + v
            } else {
                f64::INFINITY
            }
        };
    }
}

/// Parent pool of `population.len()` tournament winners (indices).
pub fn tournament_select(population: &[Individual], k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = population.len();
    assert!(
        k >= 1 && k <= n,
        "tournament size {k} invalid for population {n}"
    );
    (0..n)
        .map(|_| {
            index::sample(rng, n, k)
                .into_iter()
                .reduce(|a, b| {
                    if better(&population[b], &population[a]) {
                        b
                    } else {
                        a
                    }
                })
                .expect("k >= 1")
        })
        .collect()
}

/// Independent stream for `(generation, slot)` under `seed`.
pub fn derived_rng(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

const SELECTION_SLOT: usize = u32::MAX as usize;

fn evaluate_all<P: FitnessProblem + ?Sized>(
    problem: &P,
    fields: Vec<VolumeFractionField>,
    parallel: bool,
) -> Vec<Individual> {
    let eval = |f: VolumeFractionField| {
        let r = problem.evaluate(&f);
        Individual::from_evaluation(f, r)
    };
    if parallel {
        fields.into_par_iter().map(eval).collect()
    } else {
        fields.into_iter().map(eval).collect()
    }
}

fn best_index(population: &[Individual]) -> usize {
    (1..population.len()).fold(0, |b, i| {
        if better(&population[i], &population[b]) {
            i
        } else {
            b
        }
    })
}

fn worst_index(population: &[Individual]) -> usize {
    (1..population.len()).fold(0, |w, i| {
        if better(&population[w], &population[i]) {
            i
        } else {
            w
        }
    })
}

fn record(generation: usize, population: &[Individual]) -> GenerationRecord {
    let best = &population[best_index(population)];
    let finite: Vec<f64> = population
        .iter()
        .map(|i| i.fitness)
        .filter(|f| f.is_finite())
        .collect();
    GenerationRecord {
        generation,
        best_fitness: best.fitness,
        best_objective: best.objective,
        best_feasible: best.feasible,
        mean_fitness: if finite.is_empty() {
            f64::INFINITY
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        },
        feasible_fraction: population.iter().filter(|i| i.feasible).count() as f64
            / population.len() as f64,
    }
}

fn stalled(history: &[GenerationRecord], cfg: &GaConfig) -> bool {
    let g = history.len() - 1;
    if g < cfg.min_generations || g < cfg.stall_window {
        return false;
    }
    let then = &history[g - cfg.stall_window];
    let now = &history[g];
    then.best_feasible == now.best_feasible
        && then.best_fitness - now.best_fitness <= cfg.stall_tolerance
}

/// Runs the GA from a population sampled from `model`.
pub fn evolve<P: FitnessProblem + ?Sized>(
    problem: &P,
    model: &PosteriorModel,
    cfg: &GaConfig,
) -> Result<GaOutcome> {
    evolve_with_observer(problem, model, cfg, |_| {})
}

/// [`evolve`] with a callback invoked after every generation.
pub fn evolve_with_observer<P: FitnessProblem + ?Sized>(
    problem: &P,
    model: &PosteriorModel,
    cfg: &GaConfig,
    mut observer: impl FnMut(&GenerationRecord),
) -> Result<GaOutcome> {
    cfg.validate()?;
    let n = cfg.population_size;
    let seed = cfg.rng_seed;
    let initial: Vec<VolumeFractionField> = (0..n)
        .map(|i| model.sample_with(&mut derived_rng(seed, 0, i)))
        .collect();
    let mut population = evaluate_all(problem, initial, cfg.parallel);
    deb_fitness(&mut population);
    let initial_population = population.clone();
    let mut history = vec![record(0, &population)];
    observer(&history[0]);

    let mut generation = 0;
    loop {
        if stalled(&history, cfg) || cfg.max_generations.is_some_and(|m| generation >= m) {
            break;
        }
        generation += 1;
        let elite = population[best_index(&population)].clone();

        let mut sel_rng = derived_rng(seed, generation, SELECTION_SLOT);
        let mut pool = tournament_select(&population, cfg.tournament_size, &mut sel_rng);
        pool.shuffle(&mut sel_rng);

        let eta = cfg.eta_schedule.eta(generation);
        let breed = |pair: usize| -> Result<[VolumeFractionField; 2]> {
            let p1 = &population[pool[2 * pair]].field;
            let p2 = &population[pool[2 * pair + 1]].field;
            let mut rng = derived_rng(seed, generation, pair);
            let (c1, c2) = crossover_and_repair(p1, p2, eta, model, &mut rng)?;
            let m = |c: &VolumeFractionField, slot: usize| {
                let mut rng = derived_rng(seed, generation, n + slot);
                mutate(c, model, cfg.mutation_scale, cfg.mutation_prob, &mut rng)
            };
            Ok([m(&c1, 2 * pair), m(&c2, 2 * pair + 1)])
        };
        let children: Vec<[VolumeFractionField; 2]> = if cfg.parallel {
            (0..n / 2)
                .into_par_iter()
                .map(breed)
                .collect::<Result<_>>()?
        } else {
            (0..n / 2).map(breed).collect::<Result<_>>()?
        };
        let children: Vec<VolumeFractionField> = children.into_iter().flatten().collect();

        population = evaluate_all(problem, children, cfg.parallel);
        deb_fitness(&mut population);
        let worst = worst_index(&population);
        population[worst] = elite;
        deb_fitness(&mut population);

        let rec = record(generation, &population);
        log::debug!(
            "generation {generation}: best {:.6} (feasible: {}), mean {:.6}, feasible {:.2}",
            rec.best_fitness,
            rec.best_feasible,
            rec.mean_fitness,
            rec.feasible_fraction
        );
        observer(&rec);
        history.push(rec);
    }

    let best = population[best_index(&population)].clone();
    Ok(GaOutcome {
        best,
        history,
        initial_population,
        final_population: population,
    })
}
