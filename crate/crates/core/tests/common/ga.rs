use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fgm_core::ga::{
    crossover_and_repair, deb_fitness, evolve, mutate, sbx_crossover, sbx_with_draws,
    tournament_select, Evaluation, FitnessProblem, GaConfig, Individual,
};
use fgm_core::gpr::{BoundaryConstraint, KernelConfig, PosteriorModel};
use fgm_core::material::VolumeFractionField;
use fgm_core::mesh::{generate_rectangle, Mesh};
use fgm_core::{Error, Result};

fn small_model(n: usize, l: f64) -> (Mesh, PosteriorModel) {
    let mesh = generate_rectangle(1.0, 1.0, n, n).unwrap();
    let mut bc = BoundaryConstraint::default();
    for &id in &mesh.boundary_set("bottom").unwrap().node_ids {
        if mesh.corner_index(id).is_some() {
            bc.push(id, 0.0);
        }
    }
    for &id in &mesh.boundary_set("top").unwrap().node_ids {
        if mesh.corner_index(id).is_some() && mesh.nodes()[id].x >= 0.5 {
            bc.push(id, 1.0);
        }
    }
    let model = PosteriorModel::condition(&mesh, &KernelConfig::new(l, 1.0), &bc).unwrap();
    (mesh, model)
}

pub fn sbx_preserves_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let n = 30;
        let p1: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let p2: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let eta = rng.random_range(0.5..5.0);
        let (c1, c2) = sbx_crossover(
            &VolumeFractionField::new(p1.clone()),
            &VolumeFractionField::new(p2.clone()),
            eta,
            &mut rng,
        );
        for i in 0..n {
            assert!(((c1[i] + c2[i]) - (p1[i] + p2[i])).abs() * 0.5 < 1e-12);
        }
    }
    // Extreme draws too.
    let (c1, c2) = sbx_with_draws(&[0.2, 0.9], &[0.8, 0.1], 1.5, &[1e-9, 1.0 - 1e-6]);
    for (i, (a, b)) in [(0.2, 0.8), (0.9, 0.1)].iter().enumerate() {
        assert!((0.5 * (c1[i] + c2[i]) - 0.5 * (a + b)).abs() < 1e-12);
    }
}

fn random_population(rng: &mut ChaCha8Rng) -> Vec<Individual> {
    let n = rng.random_range(2..40);
    (0..n)
        .map(|_| {
            let m = rng.random_range(0..4);
            let violations: Vec<f64> = (0..m)
                .map(|_| {
                    if rng.random::<f64>() < 0.5 {
                        0.0
                    } else {
                        rng.random::<f64>() * 10.0
                    }
                })
                .collect();
            let feasible = violations.iter().all(|&v| v == 0.0);
            Individual {
                field: VolumeFractionField::new(vec![0.0]),
                objective: rng.random::<f64>() * 200.0 - 50.0,
                violations,
                fitness: f64::NAN,
                feasible,
            }
        })
        .collect()
}

pub fn deb_ordering_on_random_populations() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let mut pop = random_population(&mut rng);
        deb_fitness(&mut pop);
        let feasible: Vec<&Individual> = pop.iter().filter(|i| i.feasible).collect();
        let infeasible: Vec<&Individual> = pop.iter().filter(|i| !i.feasible).collect();
        for f in &feasible {
            assert_eq!(f.fitness, f.objective);
            for g in &infeasible {
                assert!(g.fitness > f.fitness);
            }
        }
        for a in &infeasible {
            for b in &infeasible {
                if a.total_violation() < b.total_violation() {
                    assert!(a.fitness < b.fitness);
                }
            }
        }
    }
}

pub fn tournament_is_uniform_on_ties() {
    let n = 10;
    let pop: Vec<Individual> = (0..n)
        .map(|_| Individual {
            field: VolumeFractionField::new(vec![0.0]),
            objective: 1.0,
            violations: vec![],
            fitness: 1.0,
            feasible: true,
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut counts = vec![0usize; n];
    for _ in 0..1000 {
        for w in tournament_select(&pop, 4, &mut rng) {
            counts[w] += 1;
        }
    }
    let expected = 10_000.0 / n as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 99th percentile of chi-square with 9 degrees of freedom.
    assert!(chi2 < 21.666, "chi2 {chi2}, counts {counts:?}");
}

pub fn mutation_identity_cases() {
    let (_, model) = small_model(4, 0.3);
    let f = model.sample(1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert_eq!(mutate(&f, &model, 0.25, 0.0, &mut rng), f);
    assert_eq!(mutate(&f, &model, 0.0, 1.0, &mut rng), f);
}

pub fn mutation_variance_matches_scaled_posterior() {
    // A small amplitude keeps most nodes away from the clamp.
    let mesh = generate_rectangle(1.0, 1.0, 5, 5).unwrap();
    let mut bc = BoundaryConstraint::default();
    for &id in &mesh.boundary_set("left").unwrap().node_ids {
        if mesh.corner_index(id).is_some() {
            bc.push(id, 0.5);
        }
    }
    let model = PosteriorModel::condition(&mesh, &KernelConfig::new(0.3, 0.1), &bc).unwrap();
    let eps = 0.25;
    let mean = model.mean_field();
    let n = model.len();
    let draws = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for _ in 0..draws {
        let m = mutate(&mean, &model, eps, 1.0, &mut rng);
        for i in 0..n {
            sum[i] += m.values()[i];
            sq[i] += m.values()[i].powi(2);
        }
    }
    let k = model.covariance();
    let mut checked = 0;
    for i in 0..n {
        let sd = eps * k[(i, i)].sqrt();
        let mu = mean.values()[i];
        // Only nodes where clamping is negligible.
        if mu - 5.0 * sd < 0.0 || mu + 5.0 * sd > 1.0 || sd < 1e-6 {
            continue;
        }
        checked += 1;
        let m = sum[i] / draws as f64;
        let var = (sq[i] - draws as f64 * m * m) / (draws as f64 - 1.0);
        let want = sd * sd;
        let se = want * (2.0 / (draws as f64 - 1.0)).sqrt();
        assert!((var - want).abs() <= 5.0 * se, "node {i}: {var} vs {want}");
    }
    assert!(checked >= 5, "only {checked} nodes free of clamping");
}

pub fn repair_fixed_point_and_smoothing() {
    let (_, model) = small_model(6, 0.2);
    let mean = model.mean_field();
    let (c1, c2) =
        crossover_and_repair(&mean, &mean, 1.5, &model, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    for (a, b) in c1.values().iter().zip(mean.values()) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(c1, c2);

    // Energy in the trailing eigencomponents drops after repair.
    let eig = SymmetricEigen::new(model.kernel().clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let tail = &order[order.len() / 2..];
    let energy = |v: &[f64]| -> f64 {
        let d = DVector::from_column_slice(v) - model.mean();
        tail.iter()
            .map(|&i| eig.eigenvectors.column(i).dot(&d).powi(2))
            .sum()
    };
    let tol = 3.0 * model.config().noise_var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ok, mut total) = (0, 0);
    for s in 0..50 {
        let p1 = model.sample(2 * s);
        let p2 = model.sample(2 * s + 1);
        let mut r1 = rng.clone();
        let (raw1, raw2) = sbx_crossover(&p1, &p2, 1.5, &mut r1);
        let (c1, c2) = crossover_and_repair(&p1, &p2, 1.5, &model, &mut rng).unwrap();
        assert!(energy(c1.values()) <= energy(&raw1) + 1e-12);
        assert!(energy(c2.values()) <= energy(&raw2) + 1e-12);
        for c in [&c1, &c2] {
            assert!(c.values().iter().all(|v| (0.0..=1.0).contains(v)));
            for &(slot, v) in model.constrained() {
                total += 1;
                ok += usize::from((c.values()[slot] - v).abs() <= tol);
            }
        }
    }
    assert!(ok as f64 / total as f64 >= 0.99, "{ok}/{total}");
}

/// Mean squared nodal deviation from a target profile.
struct Quadratic {
    target: Vec<f64>,
}

impl FitnessProblem for Quadratic {
    fn evaluate(&self, field: &VolumeFractionField) -> Result<Evaluation> {
        let objective = field
            .values()
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / self.target.len() as f64;
        Ok(Evaluation {
            objective,
            violations: vec![],
        })
    }
}

fn toy_config(seed: u64, parallel: bool) -> GaConfig {
    GaConfig {
        population_size: 40,
        min_generations: 200,
        max_generations: Some(200),
        stall_tolerance: 0.0,
        rng_seed: seed,
        parallel,
        ..GaConfig::default()
    }
}

pub fn quadratic_toy_converges() {
    let (_, model) = small_model(6, 0.3);
    // A smooth target: repeated projection strips the rough part of a draw.
    let mut target = model.sample(4242);
    for _ in 0..3 {
        target = model.project(&target).unwrap();
    }
    let problem = Quadratic {
        target: target.values().to_vec(),
    };
    let out = evolve(&problem, &model, &toy_config(1, true)).unwrap();
    assert!(out.history.len() <= 201);
    assert!(out.best.objective < 1e-2, "best {}", out.best.objective);
    assert!(out.best.objective < 0.1 * out.history[0].best_fitness);
    for w in out.history.windows(2) {
        assert!(w[1].key() <= w[0].key());
    }
}

pub fn serial_and_parallel_runs_agree() {
    let (_, model) = small_model(4, 0.3);
    let problem = Quadratic {
        target: model.sample(7).values().to_vec(),
    };
    let cfg = GaConfig {
        max_generations: Some(15),
        ..toy_config(9, false)
    };
    let a = evolve(&problem, &model, &cfg).unwrap();
    let b = evolve(
        &problem,
        &model,
        &GaConfig {
            parallel: true,
            ..cfg.clone()
        },
    )
    .unwrap();
    let c = evolve(&problem, &model, &cfg).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.history, c.history);
    assert_eq!(a.final_population, b.final_population);
    let d = evolve(
        &problem,
        &model,
        &GaConfig {
            rng_seed: 10,
            ..cfg
        },
    )
    .unwrap();
    assert_ne!(a.history, d.history);
}

/// Fails on some fields; constrains mean V_c below a bound.
struct Flaky;

impl FitnessProblem for Flaky {
    fn evaluate(&self, field: &VolumeFractionField) -> Result<Evaluation> {
        let mean = field.node_average();
        if field.values()[1] > 0.9 {
            return Err(Error::InvalidArgument("synthetic failure".into()));
        }
        Ok(Evaluation {
            objective: -mean,
            violations: vec![(mean - 0.4).max(0.0)],
        })
    }
}

pub fn failures_do_not_abort_and_elitism_holds() {
    let (_, model) = small_model(4, 0.3);
    let cfg = GaConfig {
        population_size: 20,
        min_generations: 5,
        stall_window: 3,
        stall_tolerance: 1e-3,
        max_generations: Some(40),
        rng_seed: 3,
        ..GaConfig::default()
    };
    let out = evolve(&Flaky, &model, &cfg).unwrap();
    for w in out.history.windows(2) {
        assert!(w[1].key() <= w[0].key(), "{:?} -> {:?}", w[0], w[1]);
    }
    assert!(out.history.len() >= 6);
    assert!(out.best.feasible);
}

pub fn stops_on_stall_after_minimum() {
    let (_, model) = small_model(3, 0.3);
    struct Flat;
    impl FitnessProblem for Flat {
        fn evaluate(&self, _: &VolumeFractionField) -> Result<Evaluation> {
            Ok(Evaluation {
                objective: 1.0,
                violations: vec![],
            })
        }
    }
    let cfg = GaConfig {
        population_size: 8,
        min_generations: 12,
        stall_window: 4,
        stall_tolerance: 0.0,
        ..GaConfig::default()
    };
    let out = evolve(&Flat, &model, &cfg).unwrap();
    assert_eq!(out.history.len(), 13);
}
