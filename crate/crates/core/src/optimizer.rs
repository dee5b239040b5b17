//! Trace generator: an elitist multi-objective evolutionary algorithm in
//! generational (`lambda = mu`) and steady-state (`lambda = 1`) form,
//! recording every evaluated individual and each iteration's survivors.
//!
//! Selection is rank and crowding based. Variation is simulated binary
//! crossover plus polynomial mutation over the `[0, 1]^n` box. Runs are
//! driven by a ChaCha8 stream seeded from the 64-bit run seed, so a
//! (problem, config, seed) triple reproduces the same trace on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::CoreError;
use crate::objective::{slice_dominates, ObjectiveVector};
use crate::problems::{ProblemError, ProblemSpec};
use crate::trace::{Encoding, RunMeta, RunTrace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizerError {
    #[error("invalid evolver config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Problem(#[from] ProblemError),

    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Run parameters of the trace generator.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolverConfig {
    pub mu: usize,
    pub lambda: usize,
    pub fe_max: u64,
    pub seed: u64,
    pub sbx_eta: f64,
    pub sbx_prob: f64,
    pub pm_eta: f64,
    /// Per-variable mutation probability; `None` means `1 / n`.
    pub pm_prob: Option<f64>,
}

impl EvolverConfig {
    /// Standard operator settings: SBX eta 20 with probability 0.9,
    /// polynomial mutation eta 20 with probability `1 / n`.
    pub fn new(mu: usize, lambda: usize, fe_max: u64, seed: u64) -> Self {
        Self {
            mu,
            lambda,
            fe_max,
            seed,
            sbx_eta: 20.0,
            sbx_prob: 0.9,
            pm_eta: 20.0,
            pm_prob: None,
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.mu < 2 {
            return Err(OptimizerError::InvalidConfig(format!(
                "mu = {} (must be >= 2)",
                self.mu
            )));
        }
        if self.lambda < 1 || self.lambda > self.mu {
            return Err(OptimizerError::InvalidConfig(format!(
                "lambda = {} (must be in [1, mu])",
                self.lambda
            )));
        }
        if self.fe_max < self.mu as u64 {
            return Err(OptimizerError::InvalidConfig(format!(
                "fe_max = {} (must cover the initial population of {})",
                self.fe_max, self.mu
            )));
        }
        if !(0.0..=1.0).contains(&self.sbx_prob) {
            return Err(OptimizerError::InvalidConfig(
                "sbx_prob must be in [0, 1]".into(),
            ));
        }
        if let Some(p) = self.pm_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(OptimizerError::InvalidConfig(
                    "pm_prob must be in [0, 1]".into(),
                ));
            }
        }
        Ok(())
    }

    /// Iterations that fit the evaluation budget: `1 + (fe_max - mu) / lambda`.
    pub fn t_max(&self) -> usize {
        1 + ((self.fe_max - self.mu as u64) / self.lambda as u64) as usize
    }
}

struct Individual {
    x: Vec<f64>,
    f: Vec<f64>,
    eval_index: usize,
}

/// Runs the generator with an algorithm label derived from the mode
/// (`nsga2` generational, `nsga2-ss` steady state) and text encoding.
pub fn run(spec: &ProblemSpec, cfg: &EvolverConfig) -> Result<RunTrace, OptimizerError> {
    let label = if cfg.lambda == 1 { "nsga2-ss" } else { "nsga2" };
    run_named(spec, cfg, label, Encoding::Text)
}

/// Runs the generator and stamps the trace with the given algorithm label
/// and on-disk encoding.
pub fn run_named(
    spec: &ProblemSpec,
    cfg: &EvolverConfig,
    algorithm_id: &str,
    encoding: Encoding,
) -> Result<RunTrace, OptimizerError> {
    cfg.validate()?;
    let t_max = cfg.t_max();
    let n = spec.n;
    let pm_prob = cfg.pm_prob.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut all_points: Vec<ObjectiveVector> =
        Vec::with_capacity(cfg.mu + cfg.lambda * (t_max - 1));
    let mut population: Vec<Individual> = Vec::with_capacity(cfg.mu);
    for _ in 0..cfg.mu {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let f = spec.evaluate(&x)?;
        population.push(Individual {
            x,
            f: f.values().to_vec(),
            eval_index: all_points.len(),
        });
        all_points.push(f);
    }

    let mut memberships: Vec<Vec<u32>> = Vec::with_capacity(t_max);
    memberships.push(membership_row(&population));

    for _ in 2..=t_max {
        let objectives: Vec<&[f64]> = population.iter().map(|ind| ind.f.as_slice()).collect();
        let ranks = nondominated_ranks(&objectives);
        let crowding = crowding_by_front(&objectives, &ranks);

        let mut offspring: Vec<Individual> = Vec::with_capacity(cfg.lambda);
        while offspring.len() < cfg.lambda {
            let a = tournament(&ranks, &crowding, &mut rng);
            let b = tournament(&ranks, &crowding, &mut rng);
            let (c1, c2) = sbx(
                &population[a].x,
                &population[b].x,
                cfg.sbx_eta,
                cfg.sbx_prob,
                &mut rng,
            );
            for mut x in [c1, c2] {
                if offspring.len() == cfg.lambda {
                    break;
                }
                polynomial_mutation(&mut x, cfg.pm_eta, pm_prob, &mut rng);
                let f = spec.evaluate(&x)?;
                offspring.push(Individual {
                    x,
                    f: f.values().to_vec(),
                    eval_index: all_points.len(),
                });
                all_points.push(f);
            }
        }

        let mut pool: Vec<Individual> = population.drain(..).chain(offspring).collect();
        pool.sort_by_key(|ind| ind.eval_index);
        let pool_objectives: Vec<ObjectiveVector> = pool
            .iter()
            .map(|ind| ObjectiveVector::new(ind.f.clone()).expect("finite objectives"))
            .collect();
        let mut survivors = select_survivor_indices(&pool_objectives, cfg.mu);
        survivors.sort_unstable();
        let mut keep = vec![false; pool.len()];
        for &i in &survivors {
            keep[i] = true;
        }
        population = pool
            .into_iter()
            .zip(keep)
            .filter_map(|(ind, kept)| kept.then_some(ind))
            .collect();
        memberships.push(membership_row(&population));
    }

    let meta = RunMeta {
        m: spec.m,
        mu: cfg.mu,
        lambda: cfg.lambda,
        t_max,
        problem_id: spec.id.to_string(),
        algorithm_id: algorithm_id.to_string(),
        seed: cfg.seed,
        encoding,
    };
    Ok(RunTrace::new(meta, all_points, memberships)?)
}

fn membership_row(population: &[Individual]) -> Vec<u32> {
    population
        .iter()
        .map(|ind| ind.eval_index as u32 + 1)
        .collect()
}

/// Environmental selection: keep `mu` of the candidates by non-dominated
/// sorting rank, ties broken by larger crowding distance, final ties by the
/// candidate's position (its evaluation order). Returns positions into
/// `candidates` in selection-priority order.
pub fn select_survivor_indices(candidates: &[ObjectiveVector], mu: usize) -> Vec<usize> {
    let objectives: Vec<&[f64]> = candidates.iter().map(|p| p.values()).collect();
    let ranks = nondominated_ranks(&objectives);
    let crowding = crowding_by_front(&objectives, &ranks);
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        ranks[a]
            .cmp(&ranks[b])
            .then(crowding[b].total_cmp(&crowding[a]))
            .then(a.cmp(&b))
    });
    order.truncate(mu);
    order
}

/// Fast non-dominated sorting; returns the 0-based front rank per point.
fn nondominated_ranks(objectives: &[&[f64]]) -> Vec<usize> {
    let n = objectives.len();
    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if slice_dominates(objectives[i], objectives[j]) {
                dominates[i].push(j);
                dominated_by[j] += 1;
            } else if slice_dominates(objectives[j], objectives[i]) {
                dominates[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut ranks = vec![0usize; n];
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            ranks[i] = rank;
            for &j in &dominates[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        rank += 1;
        current = next;
    }
    ranks
}

/// Crowding distance computed within each front; boundary points get
/// infinity so they always survive their front's truncation.
fn crowding_by_front(objectives: &[&[f64]], ranks: &[usize]) -> Vec<f64> {
    let n = objectives.len();
    let mut crowding = vec![0.0f64; n];
    if n == 0 {
        return crowding;
    }
    let m = objectives[0].len();
    let front_count = ranks.iter().max().map_or(0, |&r| r + 1);
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new(); front_count];
    for (i, &r) in ranks.iter().enumerate() {
        fronts[r].push(i);
    }
    for front in &fronts {
        if front.len() <= 2 {
            for &i in front {
                crowding[i] = f64::INFINITY;
            }
            continue;
        }
        #[allow(clippy::needless_range_loop)] // obj indexes a nested dimension
        for obj in 0..m {
            let mut sorted = front.clone();
            sorted.sort_by(|&a, &b| objectives[a][obj].total_cmp(&objectives[b][obj]));
            let low = objectives[sorted[0]][obj];
            let high = objectives[*sorted.last().unwrap()][obj];
            crowding[sorted[0]] = f64::INFINITY;
            crowding[*sorted.last().unwrap()] = f64::INFINITY;
            if high > low {
                for w in sorted.windows(3) {
                    let gap = (objectives[w[2]][obj] - objectives[w[0]][obj]) / (high - low);
                    crowding[w[1]] += gap;
                }
            }
        }
    }
    crowding
}

/// Binary tournament on (rank, crowding); exact ties keep the first pick.
fn tournament(ranks: &[usize], crowding: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let n = ranks.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    if ranks[b] < ranks[a] || (ranks[b] == ranks[a] && crowding[b] > crowding[a]) {
        b
    } else {
        a
    }
}

/// Simulated binary crossover over the unit box.
fn sbx(
    p1: &[f64],
    p2: &[f64],
    eta: f64,
    pair_prob: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.gen::<f64>() > pair_prob {
        return (c1, c2);
    }
    for i in 0..p1.len() {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (low, high) = (p1[i].min(p2[i]), p1[i].max(p2[i]));
        if high - low < 1e-14 {
            continue;
        }
        let u: f64 = rng.gen();
        let beta_q = if u <= 0.5 {
            (2.0 * u).powf(1.0 / (eta + 1.0))
        } else {
            (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
        };
        let near = 0.5 * ((low + high) - beta_q * (high - low));
        let far = 0.5 * ((low + high) + beta_q * (high - low));
        let (first, second) = if rng.gen::<f64>() <= 0.5 {
            (near, far)
        } else {
            (far, near)
        };
        c1[i] = first.clamp(0.0, 1.0);
        c2[i] = second.clamp(0.0, 1.0);
    }
    (c1, c2)
}

/// Polynomial mutation over the unit box.
fn polynomial_mutation(x: &mut [f64], eta: f64, prob: f64, rng: &mut ChaCha8Rng) {
    for xi in x.iter_mut() {
        if rng.gen::<f64>() > prob {
            continue;
        }
        let u: f64 = rng.gen();
        let delta = if u < 0.5 {
            let to_low = *xi;
            (2.0 * u + (1.0 - 2.0 * u) * (1.0 - to_low).powf(eta + 1.0)).powf(1.0 / (eta + 1.0))
                - 1.0
        } else {
            let to_high = 1.0 - *xi;
            1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - to_high).powf(eta + 1.0))
                .powf(1.0 / (eta + 1.0))
        };
        *xi = (*xi + delta).clamp(0.0, 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemId;

    fn ov(values: &[f64]) -> ObjectiveVector {
        ObjectiveVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn shape_of_a_tiny_steady_state_trace() {
        let spec = ProblemSpec::with_default_n(ProblemId::Dtlz2, 2).unwrap();
        let cfg = EvolverConfig::new(4, 1, 6, 99);
        let trace = run(&spec, &cfg).unwrap();
        assert_eq!(trace.meta().t_max, 3);
        assert_eq!(trace.all_points().len(), 6);
        assert_eq!(trace.memberships().len(), 3);
        assert!(trace.memberships().iter().all(|row| row.len() == 4));
        assert_eq!(trace.meta().algorithm_id, "nsga2-ss");
        assert_eq!(trace.memberships()[0], vec![1, 2, 3, 4]);

        // The whole budget spent on the initial population: one iteration,
        // one membership row.
        let tiny = run(&spec, &EvolverConfig::new(4, 1, 4, 99)).unwrap();
        assert_eq!(tiny.meta().t_max, 1);
        assert_eq!(tiny.memberships(), &[vec![1, 2, 3, 4]]);
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let spec = ProblemSpec::with_default_n(ProblemId::Dtlz1, 2).unwrap();
        let cfg = EvolverConfig::new(8, 8, 200, 1234);
        let a = run(&spec, &cfg).unwrap();
        let b = run(&spec, &cfg).unwrap();
        assert_eq!(a, b);

        let other = EvolverConfig { seed: 1235, ..cfg };
        let c = run(&spec, &other).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn consecutive_membership_rows_differ_in_at_most_lambda_ids() {
        let spec = ProblemSpec::with_default_n(ProblemId::Dtlz2, 2).unwrap();
        for lambda in [1usize, 5, 10] {
            let cfg = EvolverConfig::new(10, lambda, 300, 7);
            let trace = run(&spec, &cfg).unwrap();
            for pair in trace.memberships().windows(2) {
                let fresh = pair[1].iter().filter(|id| !pair[0].contains(id)).count();
                assert!(fresh <= lambda);
            }
        }
    }

    #[test]
    fn elitism_keeps_the_first_front() {
        let spec = ProblemSpec::with_default_n(ProblemId::Dtlz2, 2).unwrap();
        let cfg = EvolverConfig::new(12, 12, 600, 42);
        let trace = run(&spec, &cfg).unwrap();
        for t in 1..trace.meta().t_max {
            let prev: Vec<u32> = trace.memberships()[t - 1].clone();
            let next: Vec<u32> = trace.memberships()[t].clone();
            // Pool of iteration t+1 = previous survivors + the lambda
            // offspring evaluated in between.
            let evaluated = trace.meta().fe_of_iteration(t + 1).unwrap() as u32;
            let pool: Vec<u32> = prev
                .iter()
                .copied()
                .chain(evaluated - 12 + 1..=evaluated)
                .collect();
            let points: Vec<ObjectiveVector> = pool
                .iter()
                .map(|&id| trace.all_points()[id as usize - 1].clone())
                .collect();
            let first_front: Vec<u32> = pool
                .iter()
                .enumerate()
                .filter(|(i, _)| {
                    points
                        .iter()
                        .enumerate()
                        .all(|(j, q)| *i == j || !q.dominates(&points[*i]).unwrap())
                })
                .map(|(_, &id)| id)
                .collect();
            if first_front.len() <= 12 {
                for id in first_front {
                    assert!(
                        next.contains(&id),
                        "first-front member {id} dropped at t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_front_truncation_drops_least_crowded() {
        // Mutually non-dominated staircase; the middle points are the most
        // crowded, and index 2 sits in the tightest gap.
        let points = vec![
            ov(&[0.0, 1.0]),
            ov(&[0.25, 0.75]),
            ov(&[0.3, 0.7]),
            ov(&[0.35, 0.65]),
            ov(&[1.0, 0.0]),
        ];
        let survivors = select_survivor_indices(&points, 4);
        assert_eq!(survivors.len(), 4);
        assert!(!survivors.contains(&2));
    }

    #[test]
    fn dominator_wins_with_mu_one() {
        let points = vec![ov(&[5.0, 5.0]), ov(&[0.0, 0.0]), ov(&[4.0, 6.0])];
        let survivors = select_survivor_indices(&points, 1);
        assert_eq!(survivors, vec![1]);
    }

    #[test]
    fn survivors_match_front_peeling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let points: Vec<ObjectiveVector> = (0..30)
                .map(|_| ov(&[rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]))
                .collect();
            let survivors = select_survivor_indices(&points, 20);
            assert_eq!(survivors.len(), 20);

            // Peel fronts by repeated brute-force filtering.
            let mut remaining: Vec<usize> = (0..points.len()).collect();
            let mut fronts: Vec<Vec<usize>> = Vec::new();
            while !remaining.is_empty() {
                let front: Vec<usize> = remaining
                    .iter()
                    .copied()
                    .filter(|&i| {
                        remaining
                            .iter()
                            .all(|&j| i == j || !points[j].dominates(&points[i]).unwrap())
                    })
                    .collect();
                remaining.retain(|i| !front.contains(i));
                fronts.push(front);
            }

            // Whole fronts must be taken in order until one no longer fits.
            let mut slots = 20usize;
            for front in &fronts {
                if front.len() <= slots {
                    for i in front {
                        assert!(survivors.contains(i));
                    }
                    slots -= front.len();
                } else {
                    // The partial front fills exactly the remaining slots.
                    let taken = front.iter().filter(|i| survivors.contains(i)).count();
                    assert_eq!(taken, slots);
                    slots = 0;
                }
                if slots == 0 {
                    break;
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(EvolverConfig::new(1, 1, 10, 0).validate().is_err());
        assert!(EvolverConfig::new(4, 5, 10, 0).validate().is_err());
        assert!(EvolverConfig::new(4, 1, 3, 0).validate().is_err());
        assert!(EvolverConfig::new(4, 1, 6, 0).validate().is_ok());
    }

    #[test]
    fn children_stay_in_the_unit_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let p1: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
            let p2: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..1.0)).collect();
            let (mut c1, c2) = sbx(&p1, &p2, 20.0, 0.9, &mut rng);
            polynomial_mutation(&mut c1, 20.0, 0.5, &mut rng);
            for v in c1.iter().chain(&c2) {
                assert!((0.0..=1.0).contains(v));
            }
        }
    }
}
