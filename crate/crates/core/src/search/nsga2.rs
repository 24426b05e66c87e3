use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::ops::{crossover, mutate, random_patch};
use super::{evaluate, FitnessVector, Individual, RepairProblem, SearchConfig};
use crate::edits::Patch;

/// `a` is no worse than `b` everywhere and strictly better somewhere (minimizing).
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Indices of `points` grouped into successive nondominated fronts.
pub fn fast_nondominated_sort<V: AsRef<[f64]>>(points: &[V]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dom_count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by_me[i].push(j);
                dom_count[j] += 1;
            } else if dominates(b, a) {
                dominated_by_me[j].push(i);
                dom_count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dom_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                dom_count[j] -= 1;
                if dom_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each point within one front, in input order.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    let m = front[0].as_ref().len();
    for k in 0..m {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            front[a].as_ref()[k]
                .partial_cmp(&front[b].as_ref()[k])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let lo = front[order[0]].as_ref()[k];
        let hi = front[order[n - 1]].as_ref()[k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n.saturating_sub(1) {
            let gap = front[order[w + 1]].as_ref()[k] - front[order[w - 1]].as_ref()[k];
            dist[order[w]] += gap / range;
        }
    }
    dist
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_f1: usize,
    pub front_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    /// Nondominated members of the final parent population, one per distinct patch.
    pub pareto: Vec<Individual>,
    /// Final parent population with ranks and crowding distances.
    #[serde(skip)]
    pub population: Vec<Individual>,
    pub history: Vec<GenerationStats>,
    /// First generation whose population holds an error-free patch (0 = initial).
    pub first_zero_generation: Option<usize>,
    pub generations_run: usize,
    pub solutions_explored: usize,
}

pub(super) fn evaluate_all(patches: Vec<Patch>, problem: &RepairProblem, pool: &rayon::ThreadPool) -> Vec<Individual> {
    pool.install(|| {
        patches
            .into_par_iter()
            .map(|p| {
                let f = evaluate(&p, problem);
                Individual::new(p, f)
            })
            .collect()
    })
}

pub(super) fn thread_pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool builds")
}

pub(super) fn initial_max_len(config: &SearchConfig, problem: &RepairProblem) -> usize {
    config.max_initial_len.unwrap_or_else(|| problem.errors.len().max(3))
}

/// Assigns rank and crowding to every individual.
fn rank_population(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let objs: Vec<[f64; 3]> = pop.iter().map(|i| i.fitness.objectives()).collect();
    let fronts = fast_nondominated_sort(&objs);
    for (rank, front) in fronts.iter().enumerate() {
        let pts: Vec<[f64; 3]> = front.iter().map(|&i| objs[i]).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&pts)) {
            pop[i].rank = rank;
            pop[i].crowding = d;
        }
    }
    fronts
}

/// Keeps `n` individuals: whole fronts first, then the most crowded-apart
/// members of the first front that does not fit. Only the first individual
/// with a given fitness vector competes; repeats fill leftover slots.
fn truncate(mut pop: Vec<Individual>, n: usize) -> Vec<Individual> {
    let fronts = rank_population(&mut pop);
    let mut seen = HashSet::new();
    let mut repeats = Vec::new();
    let mut keep: Vec<usize> = Vec::with_capacity(n);
    for front in fronts {
        let (front, dup): (Vec<usize>, Vec<usize>) = front.into_iter().partition(|&i| seen.insert(pop[i].fitness));
        repeats.extend(dup);
        if keep.len() >= n {
            continue;
        }
        if keep.len() + front.len() <= n {
            keep.extend(front);
            continue;
        }
        let pts: Vec<[f64; 3]> = front.iter().map(|&i| pop[i].fitness.objectives()).collect();
        let crowd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| {
            crowd[b]
                .partial_cmp(&crowd[a])
                .unwrap_or(Ordering::Equal)
                .then_with(|| pop[front[a]].fitness.cmp(&pop[front[b]].fitness))
                .then(front[a].cmp(&front[b]))
        });
        keep.extend(order.into_iter().take(n - keep.len()).map(|k| front[k]));
    }
    if keep.len() < n {
        keep.extend(repeats.into_iter().take(n - keep.len()));
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    let mut out: Vec<Individual> = keep.into_iter().map(|i| slots[i].take().expect("unique index")).collect();
    rank_population(&mut out);
    out
}

fn better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

fn tournament<'p, R: Rng + ?Sized>(rng: &mut R, pop: &'p [Individual]) -> &'p Individual {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if better(b, a) {
        b
    } else {
        a
    }
}

fn pareto_of(pop: &[Individual]) -> Vec<Individual> {
    let mut seen = HashSet::new();
    pop.iter()
        .filter(|i| i.rank == 0 && seen.insert(i.patch.clone()))
        .cloned()
        .collect()
}

fn front_signature(pop: &[Individual]) -> Vec<FitnessVector> {
    let mut v: Vec<FitnessVector> = pop.iter().filter(|i| i.rank == 0).map(|i| i.fitness).collect();
    v.sort();
    v.dedup();
    v
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    GenerationStats {
        generation,
        best_f1: pop.iter().map(|i| i.fitness.f1).min().unwrap_or(0),
        front_size: pop.iter().filter(|i| i.rank == 0).count(),
    }
}

const DEDUP_TRIES: usize = 8;

/// NSGA-II: a random parent population of N/2, then per generation N/2
/// offspring by tournament, crossover and mutation, merged and truncated back
/// to N/2 by front and crowding distance.
pub fn run_nsga2(config: &SearchConfig, problem: &RepairProblem) -> RunResult {
    let half = (config.population / 2).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pool = thread_pool(config.jobs);
    let max_len = initial_max_len(config, problem);

    let initial: Vec<Patch> = (0..half).map(|_| random_patch(&mut rng, problem, max_len)).collect();
    let mut parents = evaluate_all(initial, problem, &pool);
    rank_population(&mut parents);

    let mut history = vec![stats(0, &parents)];
    let mut first_zero = parents.iter().any(|i| i.fitness.f1 == 0).then_some(0);
    let mut stable = 0usize;
    let mut signature = front_signature(&parents);
    let mut generations_run = 0;

    for gen in 1..=config.generations {
        let mut children: Vec<Patch> = Vec::with_capacity(half + 1);
        let mut known: HashSet<Patch> = parents.iter().map(|i| i.patch.clone()).collect();
        while children.len() < half {
            let a = tournament(&mut rng, &parents).patch.clone();
            let b = tournament(&mut rng, &parents).patch.clone();
            let (mut c1, mut c2) = if rng.gen_bool(config.crossover_rate) {
                crossover(&mut rng, &a, &b)
            } else {
                (a, b)
            };
            if rng.gen_bool(config.mutation_rate) {
                c1 = mutate(&mut rng, &c1, problem);
            }
            if rng.gen_bool(config.mutation_rate) {
                c2 = mutate(&mut rng, &c2, problem);
            }
            for mut c in [c1, c2] {
                // a child already present adds nothing; mutate it until it is new
                for _ in 0..DEDUP_TRIES {
                    if !known.contains(&c) {
                        break;
                    }
                    c = mutate(&mut rng, &c, problem);
                }
                known.insert(c.clone());
                children.push(c);
            }
        }
        children.truncate(half);
        let offspring = evaluate_all(children, problem, &pool);
        let mut merged = parents;
        merged.extend(offspring);
        parents = truncate(merged, half);
        generations_run = gen;

        history.push(stats(gen, &parents));
        if first_zero.is_none() && parents.iter().any(|i| i.fitness.f1 == 0) {
            first_zero = Some(gen);
        }
        if let Some(g) = config.early_stop {
            let sig = front_signature(&parents);
            stable = if sig == signature { stable + 1 } else { 0 };
            signature = sig;
            if first_zero.is_some() && stable >= g && signature.iter().any(|f| f.f1 == 0) {
                break;
            }
        }
    }

    RunResult {
        pareto: pareto_of(&parents),
        population: parents,
        history,
        first_zero_generation: first_zero,
        generations_run,
        solutions_explored: generations_run * config.population,
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::fixtures;

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[0., 1., 2.], &[1., 1., 2.]));
        assert!(!dominates(&[0., 1., 2.], &[0., 1., 2.]));
        assert!(!dominates(&[0., 5., 0.], &[1., 1., 1.]));
        assert!(!dominates(&[1., 1., 1.], &[0., 5., 0.]));
    }

    #[test]
    fn chain_and_tie_fronts() {
        let chain = [[0., 0., 0.], [1., 1., 1.], [2., 2., 2.]];
        assert_eq!(fast_nondominated_sort(&chain), vec![vec![0], vec![1], vec![2]]);
        let same = [[1., 1., 1.]; 4];
        assert_eq!(fast_nondominated_sort(&same), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn crowding_examples() {
        let two = [[0., 1.], [1., 0.]];
        assert!(crowding_distance(&two).iter().all(|d| d.is_infinite()));
        let three = [[0., 4.], [2., 2.], [4., 0.]];
        let d = crowding_distance(&three);
        assert!((d[1] - 2.0).abs() < 1e-12);
        let flat = [[1., 1.]; 4];
        let d = crowding_distance(&flat);
        assert_eq!(d.iter().filter(|x| x.is_infinite()).count(), 2);
        assert!(d.iter().filter(|x| x.is_finite()).all(|&x| x == 0.0));
    }

    #[test]
    fn truncation_keeps_size_and_prefers_fronts() {
        let mk = |f1, f2, f3| Individual::new(Patch::default(), FitnessVector::new(f1, f2, f3));
        let pop = vec![mk(3, 3, 3), mk(0, 4, 0), mk(1, 1, 1), mk(4, 0, 0), mk(2, 2, 2), mk(5, 5, 5)];
        let kept = truncate(pop, 3);
        assert_eq!(kept.len(), 3);
        assert!(kept.iter().all(|i| i.rank == 0));

        // repeats of a fitness vector only fill slots no distinct vector claims
        let pop = vec![mk(0, 1, 0), mk(0, 1, 0), mk(0, 1, 0), mk(1, 2, 1), mk(2, 3, 2)];
        let kept: Vec<FitnessVector> = truncate(pop.clone(), 3).iter().map(|i| i.fitness).collect();
        assert_eq!(kept, vec![FitnessVector::new(0, 1, 0), FitnessVector::new(1, 2, 1), FitnessVector::new(2, 3, 2)]);
        assert_eq!(truncate(pop, 4).iter().filter(|i| i.fitness == FitnessVector::new(0, 1, 0)).count(), 2);
    }

    fn small_config(seed: u64) -> SearchConfig {
        SearchConfig {
            population: 20,
            generations: 15,
            seed,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn zero_generations_gives_initial_front() {
        let p = RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio());
        let cfg = SearchConfig {
            generations: 0,
            ..small_config(1)
        };
        let r = run_nsga2(&cfg, &p);
        assert_eq!(r.solutions_explored, 0);
        assert!(!r.pareto.is_empty());
        for a in &r.pareto {
            for b in &r.pareto {
                assert!(!a.fitness.dominates(&b.fitness));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let initial: Vec<Individual> = (0..10)
            .map(|_| random_patch(&mut rng, &p, 3))
            .map(|patch| {
                let f = evaluate(&patch, &p);
                Individual::new(patch, f)
            })
            .collect();
        let mut expected: Vec<Patch> = initial
            .iter()
            .filter(|a| !initial.iter().any(|b| b.fitness.dominates(&a.fitness)))
            .map(|i| i.patch.clone())
            .collect();
        expected.dedup();
        let got: Vec<Patch> = r.pareto.iter().map(|i| i.patch.clone()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn elitism_and_determinism() {
        let p = RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio());
        let a = run_nsga2(&small_config(4), &p);
        let b = run_nsga2(&small_config(4), &p);
        assert_eq!(a, b);
        for w in a.history.windows(2) {
            assert!(w[1].best_f1 <= w[0].best_f1);
        }
        let par = run_nsga2(
            &SearchConfig {
                jobs: 4,
                ..small_config(4)
            },
            &p,
        );
        assert_eq!(a, par);
    }
}
