use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::nsga2::{evaluate_all, initial_max_len, thread_pool};
use super::ops::random_patch;
use super::{Individual, RepairProblem, SearchConfig};
use crate::edits::Patch;

const CHUNK: usize = 1024;

/// Random search with the NSGA-II budget ([`SearchConfig::budget`]), at least one patch.
pub fn run_random(config: &SearchConfig, problem: &RepairProblem) -> Individual {
    run_random_budget(config, problem, config.budget().max(1))
}

/// Best of `budget` patches generated like NSGA-II's initial population,
/// by fewest errors then shortest patch; earlier patches win ties.
pub fn run_random_budget(config: &SearchConfig, problem: &RepairProblem, budget: usize) -> Individual {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let pool = thread_pool(config.jobs);
    let max_len = initial_max_len(config, problem);
    let mut best: Option<Individual> = None;
    let mut left = budget.max(1);
    while left > 0 {
        let n = left.min(CHUNK);
        left -= n;
        let patches: Vec<Patch> = (0..n).map(|_| random_patch(&mut rng, problem, max_len)).collect();
        for ind in evaluate_all(patches, problem, &pool) {
            let key = (ind.fitness.f1, ind.fitness.f2);
            if best.as_ref().is_none_or(|b| key < (b.fitness.f1, b.fitness.f2)) {
                best = Some(ind);
            }
        }
    }
    best.expect("budget is at least one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::search::evaluate;

    #[test]
    fn budget_one_returns_that_patch() {
        let p = RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio());
        let cfg = SearchConfig {
            seed: 3,
            ..SearchConfig::default()
        };
        let best = run_random_budget(&cfg, &p, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let patch = random_patch(&mut rng, &p, 3);
        assert_eq!(best.patch, patch);
        assert_eq!(best.fitness, evaluate(&patch, &p));
    }

    #[test]
    fn deterministic_under_seed() {
        let p = RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio());
        let cfg = SearchConfig {
            population: 10,
            generations: 5,
            seed: 8,
            ..SearchConfig::default()
        };
        assert_eq!(run_random(&cfg, &p), run_random(&cfg, &p));
        let par = SearchConfig { jobs: 3, ..cfg.clone() };
        assert_eq!(run_random(&cfg, &p), run_random(&par, &p));
    }
}
