//! Exploration: NSGA-II over patches, and a random-search baseline.
//!
//! Every candidate patch is scored on three minimized objectives: remaining
//! type errors (f1), patch length (f2) and footprint change relative to the
//! faulty input (f3).

mod nsga2;
mod ops;
mod random;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analyzer::{analyze, TypeError};
use crate::edits::{apply_patch, Patch};
use crate::footprint::Footprints;
use crate::metamodel::Metamodel;
use crate::mtl::Transformation;

pub use nsga2::{crowding_distance, dominates, fast_nondominated_sort, run_nsga2, GenerationStats, RunResult};
pub use ops::{crossover, crossover_at, mutate, random_patch};
pub use random::{run_random, run_random_budget};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FitnessVector {
    pub f1: usize,
    pub f2: usize,
    pub f3: usize,
}

impl FitnessVector {
    pub fn new(f1: usize, f2: usize, f3: usize) -> Self {
        FitnessVector { f1, f2, f3 }
    }

    pub fn objectives(&self) -> [f64; 3] {
        [self.f1 as f64, self.f2 as f64, self.f3 as f64]
    }

    pub fn dominates(&self, other: &FitnessVector) -> bool {
        dominates(&self.objectives(), &other.objectives())
    }
}

impl fmt::Display for FitnessVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.f1, self.f2, self.f3)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Individual {
    pub patch: Patch,
    pub fitness: FitnessVector,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new(patch: Patch, fitness: FitnessVector) -> Self {
        Individual {
            patch,
            fitness,
            rank: 0,
            crowding: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// N: size of the merged population; parents and offspring have N/2 each.
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Upper bound on initial patch length; defaults to max(3, #errors).
    pub max_initial_len: Option<usize>,
    pub seed: u64,
    /// Worker threads for fitness evaluation; left out of serialized reports.
    #[serde(skip_serializing)]
    pub jobs: usize,
    /// Stop once front 1 holds an error-free patch and has not changed for this many generations.
    pub early_stop: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population: 100,
            generations: 500,
            crossover_rate: 0.8,
            mutation_rate: 0.2,
            max_initial_len: None,
            seed: 0,
            jobs: 1,
            early_stop: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return Err(format!("population must be even and at least 2, got {}", self.population));
        }
        for (name, r) in [("crossover rate", self.crossover_rate), ("mutation rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(format!("{name} must lie in [0, 1], got {r}"));
            }
        }
        if self.jobs == 0 {
            return Err("jobs must be at least 1".into());
        }
        Ok(())
    }

    /// Solutions considered by a full run: N per generation.
    pub fn budget(&self) -> usize {
        self.population * self.generations
    }
}

/// A faulty transformation to repair.
#[derive(Clone, Debug)]
pub struct RepairProblem {
    pub faulty: Transformation,
    pub src: Metamodel,
    pub tgt: Metamodel,
    pub errors: Vec<TypeError>,
    reference: Footprints,
}

impl RepairProblem {
    /// f3 is measured against the faulty input itself.
    pub fn new(faulty: Transformation, src: Metamodel, tgt: Metamodel) -> Self {
        let errors = analyze(&faulty, &src, &tgt);
        let reference = Footprints::of(&faulty);
        RepairProblem {
            faulty,
            src,
            tgt,
            errors,
            reference,
        }
    }

    /// Measures f3 against `original` instead of the faulty input.
    pub fn with_reference(mut self, original: &Transformation) -> Self {
        self.reference = Footprints::of(original);
        self
    }

    pub fn apply(&self, patch: &Patch) -> Transformation {
        apply_patch(&self.faulty, patch).0
    }

    pub fn analyze(&self, ast: &Transformation) -> Vec<TypeError> {
        analyze(ast, &self.src, &self.tgt)
    }
}

pub fn evaluate(patch: &Patch, problem: &RepairProblem) -> FitnessVector {
    let candidate = problem.apply(patch);
    FitnessVector {
        f1: problem.analyze(&candidate).len(),
        f2: patch.len(),
        f3: Footprints::of(&candidate).delta(&problem.reference),
    }
}

fn recommendation_key(i: &Individual) -> (usize, usize, usize, String) {
    (i.fitness.f1, i.fitness.f2, i.fitness.f3, i.patch.to_json())
}

/// Fewest errors, then shortest patch, then smallest footprint change, then
/// patch serialization.
pub fn select_recommended(pareto: &[Individual]) -> Option<&Individual> {
    pareto.iter().min_by_key(|i| recommendation_key(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edits::{EditKind, EditOperation, Locator};
    use crate::fixtures;

    fn excerpt_problem() -> RepairProblem {
        RepairProblem::new(fixtures::excerpt(), fixtures::uml(), fixtures::intalio())
    }

    #[test]
    fn fitness_of_known_patches() {
        let p = excerpt_problem();
        assert_eq!(evaluate(&Patch::default(), &p), FitnessVector::new(3, 0, 0));
        let f = evaluate(&fixtures::excerpt_patch(), &p);
        assert_eq!((f.f1, f.f2), (1, 2));

        let mut full = fixtures::excerpt_patch();
        full.ops[0].new = "name".into();
        full.ops[1].new = "ActivityPartition".into();
        let f = evaluate(&full, &p);
        assert_eq!(f.f1, 0);
    }

    fn ind(f1: usize, f2: usize, f3: usize, tag: &str) -> Individual {
        let op = EditOperation {
            kind: EditKind::TargetOfBinding,
            rule: tag.into(),
            locator: Locator::InPattern,
            old: String::new(),
            new: String::new(),
        };
        Individual::new(Patch::new(vec![op]), FitnessVector::new(f1, f2, f3))
    }

    #[test]
    fn recommendation_order() {
        let set = vec![ind(0, 3, 1, "a"), ind(0, 2, 5, "b"), ind(1, 1, 0, "c")];
        assert_eq!(select_recommended(&set).unwrap().fitness, FitnessVector::new(0, 2, 5));
        assert_eq!(select_recommended(&set[2..]).unwrap().fitness, FitnessVector::new(1, 1, 0));
        let tie = vec![ind(0, 1, 1, "z"), ind(0, 1, 1, "b")];
        assert_eq!(select_recommended(&tie).unwrap().patch.ops[0].rule, "b");
        assert!(select_recommended(&[]).is_none());
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        let odd = SearchConfig {
            population: 7,
            ..SearchConfig::default()
        };
        assert!(odd.validate().is_err());
        assert_eq!(SearchConfig::default().budget(), 50_000);
    }
}
