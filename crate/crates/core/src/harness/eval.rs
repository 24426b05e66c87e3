use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mutants::{clean_candidates, feasible_categories, merge_mutants, pick_mutants, Mutant};
use super::score::score_patch;
use super::stats::{cohens_d, mann_whitney_u};
use super::HarnessError;
use crate::analyzer::ErrorCategory;
use crate::edits::apply_patch;
use crate::fixtures;
use crate::refine::refine;
use crate::search::{run_nsga2, run_random, select_recommended, RepairProblem, SearchConfig};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Bundled problem names; empty means all of them.
    pub fixtures: Vec<String>,
    /// Mutants merged into each faulty transformation.
    pub mutant_counts: Vec<usize>,
    pub sets_per_count: usize,
    /// Runs per faulty transformation and method.
    pub runs: usize,
    pub seed: u64,
    /// Worker threads over evaluation cells; left out of serialized reports.
    #[serde(skip_serializing)]
    pub jobs: usize,
    pub search: SearchConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            fixtures: Vec::new(),
            mutant_counts: (3..=8).collect(),
            sets_per_count: 1,
            runs: 5,
            seed: 0,
            jobs: 1,
            search: SearchConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Nsga2,
    Random,
}

/// One faulty transformation built from merged mutants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaultySet {
    pub fixture: String,
    pub mutants_requested: usize,
    pub set: usize,
    pub mutants: Vec<Mutant>,
    pub skipped: Vec<ErrorCategory>,
    pub err_in: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub fixture: String,
    pub mutants: usize,
    pub set: usize,
    pub run: usize,
    pub method: Method,
    pub seed: u64,
    pub err_in: usize,
    /// Generation at which an error-free patch first appeared.
    pub ite: Option<usize>,
    /// Length of the recommended patch.
    pub ope: usize,
    pub ope_applied: usize,
    pub err_out: usize,
    pub exact_ep: usize,
    /// After refinement; NSGA-II rows only.
    pub err_out_rp: Option<usize>,
    pub exact_rp: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Row {
    pub fixture: String,
    #[serde(rename = "#MUT")]
    pub mutants: usize,
    #[serde(rename = "#ERR_in")]
    pub err_in: f64,
    #[serde(rename = "#ITE")]
    pub ite: Option<f64>,
    #[serde(rename = "#OPE")]
    pub ope: f64,
    #[serde(rename = "#ERR_out_min")]
    pub err_out_min: usize,
    #[serde(rename = "#ERR_out_avg")]
    pub err_out_avg: f64,
    #[serde(rename = "#ERR_out_max")]
    pub err_out_max: usize,
    #[serde(rename = "SEM_EP")]
    pub sem_ep: Option<f64>,
    #[serde(rename = "SEM_RP")]
    pub sem_rp: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table3Row {
    #[serde(rename = "#MUT")]
    pub mutants: usize,
    pub nsga2_err_out: f64,
    pub random_err_out: f64,
    pub mann_whitney_p: f64,
    /// Empty when the pooled deviation is zero.
    pub cohens_d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub config: EvalConfig,
    pub sets: Vec<FaultySet>,
    pub runs: Vec<RunRow>,
    pub table2: Vec<Table2Row>,
    pub table3: Vec<Table3Row>,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for a cell identified by `parts`.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ p))
}

/// Mutate, merge, repair with both methods, refine and score, for every
/// fixture, mutant count, set and run.
pub fn run_evaluation(config: &EvalConfig) -> Result<EvaluationReport, HarnessError> {
    config.search.validate().map_err(HarnessError::Config)?;
    if config.runs == 0 || config.sets_per_count == 0 || config.jobs == 0 {
        return Err(HarnessError::Config("runs, sets_per_count and jobs must be at least 1".into()));
    }
    let names: Vec<String> = if config.fixtures.is_empty() {
        fixtures::problem_names().map(str::to_string).collect()
    } else {
        config.fixtures.clone()
    };

    struct Cell {
        set: usize,
        run: usize,
        method: Method,
        seed: u64,
    }
    let mut problems = Vec::new();
    let mut sets = Vec::new();
    let mut cells = Vec::new();
    for (fi, name) in names.iter().enumerate() {
        let p = fixtures::problem(name).ok_or_else(|| HarnessError::UnknownFixture(name.clone()))?;
        let candidates = clean_candidates(&p.transformation, &p.source_mm, &p.target_mm)?;
        let feasible = feasible_categories(&candidates);
        for &count in &config.mutant_counts {
            for s in 0..config.sets_per_count {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[fi as u64, count as u64, s as u64]));
                let mut order = feasible.clone();
                order.shuffle(&mut rng);
                let requested: Vec<ErrorCategory> = order.iter().copied().cycle().take(count).collect();
                let picked = pick_mutants(&p.transformation, &candidates, &requested, &mut rng);
                let merged = merge_mutants(&p.transformation, &picked.mutants, &p.source_mm, &p.target_mm);
                let idx = sets.len();
                sets.push(FaultySet {
                    fixture: name.clone(),
                    mutants_requested: count,
                    set: s,
                    mutants: picked.mutants,
                    skipped: picked.skipped,
                    err_in: merged.err_in,
                });
                problems.push((fi, merged.faulty));
                for run in 0..config.runs {
                    let seed = derive_seed(config.seed, &[fi as u64, count as u64, s as u64, run as u64, 1]);
                    for method in [Method::Nsga2, Method::Random] {
                        cells.push(Cell {
                            set: idx,
                            run,
                            method,
                            seed,
                        });
                    }
                }
            }
        }
    }
    let originals: Vec<fixtures::Problem> = names.iter().map(|n| fixtures::problem(n).expect("checked above")).collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .expect("thread pool");
    let runs: Vec<RunRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let (fi, faulty) = &problems[c.set];
                let fs = &sets[c.set];
                let o = &originals[*fi];
                let problem = RepairProblem::new(faulty.clone(), o.source_mm.clone(), o.target_mm.clone());
                let search = SearchConfig {
                    seed: c.seed,
                    jobs: 1,
                    ..config.search.clone()
                };
                let (patch, ite) = match c.method {
                    Method::Nsga2 => {
                        let res = run_nsga2(&search, &problem);
                        let best = select_recommended(&res.pareto).expect("front 1 is nonempty").patch.clone();
                        (best, res.first_zero_generation)
                    }
                    Method::Random => (run_random(&search, &problem).patch, None),
                };
                let (repaired, log) = apply_patch(faulty, &patch);
                let ep = score_patch(&o.transformation, faulty, &repaired, &o.source_mm, &o.target_mm);
                let err_out = problem.analyze(&repaired).len();
                let (err_out_rp, exact_rp) = match c.method {
                    Method::Nsga2 => {
                        let (refined, _) = refine(&repaired, &o.source_mm, &o.target_mm);
                        let rp = score_patch(&o.transformation, faulty, &refined, &o.source_mm, &o.target_mm);
                        (Some(problem.analyze(&refined).len()), Some(rp.exact_fixes))
                    }
                    Method::Random => (None, None),
                };
                RunRow {
                    fixture: fs.fixture.clone(),
                    mutants: fs.mutants_requested,
                    set: fs.set,
                    run: c.run,
                    method: c.method,
                    seed: c.seed,
                    err_in: fs.err_in,
                    ite,
                    ope: patch.len(),
                    ope_applied: log.iter().filter(|o| o.is_applied()).count(),
                    err_out,
                    exact_ep: ep.exact_fixes,
                    err_out_rp,
                    exact_rp,
                }
            })
            .collect()
    });

    let table2 = table2(&runs);
    let table3 = table3(&runs);
    Ok(EvaluationReport {
        format_version: FORMAT_VERSION,
        config: config.clone(),
        sets,
        runs,
        table2,
        table3,
    })
}

fn mean<I: IntoIterator<Item = f64>>(xs: I) -> Option<f64> {
    let v: Vec<f64> = xs.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn rate(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn table2(runs: &[RunRow]) -> Vec<Table2Row> {
    let mut groups: BTreeMap<(&str, usize), Vec<&RunRow>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.method == Method::Nsga2) {
        groups.entry((&r.fixture, r.mutants)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((fixture, mutants), rows)| {
            let err_in: usize = rows.iter().map(|r| r.err_in).sum();
            Table2Row {
                fixture: fixture.to_string(),
                mutants,
                err_in: mean(rows.iter().map(|r| r.err_in as f64)).unwrap_or(0.0),
                ite: mean(rows.iter().filter_map(|r| r.ite).map(|i| i as f64)),
                ope: mean(rows.iter().map(|r| r.ope as f64)).unwrap_or(0.0),
                err_out_min: rows.iter().map(|r| r.err_out).min().unwrap_or(0),
                err_out_avg: mean(rows.iter().map(|r| r.err_out as f64)).unwrap_or(0.0),
                err_out_max: rows.iter().map(|r| r.err_out).max().unwrap_or(0),
                sem_ep: rate(rows.iter().map(|r| r.exact_ep).sum(), err_in),
                sem_rp: rate(rows.iter().map(|r| r.exact_rp.unwrap_or(0)).sum(), err_in),
            }
        })
        .collect()
}

fn table3(runs: &[RunRow]) -> Vec<Table3Row> {
    let mut groups: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in runs {
        let g = groups.entry(r.mutants).or_default();
        match r.method {
            Method::Nsga2 => g.0.push(r.err_out as f64),
            Method::Random => g.1.push(r.err_out as f64),
        }
    }
    groups
        .into_iter()
        .filter(|(_, (a, b))| !a.is_empty() && !b.is_empty())
        .map(|(mutants, (a, b))| Table3Row {
            mutants,
            nsga2_err_out: mean(a.iter().copied()).unwrap_or(0.0),
            random_err_out: mean(b.iter().copied()).unwrap_or(0.0),
            mann_whitney_p: mann_whitney_u(&a, &b).p,
            cohens_d: cohens_d(&a, &b),
        })
        .collect()
}

/// Writes `table2.csv` and `table3.csv` into `dir`.
pub fn write_tables(report: &EvaluationReport, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("table2.csv"))?;
    for row in &report.table2 {
        w.serialize(row)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("table3.csv"))?;
    for row in &report.table3 {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
