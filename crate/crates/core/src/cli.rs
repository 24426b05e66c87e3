//! The `mtfix` command line.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on unreadable or invalid
//! input, 3 when `analyze` reports type errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use similar::TextDiff;
use thiserror::Error;

use crate::analyzer::{analyze, ErrorCategory, TypeError};
use crate::edits::{apply_patch, Patch};
use crate::footprint::{extract_footprint, Side};
use crate::harness::{
    classify_candidates, derive_seed, feasible_categories, generate_mutants, merge_mutants,
    run_evaluation, write_tables, EvalConfig, HarnessError, FORMAT_VERSION,
};
use crate::metamodel::{load_metamodel, Metamodel};
use crate::mtl::{parse_transformation, pretty_print, Transformation};
use crate::refine::refine;
use crate::search::{run_nsga2, run_random, select_recommended, Individual, RepairProblem, RunResult, SearchConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ERRORS_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mtfix", version, about = "Repair type errors in model transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report type errors.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        mm: MetamodelArgs,
        #[arg(long)]
        json: bool,
    },
    /// List the metamodel elements a transformation uses.
    Footprint {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "source")]
        side: SideArg,
        #[arg(long)]
        json: bool,
    },
    /// Inject errors of chosen categories into a correct transformation.
    Mutate {
        file: PathBuf,
        #[command(flatten)]
        mm: MetamodelArgs,
        /// Comma-separated categories, e.g. InvalidType,FeatureNotFound.
        #[arg(long, value_delimiter = ',', conflicts_with = "count")]
        categories: Vec<String>,
        /// Number of mutants, with categories drawn from the feasible ones.
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the faulty transformation here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Search for a patch that removes the type errors.
    Repair(RepairArgs),
    /// Apply a patch file.
    Apply {
        file: PathBuf,
        patch: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the refinement heuristics on a (patched) transformation.
    Refine {
        file: PathBuf,
        #[command(flatten)]
        mm: MetamodelArgs,
        #[arg(long)]
        json: bool,
    },
    /// Run the mutant-based evaluation and write table2.csv and table3.csv.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Overrides the config's worker count.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct MetamodelArgs {
    /// Source metamodel (.mm).
    #[arg(long)]
    src: PathBuf,
    /// Target metamodel (.mm).
    #[arg(long)]
    tgt: PathBuf,
}

#[derive(Debug, Args)]
struct RepairArgs {
    file: PathBuf,
    #[command(flatten)]
    mm: MetamodelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
    /// Write pareto.json, pareto.csv and recommended.json here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Source,
    Target,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Source => Side::Source,
            SideArg::Target => Side::Target,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Baseline {
    Random,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

type Outcome = Result<(String, i32), CliError>;

/// Parses `argv` (program name first), runs the subcommand and writes its
/// output to stdout. Returns the exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Analyze { file, mm, json } => cmd_analyze(&file, &mm, json),
        Command::Footprint { file, side, json } => cmd_footprint(&file, side.into(), json),
        Command::Mutate {
            file,
            mm,
            categories,
            count,
            seed,
            out,
            json,
        } => cmd_mutate(&file, &mm, &categories, count, seed, out.as_deref(), json),
        Command::Repair(args) => cmd_repair(&args),
        Command::Apply { file, patch, json } => cmd_apply(&file, &patch, json),
        Command::Refine { file, mm, json } => cmd_refine(&file, &mm, json),
        Command::Evaluate {
            config,
            out_dir,
            jobs,
            json,
        } => cmd_evaluate(&config, &out_dir, jobs, json),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn load_transformation(path: &Path) -> Result<Transformation, CliError> {
    parse_transformation(&read(path)?).map_err(|e| CliError::Input(format!("{}:{e}", path.display())))
}

fn load_mm(path: &Path) -> Result<Metamodel, CliError> {
    load_metamodel(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_pair(mm: &MetamodelArgs) -> Result<(Metamodel, Metamodel), CliError> {
    Ok((load_mm(&mm.src)?, load_mm(&mm.tgt)?))
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    category: ErrorCategory,
    line: u32,
    col: u32,
    rule: Option<&'a str>,
    symbol: &'a str,
    message: &'a str,
}

fn diagnostics(errors: &[TypeError]) -> Vec<Diagnostic<'_>> {
    errors
        .iter()
        .map(|e| Diagnostic {
            category: e.category,
            line: e.location.line,
            col: e.location.col,
            rule: e.rule.as_deref(),
            symbol: &e.symbol,
            message: &e.message,
        })
        .collect()
}

fn cmd_analyze(file: &Path, mm: &MetamodelArgs, json: bool) -> Outcome {
    let ast = load_transformation(file)?;
    let (src, tgt) = load_pair(mm)?;
    let errors = analyze(&ast, &src, &tgt);
    let out = if json {
        to_json(&json!({"format_version": FORMAT_VERSION, "errors": diagnostics(&errors)}))
    } else {
        let mut s = String::new();
        for e in &errors {
            let _ = writeln!(s, "{}:{e}", file.display());
        }
        let _ = writeln!(s, "{} error(s)", errors.len());
        s
    };
    Ok((out, if errors.is_empty() { EXIT_OK } else { EXIT_ERRORS_FOUND }))
}

fn cmd_footprint(file: &Path, side: Side, json: bool) -> Outcome {
    let ast = load_transformation(file)?;
    let fp = extract_footprint(&ast, side);
    let out = if json {
        to_json(&json!({"format_version": FORMAT_VERSION, "side": side, "elements": fp.elements}))
    } else {
        fp.elements.iter().map(|e| format!("{e}\n")).collect()
    };
    Ok((out, EXIT_OK))
}

fn cmd_mutate(
    file: &Path,
    mm: &MetamodelArgs,
    categories: &[String],
    count: usize,
    seed: u64,
    out: Option<&Path>,
    json: bool,
) -> Outcome {
    let original = load_transformation(file)?;
    let (src, tgt) = load_pair(mm)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let requested: Vec<ErrorCategory> = if categories.is_empty() {
        let candidates = classify_candidates(&original, &src, &tgt);
        let mut order = feasible_categories(&candidates);
        order.shuffle(&mut rng);
        order.iter().copied().cycle().take(count).collect()
    } else {
        categories
            .iter()
            .map(|c| ErrorCategory::from_name(c).ok_or_else(|| CliError::Input(format!("unknown error category `{c}`"))))
            .collect::<Result<_, _>>()?
    };
    let set = generate_mutants(&original, &src, &tgt, &requested, &mut rng)?;
    let merged = merge_mutants(&original, &set.mutants, &src, &tgt);
    let faulty = pretty_print(&merged.faulty);
    if let Some(path) = out {
        write(path, &faulty)?;
    }
    let text = if json {
        to_json(&json!({
            "format_version": FORMAT_VERSION,
            "mutants": set.mutants,
            "skipped": set.skipped,
            "err_in": merged.err_in,
            "faulty": faulty,
        }))
    } else {
        let mut s = String::new();
        for m in &set.mutants {
            let _ = writeln!(s, "-- mutant {}: {}", m.category, m.edit);
        }
        for c in &set.skipped {
            let _ = writeln!(s, "-- skipped {c}: no edit produces it");
        }
        let _ = writeln!(s, "-- {} error(s) after merging", merged.err_in);
        if out.is_none() {
            s.push_str(&faulty);
        }
        s
    };
    Ok((text, EXIT_OK))
}

fn read_patch(path: &Path) -> Result<Patch, CliError> {
    let text = read(path)?;
    let bad = |e: serde_json::Error| CliError::Input(format!("{}: {e}", path.display()));
    let value: Value = serde_json::from_str(&text).map_err(bad)?;
    // a bare array, or an object carrying it under "patch"
    let ops = match value {
        Value::Object(mut o) => o
            .remove("patch")
            .ok_or_else(|| CliError::Input(format!("{}: no `patch` field", path.display())))?,
        v => v,
    };
    serde_json::from_value(ops).map_err(bad)
}

fn cmd_apply(file: &Path, patch: &Path, json: bool) -> Outcome {
    let ast = load_transformation(file)?;
    let patch = read_patch(patch)?;
    let (patched, outcomes) = apply_patch(&ast, &patch);
    let source = pretty_print(&patched);
    let out = if json {
        to_json(&json!({"format_version": FORMAT_VERSION, "source": source, "outcomes": outcomes}))
    } else {
        let mut s = String::new();
        for (op, o) in patch.ops.iter().zip(&outcomes) {
            if let crate::edits::Outcome::Skipped(why) = o {
                let _ = writeln!(s, "-- skipped {op}: {why}");
            }
        }
        s.push_str(&source);
        s
    };
    Ok((out, EXIT_OK))
}

fn cmd_refine(file: &Path, mm: &MetamodelArgs, json: bool) -> Outcome {
    let ast = load_transformation(file)?;
    let (src, tgt) = load_pair(mm)?;
    let before = analyze(&ast, &src, &tgt).len();
    let (refined, report) = refine(&ast, &src, &tgt);
    let after = analyze(&refined, &src, &tgt).len();
    let source = pretty_print(&refined);
    let out = if json {
        to_json(&json!({
            "format_version": FORMAT_VERSION,
            "source": source,
            "report": report,
            "errors_before": before,
            "errors_after": after,
        }))
    } else {
        let mut s = source;
        for line in report.to_string().lines() {
            let _ = writeln!(s, "-- {line}");
        }
        let _ = writeln!(s, "-- errors: {before} -> {after}");
        s
    };
    Ok((out, EXIT_OK))
}

#[derive(Serialize)]
struct RunSummary<'a> {
    run: usize,
    seed: u64,
    first_zero_generation: Option<usize>,
    solutions_explored: usize,
    pareto: Vec<Solution<'a>>,
}

#[derive(Serialize)]
struct Solution<'a> {
    f1: usize,
    f2: usize,
    f3: usize,
    patch: &'a Patch,
}

impl<'a> From<&'a Individual> for Solution<'a> {
    fn from(i: &'a Individual) -> Self {
        Solution {
            f1: i.fitness.f1,
            f2: i.fitness.f2,
            f3: i.fitness.f3,
            patch: &i.patch,
        }
    }
}

fn search_config(args: &RepairArgs) -> Result<SearchConfig, CliError> {
    let d = SearchConfig::default();
    let c = SearchConfig {
        population: args.population.unwrap_or(d.population),
        generations: args.generations.unwrap_or(d.generations),
        crossover_rate: args.crossover_rate.unwrap_or(d.crossover_rate),
        mutation_rate: args.mutation_rate.unwrap_or(d.mutation_rate),
        seed: args.seed,
        jobs: args.jobs,
        ..d
    };
    c.validate().map_err(CliError::Input)?;
    if args.runs == 0 {
        return Err(CliError::Input("runs must be at least 1".into()));
    }
    Ok(c)
}

fn cmd_repair(args: &RepairArgs) -> Outcome {
    let faulty = load_transformation(&args.file)?;
    let (src, tgt) = load_pair(&args.mm)?;
    let base = search_config(args)?;
    let problem = RepairProblem::new(faulty.clone(), src, tgt);
    let seeds: Vec<u64> = (0..args.runs as u64)
        .map(|r| if args.runs == 1 { args.seed } else { derive_seed(args.seed, &[r]) })
        .collect();

    let mut results: Vec<RunResult> = Vec::new();
    let mut pool: Vec<Individual> = Vec::new();
    for &seed in &seeds {
        let config = SearchConfig { seed, ..base.clone() };
        match args.baseline {
            Some(Baseline::Random) => pool.push(run_random(&config, &problem)),
            None => {
                let r = run_nsga2(&config, &problem);
                pool.extend(r.pareto.iter().cloned());
                results.push(r);
            }
        }
    }
    let best = select_recommended(&pool).expect("every run yields a solution").clone();
    let repaired = problem.apply(&best.patch);
    let before = pretty_print(&faulty);
    let after = pretty_print(&repaired);
    let name = args.file.display().to_string();
    let diff = TextDiff::from_lines(&before, &after)
        .unified_diff()
        .header(&name, &format!("{name} (repaired)"))
        .to_string();
    let errors_before = problem.errors.len();
    let errors_after = problem.analyze(&repaired).len();
    let method = if args.baseline.is_some() { "random" } else { "nsga2" };
    let recommended = json!({
        "format_version": FORMAT_VERSION,
        "method": method,
        "fitness": {"f1": best.fitness.f1, "f2": best.fitness.f2, "f3": best.fitness.f3},
        "patch": best.patch,
    });

    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
        let runs: Vec<RunSummary> = match args.baseline {
            Some(_) => pool
                .iter()
                .zip(&seeds)
                .enumerate()
                .map(|(run, (i, &seed))| RunSummary {
                    run,
                    seed,
                    first_zero_generation: None,
                    solutions_explored: base.budget(),
                    pareto: vec![i.into()],
                })
                .collect(),
            None => results
                .iter()
                .zip(&seeds)
                .enumerate()
                .map(|(run, (r, &seed))| RunSummary {
                    run,
                    seed,
                    first_zero_generation: r.first_zero_generation,
                    solutions_explored: r.solutions_explored,
                    pareto: r.pareto.iter().map(Solution::from).collect(),
                })
                .collect(),
        };
        write(
            &dir.join("pareto.json"),
            &to_json(&json!({"format_version": FORMAT_VERSION, "method": method, "runs": runs})),
        )?;
        let mut csv = csv::Writer::from_writer(Vec::new());
        csv.write_record(["run", "index", "f1", "f2", "f3", "ops"]).expect("in-memory csv");
        for r in &runs {
            for (i, s) in r.pareto.iter().enumerate() {
                let ops: Vec<String> = s.patch.ops.iter().map(|o| o.to_string()).collect();
                csv.write_record([
                    r.run.to_string(),
                    i.to_string(),
                    s.f1.to_string(),
                    s.f2.to_string(),
                    s.f3.to_string(),
                    ops.join("; "),
                ])
                .expect("in-memory csv");
            }
        }
        let bytes = csv.into_inner().expect("in-memory csv");
        write(&dir.join("pareto.csv"), &String::from_utf8(bytes).expect("csv is utf-8"))?;
        write(&dir.join("recommended.json"), &to_json(&recommended))?;
    }

    let out = if args.json {
        to_json(&json!({
            "format_version": FORMAT_VERSION,
            "method": method,
            "errors_before": errors_before,
            "errors_after": errors_after,
            "recommended": recommended,
            "diff": diff,
        }))
    } else {
        let mut s = format!(
            "-- {method}: {errors_before} -> {errors_after} error(s), {} operation(s)\n",
            best.patch.len()
        );
        s.push_str(&diff);
        s.push_str(&best.patch.to_json());
        s.push('\n');
        s
    };
    Ok((out, EXIT_OK))
}

fn cmd_evaluate(config: &Path, out_dir: &Path, jobs: Option<usize>, json: bool) -> Outcome {
    let text = read(config)?;
    let mut cfg: EvalConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
    if let Some(j) = jobs {
        cfg.jobs = j;
    }
    let report = run_evaluation(&cfg)?;
    write_tables(&report, out_dir)?;
    write(&out_dir.join("report.json"), &to_json(&report))?;
    let out = if json {
        to_json(&report)
    } else {
        let mut s = String::new();
        for r in &report.table3 {
            let _ = writeln!(
                s,
                "#MUT {}: nsga2 {:.2} vs random {:.2} (p = {:.4})",
                r.mutants, r.nsga2_err_out, r.random_err_out, r.mann_whitney_p
            );
        }
        let _ = writeln!(s, "wrote {}", out_dir.join("table2.csv").display());
        let _ = writeln!(s, "wrote {}", out_dir.join("table3.csv").display());
        s
    };
    Ok((out, EXIT_OK))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_1_and_help_exits_0() {
        assert_eq!(dispatch(["mtfix"]), EXIT_USAGE);
        assert_eq!(dispatch(["mtfix", "analyze"]), EXIT_USAGE);
        assert_eq!(dispatch(["mtfix", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["mtfix", "--help"]), EXIT_OK);
        assert_eq!(dispatch(["mtfix", "--version"]), EXIT_OK);
    }

    #[test]
    fn missing_input_exits_2() {
        assert_eq!(
            dispatch(["mtfix", "footprint", "/nonexistent/x.mtl"]),
            EXIT_INPUT
        );
    }
}
