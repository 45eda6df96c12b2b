// Errors carry witness cells and textual context by design; nothing here
// fails on a hot path.
#![allow(clippy::result_large_err)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use riesz_cli::gallery::{self, GalleryParams};
use riesz_cli::selftest;
use riesz_core::error::{Error, Result};
use riesz_core::format::{parse_function_file, parse_space, FunctionFile};
use riesz_core::measurable::{disjoint_union, intersection, set_difference};
use riesz_core::monotone::{EvalParams, MonotoneLimit};
use riesz_core::numeric::{ExtendedRational, Rational};
use riesz_core::product::{fubini_monotone, fubini_step, FubiniReport};
use riesz_core::signed::{beppo_levi, l1_certify, SignedLimit};
use riesz_core::space::MeasureSpace;
use riesz_core::step::StepFunction;
use riesz_core::stream::Stream;
use riesz_core::MeasurableSet;

/// Exact step-function integration over semirings: monotone limits, signed
/// limits, measures, and product-space integration, all in exact rational
/// arithmetic.
#[derive(Parser)]
#[command(name = "riesz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate every step function in a file, exactly.
    Integrate { file: PathBuf },
    /// Evaluate the partial-integral ladder of a monotone stream.
    R1 {
        file: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        threshold: Option<Rational>,
        /// Declared limit, validated against every computed partial.
        #[arg(long)]
        declare: Option<ExtendedRational>,
    },
    /// Certify a difference of two monotone streams and report its integral.
    R2 {
        #[arg(long)]
        pos: PathBuf,
        #[arg(long)]
        neg: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        declare_pos: Option<ExtendedRational>,
        #[arg(long)]
        declare_neg: Option<ExtendedRational>,
    },
    /// Run the monotone-convergence harness over a step sequence.
    #[command(name = "beppo-levi")]
    BeppoLevi {
        file: PathBuf,
        #[arg(long, default_value_t = 64)]
        horizon: usize,
        #[arg(long)]
        declare: Option<ExtendedRational>,
    },
    /// Tail-minima evidence for a nonnegative integrable sequence.
    Fatou {
        file: PathBuf,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
    /// Envelope-squeeze evidence for a dominated sequence.
    Dominated {
        file: PathBuf,
        /// File whose first step function dominates the sequence.
        #[arg(long)]
        bound: PathBuf,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
    /// Measure of each set in a file.
    Measure { file: PathBuf },
    /// Sigma-ring operations on sets.
    #[command(name = "sigma-ops")]
    SigmaOps {
        #[command(subcommand)]
        op: SigmaOp,
    },
    /// Double vs iterated integrals on a product space.
    Fubini {
        file: PathBuf,
        /// Expected factor spaces, e.g. `interval,counting`; checked against
        /// the file's space line.
        #[arg(long)]
        spaces: Option<String>,
        #[arg(long, default_value_t = 16)]
        horizon: usize,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// The counting-measure counterexample on an integer window.
    #[command(name = "fubini-counterexample")]
    FubiniCounterexample {
        #[arg(long, default_value_t = 5)]
        window: i64,
    },
    /// Run a gallery entry.
    Gallery {
        id: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value = "1")]
        alpha: ExtendedRational,
        /// Comma-separated ground identifiers for windowed entries.
        #[arg(long)]
        window: Option<String>,
    },
    /// Run the full invariant suite.
    Selftest {
        /// Run a single check, e.g. `c3`.
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Subcommand)]
enum SigmaOp {
    /// Set difference of the first sets of two files.
    Diff { left: PathBuf, right: PathBuf },
    /// Disjoint union of the first sets of the given files.
    Union { files: Vec<PathBuf> },
    /// Intersection of the first sets of the given files.
    Intersect {
        files: Vec<PathBuf>,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn default_params(budget: Option<usize>) -> EvalParams {
    let env_budget = std::env::var("RIESZ_BUDGET")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    EvalParams {
        budget: budget.or(env_budget).unwrap_or(64),
        ..EvalParams::default()
    }
}

fn load(path: &Path) -> Result<FunctionFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_function_file(&text)
}

fn seq_limit(file: &FunctionFile, path: &Path) -> Result<MonotoneLimit> {
    let seq = file.seq.clone().ok_or_else(|| {
        Error::Parse(format!(
            "{}: needs a `seq` template or step table with a `tail` line",
            path.display()
        ))
    })?;
    if file.space != MeasureSpace::IntervalLine {
        return Err(Error::Parse(format!(
            "{}: stream templates are defined on the interval line",
            path.display()
        )));
    }
    let stream = seq.stream();
    Ok(MonotoneLimit::from_results(file.space.clone(), move |n| {
        stream.get(n)
    }))
}

/// Raw step stream of a sequence file, for checkers that accept
/// non-monotone sequences.
fn seq_stream(file: &FunctionFile, path: &Path) -> Result<Stream<riesz_core::Result<StepFunction>>> {
    let seq = file.seq.clone().ok_or_else(|| {
        Error::Parse(format!(
            "{}: needs a `seq` template or step table with a `tail` line",
            path.display()
        ))
    })?;
    if file.space != MeasureSpace::IntervalLine {
        return Err(Error::Parse(format!(
            "{}: stream templates are defined on the interval line",
            path.display()
        )));
    }
    Ok(seq.stream())
}

fn first_set(file: &FunctionFile, path: &Path) -> Result<MeasurableSet> {
    let cells = file
        .sets
        .first()
        .ok_or_else(|| Error::Parse(format!("{}: needs a `set` line", path.display())))?;
    MeasurableSet::from_cells(file.space.clone(), cells.clone())
}

fn print_ladder(limit: &MonotoneLimit, budget: usize) -> Result<()> {
    let shown: Vec<usize> = if budget <= 8 {
        (0..budget).collect()
    } else {
        vec![0, 1, 2, 3, budget / 2, budget - 2, budget - 1]
    };
    for n in shown {
        println!("  partial[{n}] = {}", limit.partial(n)?);
    }
    Ok(())
}

fn print_fubini(report: &FubiniReport) {
    println!("double integral:        {}", report.double);
    println!("iterated (left first):  {}", report.iterated_left_then_right);
    println!("iterated (right first): {}", report.iterated_right_then_left);
    println!("verdict: {:?}", report.verdict);
    if !report.ladder.is_empty() {
        let n = report.ladder.len() - 1;
        let (d, a, b) = &report.ladder[n];
        println!("ladder tail [{n}]: {d} | {a} | {b}");
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Integrate { file } => {
            let parsed = load(&file)?;
            if parsed.steps.is_empty() {
                return Err(Error::Parse(format!(
                    "{}: no step lines to integrate",
                    file.display()
                )));
            }
            for step in &parsed.steps {
                println!("{}", step.integral());
            }
            Ok(true)
        }
        Command::R1 {
            file,
            budget,
            window,
            threshold,
            declare,
        } => {
            let parsed = load(&file)?;
            let limit = seq_limit(&parsed, &file)?;
            let mut params = default_params(budget);
            if let Some(w) = window {
                params.window = w;
            }
            if let Some(t) = threshold {
                params.infinity_threshold = t;
            }
            let mut estimate = limit.estimate(&params)?;
            if let Some(d) = declare {
                estimate = estimate.declare(d)?;
            }
            print_ladder(&limit, params.budget)?;
            println!("status: {:?}", estimate.status);
            println!("integral: {}", estimate.value());
            Ok(true)
        }
        Command::R2 {
            pos,
            neg,
            budget,
            declare_pos,
            declare_neg,
        } => {
            let params = default_params(budget);
            let pos_file = load(&pos)?;
            let neg_file = load(&neg)?;
            let pos_limit = seq_limit(&pos_file, &pos)?;
            let neg_limit = seq_limit(&neg_file, &neg)?;
            let mut pos_est = pos_limit.estimate(&params)?;
            if let Some(d) = declare_pos {
                pos_est = pos_est.declare(d)?;
            }
            let mut neg_est = neg_limit.estimate(&params)?;
            if let Some(d) = declare_neg {
                neg_est = neg_est.declare(d)?;
            }
            let f = SignedLimit::new(pos_limit, neg_limit, pos_est, neg_est)?;
            println!("finite side: {:?}", f.finite_side());
            println!("integral: {}", f.integral());
            Ok(true)
        }
        Command::BeppoLevi {
            file,
            horizon,
            declare,
        } => {
            let parsed = load(&file)?;
            let limit_stream = seq_limit(&parsed, &file)?;
            let params = default_params(None);
            let terms = move |n: usize| -> Result<SignedLimit> {
                Ok(SignedLimit::from_step(limit_stream.step_at(n)?))
            };
            let (limit, report) = beppo_levi(terms, horizon, declare, &params)?;
            println!("start index: {}", report.start_index);
            for (k, v) in report
                .ladder
                .iter()
                .enumerate()
                .filter(|(k, _)| *k < 4 || *k + 2 >= report.ladder.len())
            {
                println!("  ladder[{k}] = {v}");
            }
            let bound_ok = report
                .remainder_partials
                .iter()
                .all(|r| *r <= Rational::one());
            println!(
                "remainder partials stay at or below 1: {}",
                if bound_ok { "yes" } else { "NO" }
            );
            if let Some(gap) = &report.declared_gap {
                println!("declared limit {}; last-ladder gap {gap}", report.declared.as_ref().expect("declared"));
            }
            println!("limit integral: {}", limit.integral());
            Ok(bound_ok)
        }
        Command::Fatou { file, horizon } => {
            let parsed = load(&file)?;
            let stream = seq_stream(&parsed, &file)?;
            let params = default_params(None);
            let report = riesz_core::signed::fatou_report(
                |n| l1_certify(SignedLimit::from_step(stream.get(n)?)),
                horizon,
                &params,
            )?;
            println!("index | integral of tail min | min of tail integrals | ok");
            for row in &report.rows {
                println!(
                    "{:5} | {} | {} | {}",
                    row.index, row.tail_min_integral, row.tail_min_of_integrals, row.ok
                );
            }
            println!("all rows ok: {}", report.all_ok);
            Ok(report.all_ok)
        }
        Command::Dominated {
            file,
            bound,
            horizon,
        } => {
            let parsed = load(&file)?;
            let stream = seq_stream(&parsed, &file)?;
            let bound_file = load(&bound)?;
            let g = bound_file.steps.first().cloned().ok_or_else(|| {
                Error::Parse(format!("{}: needs a step line", bound.display()))
            })?;
            let params = default_params(None);
            let report = riesz_core::signed::dominated_report(
                |n| l1_certify(SignedLimit::from_step(stream.get(n)?)),
                &l1_certify(SignedLimit::from_step(g))?,
                horizon,
                &params,
            )?;
            println!("index | lower env | min tail | max tail | upper env | ok");
            for row in &report.squeeze {
                println!(
                    "{:5} | {} | {} | {} | {} | {}",
                    row.index,
                    row.lower_envelope,
                    row.min_tail_integral,
                    row.max_tail_integral,
                    row.upper_envelope,
                    row.ok
                );
            }
            println!("all rows ok: {}", report.all_ok);
            Ok(report.all_ok)
        }
        Command::Measure { file } => {
            let parsed = load(&file)?;
            if parsed.sets.is_empty() {
                return Err(Error::Parse(format!(
                    "{}: no set lines to measure",
                    file.display()
                )));
            }
            let params = default_params(None);
            for cells in &parsed.sets {
                let set = MeasurableSet::from_cells(parsed.space.clone(), cells.clone())?;
                println!("{}", set.measure(&params)?);
            }
            Ok(true)
        }
        Command::SigmaOps { op } => {
            let params = default_params(None);
            match op {
                SigmaOp::Diff { left, right } => {
                    let a = first_set(&load(&left)?, &left)?;
                    let b = first_set(&load(&right)?, &right)?;
                    let d = set_difference(&a, &b, &params)?;
                    if let Some(ind) = d.as_finite_indicator() {
                        println!("indicator: {ind}");
                    }
                    println!("measure: {}", d.measure(&params)?);
                }
                SigmaOp::Union { files } => {
                    if files.is_empty() {
                        return Err(Error::Parse("union needs at least one file".into()));
                    }
                    let mut sets = Vec::new();
                    for f in &files {
                        sets.push(first_set(&load(f)?, f)?);
                    }
                    let space = sets[0].space().clone();
                    let count = sets.len();
                    let empty = MeasurableSet::empty(space.clone());
                    let parts = Stream::with_prefix(sets, move |_| empty.clone());
                    let u = disjoint_union(parts, space);
                    for n in 0..count {
                        println!("stage {n}: measure {}", u.stage(n)?.integral());
                    }
                }
                SigmaOp::Intersect { files, horizon } => {
                    if files.is_empty() {
                        return Err(Error::Parse("intersect needs at least one file".into()));
                    }
                    let mut sets = Vec::new();
                    for f in &files {
                        sets.push(first_set(&load(f)?, f)?);
                    }
                    let space = sets[0].space().clone();
                    let last = sets.last().expect("nonempty").clone();
                    let parts = Stream::with_prefix(sets, move |_| last.clone());
                    let (result, ladder) = intersection(parts, space, horizon, &params)?;
                    for (n, v) in ladder.iter().enumerate().take(files.len().max(4)) {
                        println!("prefix intersection [{n}]: measure {v}");
                    }
                    println!("measure: {}", result.measure(&params)?);
                }
            }
            Ok(true)
        }
        Command::Fubini {
            file,
            spaces,
            horizon,
            budget,
        } => {
            let parsed = load(&file)?;
            if let Some(expected) = spaces {
                let parts: Vec<&str> = expected.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::Parse(
                        "--spaces wants two comma-separated factor names".into(),
                    ));
                }
                let expected_space =
                    MeasureSpace::product(parse_space(parts[0])?, parse_space(parts[1])?);
                if parsed.space != expected_space {
                    return Err(Error::Parse(format!(
                        "file space {} does not match --spaces {}",
                        parsed.space, expected_space
                    )));
                }
            }
            let params = default_params(budget);
            let report = if let Some(seq) = &parsed.seq {
                let stream = seq.stream();
                let limit =
                    MonotoneLimit::from_results(parsed.space.clone(), move |n| stream.get(n));
                fubini_monotone(&limit, horizon, &params)?
            } else if let Some(step) = parsed.steps.first() {
                fubini_step(step)?
            } else {
                return Err(Error::Parse(format!(
                    "{}: needs a step line or a seq template",
                    file.display()
                )));
            };
            print_fubini(&report);
            Ok(!matches!(
                report.verdict,
                riesz_core::product::FubiniVerdict::Undefined
            ))
        }
        Command::FubiniCounterexample { window } => {
            print!("{}", gallery::render_counting_counterexample(window)?);
            Ok(true)
        }
        Command::Gallery {
            id,
            depth,
            alpha,
            window,
        } => {
            let mut params = GalleryParams {
                depth,
                alpha,
                ..GalleryParams::default()
            };
            if let Some(w) = window {
                params.window = w.split(',').map(|s| s.trim().to_string()).collect();
            }
            let report = gallery::run_entry(&id, &params)?;
            print!("{}", report.render());
            Ok(report.pass)
        }
        Command::Selftest { only } => {
            let outcomes = selftest::run(only.as_deref());
            if outcomes.is_empty() {
                return Err(Error::Parse(format!(
                    "no such check; known checks: {}",
                    selftest::check_ids().join(", ")
                )));
            }
            let mut all = true;
            for o in &outcomes {
                println!("{}", o.render_line());
                all &= o.passed;
            }
            Ok(all)
        }
    }
}
