use std::fs;
use std::path::Path;
use std::time::Instant;

use afptas::assembly::Packing;
use afptas::error::Error as SolverError;
use afptas::generate::{generate as generate_instance, GeneratorConfig, PenaltyDist, SizeDist};
use afptas::instance::{max_epsilon, snap_epsilon, validate_and_normalize, Instance, InstanceFile, Problem};
use afptas::rational::Rational;
use afptas::solver::{solve_with, SolveReport, SolverOptions};
use afptas::verify::{check, exact, ffd_baseline};
use anyhow::{anyhow, Context};
use log::{info, warn};

use crate::record::{self, RunRecord};
use crate::{Baseline, Format, PenaltyDistArg, ProblemArg, SizeDistArg};

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CHECK: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SOLVER: u8 = 3;

impl Failure {
    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_USAGE, error: error.into() }
    }

    fn check(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CHECK, error: error.into() }
    }

    fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_SOLVER, error: error.into() }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::ConvergenceFailure { .. }
            | SolverError::NumericalInstability(_)
            | SolverError::InternalInvariantViolation(_) => EXIT_SOLVER,
            _ => EXIT_USAGE,
        };
        Failure { code, error: e.into() }
    }
}

fn parse_epsilon(text: &str) -> Result<Rational, Failure> {
    let eps = Rational::parse(text).map_err(|e| Failure::usage(anyhow!("--epsilon {text}: {e}")))?;
    let (snapped, changed) = snap_epsilon(&eps)?;
    if changed {
        eprintln!("warning: epsilon {eps} is not of the form 1/m; using {snapped}");
    }
    Ok(snapped)
}

fn read_instance_file(path: &Path) -> Result<InstanceFile, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    InstanceFile::from_json(&text).map_err(|e| Failure::usage(anyhow!("{}: {e}", path.display())))
}

fn load_instance(path: &Path, epsilon: Rational) -> Result<Instance, Failure> {
    let inst = read_instance_file(path)?.into_instance(epsilon)?;
    Ok(validate_and_normalize(inst)?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub struct GenerateArgs<'a> {
    pub problem: ProblemArg,
    pub n: usize,
    pub k: usize,
    pub size_dist: SizeDistArg,
    pub penalty_dist: PenaltyDistArg,
    pub seed: u64,
    pub epsilon: &'a str,
    pub out: Option<&'a Path>,
}

pub fn generate(args: GenerateArgs<'_>) -> Result<(), Failure> {
    let problem = match args.problem {
        ProblemArg::Bpcc => Problem::Bpcc,
        ProblemArg::Bpr => Problem::Bpr,
    };
    let mut cfg = GeneratorConfig::new(problem, args.n, args.seed);
    cfg.k = (problem == Problem::Bpcc).then_some(args.k);
    cfg.size_dist = match args.size_dist {
        SizeDistArg::Uniform => SizeDist::Uniform,
        SizeDistArg::Clustered => SizeDist::Clustered,
    };
    cfg.penalty_dist = match args.penalty_dist {
        PenaltyDistArg::Uniform => PenaltyDist::Uniform,
        PenaltyDistArg::Low => PenaltyDist::Low,
        PenaltyDistArg::High => PenaltyDist::High,
    };
    cfg.epsilon = parse_epsilon(args.epsilon)?;
    let mut text = generate_instance(&cfg).to_json();
    text.push('\n');
    write_output(args.out, &text)
}

fn run_solver(inst: &Instance) -> Result<(afptas::solver::SolveRun, f64), Failure> {
    let start = Instant::now();
    let run = solve_with(inst, &SolverOptions::default())?;
    Ok((run, start.elapsed().as_secs_f64() * 1e3))
}

fn scheme_record(id: &str, inst: &Instance, report: &SolveReport, runtime_ms: f64) -> RunRecord {
    RunRecord {
        instance_id: id.to_owned(),
        n: inst.n(),
        k: inst.k,
        epsilon: inst.epsilon.to_exact_string(),
        algorithm: "afptas".into(),
        cost: report.packing.cost.to_exact_string(),
        bins: report.packing.bin_count(),
        rejected_cost: report.packing.rejected_cost().to_exact_string(),
        lp_value: Some(format!("{:.9}", report.lp_value)),
        opt_exact: None,
        guarantee_mult: Some(report.guarantee.multiplicative.to_exact_string()),
        guarantee_add: Some(report.guarantee.additive.to_exact_string()),
        runtime_ms: format!("{runtime_ms:.3}"),
    }
}

fn baseline_record(id: &str, inst: &Instance, algorithm: &str, packing: &Packing, runtime_ms: f64) -> RunRecord {
    RunRecord {
        instance_id: id.to_owned(),
        n: inst.n(),
        k: inst.k,
        epsilon: inst.epsilon.to_exact_string(),
        algorithm: algorithm.into(),
        cost: packing.cost.to_exact_string(),
        bins: packing.bin_count(),
        rejected_cost: packing.rejected_cost().to_exact_string(),
        lp_value: None,
        opt_exact: None,
        guarantee_mult: None,
        guarantee_add: None,
        runtime_ms: format!("{runtime_ms:.3}"),
    }
}

pub fn solve(
    input: &Path,
    epsilon: &str,
    out: Option<&Path>,
    format: Format,
    dump_lp: Option<&Path>,
) -> Result<(), Failure> {
    let inst = load_instance(input, parse_epsilon(epsilon)?)?;
    let (run, runtime_ms) = run_solver(&inst)?;
    let violations = check(&run.report.packing, &inst);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Failure::runtime(anyhow!("solver produced an invalid packing: {}", list.join("; "))));
    }
    info!("{}: cost {} in {runtime_ms:.1} ms", input.display(), run.report.packing.cost);
    if let Some(path) = dump_lp {
        write_output(Some(path), &run.master.dump_lp())?;
    }
    let text = match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&run.report).map_err(Failure::runtime)?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let row = scheme_record(&instance_id(input), &inst, &run.report, runtime_ms);
            record::to_string(&[row]).map_err(Failure::runtime)?
        }
    };
    write_output(out, &text)
}

pub fn compare(inputs: &[std::path::PathBuf], epsilon: &str, with: &[Baseline], out: Option<&Path>) -> Result<(), Failure> {
    let eps = parse_epsilon(epsilon)?;
    let mut with = with.to_vec();
    with.sort();
    with.dedup();
    let mut jobs: Vec<(String, &Path)> = inputs.iter().map(|p| (instance_id(p), p.as_path())).collect();
    jobs.sort();

    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (id, path) in jobs {
        let inst = load_instance(path, eps.clone())?;
        let (run, runtime_ms) = run_solver(&inst)?;
        let report = &run.report;
        let mut rows = vec![scheme_record(&id, &inst, report, runtime_ms)];
        let mut opt = None;
        for baseline in &with {
            let start = Instant::now();
            match baseline {
                Baseline::Exact => match exact(&inst) {
                    Ok(result) => {
                        let ms = start.elapsed().as_secs_f64() * 1e3;
                        rows.push(baseline_record(&id, &inst, "exact", &result.witness, ms));
                        opt = Some(result.opt_cost);
                    }
                    Err(SolverError::TooLarge { n, limit }) => {
                        warn!("{id}: {n} items exceed the exact oracle limit {limit}; skipped");
                    }
                    Err(e) => return Err(e.into()),
                },
                Baseline::Ffd => {
                    let packing = ffd_baseline(&inst);
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    rows.push(baseline_record(&id, &inst, "ffd", &packing, ms));
                }
            }
        }
        let violations = check(&report.packing, &inst);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
            failures.push(format!("{id}: invalid packing: {}", list.join("; ")));
        }
        if let Some(opt) = &opt {
            if !report.guarantee.holds(&report.packing.cost, opt) {
                failures.push(format!(
                    "{id}: cost {} exceeds {} * {opt} + {}",
                    report.packing.cost, report.guarantee.multiplicative, report.guarantee.additive
                ));
            }
            let opt_text = opt.to_exact_string();
            for row in &mut rows {
                row.opt_exact = Some(opt_text.clone());
            }
        }
        records.extend(rows);
    }
    record::append(out, &records).map_err(Failure::runtime)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(anyhow!("{}", failures.join("\n"))))
    }
}

pub fn verify(packing_path: &Path, input: &Path) -> Result<(), Failure> {
    let file = read_instance_file(input)?;
    let eps = max_epsilon(file.problem);
    let inst = validate_and_normalize(file.into_instance(eps)?)?;
    let text = fs::read_to_string(packing_path)
        .with_context(|| format!("reading {}", packing_path.display()))
        .map_err(Failure::usage)?;
    let packing = packing_from_json(&text).map_err(Failure::usage)?;
    let violations = check(&packing, &inst);
    if violations.is_empty() {
        println!("ok: {} bins, cost {}", packing.bin_count(), packing.cost);
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::check(anyhow!("{} violation(s)", violations.len())))
}

/// Accepts a bare packing or a solve report that embeds one.
fn packing_from_json(text: &str) -> anyhow::Result<Packing> {
    let value: serde_json::Value = serde_json::from_str(text).context("packing is not valid JSON")?;
    let inner = match value.get("packing") {
        Some(p) => p.to_string(),
        None => value.to_string(),
    };
    Ok(Packing::from_json(&inner)?)
}
