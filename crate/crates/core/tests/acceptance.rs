//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use afptas::config::{Configuration, Window, WindowUniverse};
use afptas::error::Error;
use afptas::generate::{generate, GeneratorConfig, PenaltyDist, SizeDist};
use afptas::instance::{Instance, Item, Problem};
use afptas::lp::{price_all_windows, DualPrices, VIOLATION_TOL};
use afptas::pricing::{kcc_fptas, kcc_sweep, knapsack_fptas, PricingItem, PricingProblem, PricingSolution};
use afptas::rational::{q, Rational};
use afptas::rounding::ItemType;
use afptas::solver::{case_of, solve_with, CaseTag, SolveRun, SolverOptions};
use afptas::verify::{brute_knapsack, check, exact};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(items.len().max(1));
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().unwrap()[i] = Some(r);
            });
        }
    });
    out.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

fn inv_sq(eps: &Rational) -> usize {
    let m = eps.recip().to_f64().round() as usize;
    m * m
}

/// A generated instance plus how it was drawn.
#[derive(Clone)]
struct Case {
    label: String,
    instance: Instance,
}

fn build_case(cfg: &GeneratorConfig, eps: &Rational) -> Case {
    let label = format!(
        "{} n={} k={:?} eps={} seed={} {:?}/{:?}",
        cfg.problem, cfg.n, cfg.k, eps, cfg.seed, cfg.size_dist, cfg.penalty_dist
    );
    let instance = generate(cfg).into_instance(eps.clone()).expect("generated instances are well formed");
    Case { label, instance }
}

fn draw_case(problem: Problem, index: u64, max_n: usize, salt: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(salt ^ index.wrapping_mul(0x9e37_79b9));
    let n = rng.gen_range(1..=max_n);
    let i = index as usize;
    let eps = match problem {
        Problem::Bpcc => [q(1, 2), q(1, 3), q(1, 4)][i % 3].clone(),
        Problem::Bpr => [q(1, 3), q(1, 4)][i % 2].clone(),
    };
    let mut cfg = GeneratorConfig::new(problem, n, salt.wrapping_add(index));
    cfg.epsilon = eps.clone();
    cfg.k = (problem == Problem::Bpcc).then(|| {
        let m2 = inv_sq(&eps);
        [1, 3, m2, m2 + 1, n][(i / 3) % 5]
    });
    cfg.size_dist = if (i / 15).is_multiple_of(2) { SizeDist::Uniform } else { SizeDist::Clustered };
    cfg.penalty_dist = [PenaltyDist::Uniform, PenaltyDist::Low, PenaltyDist::High][(i / 30) % 3];
    build_case(&cfg, &eps)
}

enum RunResult {
    Solved { run: Box<SolveRun>, elapsed: Duration },
    NoConvergence(String),
    Failed(String),
}

fn run_case(case: &Case) -> RunResult {
    let start = Instant::now();
    match solve_with(&case.instance, &SolverOptions::default()) {
        Ok(run) => RunResult::Solved { run: Box::new(run), elapsed: start.elapsed() },
        Err(e @ Error::ConvergenceFailure { .. }) => RunResult::NoConvergence(format!("{}: {e}", case.label)),
        Err(e) => RunResult::Failed(format!("{}: {e}", case.label)),
    }
}

fn first(list: &[String]) -> &str {
    list.first().map_or("", String::as_str)
}

/// Criteria 1 and the cap half of 9: feasibility over the fuzz corpus.
struct FuzzSummary {
    solved: usize,
    total: usize,
    infeasible: Vec<String>,
    no_convergence: Vec<String>,
    failed: Vec<String>,
    max_iterations: usize,
    elapsed: Duration,
}

fn fuzz(results: &[(Case, RunResult)], elapsed: Duration) -> FuzzSummary {
    let mut s = FuzzSummary {
        solved: 0,
        total: results.len(),
        infeasible: Vec::new(),
        no_convergence: Vec::new(),
        failed: Vec::new(),
        max_iterations: 0,
        elapsed,
    };
    for (case, result) in results {
        match result {
            RunResult::Solved { run, .. } => {
                s.solved += 1;
                s.max_iterations = s.max_iterations.max(run.report.iterations);
                let violations = check(&run.report.packing, &run.instance);
                if !violations.is_empty() {
                    s.infeasible.push(format!("{}: {}", case.label, violations[0]));
                }
            }
            RunResult::NoConvergence(msg) => s.no_convergence.push(msg.clone()),
            RunResult::Failed(msg) => s.failed.push(msg.clone()),
        }
    }
    s
}

/// Every structural diagnostic on every solved instance.
fn structural(all: &[&[(Case, RunResult)]]) -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    let (mut balance, mut leftover) = (0, 0);
    for results in all {
        for (case, result) in results.iter() {
            if let RunResult::Solved { run, .. } = result {
                checked += 1;
                let d = &run.report.diagnostics;
                balance += d.balance_checked;
                leftover += d.leftover_checked;
                if !d.structural_ok() {
                    bad.push(format!("{}: {d:?}", case.label));
                }
            }
        }
    }
    Verdict {
        id: 7,
        title: "structural invariants",
        pass: bad.is_empty() && checked > 0,
        detail: format!(
            "{checked} solved instances; {balance} window balance checks, {leftover} leftover checks, \
             support, migration and rounding bounds; {} violations {}",
            bad.len(),
            first(&bad)
        ),
    }
}

struct ExactRow {
    label: String,
    problem: Problem,
    n: usize,
    cost: Rational,
    bound: Rational,
    opt: Rational,
    lp_value: f64,
    rounded_opt: Option<Rational>,
}

fn exact_rows(results: &[(Case, RunResult)]) -> (Vec<ExactRow>, Vec<String>) {
    let jobs: Vec<&(Case, RunResult)> = results.iter().collect();
    let rows = par_map(&jobs, |(case, result)| -> Result<ExactRow, String> {
        let RunResult::Solved { run, .. } = result else {
            return Err(format!("{}: not solved", case.label));
        };
        let inst = &run.instance;
        let opt = exact(inst).map_err(|e| format!("{}: {e}", case.label))?.opt_cost;
        let report = &run.report;
        let rounded_opt = if inst.n() <= 10 {
            let rounded = run.rounded.as_instance(inst.problem, inst.k, inst.epsilon.clone());
            Some(exact(&rounded).map_err(|e| format!("{}: {e}", case.label))?.opt_cost)
        } else {
            None
        };
        Ok(ExactRow {
            label: case.label.clone(),
            problem: inst.problem,
            n: inst.n(),
            cost: report.packing.cost.clone(),
            bound: report.guarantee.bound(&opt),
            opt,
            lp_value: report.lp_value,
            rounded_opt,
        })
    });
    let mut ok = Vec::new();
    let mut errors = Vec::new();
    for r in rows {
        match r {
            Ok(row) => ok.push(row),
            Err(e) => errors.push(e),
        }
    }
    (ok, errors)
}

fn exact_criteria(rows: &[ExactRow], errors: &[String], total: usize) -> Vec<Verdict> {
    let complete = errors.is_empty() && rows.len() == total;
    let bpcc = rows.iter().filter(|r| r.problem == Problem::Bpcc).count();
    let max_bpcc = rows.iter().filter(|r| r.problem == Problem::Bpcc).map(|r| r.n).max().unwrap_or(0);
    let max_bpr = rows.iter().filter(|r| r.problem == Problem::Bpr).map(|r| r.n).max().unwrap_or(0);
    let corpus = format!("{} instances ({bpcc} BPCC n<={max_bpcc}, {} BPR n<={max_bpr})", rows.len(), rows.len() - bpcc);

    let over: Vec<String> = rows
        .iter()
        .filter(|r| r.cost > r.bound)
        .map(|r| format!("{}: cost {} > {}", r.label, r.cost, r.bound))
        .collect();
    let three = Rational::from_integer(3);
    let sanity: Vec<String> = rows
        .iter()
        .filter(|r| r.cost > &three * &r.opt + three.clone())
        .map(|r| format!("{}: cost {} vs OPT {}", r.label, r.cost, r.opt))
        .collect();
    let worst = rows
        .iter()
        .filter(|r| r.opt.is_positive())
        .map(|r| (&r.cost / &r.opt).to_f64())
        .fold(1.0, f64::max);
    let lp: Vec<String> = rows
        .iter()
        .filter(|r| r.lp_value > r.opt.to_f64() + 1e-6)
        .map(|r| format!("{}: lp {} > OPT {}", r.label, r.lp_value, r.opt))
        .collect();
    let mono_rows: Vec<&ExactRow> = rows.iter().filter(|r| r.rounded_opt.is_some()).collect();
    let mono: Vec<String> = mono_rows
        .iter()
        .filter(|r| r.rounded_opt.as_ref().unwrap() > &r.opt)
        .map(|r| format!("{}: rounded OPT {} > OPT {}", r.label, r.rounded_opt.as_ref().unwrap(), r.opt))
        .collect();
    let err = if errors.is_empty() { String::new() } else { format!("; errors: {}", errors[0]) };
    vec![
        Verdict {
            id: 2,
            title: "guarantee inequality",
            pass: complete && over.is_empty(),
            detail: format!("{corpus}; {} violations {}{err}", over.len(), first(&over)),
        },
        Verdict {
            id: 3,
            title: "cost <= 3 OPT + 3",
            pass: complete && sanity.is_empty(),
            detail: format!("{corpus}; worst cost/OPT {worst:.3}; {} violations {}", sanity.len(), first(&sanity)),
        },
        Verdict {
            id: 4,
            title: "LP lower bound",
            pass: complete && lp.is_empty(),
            detail: format!("{corpus}; lp_value <= OPT + 1e-6; {} violations {}", lp.len(), first(&lp)),
        },
        Verdict {
            id: 8,
            title: "rounding monotonicity",
            pass: complete && mono.is_empty() && !mono_rows.is_empty(),
            detail: format!("{} instances with n <= 10; {} violations {}", mono_rows.len(), mono.len(), first(&mono)),
        },
    ]
}

fn random_pricing(rng: &mut ChaCha8Rng, epsilon: &Rational) -> PricingProblem {
    let mut items = Vec::new();
    let mut copies = 0;
    let types = rng.gen_range(1..=5);
    for type_index in 0..types {
        let room = 12 - copies;
        if room == 0 {
            break;
        }
        let multiplicity = rng.gen_range(1..=room.min(4));
        copies += multiplicity;
        items.push(PricingItem {
            type_index,
            profit: rng.gen_range(0..=1000) as f64 / 1000.0,
            size: Rational::new(rng.gen_range(1..=100), 100),
            multiplicity,
        });
    }
    PricingProblem {
        items,
        capacity: Rational::new(rng.gen_range(30..=100), 100),
        capacity_strict: rng.gen_bool(0.5),
        cardinality_bound: rng.gen_bool(0.5).then(|| rng.gen_range(1..=6)),
        epsilon: epsilon.clone(),
    }
}

fn solution_problems(p: &PricingProblem, sol: &PricingSolution) -> Option<String> {
    let mut size = Rational::zero();
    let mut count = 0usize;
    let mut value = 0.0;
    for &(t, c) in &sol.config.counts {
        let Some(item) = p.items.iter().find(|it| it.type_index == t) else {
            return Some(format!("unknown type {t}"));
        };
        if c as usize > item.multiplicity {
            return Some(format!("type {t} used {c} times"));
        }
        size += &(&item.size * &Rational::from_integer(c as i64));
        count += c as usize;
        value += item.profit * c as f64;
    }
    let fits = if p.capacity_strict { size < p.capacity } else { size <= p.capacity };
    if !fits {
        return Some(format!("size {size} exceeds capacity {}", p.capacity));
    }
    if p.cardinality_bound.is_some_and(|b| count > b) {
        return Some(format!("{count} copies exceed the bound"));
    }
    if (value - sol.value).abs() > 1e-9 {
        return Some(format!("reported value {} but configuration is worth {value}", sol.value));
    }
    None
}

fn pricing_criterion() -> Verdict {
    let mut problems = Vec::new();
    let mut total = 0;
    let mut sweeps = 0;
    for (e, eps) in [q(1, 2), q(1, 3), q(1, 4)].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + e as u64);
        let one_minus = 1.0 - eps.to_f64();
        for i in 0..500 {
            let p = random_pricing(&mut rng, &eps);
            total += 1;
            let sol = match p.cardinality_bound {
                Some(_) => kcc_fptas(&p),
                None => knapsack_fptas(&p),
            };
            let brute = brute_knapsack(&p).expect("at most 12 copies");
            if let Some(msg) = solution_problems(&p, &sol) {
                problems.push(format!("eps={eps} #{i}: {msg}"));
            }
            if sol.value < one_minus * brute - 1e-9 {
                problems.push(format!("eps={eps} #{i}: value {} < (1-eps) * {brute}", sol.value));
            }
            let max_c = p.items.iter().map(|it| it.multiplicity).sum::<usize>() + 1;
            let sweep = kcc_sweep(&p.items, &p.capacity, p.capacity_strict, max_c, &eps);
            for (c, entry) in sweep.iter().enumerate() {
                sweeps += 1;
                let single = kcc_fptas(&PricingProblem { cardinality_bound: Some(c), ..p.clone() });
                if *entry != single {
                    problems.push(format!("eps={eps} #{i}: sweep entry {c} differs from kcc_fptas"));
                }
            }
        }
    }
    Verdict {
        id: 5,
        title: "pricing FPTAS ratio",
        pass: problems.is_empty(),
        detail: format!(
            "{total} instances (500 per eps in 1/2, 1/3, 1/4, <= 12 copies), {sweeps} sweep entries; {} violations {}",
            problems.len(),
            first(&problems)
        ),
    }
}

/// `min_{γ ≥ 0} w_s γ + w_n max(0, max_i β_i − s_i γ)` by evaluating every breakpoint.
fn implied_brute(sizes: &[f64], beta: &[f64], w_s: f64, w_n: Option<f64>) -> f64 {
    let Some(w_n) = w_n else {
        return sizes.iter().zip(beta).filter(|(_, b)| **b > 0.0).map(|(s, b)| w_s * b / s).fold(0.0, f64::max);
    };
    let f = |g: f64| sizes.iter().zip(beta).map(|(s, b)| b - s * g).fold(0.0, f64::max);
    let mut points = vec![0.0];
    for (i, (si, bi)) in sizes.iter().zip(beta).enumerate() {
        if *si > 0.0 {
            points.push(bi / si);
        }
        for (sj, bj) in sizes.iter().zip(beta).skip(i + 1) {
            if si != sj {
                points.push((bi - bj) / (si - sj));
            }
        }
    }
    points.into_iter().filter(|g| *g >= 0.0).map(|g| w_s * g + w_n * f(g)).fold(f64::INFINITY, f64::min)
}

struct Toy {
    eps: Rational,
    types: Vec<ItemType>,
    small: Vec<Item>,
    universe: WindowUniverse,
    k: Option<usize>,
    duals: DualPrices,
}

fn all_configs(types: &[ItemType], k: Option<usize>) -> Vec<Configuration> {
    let mut out = Vec::new();
    let mut counts = vec![0u32; types.len()];
    loop {
        let config = Configuration::new(counts.iter().copied().enumerate().collect(), types);
        if config.is_feasible(types, k) {
            out.push(config);
        }
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return out;
            }
            if (counts[pos] as usize) < types[pos].multiplicity {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

impl Toy {
    fn term(&self, w: &Window) -> f64 {
        let w_s = self.universe.size_f64(w.t);
        let a = w.count.map(f64::from);
        match self.duals.windows.get(w) {
            Some(&(g, d)) => w_s * g + a.unwrap_or(0.0) * d,
            None => {
                let sizes: Vec<f64> = self.small.iter().map(|it| it.size.to_f64()).collect();
                implied_brute(&sizes, &self.duals.beta, w_s, a)
            }
        }
    }

    fn lhs(&self, config: &Configuration, w: &Window) -> f64 {
        config.counts.iter().map(|&(t, c)| self.duals.alpha[t] * c as f64).sum::<f64>() + self.term(w)
    }

    /// Largest dual left-hand side over all valid generalized configurations.
    fn exhaustive_max(&self) -> f64 {
        let configs = all_configs(&self.types, self.k);
        let mut best: f64 = 0.0;
        for w in self.universe.iter() {
            let term = self.term(&w);
            for c in configs.iter().filter(|c| self.universe.is_valid_generalized(c, &w)) {
                let lhs = c.counts.iter().map(|&(t, n)| self.duals.alpha[t] * n as f64).sum::<f64>() + term;
                best = best.max(lhs);
            }
        }
        best
    }

    fn scale(&mut self, factor: f64) {
        self.duals.alpha.iter_mut().for_each(|a| *a *= factor);
        self.duals.beta.iter_mut().for_each(|b| *b *= factor);
        for (g, d) in self.duals.windows.values_mut() {
            *g *= factor;
            *d *= factor;
        }
    }
}

fn random_toy(rng: &mut ChaCha8Rng, problem: Problem, eps: Rational) -> Toy {
    let (lo, hi) = if eps == q(1, 2) { (30, 44) } else { (43, 56) };
    loop {
        let h = rng.gen_range(1..=3);
        let types: Vec<ItemType> = (0..h)
            .map(|v| {
                let multiplicity = rng.gen_range(1..=3);
                ItemType {
                    size: Rational::new(rng.gen_range(20..=90), 100),
                    penalty: None,
                    multiplicity,
                    members: (v * 3..v * 3 + multiplicity).collect(),
                }
            })
            .collect();
        let small: Vec<Item> = (0..rng.gen_range(1..=4))
            .map(|i| Item::new(100 + i, Rational::new(rng.gen_range(lo..=hi), 100)))
            .collect();
        let k = (problem == Problem::Bpcc).then(|| rng.gen_range(1..=5));
        let universe = WindowUniverse::build(&small, k, &eps, problem);
        if universe.t_max > 4 {
            continue;
        }
        let alpha = (0..h).map(|_| rng.gen_range(0.0..0.7)).collect();
        let beta = small.iter().map(|_| rng.gen_range(0.0..0.4)).collect();
        let mut windows = BTreeMap::new();
        for w in universe.iter() {
            if rng.gen_bool(0.3) {
                let d = if w.count.is_some() { rng.gen_range(0.0..0.3) } else { 0.0 };
                windows.insert(w, (rng.gen_range(0.0..1.0), d));
            }
        }
        return Toy { eps, types, small, universe, k, duals: DualPrices { alpha, beta, windows } };
    }
}

fn separation_criterion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut problems = Vec::new();
    let (mut both_violated, mut both_clean, mut band) = (0, 0, 0);
    let mut max_t = 0;
    for i in 0..200 {
        let (problem, eps) = match i % 5 {
            0 | 1 => (Problem::Bpcc, q(1, 2)),
            2 | 3 => (Problem::Bpcc, q(1, 3)),
            _ => (Problem::Bpr, q(1, 3)),
        };
        let mut toy = random_toy(&mut rng, problem, eps);
        max_t = max_t.max(toy.universe.t_max);
        let raw = toy.exhaustive_max();
        if raw > 0.0 {
            toy.scale(rng.gen_range(0.8..1.25) / raw);
        }
        let truth = toy.exhaustive_max();
        let eps_p = &toy.eps / &(Rational::one() + &toy.eps);
        let outcome = price_all_windows(&toy.duals, &toy.universe, &toy.types, &toy.small, toy.k, &eps_p);
        let band_top = (1.0 + VIOLATION_TOL) * (1.0 + toy.eps.to_f64()) + 1e-9;
        for col in &outcome.columns {
            let w = col.window.expect("windowed columns");
            if !col.config.is_feasible(&toy.types, toy.k) || !toy.universe.is_valid_generalized(&col.config, &w) {
                problems.push(format!("toy {i}: invalid column at {w}"));
                continue;
            }
            let lhs = toy.lhs(&col.config, &w);
            if (lhs - col.lhs).abs() > 1e-7 || lhs <= 1.0 {
                problems.push(format!("toy {i}: column lhs {} recomputed {lhs}", col.lhs));
            }
        }
        if outcome.ratio < truth - 1e-9 {
            problems.push(format!("toy {i}: certificate {} below true maximum {truth}", outcome.ratio));
        }
        let violated = truth > 1.0 + VIOLATION_TOL;
        match (violated, outcome.columns.is_empty()) {
            (true, false) => both_violated += 1,
            (false, true) => both_clean += 1,
            (true, true) if truth <= band_top => band += 1,
            (true, true) => problems.push(format!("toy {i}: missed violation {truth} beyond the slack band")),
            (false, false) => problems.push(format!("toy {i}: reported a column but true maximum is {truth}")),
        }
    }
    Verdict {
        id: 6,
        title: "separation agreement",
        pass: problems.is_empty(),
        detail: format!(
            "200 toy universes (|H| <= 3, T_max <= {max_t}, k <= 5): {both_violated} violated and found, \
             {both_clean} clean and certified, {band} inside the (1+eps) band; {} disagreements {}",
            problems.len(),
            first(&problems)
        ),
    }
}

struct RuntimeRuns {
    times: Vec<String>,
    problems: Vec<String>,
    results: Vec<(Case, RunResult)>,
}

fn runtime_runs() -> RuntimeRuns {
    let eps = q(1, 3);
    let mut runs = RuntimeRuns { times: Vec::new(), problems: Vec::new(), results: Vec::new() };
    for (seed, k, dist) in [(1, 10, SizeDist::Uniform), (2, 30, SizeDist::Clustered), (3, 1000, SizeDist::Uniform)] {
        let mut cfg = GeneratorConfig::new(Problem::Bpcc, 1000, seed);
        cfg.k = Some(k);
        cfg.size_dist = dist;
        cfg.epsilon = eps.clone();
        let case = build_case(&cfg, &eps);
        assert_eq!(case_of(Problem::Bpcc, case.instance.k, &eps), CaseTag::BpccLargeK);
        let result = run_case(&case);
        match &result {
            RunResult::Solved { run, elapsed } => {
                runs.times.push(format!("k={k} {:.2}s", elapsed.as_secs_f64()));
                if *elapsed > Duration::from_secs(60) {
                    runs.problems.push(format!("{}: {:.1}s", case.label, elapsed.as_secs_f64()));
                }
                if !check(&run.report.packing, &run.instance).is_empty() {
                    runs.problems.push(format!("{}: infeasible packing", case.label));
                }
            }
            RunResult::NoConvergence(msg) | RunResult::Failed(msg) => runs.problems.push(msg.clone()),
        }
        runs.results.push((case, result));
    }
    runs
}

fn runtime_verdict(runs: &RuntimeRuns, fuzz: &FuzzSummary) -> Verdict {
    let capped = fuzz.no_convergence.len();
    Verdict {
        id: 9,
        title: "runtime and iteration cap",
        pass: runs.problems.is_empty() && capped == 0 && fuzz.solved > 0,
        detail: format!(
            "n=1000 eps=1/3 large-k: {}; fuzz corpus: {capped} runs hit the iteration cap, \
             at most {} rounds {}{}",
            runs.times.join(", "),
            fuzz.max_iterations,
            first(&runs.problems),
            first(&fuzz.no_convergence)
        ),
    }
}

fn main() {
    let started = Instant::now();
    let mut verdicts = Vec::new();
    // Timed first, alone on the machine.
    let runtime = runtime_runs();

    let t = Instant::now();
    let fuzz_cases: Vec<Case> = (0..1000u64)
        .map(|i| draw_case(Problem::Bpcc, i, 200, 0xB0CC))
        .chain((0..1000u64).map(|i| draw_case(Problem::Bpr, i, 200, 0xB0B0)))
        .collect();
    let fuzz_results: Vec<(Case, RunResult)> =
        fuzz_cases.iter().cloned().zip(par_map(&fuzz_cases, run_case)).collect();
    let summary = fuzz(&fuzz_results, t.elapsed());
    let fuzz_pass = summary.infeasible.is_empty()
        && summary.no_convergence.is_empty()
        && summary.failed.is_empty()
        && summary.solved == summary.total;
    verdicts.push(Verdict {
        id: 1,
        title: "feasibility fuzz",
        pass: fuzz_pass,
        detail: format!(
            "{}/{} instances solved and checked (1000 BPCC, 1000 BPR, n <= 200) in {:.1}s; \
             {} infeasible, {} without convergence, {} errors {}{}{}",
            summary.solved,
            summary.total,
            summary.elapsed.as_secs_f64(),
            summary.infeasible.len(),
            summary.no_convergence.len(),
            summary.failed.len(),
            first(&summary.infeasible),
            first(&summary.no_convergence),
            first(&summary.failed)
        ),
    });

    let exact_cases: Vec<Case> = (0..100u64)
        .map(|i| draw_case(Problem::Bpcc, i, 12, 0xE0CC))
        .chain((0..100u64).map(|i| draw_case(Problem::Bpr, i, 10, 0xE0B0)))
        .collect();
    let exact_results: Vec<(Case, RunResult)> =
        exact_cases.iter().cloned().zip(par_map(&exact_cases, run_case)).collect();
    let (rows, errors) = exact_rows(&exact_results);
    verdicts.extend(exact_criteria(&rows, &errors, exact_cases.len()));

    verdicts.push(pricing_criterion());
    verdicts.push(separation_criterion());
    verdicts.push(structural(&[&fuzz_results, &exact_results, &runtime.results]));
    verdicts.push(runtime_verdict(&runtime, &summary));

    verdicts.sort_by_key(|v| v.id);
    let mut failed = 0;
    for v in &verdicts {
        if !v.pass {
            failed += 1;
        }
        println!("criterion {} [{}] {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.title, v.detail);
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.1}s",
        verdicts.len() - failed,
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
