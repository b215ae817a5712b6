//! Problem facades: case dispatch, the pipeline and its guarantee.

use std::time::Instant;

use log::info;
use serde::Serialize;

use crate::assembly::{assemble, AssemblyDiagnostics, AssemblyInput, AssemblyOutcome, Packing};
use crate::config::WindowUniverse;
use crate::error::Result;
use crate::instance::{validate_and_normalize, Instance, Problem};
use crate::lp::{column_generation, ColumnGenOptions, MasterLp};
use crate::rational::Rational;
use crate::rounding::{round_all_items, round_large_items, round_with_penalties, RoundedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    BpccSmallK,
    BpccLargeK,
    Bpr,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseTag::BpccSmallK => "BPCC_SMALL_K",
            CaseTag::BpccLargeK => "BPCC_LARGE_K",
            CaseTag::Bpr => "BPR",
        })
    }
}

/// Promise `cost ≤ multiplicative · OPT + additive`, in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guarantee {
    pub multiplicative: Rational,
    pub additive: Rational,
    pub case_tag: CaseTag,
}

impl Guarantee {
    pub fn bound(&self, opt: &Rational) -> Rational {
        &self.multiplicative * opt + &self.additive
    }

    pub fn holds(&self, cost: &Rational, opt: &Rational) -> bool {
        *cost <= self.bound(opt)
    }
}

/// Dispatch on `(problem, k, ε)`: `k ≤ 1/ε²` takes the small-k path.
pub fn case_of(problem: Problem, k: Option<usize>, epsilon: &Rational) -> CaseTag {
    match problem {
        Problem::Bpr => CaseTag::Bpr,
        Problem::Bpcc => {
            let limit = epsilon.recip().pow(2);
            if Rational::from_integer(k.unwrap_or(0) as i64) <= limit {
                CaseTag::BpccSmallK
            } else {
                CaseTag::BpccLargeK
            }
        }
    }
}

/// Closed-form constants of each case.
pub fn guarantee_of(epsilon: &Rational, case_tag: CaseTag) -> Guarantee {
    let one = Rational::one();
    let inv = epsilon.recip();
    let inv_int = num_traits::ToPrimitive::to_u32(&inv.floor()).expect("1/ε fits u32");
    let int = Rational::from_integer;
    let (multiplicative, additive) = match case_tag {
        CaseTag::BpccSmallK => (&one + &(int(2) * epsilon), &inv.pow(3) + &one),
        CaseTag::BpccLargeK => {
            let c = inv.pow(3);
            let tail = (&c + &one).pow(inv_int);
            (&one + &(int(10) * epsilon), int(5) * (&c + &tail) + int(2))
        }
        CaseTag::Bpr => {
            let c = inv.pow(5);
            let tail = (&c + &one).pow(inv_int);
            (&one + &(int(10) * epsilon), int(4) * &c + int(4) * tail + one.clone())
        }
    };
    Guarantee { multiplicative, additive, case_tag }
}

/// The guarantee reported for an instance. Rejection is stated against the
/// original penalties, which costs a factor `1+ε`, plus one bin for
/// pre-packed zero-size items.
pub fn reported_guarantee(inst: &Instance, case_tag: CaseTag) -> Guarantee {
    let base = guarantee_of(&inst.epsilon, case_tag);
    if case_tag != CaseTag::Bpr {
        return base;
    }
    let factor = Rational::one() + &inst.epsilon;
    let zero_bin = if inst.prepacked_zero.is_empty() { Rational::zero() } else { Rational::one() };
    Guarantee {
        multiplicative: &factor * &base.multiplicative,
        additive: &factor * &base.additive + zero_bin,
        case_tag,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StageCosts {
    pub large: Rational,
    pub inter: Rational,
    #[serde(rename = "final")]
    pub final_cost: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub rounding_ms: f64,
    pub lp_ms: f64,
    pub assembly_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub packing: Packing,
    /// Certified lower bound on the LP optimum, hence on OPT.
    pub lp_value: f64,
    /// Objective of the last restricted master.
    pub lp_objective: f64,
    pub guarantee: Guarantee,
    pub case_tag: CaseTag,
    pub epsilon: Rational,
    /// Cardinality bound the LP used.
    pub k_effective: Option<usize>,
    pub stage_costs: StageCosts,
    pub timings: Timings,
    pub iterations: usize,
    pub columns: usize,
    pub item_types: usize,
    pub small_items: usize,
    pub set_aside: usize,
    pub diagnostics: AssemblyDiagnostics,
}

#[derive(Debug, Clone, Default)]
pub struct SolverOptions {
    pub max_iterations: Option<usize>,
}

/// Everything a run produced, for tests and the CLI.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub report: SolveReport,
    pub instance: Instance,
    pub rounded: RoundedInstance,
    pub universe: Option<WindowUniverse>,
    pub assembly: AssemblyOutcome,
    pub master: MasterLp,
}

pub fn solve(instance: &Instance) -> Result<SolveReport> {
    Ok(solve_with(instance, &SolverOptions::default())?.report)
}

pub fn solve_with(instance: &Instance, options: &SolverOptions) -> Result<SolveRun> {
    let start = Instant::now();
    let inst = validate_and_normalize(instance.clone())?;
    let eps = inst.epsilon.clone();
    let case_tag = case_of(inst.problem, inst.k, &eps);
    let active = inst.active_items().count();

    let (rounded, k_eff) = match case_tag {
        CaseTag::BpccSmallK => (round_all_items(&inst), inst.k),
        CaseTag::BpccLargeK => (round_large_items(&inst), inst.k.map(|k| k.min(active.max(1)))),
        CaseTag::Bpr => (round_with_penalties(&inst), None),
    };
    let universe = match case_tag {
        CaseTag::BpccSmallK => None,
        _ => Some(WindowUniverse::build(&rounded.small_items, k_eff, &eps, inst.problem))
            .filter(|u| !u.is_degenerate()),
    };
    let rounding_done = Instant::now();
    info!(
        "{case_tag}: {} items, {} types, {} small, {} set aside, ε = {eps}",
        inst.n(),
        rounded.type_count(),
        rounded.small_items.len(),
        rounded.set_aside.len()
    );

    let cg_options = ColumnGenOptions { max_iterations: options.max_iterations, ..Default::default() };
    let cg = column_generation(
        inst.problem,
        &rounded.item_types,
        &rounded.small_items,
        universe.as_ref(),
        k_eff,
        &eps,
        &cg_options,
    )?;
    let lp_done = Instant::now();
    info!(
        "column generation: {} rounds, objective {:.6}, lower bound {:.6}",
        cg.iterations, cg.solution.objective, cg.lower_bound
    );

    let input = AssemblyInput { instance: &inst, rounded: &rounded, universe: universe.as_ref(), k: k_eff };
    let assembly = assemble(input, &cg.solution)?;
    let done = Instant::now();
    info!("packing cost {} ({} bins)", assembly.packing.cost, assembly.packing.bin_count());

    let ms = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e3;
    let report = SolveReport {
        packing: assembly.packing.clone(),
        lp_value: cg.lower_bound,
        lp_objective: cg.solution.objective,
        guarantee: reported_guarantee(&inst, case_tag),
        case_tag,
        epsilon: eps,
        k_effective: k_eff,
        stage_costs: StageCosts {
            large: assembly.large.cost(&inst),
            inter: assembly.inter.cost(&inst),
            final_cost: assembly.packing.cost.clone(),
        },
        timings: Timings {
            rounding_ms: ms(start, rounding_done),
            lp_ms: ms(rounding_done, lp_done),
            assembly_ms: ms(lp_done, done),
            total_ms: ms(start, done),
        },
        iterations: cg.iterations,
        columns: cg.master.num_x_columns(),
        item_types: rounded.type_count(),
        small_items: rounded.small_items.len(),
        set_aside: rounded.set_aside.len(),
        diagnostics: assembly.diagnostics.clone(),
    };
    Ok(SolveRun { report, instance: inst, rounded, universe, assembly, master: cg.master })
}
