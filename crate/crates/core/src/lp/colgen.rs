//! Column generation over configurations and generalized configurations.
//!
//! Every round solves the restricted master, prices one table per window
//! size and adds at most one violated column per size. Windows without rows
//! in the master get implied duals: the cheapest `(γ, δ)` that keeps every
//! `Y` column dual feasible. Together with the oracle upper bounds this gives
//! a ratio `ρ` such that the dual scaled by `1/ρ` is feasible for the full
//! LP, so `objective/ρ` is a valid lower bound at every round.

use std::collections::BTreeMap;

use log::{debug, trace};

use super::master::{seed_master, DualPrices, FractionalSolution, MasterLp};
use crate::config::{Configuration, Window, WindowUniverse};
use crate::error::{Error, Result};
use crate::instance::{Item, Problem};
use crate::pricing::{PricingItem, SweepTable};
use crate::rational::Rational;
use crate::rounding::ItemType;

/// A reduced cost must exceed this before a column counts as violated.
pub const VIOLATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ColumnGenOptions {
    /// Hard cap on rounds; `None` uses the size-dependent default.
    pub max_iterations: Option<usize>,
    pub margin: f64,
}

impl Default for ColumnGenOptions {
    fn default() -> Self {
        ColumnGenOptions { max_iterations: None, margin: VIOLATION_TOL }
    }
}

#[derive(Debug, Clone)]
pub struct ColumnGenOutcome {
    pub master: MasterLp,
    pub solution: FractionalSolution,
    pub duals: DualPrices,
    pub iterations: usize,
    /// Best certified lower bound on the LP optimum.
    pub lower_bound: f64,
    /// Certificate ratio of the final round.
    pub ratio: f64,
    pub objective_trace: Vec<f64>,
}

/// Dual contribution of window rows, for active and inactive windows alike.
#[derive(Debug, Clone)]
pub struct WindowTerms {
    count_axis: bool,
    /// Points `(γ, f(γ))` where `w_s γ + w_n f(γ)` can be minimal.
    candidates: Vec<(f64, f64)>,
    /// `max_i β_i / s_i` (no count axis).
    max_ratio: f64,
}

impl WindowTerms {
    pub fn new(small: &[Item], beta: &[f64], count_axis: bool) -> Self {
        let sizes: Vec<f64> = small.iter().map(|it| it.size.to_f64()).collect();
        if !count_axis {
            let max_ratio = sizes
                .iter()
                .zip(beta)
                .filter(|(_, b)| **b > 0.0)
                .map(|(s, b)| if *s > 0.0 { b / s } else { f64::INFINITY })
                .fold(0.0, f64::max);
            return WindowTerms { count_axis, candidates: Vec::new(), max_ratio };
        }
        WindowTerms { count_axis, candidates: envelope_points(&sizes, beta), max_ratio: 0.0 }
    }

    /// `min_{γ ≥ 0} w_s γ + w_n f(γ)` with `f(γ) = max(0, max_i β_i − s_i γ)`.
    pub fn implied(&self, w_s: f64, w_n: f64) -> f64 {
        if !self.count_axis {
            return if self.max_ratio == 0.0 { 0.0 } else { w_s * self.max_ratio };
        }
        self.candidates.iter().map(|&(g, f)| w_s * g + w_n * f).fold(f64::INFINITY, f64::min)
    }
}

/// Corners of the upper envelope of the lines `β_i − s_i γ` and `0` on `γ ≥ 0`.
fn envelope_points(sizes: &[f64], beta: &[f64]) -> Vec<(f64, f64)> {
    // Lines as (slope, intercept), slope = -s.
    let mut lines: Vec<(f64, f64)> = sizes.iter().zip(beta).map(|(s, b)| (-s, *b)).collect();
    lines.push((0.0, 0.0));
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    lines.dedup_by(|next, kept| next.0 == kept.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    let cross = |l1: (f64, f64), l2: (f64, f64)| (l1.1 - l2.1) / (l2.0 - l1.0);
    for line in lines {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            if cross(a, line) <= cross(a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }
    let f = |g: f64| hull.iter().map(|&(m, c)| c + m * g).fold(f64::NEG_INFINITY, f64::max);
    let mut points = vec![(0.0, f(0.0))];
    for pair in hull.windows(2) {
        let g = cross(pair[0], pair[1]);
        if g > 0.0 && g.is_finite() {
            points.push((g, (pair[0].1 + pair[0].0 * g).max(0.0)));
        }
    }
    points
}

/// One priced column candidate.
#[derive(Debug, Clone)]
pub struct PricedColumn {
    pub config: Configuration,
    pub window: Option<Window>,
    /// Left-hand side of the dual constraint, `> 1` means violated.
    pub lhs: f64,
}

#[derive(Debug, Clone)]
pub struct PricingOutcome {
    pub columns: Vec<PricedColumn>,
    /// Certificate: the dual scaled by `1/ratio` is feasible.
    pub ratio: f64,
}

fn pricing_items(types: &[ItemType], alpha: &[f64]) -> Vec<PricingItem> {
    types
        .iter()
        .enumerate()
        .map(|(v, ty)| PricingItem {
            type_index: v,
            profit: alpha[v],
            size: ty.size.clone(),
            multiplicity: ty.multiplicity,
        })
        .collect()
}

fn attach_sizes(config: Configuration, types: &[ItemType]) -> Configuration {
    Configuration::new(config.counts, types)
}

/// Prices configurations without windows: one oracle call at capacity 1.
pub fn price_configurations(
    duals: &DualPrices,
    types: &[ItemType],
    k: Option<usize>,
    epsilon: &Rational,
) -> PricingOutcome {
    let items = pricing_items(types, &duals.alpha);
    let table = SweepTable::build(&items, &Rational::one(), false, k, epsilon);
    let bound = k.unwrap_or(usize::MAX);
    let sol = table.solution(bound);
    let ratio = table.upper_bound(bound).max(sol.value).max(1.0);
    let columns = if sol.value > 1.0 + VIOLATION_TOL {
        vec![PricedColumn { config: attach_sizes(sol.config, types), window: None, lhs: sol.value }]
    } else {
        Vec::new()
    };
    PricingOutcome { columns, ratio }
}

/// Prices every window size `t`. For each `t` the most violated
/// generalized configuration (if any) is returned.
pub fn price_all_windows(
    duals: &DualPrices,
    universe: &WindowUniverse,
    types: &[ItemType],
    small: &[Item],
    k: Option<usize>,
    epsilon: &Rational,
) -> PricingOutcome {
    let items = pricing_items(types, &duals.alpha);
    let terms = WindowTerms::new(small, &duals.beta, universe.has_count_axis());
    let one = Rational::one();
    let mut ratio: f64 = 1.0;
    let mut columns = Vec::new();
    for t in 0..=universe.t_max {
        let (capacity, strict) = if t < universe.t_max {
            (&one - universe.size(t + 1), true)
        } else {
            (one.clone(), false)
        };
        let w_s = universe.size_f64(t);
        let table = SweepTable::build(&items, &capacity, strict, k, epsilon);
        let mut best: Option<PricedColumn> = None;
        let mut consider = |window: Window, bound: usize, term: f64| {
            let ub = table.upper_bound(bound);
            ratio = ratio.max(ub + term);
            let sol = table.solution(bound);
            let lhs = sol.value + term;
            ratio = ratio.max(lhs);
            if lhs > 1.0 + VIOLATION_TOL && best.as_ref().is_none_or(|b| lhs > b.lhs) {
                best = Some(PricedColumn { config: sol.config, window: Some(window), lhs });
            }
        };
        match k {
            None => {
                let w = Window::new(t, None);
                let term = match duals.windows.get(&w) {
                    Some(&(g, _)) => w_s * g,
                    None => terms.implied(w_s, 0.0),
                };
                consider(w, usize::MAX, term);
            }
            Some(k) => {
                let saturation = table.saturation().min(k);
                let low = k - saturation;
                let term_of = |a: usize| {
                    let w = Window::new(t, Some(a as u32));
                    match duals.windows.get(&w) {
                        Some(&(g, d)) => (w, w_s * g + a as f64 * d, true),
                        None => (w, terms.implied(w_s, a as f64), false),
                    }
                };
                for a in low..=k {
                    let (w, term, _) = term_of(a);
                    consider(w, k - a, term);
                }
                // Below `low` the oracle value is flat; the implied term grows
                // with `a`, so the largest inactive `a` dominates the rest.
                let mut a = low;
                while a > 0 {
                    a -= 1;
                    let (w, term, active) = term_of(a);
                    if !active {
                        consider(w, k - a, term);
                        break;
                    }
                }
                for (&w, &(g, d)) in duals.windows.range(Window::new(t, Some(0))..Window::new(t, Some(low as u32))) {
                    let a = w.count.unwrap_or(0) as usize;
                    consider(w, k - a, w_s * g + a as f64 * d);
                }
            }
        }
        if let Some(col) = best {
            let config = attach_sizes(col.config, types);
            debug_assert!(universe.is_valid_generalized(&config, col.window.as_ref().unwrap()));
            columns.push(PricedColumn { config, ..col });
        }
    }
    PricingOutcome { columns, ratio }
}

fn iteration_cap(master: &MasterLp) -> usize {
    let active = master.active_windows().count();
    100.max(10 * (master.types.len() + active + master.small.len()))
}

/// Runs column generation to an approximate optimum of the master LP.
///
/// `universe` selects the windowed formulation; without it only
/// configurations are priced. The oracle accuracy is `ε/(1+ε)`.
pub fn column_generation(
    problem: Problem,
    types: &[ItemType],
    small: &[Item],
    universe: Option<&WindowUniverse>,
    k: Option<usize>,
    epsilon: &Rational,
    options: &ColumnGenOptions,
) -> Result<ColumnGenOutcome> {
    let oracle_eps = epsilon / &(Rational::one() + epsilon);
    let mut master = seed_master(problem, types, small, universe, k);
    let mut trace = Vec::new();
    let mut lower_bound: f64 = 0.0;
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        let objective = master.solve()?;
        trace.push(objective);
        let duals = master.duals();
        let outcome = match universe {
            Some(u) => price_all_windows(&duals, u, types, small, k, &oracle_eps),
            None => price_configurations(&duals, types, k, &oracle_eps),
        };
        lower_bound = lower_bound.max(objective / outcome.ratio);
        trace!(
            "round {iterations}: objective {objective:.6}, ratio {:.6}, {} candidate columns",
            outcome.ratio,
            outcome.columns.len()
        );
        let mut added = 0;
        for col in outcome.columns {
            if col.lhs > 1.0 + options.margin && master.add_x(col.config, col.window).is_some() {
                added += 1;
            }
        }
        if added == 0 {
            debug!(
                "column generation converged after {iterations} rounds: objective {objective:.6}, \
                 lower bound {lower_bound:.6}, {} columns, {} rows",
                master.num_x_columns(),
                master.num_rows()
            );
            return Ok(ColumnGenOutcome {
                solution: master.solution(),
                duals,
                iterations,
                lower_bound,
                ratio: outcome.ratio,
                objective_trace: trace,
                master,
            });
        }
        let cap = options.max_iterations.unwrap_or_else(|| iteration_cap(&master));
        if iterations >= cap {
            master.solve()?;
            return Err(Error::ConvergenceFailure {
                iterations,
                objective: master.solution().objective,
                best: Box::new(master.solution()),
            });
        }
    }
}

/// Active windows of a solution, grouped by size exponent.
pub fn windows_by_size(windows: &[Window]) -> BTreeMap<u32, Vec<Window>> {
    let mut map: BTreeMap<u32, Vec<Window>> = BTreeMap::new();
    for w in windows {
        map.entry(w.t).or_default().push(*w);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ty(size: Rational, mult: usize) -> ItemType {
        ItemType { size, penalty: None, multiplicity: mult, members: (0..mult).collect() }
    }

    #[test]
    fn implied_term_matches_brute_force() {
        let small = vec![Item::new(0, q(1, 5)), Item::new(1, q(1, 10)), Item::new(2, q(0, 1))];
        let beta = [0.3, 0.25, 0.05];
        let terms = WindowTerms::new(&small, &beta, true);
        for &(ws, wn) in &[(1.0, 3.0), (0.5, 0.0), (0.2, 10.0), (0.9, 1.0)] {
            let brute = (0..=200_000)
                .map(|i| {
                    let g = i as f64 * 1e-5;
                    let f = small
                        .iter()
                        .zip(&beta)
                        .map(|(it, b)| b - it.size.to_f64() * g)
                        .fold(0.0, f64::max);
                    ws * g + wn * f
                })
                .fold(f64::INFINITY, f64::min);
            assert!((terms.implied(ws, wn) - brute).abs() < 1e-4, "{ws} {wn}");
        }
    }

    #[test]
    fn implied_term_without_count_axis() {
        let small = vec![Item::new(0, q(1, 4)), Item::new(1, q(1, 8))];
        let terms = WindowTerms::new(&small, &[0.5, 0.5], false);
        assert!((terms.implied(0.5, 0.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn configuration_lp_reaches_pairing() {
        let types = vec![ty(q(3, 5), 3), ty(q(2, 5), 3)];
        let out = column_generation(Problem::Bpcc, &types, &[], None, Some(2), &q(1, 4), &Default::default()).unwrap();
        assert!((out.solution.objective - 3.0).abs() < 1e-6);
        assert!(out.lower_bound <= 3.0 + 1e-9);
        assert!(out.lower_bound >= 3.0 / 1.25 - 1e-9);
    }

    #[test]
    fn windowed_lp_bounds_are_consistent() {
        let types = vec![ty(q(3, 5), 2), ty(q(1, 2), 2)];
        let small: Vec<Item> = (0..6).map(|i| Item::new(10 + i, q(1, 10))).collect();
        let eps = q(1, 3);
        let u = WindowUniverse::build(&small, Some(3), &eps, Problem::Bpcc);
        let out = column_generation(Problem::Bpcc, &types, &small, Some(&u), Some(3), &eps, &Default::default())
            .unwrap();
        let obj = out.solution.objective;
        // Total size is 3.8 and 10 items with at most 3 per bin.
        assert!(obj >= 10.0 / 3.0 - 1e-6);
        assert!(out.lower_bound <= obj + 1e-9);
        assert!(obj <= (1.0 + 1.0 / 3.0) * out.lower_bound + 1e-6);
        for e in &out.solution.x {
            assert!(u.is_valid_generalized(&e.config, &e.window.unwrap()));
        }
    }

    #[test]
    fn rejection_lp_prices_knapsacks() {
        let types = vec![
            ItemType { size: q(1, 2), penalty: Some(q(1, 1)), multiplicity: 4, members: vec![0, 1, 2, 3] },
            ItemType { size: q(2, 5), penalty: Some(q(1, 10)), multiplicity: 2, members: vec![4, 5] },
        ];
        let small = vec![Item::with_penalty(6, q(1, 20), q(1, 2))];
        let eps = q(1, 4);
        let u = WindowUniverse::build(&small, None, &eps, Problem::Bpr);
        let out =
            column_generation(Problem::Bpr, &types, &small, Some(&u), None, &eps, &Default::default()).unwrap();
        // Two bins of two halves, reject the rest or fit them in.
        assert!(out.solution.objective >= 2.0 - 1e-6);
        assert!(out.solution.objective <= 2.3 + 1e-6);
    }
}
