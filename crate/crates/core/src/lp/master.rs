//! The restricted master problem over a pool of (generalized) configurations.
//!
//! Row layout: one covering row per item type, one row per small item, then
//! for every window that has been activated a size row and (with a
//! cardinality bound) a count row. All rows have the form `Σ a·x ≥ b`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use super::simplex::{LinearProgram, SimplexError, SimplexStats};
use crate::config::{Configuration, Window, WindowUniverse};
use crate::error::{Error, Result};
use crate::instance::{Item, Problem};
use crate::rounding::ItemType;

/// Values at or below this are reported as zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XEntry {
    pub config: Configuration,
    pub window: Option<Window>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YEntry {
    /// Index into the small items of the rounded instance.
    pub item: usize,
    pub window: Window,
    pub value: f64,
}

/// Sparse primal solution. Only strictly positive entries are listed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FractionalSolution {
    pub x: Vec<XEntry>,
    pub y: Vec<YEntry>,
    /// Rejected copies per item type (rejection only).
    pub z_types: Vec<(usize, f64)>,
    /// Rejection of small items (rejection only).
    pub z_items: Vec<(usize, f64)>,
    pub objective: f64,
    pub is_basic: bool,
    /// Windows that carry rows in the LP the solution belongs to.
    pub windows: Vec<Window>,
}

impl FractionalSolution {
    pub fn total_x(&self) -> f64 {
        self.x.iter().map(|e| e.value).sum()
    }

    /// Number of `x` variables with a fractional value.
    pub fn fractional_x(&self) -> usize {
        self.x.iter().filter(|e| !is_integral(e.value)).count()
    }

    /// Total `Y` mass of every small item.
    pub fn y_mass(&self, small_count: usize) -> Vec<f64> {
        let mut mass = vec![0.0; small_count];
        for e in &self.y {
            mass[e.item] += e.value;
        }
        mass
    }

    /// Number of nonzero `Y`/`z` components per small item.
    pub fn assignment_support(&self, small_count: usize) -> Vec<usize> {
        let mut support = vec![0usize; small_count];
        for e in &self.y {
            support[e.item] += 1;
        }
        for &(i, _) in &self.z_items {
            support[i] += 1;
        }
        support
    }
}

pub fn is_integral(v: f64) -> bool {
    (v - v.round()).abs() <= ZERO_TOL
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DualPrices {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `(γ, δ)` per active window; `δ` is zero without a count axis.
    pub windows: BTreeMap<Window, (f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    X { config: Configuration, window: Option<Window> },
    Y { item: usize, window: Window },
    ZType(usize),
    ZItem(usize),
}

#[derive(Debug, Clone, Copy)]
struct WindowRows {
    size: usize,
    count: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MasterLp {
    pub problem: Problem,
    pub types: Vec<ItemType>,
    pub small: Vec<Item>,
    /// `None` when the LP has no window rows (configurations only).
    pub universe: Option<WindowUniverse>,
    /// Cardinality bound on configurations, if any.
    pub k: Option<usize>,
    lp: LinearProgram,
    columns: Vec<ColumnKind>,
    x_index: HashMap<(Configuration, Option<Window>), usize>,
    windows: BTreeMap<Window, WindowRows>,
    small_sizes: Vec<f64>,
}

impl MasterLp {
    pub fn new(
        problem: Problem,
        types: Vec<ItemType>,
        small: Vec<Item>,
        universe: Option<WindowUniverse>,
        k: Option<usize>,
    ) -> Self {
        let mut lp = LinearProgram::default();
        for ty in &types {
            lp.add_row(ty.multiplicity as f64);
        }
        let small_sizes: Vec<f64> = small.iter().map(|it| it.size.to_f64()).collect();
        for _ in &small {
            lp.add_row(1.0);
        }
        let mut master = MasterLp {
            problem,
            types,
            small,
            universe,
            k,
            lp,
            columns: Vec::new(),
            x_index: HashMap::new(),
            windows: BTreeMap::new(),
            small_sizes,
        };
        if problem == Problem::Bpr {
            for v in 0..master.types.len() {
                let cost = master.types[v].penalty.as_ref().map_or(1.0, |r| r.to_f64());
                master.lp.add_column(cost, vec![(v, 1.0)]);
                master.columns.push(ColumnKind::ZType(v));
            }
            for i in 0..master.small.len() {
                let cost = master.small[i].penalty_or_one().to_f64();
                let row = master.item_row(i);
                master.lp.add_column(cost, vec![(row, 1.0)]);
                master.columns.push(ColumnKind::ZItem(i));
            }
        }
        master
    }

    fn item_row(&self, i: usize) -> usize {
        self.types.len() + i
    }

    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }

    pub fn num_columns(&self) -> usize {
        self.lp.num_cols()
    }

    pub fn num_x_columns(&self) -> usize {
        self.x_index.len()
    }

    pub fn has_windows(&self) -> bool {
        self.universe.is_some()
    }

    pub fn active_windows(&self) -> impl Iterator<Item = &Window> {
        self.windows.keys()
    }

    pub fn is_active(&self, w: &Window) -> bool {
        self.windows.contains_key(w)
    }

    pub fn simplex_pivots(&self) -> usize {
        self.lp.stats.pivots
    }

    pub fn simplex_stats(&self) -> &SimplexStats {
        &self.lp.stats
    }

    pub fn contains_column(&self, config: &Configuration, window: Option<Window>) -> bool {
        self.x_index.contains_key(&(config.clone(), window))
    }

    /// Adds the rows of `w` and one `Y` column per small item. Returns
    /// `false` if the window was already active.
    pub fn activate_window(&mut self, w: Window) -> bool {
        if self.windows.contains_key(&w) {
            return false;
        }
        let count_axis = self.universe.as_ref().is_some_and(|u| u.has_count_axis());
        let size = self.lp.add_row(0.0);
        let count = count_axis.then(|| self.lp.add_row(0.0));
        self.windows.insert(w, WindowRows { size, count });
        for i in 0..self.small.len() {
            let mut entries = vec![(self.item_row(i), 1.0), (size, -self.small_sizes[i])];
            if let Some(c) = count {
                entries.push((c, -1.0));
            }
            self.lp.add_column(0.0, entries);
            self.columns.push(ColumnKind::Y { item: i, window: w });
        }
        true
    }

    /// Adds the column `(config, window)` unless it is already pooled.
    /// The window is activated first if needed.
    pub fn add_x(&mut self, config: Configuration, window: Option<Window>) -> Option<usize> {
        let key = (config, window);
        if self.x_index.contains_key(&key) {
            return None;
        }
        let mut entries: Vec<(usize, f64)> = key.0.counts.iter().map(|&(v, n)| (v, n as f64)).collect();
        if let Some(w) = window {
            self.activate_window(w);
            let rows = self.windows[&w];
            let universe = self.universe.as_ref().expect("windowed column without a universe");
            entries.push((rows.size, universe.size_f64(w.t)));
            if let (Some(c), Some(n)) = (rows.count, w.count) {
                entries.push((c, n as f64));
            }
        }
        let col = self.lp.add_column(1.0, entries);
        self.columns.push(ColumnKind::X { config: key.0.clone(), window });
        self.x_index.insert(key, col);
        Some(col)
    }

    pub fn solve(&mut self) -> Result<f64> {
        self.lp.solve().map_err(|e| match e {
            SimplexError::Infeasible { .. } => {
                Error::InternalInvariantViolation(format!("restricted master became infeasible: {e}"))
            }
            other => Error::NumericalInstability(format!(
                "{other} ({} rows, {} columns, {} pivots)",
                self.lp.num_rows(),
                self.lp.num_cols(),
                self.lp.stats.pivots
            )),
        })
    }

    pub fn solution(&self) -> FractionalSolution {
        let mut sol = FractionalSolution {
            objective: self.lp.objective(),
            is_basic: true,
            windows: self.windows.keys().copied().collect(),
            ..Default::default()
        };
        for (j, kind) in self.columns.iter().enumerate() {
            let v = self.lp.value(j);
            if v <= ZERO_TOL {
                continue;
            }
            match kind {
                ColumnKind::X { config, window } => {
                    sol.x.push(XEntry { config: config.clone(), window: *window, value: v })
                }
                ColumnKind::Y { item, window } => sol.y.push(YEntry { item: *item, window: *window, value: v }),
                ColumnKind::ZType(t) => sol.z_types.push((*t, v)),
                ColumnKind::ZItem(i) => sol.z_items.push((*i, v)),
            }
        }
        sol
    }

    pub fn duals(&self) -> DualPrices {
        let y: Vec<f64> = self.lp.duals().into_iter().map(|v| v.max(0.0)).collect();
        let h = self.types.len();
        let s = self.small.len();
        let windows = self
            .windows
            .iter()
            .map(|(w, rows)| (*w, (y[rows.size], rows.count.map_or(0.0, |c| y[c]))))
            .collect();
        DualPrices { alpha: y[..h].to_vec(), beta: y[h..h + s].to_vec(), windows }
    }

    /// The current restricted master in CPLEX LP text format.
    pub fn dump_lp(&self) -> String {
        let h = self.types.len();
        let s = self.small.len();
        let mut row_names = vec![String::new(); self.lp.num_rows()];
        for (v, name) in row_names.iter_mut().enumerate().take(h) {
            *name = format!("cover_{v}");
        }
        for i in 0..s {
            row_names[h + i] = format!("small_{i}");
        }
        for (w, rows) in &self.windows {
            row_names[rows.size] = format!("wsize_{}", window_tag(w));
            if let Some(c) = rows.count {
                row_names[c] = format!("wcount_{}", window_tag(w));
            }
        }
        let col_names: Vec<String> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, kind)| match kind {
                ColumnKind::X { window, .. } => match window {
                    Some(w) => format!("x{j}_{}", window_tag(w)),
                    None => format!("x{j}"),
                },
                ColumnKind::Y { item, window } => format!("y{item}_{}", window_tag(window)),
                ColumnKind::ZType(v) => format!("zt{v}"),
                ColumnKind::ZItem(i) => format!("zs{i}"),
            })
            .collect();
        let mut out = self.lp.write_lp_format(|j| col_names[j].clone(), |i| row_names[i].clone());
        let mut legend = String::new();
        for (j, kind) in self.columns.iter().enumerate() {
            if let ColumnKind::X { config, .. } = kind {
                let _ = writeln!(legend, "\\ {} = {:?}", col_names[j], config.counts);
            }
        }
        out.insert_str(0, &legend);
        out
    }
}

fn window_tag(w: &Window) -> String {
    match w.count {
        Some(c) => format!("t{}n{}", w.t, c),
        None => format!("t{}", w.t),
    }
}

/// Initial pool: a singleton configuration per item type on its main window,
/// plus (with windows) the empty configuration on the full window. Rejection
/// columns make the rejection variant feasible on their own.
pub fn seed_master(
    problem: Problem,
    types: &[ItemType],
    small: &[Item],
    universe: Option<&WindowUniverse>,
    k: Option<usize>,
) -> MasterLp {
    let mut master = MasterLp::new(problem, types.to_vec(), small.to_vec(), universe.cloned(), k);
    for v in 0..types.len() {
        let config = Configuration::singleton(v, types);
        let window = universe.map(|u| u.main_window(&config));
        master.add_x(config, window);
    }
    if let Some(u) = universe {
        master.add_x(Configuration::empty(), Some(u.full_window()));
    }
    master
}

pub fn solve_master(master: &mut MasterLp) -> Result<(FractionalSolution, DualPrices)> {
    master.solve()?;
    Ok((master.solution(), master.duals()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ty(size: crate::rational::Rational, mult: usize) -> ItemType {
        ItemType { size, penalty: None, multiplicity: mult, members: (0..mult).collect() }
    }

    #[test]
    fn singleton_master_needs_one_bin_per_item() {
        let types = vec![ty(q(3, 5), 5)];
        let mut m = seed_master(Problem::Bpcc, &types, &[], None, Some(2));
        let (sol, duals) = solve_master(&mut m).unwrap();
        assert!((sol.objective - 5.0).abs() < 1e-9);
        assert!((duals.alpha[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn seeding_adds_singletons_and_the_empty_column() {
        let types = vec![ty(q(3, 5), 3), ty(q(2, 5), 3), ty(q(1, 2), 1)];
        let small = vec![Item::new(10, q(1, 5))];
        let u = WindowUniverse::build(&small, Some(5), &q(1, 2), Problem::Bpcc);
        let m = seed_master(Problem::Bpcc, &types, &small, Some(&u), Some(5));
        assert_eq!(m.num_x_columns(), 4);
        assert!(m.is_active(&u.full_window()));
    }

    #[test]
    fn rejection_when_penalties_are_tiny() {
        let types = vec![ItemType { size: q(9, 10), penalty: Some(q(1, 100)), multiplicity: 4, members: vec![0, 1, 2, 3] }];
        let mut m = seed_master(Problem::Bpr, &types, &[], None, None);
        let (sol, _) = solve_master(&mut m).unwrap();
        assert!((sol.objective - 0.04).abs() < 1e-9);
        assert_eq!(sol.z_types, vec![(0, 4.0)]);
    }

    #[test]
    fn combined_column_lowers_the_objective() {
        let types = vec![ty(q(3, 5), 3), ty(q(2, 5), 3)];
        let mut m = seed_master(Problem::Bpcc, &types, &[], None, Some(2));
        assert!((m.solve().unwrap() - 6.0).abs() < 1e-9);
        m.add_x(Configuration::new(vec![(0, 1), (1, 1)], &types), None);
        assert!((m.solve().unwrap() - 3.0).abs() < 1e-9);
        let text = m.dump_lp();
        assert!(text.contains("cover_0"));
        assert!(text.contains("Subject To"));
    }

    #[test]
    fn window_rows_carry_small_items() {
        let types = vec![ty(q(1, 2), 1)];
        let small = vec![Item::new(1, q(1, 5)), Item::new(2, q(1, 4))];
        let u = WindowUniverse::build(&small, Some(3), &q(1, 2), Problem::Bpcc);
        let mut m = seed_master(Problem::Bpcc, &types, &small, Some(&u), Some(3));
        let (sol, duals) = solve_master(&mut m).unwrap();
        let mass = sol.y_mass(2);
        assert!(mass.iter().all(|&v| v >= 1.0 - 1e-9));
        assert!(sol.objective >= 1.0 - 1e-9);
        assert_eq!(duals.beta.len(), 2);
        assert!(!duals.windows.is_empty());
    }
}
