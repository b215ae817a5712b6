//! From a fractional master solution to an integral packing.
//!
//! The windowed pipeline is: migrate every column onto its main window,
//! re-solve the LP restricted to those windows for a basic solution, round
//! the configuration counts up, evict small items whose assignment is split,
//! distribute small items round-robin inside every window, move the largest
//! small item of each bin out, and finally repack every bin greedily with the
//! original sizes. The configuration-only pipeline (no windows) just rounds
//! the counts up and fills the slots.

use std::collections::{BTreeMap, VecDeque};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::config::{Configuration, Window, WindowUniverse};
use crate::error::{Error, Result};
use crate::instance::{Instance, Item, ItemId, Problem};
use crate::lp::{is_integral, FractionalSolution, MasterLp, XEntry, YEntry, ZERO_TOL};
use crate::rational::Rational;
use crate::rounding::{ItemType, RoundedInstance};

/// An integral solution in the output format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Packing {
    pub bins: Vec<Vec<ItemId>>,
    #[serde(default)]
    pub rejected: Vec<ItemId>,
    /// Number of bins plus the original penalties of rejected items.
    pub cost: Rational,
}

impl Packing {
    pub fn new(bins: Vec<Vec<ItemId>>, rejected: Vec<ItemId>, inst: &Instance) -> Self {
        let penalties: Rational = rejected.iter().map(|&id| inst.item(id).penalty_or_one()).sum();
        let cost = Rational::from_integer(bins.len() as i64) + penalties;
        Packing { bins, rejected, cost }
    }

    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    pub fn rejected_cost(&self) -> Rational {
        &self.cost - &Rational::from_integer(self.bins.len() as i64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("packings always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedInstance(format!("packing: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Large,
    Inter,
    Final,
}

/// Where a bin came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOrigin {
    Column { config: Configuration, window: Option<Window> },
    /// Items moved out of their bin, grouped `1/ε` per bin.
    Group,
    /// Leftovers of the final repacking of several bins.
    Leftover,
    /// Zero-size items that did not fit the free cardinality slots.
    Spread,
    SetAside,
    ZeroBin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagedBin {
    pub large: Vec<ItemId>,
    pub small: Vec<ItemId>,
    pub origin: BinOrigin,
}

impl StagedBin {
    fn new(origin: BinOrigin) -> Self {
        StagedBin { large: Vec::new(), small: Vec::new(), origin }
    }

    pub fn is_empty(&self) -> bool {
        self.large.is_empty() && self.small.is_empty()
    }

    pub fn len(&self) -> usize {
        self.large.len() + self.small.len()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.large.iter().chain(&self.small).copied()
    }

    pub fn total_size(&self, inst: &Instance) -> Rational {
        self.items().map(|id| inst.item(id).size.clone()).sum()
    }

    pub fn window(&self) -> Option<Window> {
        match &self.origin {
            BinOrigin::Column { window, .. } => *window,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StagedSolution {
    pub stage: Stage,
    pub bins: Vec<StagedBin>,
    pub rejected: Vec<ItemId>,
}

impl StagedSolution {
    /// The packing of all non-empty bins.
    pub fn packing(&self, inst: &Instance) -> Packing {
        let bins = self.bins.iter().filter(|b| !b.is_empty()).map(|b| b.items().collect()).collect();
        let mut rejected = self.rejected.clone();
        rejected.sort_unstable();
        Packing::new(bins, rejected, inst)
    }

    pub fn cost(&self, inst: &Instance) -> Rational {
        self.packing(inst).cost
    }
}

/// Checks recorded while assembling; all counters of violations stay zero on
/// a correct run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AssemblyDiagnostics {
    /// `|𝒲′|`, windows carrying rows in the restricted re-solve.
    pub active_windows: usize,
    /// Fractional `x` plus surplus assignment components of small items.
    pub fractional_support: usize,
    pub support_bound: usize,
    /// Largest deviation of `Σx`, per-configuration `Σx` or per-item `ΣY`.
    pub migration_error: f64,
    pub balance_checked: usize,
    pub balance_violations: usize,
    pub leftover_checked: usize,
    pub leftover_violations: usize,
    pub evicted_items: usize,
    pub eviction_bins: u64,
    /// Copies added because a window row failed only by float noise.
    pub bumps: u64,
    /// `Σx̂ − Σx*` including eviction bins.
    pub rounding_overhead: f64,
    pub overhead_bound: usize,
    pub removed_items: usize,
    pub overflow_items: usize,
    pub leftover_items: usize,
    pub rejected_small: usize,
}

impl AssemblyDiagnostics {
    /// Every structural property held.
    pub fn structural_ok(&self) -> bool {
        self.balance_violations == 0
            && self.leftover_violations == 0
            && self.fractional_support <= self.support_bound
            && self.migration_error <= 1e-6
            && self.rounding_overhead <= self.overhead_bound as f64 + 1e-6
    }
}

#[derive(Debug, Clone)]
pub struct AssemblyOutcome {
    pub large: StagedSolution,
    pub inter: StagedSolution,
    pub final_stage: StagedSolution,
    pub packing: Packing,
    pub diagnostics: AssemblyDiagnostics,
    /// The basic solution that was rounded.
    pub basic: FractionalSolution,
}

/// Everything the assembly needs besides the LP solution.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyInput<'a> {
    /// Normalized instance, original sizes and penalties.
    pub instance: &'a Instance,
    pub rounded: &'a RoundedInstance,
    pub universe: Option<&'a WindowUniverse>,
    /// Cardinality bound used in the LP.
    pub k: Option<usize>,
}

/// Moves every column `(C, w′)` to `(C, w(C))`. The `Y` mass of `w′` follows
/// the columns in proportion `x_{(C,w′)} / X_{w′}`.
pub fn migrate_to_active_windows(sol: &FractionalSolution, universe: &WindowUniverse) -> FractionalSolution {
    let mut by_window: BTreeMap<Window, Vec<&XEntry>> = BTreeMap::new();
    for e in &sol.x {
        by_window.entry(e.window.expect("windowed solution")).or_default().push(e);
    }
    let mut x: BTreeMap<(Configuration, Window), f64> = BTreeMap::new();
    for e in &sol.x {
        let main = universe.main_window(&e.config);
        *x.entry((e.config.clone(), main)).or_default() += e.value;
    }
    let mut y: BTreeMap<(usize, Window), f64> = BTreeMap::new();
    for e in &sol.y {
        let Some(columns) = by_window.get(&e.window) else {
            debug!("dropping Y mass {:.3e} of item {} on a window without columns", e.value, e.item);
            continue;
        };
        let total: f64 = columns.iter().map(|c| c.value).sum();
        for c in columns {
            let main = universe.main_window(&c.config);
            *y.entry((e.item, main)).or_default() += e.value * c.value / total;
        }
    }
    let windows: Vec<Window> = {
        let mut w: Vec<Window> = x.keys().map(|(_, w)| *w).collect();
        w.sort();
        w.dedup();
        w
    };
    FractionalSolution {
        x: x.into_iter().map(|((config, w), value)| XEntry { config, window: Some(w), value }).collect(),
        y: y.into_iter().map(|((item, window), value)| YEntry { item, window, value }).collect(),
        z_types: sol.z_types.clone(),
        z_items: sol.z_items.clone(),
        objective: sol.objective,
        is_basic: false,
        windows,
    }
}

/// Largest change of `Σx`, per-configuration `Σx` and per-item `ΣY`.
pub fn migration_error(before: &FractionalSolution, after: &FractionalSolution, small_count: usize) -> f64 {
    let mut err = (before.total_x() - after.total_x()).abs();
    let per_config = |sol: &FractionalSolution| {
        let mut m: BTreeMap<Configuration, f64> = BTreeMap::new();
        for e in &sol.x {
            *m.entry(e.config.clone()).or_default() += e.value;
        }
        m
    };
    let (a, b) = (per_config(before), per_config(after));
    for (c, v) in &a {
        err = err.max((v - b.get(c).copied().unwrap_or(0.0)).abs());
    }
    for (c, v) in &b {
        err = err.max((v - a.get(c).copied().unwrap_or(0.0)).abs());
    }
    let (ya, yb) = (before.y_mass(small_count), after.y_mass(small_count));
    for (u, v) in ya.iter().zip(&yb) {
        err = err.max((u - v).abs());
    }
    err
}

/// Solves the LP restricted to the columns and windows of `migrated` from
/// scratch, which yields a basic solution that is no worse.
pub fn restricted_resolve(
    problem: Problem,
    types: &[ItemType],
    small: &[Item],
    universe: &WindowUniverse,
    k: Option<usize>,
    migrated: &FractionalSolution,
) -> Result<FractionalSolution> {
    let mut master = MasterLp::new(problem, types.to_vec(), small.to_vec(), Some(universe.clone()), k);
    for e in &migrated.x {
        master.add_x(e.config.clone(), e.window);
    }
    master.solve()?;
    Ok(master.solution())
}

#[derive(Debug, Clone)]
pub struct IntegralColumn {
    pub config: Configuration,
    pub window: Option<Window>,
    pub copies: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallAssignment {
    Window(Window),
    Rejected,
}

#[derive(Debug, Clone)]
pub struct RoundedSolution {
    pub columns: Vec<IntegralColumn>,
    /// Per small item (index into the small items).
    pub assignment: Vec<SmallAssignment>,
    pub evicted: Vec<usize>,
    /// `Σx*` of the rounded solution.
    pub lp_total: f64,
    pub eviction_bins: u64,
    pub bumps: u64,
}

impl RoundedSolution {
    pub fn total_copies(&self) -> u64 {
        self.columns.iter().map(|c| c.copies).sum()
    }

    fn copies_in(&self, w: &Window) -> u64 {
        self.columns.iter().filter(|c| c.window.as_ref() == Some(w)).map(|c| c.copies).sum()
    }

    fn add_empty(&mut self, window: Window, copies: u64) {
        if copies == 0 {
            return;
        }
        if let Some(col) = self
            .columns
            .iter_mut()
            .find(|c| c.config.is_empty() && c.window == Some(window))
        {
            col.copies += copies;
        } else {
            self.columns.push(IntegralColumn { config: Configuration::empty(), window: Some(window), copies });
        }
    }
}

fn round_up(v: f64) -> u64 {
    if is_integral(v) {
        v.round() as u64
    } else {
        v.ceil() as u64
    }
}

/// Rounds every configuration count up. A small item keeps its window if its
/// assignment has a single component; otherwise it is evicted to the full
/// window, which receives empty bins until its rows hold again.
pub fn round_up_and_evict(
    sol: &FractionalSolution,
    universe: Option<&WindowUniverse>,
    small: &[Item],
) -> RoundedSolution {
    let columns = sol
        .x
        .iter()
        .map(|e| IntegralColumn { config: e.config.clone(), window: e.window, copies: round_up(e.value) })
        .filter(|c| c.copies > 0)
        .collect();
    let mut components: Vec<Vec<SmallAssignment>> = vec![Vec::new(); small.len()];
    let mut rejection: Vec<f64> = vec![0.0; small.len()];
    for e in &sol.y {
        if e.value > ZERO_TOL {
            components[e.item].push(SmallAssignment::Window(e.window));
        }
    }
    for &(i, v) in &sol.z_items {
        if v > ZERO_TOL {
            components[i].push(SmallAssignment::Rejected);
            rejection[i] = v;
        }
    }
    let mut rounded = RoundedSolution {
        columns,
        assignment: Vec::with_capacity(small.len()),
        evicted: Vec::new(),
        lp_total: sol.total_x(),
        eviction_bins: 0,
        bumps: 0,
    };
    let Some(universe) = universe else {
        return rounded;
    };
    let full = universe.full_window();
    for (i, comps) in components.iter().enumerate() {
        let single = match comps.as_slice() {
            [SmallAssignment::Rejected] if rejection[i] >= 1.0 - 1e-6 => Some(SmallAssignment::Rejected),
            [SmallAssignment::Window(w)] => Some(SmallAssignment::Window(*w)),
            _ => None,
        };
        match single {
            Some(a) => rounded.assignment.push(a),
            None => {
                rounded.evicted.push(i);
                rounded.assignment.push(SmallAssignment::Window(full));
            }
        }
    }
    if !rounded.evicted.is_empty() {
        let before = rounded.copies_in(&full);
        let needed = copies_needed(&rounded, &full, universe, small);
        rounded.eviction_bins = needed.saturating_sub(before);
        rounded.add_empty(full, rounded.eviction_bins);
    }
    rounded
}

/// Least number of copies of window `w` satisfying its rows for the items
/// currently assigned to it.
fn copies_needed(rounded: &RoundedSolution, w: &Window, universe: &WindowUniverse, small: &[Item]) -> u64 {
    let members: Vec<&Item> = rounded
        .assignment
        .iter()
        .zip(small)
        .filter(|(a, _)| **a == SmallAssignment::Window(*w))
        .map(|(_, it)| it)
        .collect();
    let total: Rational = members.iter().map(|it| it.size.clone()).sum();
    let by_size = (&total / universe.window_size(w)).ceil();
    let mut needed: u64 = num_traits::ToPrimitive::to_u64(&by_size).unwrap_or(u64::MAX);
    if let Some(n) = w.count {
        if n > 0 {
            needed = needed.max((members.len() as u64).div_ceil(n as u64));
        }
    }
    needed
}

/// Verifies `|S(W)| ≤ w_n X̂(W)` and `Σ s ≤ w_s X̂(W)` exactly for every
/// window. Items on a window without count capacity go to the full window;
/// remaining shortfalls are float noise and get extra empty bins.
pub fn enforce_window_rows(rounded: &mut RoundedSolution, universe: &WindowUniverse, small: &[Item]) -> u64 {
    let full = universe.full_window();
    for a in rounded.assignment.iter_mut() {
        if let SmallAssignment::Window(w) = a {
            if w.count == Some(0) {
                warn!("small item assigned to a window without count capacity; moving it to {full}");
                *a = SmallAssignment::Window(full);
            }
        }
    }
    let mut windows: Vec<Window> = rounded
        .assignment
        .iter()
        .filter_map(|a| match a {
            SmallAssignment::Window(w) => Some(*w),
            SmallAssignment::Rejected => None,
        })
        .collect();
    windows.sort();
    windows.dedup();
    let mut bumps = 0;
    for w in windows {
        let have = rounded.copies_in(&w);
        let needed = copies_needed(rounded, &w, universe, small);
        if needed > have {
            warn!("window {w} short by {} copies after rounding; adding empty bins", needed - have);
            bumps += needed - have;
            rounded.add_empty(w, needed - have);
        }
    }
    rounded.bumps += bumps;
    bumps
}

/// One bin per copy of every column, large slots filled with the members of
/// each type. Rejection fills the slots with the highest original penalties
/// first and rejects the members left over.
pub fn build_large_bins(columns: &[IntegralColumn], types: &[ItemType], inst: &Instance) -> Result<StagedSolution> {
    let mut queues: Vec<VecDeque<ItemId>> = types
        .iter()
        .map(|ty| {
            let mut m = ty.members.clone();
            if inst.problem == Problem::Bpr {
                m.sort_by(|a, b| inst.item(*b).penalty.cmp(&inst.item(*a).penalty).then(a.cmp(b)));
            }
            m.into()
        })
        .collect();
    let mut bins = Vec::new();
    for col in columns {
        for _ in 0..col.copies {
            let mut bin = StagedBin::new(BinOrigin::Column { config: col.config.clone(), window: col.window });
            for &(v, n) in &col.config.counts {
                for _ in 0..n {
                    if let Some(id) = queues[v].pop_front() {
                        bin.large.push(id);
                    }
                }
            }
            bins.push(bin);
        }
    }
    let mut rejected = Vec::new();
    for (v, q) in queues.into_iter().enumerate() {
        if q.is_empty() {
            continue;
        }
        if inst.problem == Problem::Bpcc {
            return Err(Error::InternalInvariantViolation(format!(
                "rounded solution leaves {} items of type {v} unpacked",
                q.len()
            )));
        }
        rejected.extend(q);
    }
    Ok(StagedSolution { stage: Stage::Large, bins, rejected })
}

/// Packs items sequentially, at most `per_bin` per bin, never breaking the
/// size or cardinality limit.
fn pack_sequential(items: &[ItemId], per_bin: usize, k: Option<usize>, inst: &Instance, origin: BinOrigin) -> Vec<StagedBin> {
    let one = Rational::one();
    let mut bins: Vec<StagedBin> = Vec::new();
    let mut load = Rational::zero();
    for &id in items {
        let size = &inst.item(id).size;
        let fits = bins.last().is_some_and(|b| {
            b.small.len() < per_bin && k.is_none_or(|k| b.small.len() < k) && &load + size <= one
        });
        if !fits {
            bins.push(StagedBin::new(origin.clone()));
            load = Rational::zero();
        }
        bins.last_mut().expect("just pushed").small.push(id);
        load += size;
    }
    bins
}

/// Rejection keeps an item iff it is at most `ε` large and its penalty is at least `ε`.
fn keep_displaced(item: &Item, epsilon: &Rational) -> bool {
    item.size <= *epsilon && item.penalty.as_ref().is_none_or(|r| r >= epsilon)
}

fn group_size(epsilon: &Rational, k: Option<usize>) -> usize {
    let g = num_traits::ToPrimitive::to_usize(&epsilon.recip().floor()).unwrap_or(1).max(1);
    k.map_or(g, |k| g.min(k.max(1)))
}

/// Round-robin distribution of the small items of every window over its
/// bins, then removal of the largest small item of every bin.
pub fn place_small_items(
    large: &StagedSolution,
    rounded: &RoundedSolution,
    small: &[Item],
    inst: &Instance,
    k: Option<usize>,
    diag: &mut AssemblyDiagnostics,
) -> StagedSolution {
    let eps = &inst.epsilon;
    let mut bins = large.bins.clone();
    let mut rejected = large.rejected.clone();
    let mut by_window: BTreeMap<Window, Vec<&Item>> = BTreeMap::new();
    for (a, it) in rounded.assignment.iter().zip(small) {
        match a {
            SmallAssignment::Window(w) => by_window.entry(*w).or_default().push(it),
            SmallAssignment::Rejected => {
                rejected.push(it.id);
                diag.rejected_small += 1;
            }
        }
    }
    let mut removed: Vec<ItemId> = Vec::new();
    for (w, mut items) in by_window {
        items.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
        let slots: Vec<usize> = (0..bins.len()).filter(|&b| bins[b].window() == Some(w)).collect();
        assert!(!slots.is_empty(), "window rows were enforced before placement");
        for (p, it) in items.iter().enumerate() {
            bins[slots[p % slots.len()]].small.push(it.id);
        }
        let total: Rational = items.iter().map(|it| it.size.clone()).sum();
        let share = &total / &Rational::from_integer(slots.len() as i64);
        for &b in &slots {
            let bin = &mut bins[b];
            if let Some(&first) = bin.small.first() {
                if inst.item(first).size.is_positive() {
                    removed.push(bin.small.remove(0));
                }
            }
            diag.balance_checked += 1;
            let rest: Rational = bin.small.iter().map(|&id| inst.item(id).size.clone()).sum();
            if rest > share {
                diag.balance_violations += 1;
            }
        }
    }
    diag.removed_items += removed.len();
    let mut grouped = Vec::new();
    for id in removed {
        if inst.problem == Problem::Bpcc || keep_displaced(inst.item(id), eps) {
            grouped.push(id);
        } else {
            rejected.push(id);
            diag.rejected_small += 1;
        }
    }
    bins.extend(pack_sequential(&grouped, group_size(eps, k), k, inst, BinOrigin::Group));
    StagedSolution { stage: Stage::Inter, bins, rejected }
}

/// Greedy repacking with the original sizes: every bin keeps its small items
/// in non-decreasing order until the next one would overflow. The first
/// overflowing item of every bin is grouped (or rejected), the rest of each
/// bin's overflow is collected and `1/ε` such collections share one bin.
pub fn repack_final(
    inter: &StagedSolution,
    universe: Option<&WindowUniverse>,
    inst: &Instance,
    k: Option<usize>,
    diag: &mut AssemblyDiagnostics,
) -> StagedSolution {
    let eps = &inst.epsilon;
    let one = Rational::one();
    let mut bins = Vec::with_capacity(inter.bins.len());
    let mut rejected = inter.rejected.clone();
    let mut first_items = Vec::new();
    let mut leftovers: Vec<Vec<ItemId>> = Vec::new();
    for bin in &inter.bins {
        if !matches!(bin.origin, BinOrigin::Column { .. }) || bin.small.is_empty() {
            bins.push(bin.clone());
            continue;
        }
        let mut out = StagedBin { large: bin.large.clone(), small: Vec::new(), origin: bin.origin.clone() };
        let mut load: Rational = bin.large.iter().map(|&id| inst.item(id).size.clone()).sum();
        let mut order = bin.small.clone();
        order.sort_by(|a, b| inst.item(*a).size.cmp(&inst.item(*b).size).then(a.cmp(b)));
        let mut rest = Vec::new();
        for (pos, &id) in order.iter().enumerate() {
            let size = &inst.item(id).size;
            let count_ok = k.is_none_or(|k| out.len() < k);
            if count_ok && &load + size <= one {
                load += size;
                out.small.push(id);
            } else {
                first_items.push(id);
                rest.extend_from_slice(&order[pos + 1..]);
                break;
            }
        }
        if let (Some(u), Some(w)) = (universe, bin.window()) {
            diag.leftover_checked += 1;
            let mass: Rational = rest.iter().map(|&id| inst.item(id).size.clone()).sum();
            let size_bound = eps * u.window_size(&w) / (Rational::one() + eps);
            let count_ok = w
                .count
                .is_none_or(|n| Rational::from_integer(rest.len() as i64) <= eps * &Rational::from_integer(n as i64));
            if mass > size_bound || !count_ok {
                diag.leftover_violations += 1;
            }
        }
        if !rest.is_empty() {
            diag.leftover_items += rest.len();
            leftovers.push(rest);
        }
        bins.push(out);
    }
    diag.overflow_items += first_items.len();
    let mut grouped = Vec::new();
    for id in first_items {
        if inst.problem == Problem::Bpcc || keep_displaced(inst.item(id), eps) {
            grouped.push(id);
        } else {
            rejected.push(id);
            diag.rejected_small += 1;
        }
    }
    let g = group_size(eps, k);
    bins.extend(pack_sequential(&grouped, g, k, inst, BinOrigin::Group));
    bins.extend(group_leftovers(&leftovers, group_size(eps, None), k, inst));
    StagedSolution { stage: Stage::Final, bins, rejected }
}

/// `per_bin` consecutive leftover collections share a bin; another bin is
/// opened whenever an item would break the size or cardinality limit.
fn group_leftovers(sets: &[Vec<ItemId>], per_bin: usize, k: Option<usize>, inst: &Instance) -> Vec<StagedBin> {
    let one = Rational::one();
    let mut bins: Vec<StagedBin> = Vec::new();
    for chunk in sets.chunks(per_bin) {
        bins.push(StagedBin::new(BinOrigin::Leftover));
        let mut load = Rational::zero();
        for &id in chunk.iter().flatten() {
            let size = &inst.item(id).size;
            let bin = bins.last().expect("opened above");
            if k.is_some_and(|k| bin.small.len() >= k) || &load + size > one {
                bins.push(StagedBin::new(BinOrigin::Leftover));
                load = Rational::zero();
            }
            bins.last_mut().expect("opened above").small.push(id);
            load += size;
        }
    }
    bins
}

/// Zero-size small items fill free cardinality slots, then new bins of `k`.
fn spread_zero_items(bins: &mut Vec<StagedBin>, items: &[ItemId], k: Option<usize>) {
    let mut queue = items.iter().copied();
    let limit = k.unwrap_or(usize::MAX);
    'outer: for bin in bins.iter_mut() {
        while bin.len() < limit {
            match queue.next() {
                Some(id) => bin.small.push(id),
                None => break 'outer,
            }
        }
    }
    let rest: Vec<ItemId> = queue.collect();
    for chunk in rest.chunks(limit.min(rest.len().max(1))) {
        bins.push(StagedBin { large: Vec::new(), small: chunk.to_vec(), origin: BinOrigin::Spread });
    }
}

/// One bin per set-aside item and the bin of pre-packed zero-size items;
/// empty bins are dropped.
pub fn attach_set_aside(stage: &StagedSolution, set_aside: &[Item], inst: &Instance) -> StagedSolution {
    let mut bins: Vec<StagedBin> = stage.bins.iter().filter(|b| !b.is_empty()).cloned().collect();
    for it in set_aside {
        bins.push(StagedBin { large: vec![it.id], small: Vec::new(), origin: BinOrigin::SetAside });
    }
    if !inst.prepacked_zero.is_empty() {
        bins.push(StagedBin { large: Vec::new(), small: inst.prepacked_zero.clone(), origin: BinOrigin::ZeroBin });
    }
    StagedSolution { stage: Stage::Final, bins, rejected: stage.rejected.clone() }
}

fn with_set_aside(stage: &StagedSolution, set_aside: &[Item], inst: &Instance) -> StagedSolution {
    let mut s = attach_set_aside(stage, set_aside, inst);
    s.stage = stage.stage;
    s
}

/// Fractional `x` plus the surplus assignment components of small items.
fn fractional_support(sol: &FractionalSolution, small_count: usize) -> usize {
    let fractional_x = sol.fractional_x();
    let split: usize = sol.assignment_support(small_count).iter().map(|&s| s.saturating_sub(1)).sum();
    fractional_x + split
}

/// Turns the final LP solution into a packing.
pub fn assemble(input: AssemblyInput<'_>, sol: &FractionalSolution) -> Result<AssemblyOutcome> {
    let inst = input.instance;
    let rounded_inst = input.rounded;
    let types = &rounded_inst.item_types;
    let small = &rounded_inst.small_items;
    let mut diag = AssemblyDiagnostics::default();

    let Some(universe) = input.universe else {
        let rounded = round_up_and_evict(sol, None, small);
        diag.fractional_support = sol.fractional_x();
        diag.support_bound = types.len();
        diag.rounding_overhead = rounded.total_copies() as f64 - rounded.lp_total;
        diag.overhead_bound = types.len();
        let large = build_large_bins(&rounded.columns, types, inst)?;
        let mut inter = large.clone();
        inter.stage = Stage::Inter;
        let zero: Vec<ItemId> = small.iter().map(|it| it.id).collect();
        debug_assert!(small.iter().all(|it| it.size.is_zero()));
        spread_zero_items(&mut inter.bins, &zero, input.k);
        let final_stage = attach_set_aside(&inter, &rounded_inst.set_aside, inst);
        let packing = final_stage.packing(inst);
        return Ok(AssemblyOutcome {
            large: with_set_aside(&large, &rounded_inst.set_aside, inst),
            inter: with_set_aside(&inter, &rounded_inst.set_aside, inst),
            final_stage,
            packing,
            diagnostics: diag,
            basic: sol.clone(),
        });
    };

    let migrated = migrate_to_active_windows(sol, universe);
    diag.migration_error = migration_error(sol, &migrated, small.len());
    let basic = restricted_resolve(inst.problem, types, small, universe, input.k, &migrated)?;
    diag.active_windows = basic.windows.len();
    let per_window = if universe.has_count_axis() { 2 } else { 1 };
    diag.fractional_support = fractional_support(&basic, small.len());
    diag.support_bound = types.len() + per_window * diag.active_windows;
    diag.overhead_bound = diag.support_bound;

    let mut rounded = round_up_and_evict(&basic, Some(universe), small);
    diag.evicted_items = rounded.evicted.len();
    diag.eviction_bins = rounded.eviction_bins;
    diag.rounding_overhead = rounded.total_copies() as f64 - rounded.lp_total;
    diag.bumps = enforce_window_rows(&mut rounded, universe, small);

    let large = build_large_bins(&rounded.columns, types, inst)?;
    let inter = place_small_items(&large, &rounded, small, inst, input.k, &mut diag);
    let repacked = repack_final(&inter, Some(universe), inst, input.k, &mut diag);
    let final_stage = attach_set_aside(&repacked, &rounded_inst.set_aside, inst);
    let packing = final_stage.packing(inst);
    debug!(
        "assembly: {} bins, {} evicted, {} removed, {} overflow, {} leftover, {} bumps",
        packing.bin_count(),
        diag.evicted_items,
        diag.removed_items,
        diag.overflow_items,
        diag.leftover_items,
        diag.bumps
    );
    Ok(AssemblyOutcome {
        large: with_set_aside(&large, &rounded_inst.set_aside, inst),
        inter: with_set_aside(&inter, &rounded_inst.set_aside, inst),
        final_stage,
        packing,
        diagnostics: diag,
        basic,
    })
}
