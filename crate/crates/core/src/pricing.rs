//! Knapsack oracles for the dual separation problems.
//!
//! Both oracles share one profit-scaling dynamic program over
//! `(cardinality, scaled profit)` states that stores the minimum total size
//! of every state. Sizes are kept as exact integers on a common grid, so the
//! capacity test (strict or not) is exact.
//!
//! The scale factor only depends on the items that fit the capacity, never on
//! the cardinality bound. A single table therefore answers every bound at
//! once, and [`kcc_sweep`] agrees entry by entry with [`kcc_fptas`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::Configuration;
use crate::rational::Rational;

/// An item type offered to the oracle: `profit` per copy, at most `multiplicity` copies.
#[derive(Debug, Clone, PartialEq)]
pub struct PricingItem {
    pub type_index: usize,
    pub profit: f64,
    pub size: Rational,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingProblem {
    pub items: Vec<PricingItem>,
    pub capacity: Rational,
    /// Total size must be `< capacity` instead of `≤ capacity`.
    pub capacity_strict: bool,
    pub cardinality_bound: Option<usize>,
    pub epsilon: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricingSolution {
    /// Chosen copies keyed by `type_index`.
    pub config: Configuration,
    /// Exact profit of `config`.
    pub value: f64,
    /// Proven upper bound on the optimal profit for the same bound.
    pub upper_bound: f64,
}

impl PricingSolution {
    fn empty() -> Self {
        PricingSolution { config: Configuration::empty(), value: 0.0, upper_bound: 0.0 }
    }
}

/// Knapsack with a cardinality bound; the result has profit at least
/// `(1 − ε)` times the optimum.
pub fn kcc_fptas(p: &PricingProblem) -> PricingSolution {
    let bound = p.cardinality_bound.expect("kcc_fptas needs a cardinality bound");
    let table = SweepTable::build(&p.items, &p.capacity, p.capacity_strict, Some(bound), &p.epsilon);
    table.solution(bound)
}

/// Plain bounded knapsack; same contract as [`kcc_fptas`] without the bound.
pub fn knapsack_fptas(p: &PricingProblem) -> PricingSolution {
    assert!(p.cardinality_bound.is_none(), "knapsack_fptas takes no cardinality bound");
    let table = SweepTable::build(&p.items, &p.capacity, p.capacity_strict, None, &p.epsilon);
    table.solution(usize::MAX)
}

/// Entry `c` is the answer of [`kcc_fptas`] with cardinality bound `c`.
pub fn kcc_sweep(
    items: &[PricingItem],
    capacity: &Rational,
    capacity_strict: bool,
    max_cardinality: usize,
    epsilon: &Rational,
) -> Vec<PricingSolution> {
    let table = SweepTable::build(items, capacity, capacity_strict, Some(max_cardinality), epsilon);
    (0..=max_cardinality).map(|c| table.solution(c)).collect()
}

#[derive(Debug, Clone)]
struct Group {
    item: usize,
    copies: usize,
    size: u64,
    q: usize,
}

/// The shared dynamic program. Row `c` holds states that use exactly `c` copies.
#[derive(Debug, Clone)]
pub(crate) struct SweepTable {
    items: Vec<PricingItem>,
    groups: Vec<Group>,
    /// Largest useful cardinality: the bound, or the most copies that fit.
    rows: usize,
    width: usize,
    best: Vec<u64>,
    taken: Vec<u64>,
    scale: f64,
    slack: f64,
    epsilon: f64,
    /// `prefix[c]`: best `(q, size, row)` over rows `0..=c`.
    prefix: Vec<(usize, u64, usize)>,
}

const UNREACHED: u64 = u64::MAX;
/// Exact size grids coarser than this fall back to a conservative one.
const MAX_UNITS: u64 = 1 << 62;

struct SizeGrid {
    scale: BigInt,
    exact: bool,
}

impl SizeGrid {
    fn new(sizes: impl Iterator<Item = Rational>) -> Self {
        let mut lcm = BigInt::one();
        for s in sizes {
            lcm = lcm.lcm(s.denom());
            if lcm > BigInt::from(MAX_UNITS) {
                return SizeGrid { scale: BigInt::from(1u64 << 60), exact: false };
            }
        }
        SizeGrid { scale: lcm, exact: true }
    }

    /// Item size in grid units, rounded up when the grid is not exact.
    fn units(&self, size: &Rational) -> u64 {
        let scaled = size * &Rational::from(self.scale.clone());
        let v = if self.exact { scaled.floor() } else { scaled.ceil() };
        v.to_u64().unwrap_or(u64::MAX)
    }

    /// Largest admissible total in grid units, `None` if nothing (not even
    /// the empty set) is admissible.
    fn limit(&self, capacity: &Rational, strict: bool) -> Option<u64> {
        let scaled = capacity * &Rational::from(self.scale.clone());
        let v = if strict { scaled.ceil() - BigInt::one() } else { scaled.floor() };
        if v < BigInt::zero() {
            None
        } else {
            Some(v.to_u64().unwrap_or(u64::MAX))
        }
    }
}

impl SweepTable {
    pub(crate) fn build(
        items: &[PricingItem],
        capacity: &Rational,
        strict: bool,
        max_cardinality: Option<usize>,
        epsilon: &Rational,
    ) -> SweepTable {
        let eps = epsilon.to_f64();
        let grid = SizeGrid::new(items.iter().map(|it| it.size.clone()));
        let empty = SweepTable {
            items: items.to_vec(),
            groups: Vec::new(),
            rows: 0,
            width: 1,
            best: vec![0],
            taken: Vec::new(),
            scale: 0.0,
            slack: 0.0,
            epsilon: eps,
            prefix: vec![(0, 0, 0)],
        };
        let Some(limit) = grid.limit(capacity, strict) else {
            let mut t = empty;
            t.best = vec![UNREACHED];
            return t;
        };

        // Copies of each useful item that fit on their own.
        let mut useful: Vec<(usize, u64, usize)> = Vec::new();
        for (idx, it) in items.iter().enumerate() {
            if !(it.profit > 0.0 && it.profit.is_finite()) || it.multiplicity == 0 {
                continue;
            }
            let units = grid.units(&it.size);
            if units > limit {
                continue;
            }
            let copies = limit.checked_div(units).map_or(it.multiplicity, |fit| it.multiplicity.min(fit as usize));
            useful.push((idx, units, copies));
        }
        if useful.is_empty() {
            return empty;
        }

        // Most copies any feasible set can hold.
        let mut by_size = useful.clone();
        by_size.sort_by_key(|&(idx, units, _)| (units, idx));
        let mut fit = 0usize;
        let mut used = 0u64;
        for &(_, units, copies) in &by_size {
            if units == 0 {
                fit += copies;
                continue;
            }
            let room = ((limit - used) / units) as usize;
            let take = room.min(copies);
            fit += take;
            used += take as u64 * units;
        }
        let rows = max_cardinality.map_or(fit, |c| c.min(fit));

        let p1 = useful.iter().map(|&(idx, _, _)| items[idx].profit).fold(0.0, f64::max);
        let mut groups = Vec::new();
        for &(idx, units, copies) in &useful {
            let mut left = copies;
            let mut chunk = 1usize;
            while left > 0 {
                let g = chunk.min(left);
                groups.push(Group { item: idx, copies: g, size: units * g as u64, q: 0 });
                left -= g;
                chunk *= 2;
            }
        }
        let m = groups.len();
        let scale = eps * p1 / m as f64;
        for g in &mut groups {
            g.q = (g.copies as f64 * items[g.item].profit / scale).floor() as usize;
        }
        let total_q: usize = groups.iter().map(|g| g.q).sum();
        let q_cap = (rows as f64 * m as f64 / eps).floor() as usize + 1;
        let width = total_q.min(q_cap) + 1;

        let cells = (rows + 1) * width;
        let mut best = vec![UNREACHED; cells];
        best[0] = 0;
        let words_per_group = cells.div_ceil(64);
        let mut taken = vec![0u64; words_per_group * m];
        for (j, g) in groups.iter().enumerate() {
            if g.copies > rows || g.q >= width {
                continue;
            }
            let base = j * words_per_group;
            for c in (g.copies..=rows).rev() {
                let row = c * width;
                let prev_row = (c - g.copies) * width;
                for q in (g.q..width).rev() {
                    let prev = best[prev_row + q - g.q];
                    if prev == UNREACHED {
                        continue;
                    }
                    let cand = prev + g.size;
                    if cand <= limit && cand < best[row + q] {
                        best[row + q] = cand;
                        let cell = row + q;
                        taken[base + cell / 64] |= 1 << (cell % 64);
                    }
                }
            }
        }

        let mut prefix = Vec::with_capacity(rows + 1);
        let mut current: Option<(usize, u64, usize)> = None;
        for c in 0..=rows {
            let row = &best[c * width..(c + 1) * width];
            if let Some(q) = (0..width).rev().find(|&q| row[q] != UNREACHED) {
                let cand = (q, row[q], c);
                current = Some(match current {
                    None => cand,
                    Some(cur) => {
                        if (cand.0, std::cmp::Reverse(cand.1)) > (cur.0, std::cmp::Reverse(cur.1)) {
                            cand
                        } else {
                            cur
                        }
                    }
                });
            }
            prefix.push(current.expect("the empty set is always reachable"));
        }

        SweepTable {
            items: items.to_vec(),
            groups,
            rows,
            width,
            best,
            taken,
            scale,
            slack: eps * p1,
            epsilon: eps,
            prefix,
        }
    }

    /// Cardinalities beyond this value give the same answer.
    pub(crate) fn saturation(&self) -> usize {
        self.rows
    }

    fn is_infeasible(&self) -> bool {
        self.best[0] == UNREACHED
    }

    pub(crate) fn upper_bound(&self, bound: usize) -> f64 {
        if self.is_infeasible() {
            return 0.0;
        }
        let (q, _, _) = self.prefix[bound.min(self.rows)];
        let per_copy = self.slack * bound.min(self.rows) as f64 / self.epsilon;
        (self.scale * q as f64 + self.slack).min(per_copy)
    }

    pub(crate) fn solution(&self, bound: usize) -> PricingSolution {
        if self.is_infeasible() || self.groups.is_empty() {
            return PricingSolution::empty();
        }
        let (q_best, _, row) = self.prefix[bound.min(self.rows)];
        let cells = (self.rows + 1) * self.width;
        let words_per_group = cells.div_ceil(64);
        let mut picked: Vec<(usize, u32)> = Vec::new();
        let (mut c, mut q) = (row, q_best);
        for (j, g) in self.groups.iter().enumerate().rev() {
            let cell = c * self.width + q;
            if self.taken[j * words_per_group + cell / 64] >> (cell % 64) & 1 == 1 {
                picked.push((g.item, g.copies as u32));
                c -= g.copies;
                q -= g.q;
            }
        }
        debug_assert_eq!((c, q), (0, 0));
        let value = picked.iter().fold(0.0, |acc, &(idx, n)| acc + self.items[idx].profit * n as f64);
        PricingSolution {
            config: configuration_from(&picked, &self.items),
            value,
            upper_bound: self.upper_bound(bound),
        }
    }
}

fn configuration_from(picked: &[(usize, u32)], items: &[PricingItem]) -> Configuration {
    let mut counts: Vec<(usize, u32)> = picked.iter().map(|&(idx, n)| (items[idx].type_index, n)).collect();
    counts.sort_unstable();
    let mut merged: Vec<(usize, u32)> = Vec::new();
    for (ty, n) in counts {
        match merged.last_mut() {
            Some((last, acc)) if *last == ty => *acc += n,
            _ => merged.push((ty, n)),
        }
    }
    let size = picked.iter().map(|&(idx, n)| &items[idx].size * &Rational::from(n as i64)).sum();
    let item_count = merged.iter().map(|&(_, n)| n).sum();
    Configuration { counts: merged, size, item_count }
}
