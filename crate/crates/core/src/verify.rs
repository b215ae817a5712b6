//! Exact checker, exact solvers for tiny instances and simple baselines.

use std::fmt;

use serde::Serialize;

use crate::assembly::Packing;
use crate::error::{Error, Result};
use crate::instance::{Instance, ItemId, Problem};
use crate::pricing::PricingProblem;
use crate::rational::Rational;

pub const EXACT_BPCC_LIMIT: usize = 12;
pub const EXACT_BPR_LIMIT: usize = 10;
pub const BRUTE_KNAPSACK_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Oversize { bin: usize, total: Rational },
    Cardinality { bin: usize, count: usize, k: usize },
    Missing { item: ItemId },
    Duplicate { item: ItemId },
    UnknownItem { item: ItemId },
    RejectionNotAllowed { item: ItemId },
    CostMismatch { reported: Rational, expected: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Oversize { bin, total } => write!(f, "bin {bin} holds total size {total} > 1"),
            Violation::Cardinality { bin, count, k } => write!(f, "bin {bin} holds {count} items > k = {k}"),
            Violation::Missing { item } => write!(f, "item {item} is neither packed nor rejected"),
            Violation::Duplicate { item } => write!(f, "item {item} appears more than once"),
            Violation::UnknownItem { item } => write!(f, "item {item} does not exist"),
            Violation::RejectionNotAllowed { item } => write!(f, "item {item} rejected in a problem without rejection"),
            Violation::CostMismatch { reported, expected } => {
                write!(f, "reported cost {reported} differs from the actual cost {expected}")
            }
        }
    }
}

/// Verifies a packing in exact arithmetic. An empty list means feasible and
/// correctly priced.
pub fn check(packing: &Packing, inst: &Instance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.n();
    let mut seen = vec![0usize; n];
    let one = Rational::one();
    let mut note = |id: ItemId, out: &mut Vec<Violation>| {
        if id >= n {
            out.push(Violation::UnknownItem { item: id });
        } else {
            seen[id] += 1;
        }
    };
    for (b, bin) in packing.bins.iter().enumerate() {
        let mut total = Rational::zero();
        for &id in bin {
            note(id, &mut out);
            if id < n {
                total += &inst.item(id).size;
            }
        }
        if total > one {
            out.push(Violation::Oversize { bin: b, total });
        }
        if let (Problem::Bpcc, Some(k)) = (inst.problem, inst.k) {
            if bin.len() > k {
                out.push(Violation::Cardinality { bin: b, count: bin.len(), k });
            }
        }
    }
    for &id in &packing.rejected {
        note(id, &mut out);
        if inst.problem == Problem::Bpcc {
            out.push(Violation::RejectionNotAllowed { item: id });
        }
    }
    for (id, &count) in seen.iter().enumerate() {
        match count {
            0 => out.push(Violation::Missing { item: id }),
            1 => {}
            _ => out.push(Violation::Duplicate { item: id }),
        }
    }
    let penalties: Rational = packing
        .rejected
        .iter()
        .filter(|&&id| id < n)
        .map(|&id| inst.item(id).penalty_or_one())
        .sum();
    let expected = Rational::from_integer(packing.bins.len() as i64) + penalties;
    if expected != packing.cost {
        out.push(Violation::CostMismatch { reported: packing.cost.clone(), expected });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactResult {
    pub opt_cost: Rational,
    pub witness: Packing,
    pub nodes_explored: u64,
}

/// Sizes and counts of every subset, indexed by bitmask.
fn subset_table(inst: &Instance) -> Vec<(Rational, u32)> {
    let n = inst.n();
    let mut table = vec![(Rational::zero(), 0u32); 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        let (s, c) = &table[mask & (mask - 1)];
        table[mask] = (s + &inst.items[low].size, c + 1);
    }
    table
}

fn bins_of(mask_list: &[usize]) -> Vec<Vec<ItemId>> {
    mask_list
        .iter()
        .map(|&m| (0..usize::BITS as usize).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Optimal BPCC packing by dynamic programming over subsets: the bin of the
/// lowest unpacked item is chosen among all feasible subsets containing it.
pub fn exact_bpcc(inst: &Instance) -> Result<ExactResult> {
    let n = inst.n();
    if n > EXACT_BPCC_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_BPCC_LIMIT });
    }
    let k = inst.k.unwrap_or(n.max(1)) as u32;
    let table = subset_table(inst);
    let one = Rational::one();
    let feasible: Vec<bool> = table.iter().map(|(s, c)| *s <= one && *c <= k).collect();
    let full = (1usize << n) - 1;
    let mut best = vec![u32::MAX; 1 << n];
    let mut choice = vec![0usize; 1 << n];
    best[0] = 0;
    let mut nodes = 0u64;
    for mask in 1..=full {
        let low = 1usize << mask.trailing_zeros();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let bin = sub | low;
            nodes += 1;
            if feasible[bin] && best[mask ^ bin] != u32::MAX && best[mask ^ bin] + 1 < best[mask] {
                best[mask] = best[mask ^ bin] + 1;
                choice[mask] = bin;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    if best[full] == u32::MAX {
        return Err(Error::InvalidItem { id: 0, reason: "an item does not fit a bin on its own".into() });
    }
    let mut masks = Vec::new();
    let mut m = full;
    while m != 0 {
        masks.push(choice[m]);
        m ^= choice[m];
    }
    let witness = Packing::new(bins_of(&masks), Vec::new(), inst);
    Ok(ExactResult { opt_cost: witness.cost.clone(), witness, nodes_explored: nodes })
}

/// Optimal BPR solution: the lowest open item is either rejected or packed
/// with a subset of the remaining items.
pub fn exact_bpr(inst: &Instance) -> Result<ExactResult> {
    let n = inst.n();
    if n > EXACT_BPR_LIMIT {
        return Err(Error::TooLarge { n, limit: EXACT_BPR_LIMIT });
    }
    let table = subset_table(inst);
    let one = Rational::one();
    let full = (1usize << n) - 1;
    let mut best: Vec<Option<Rational>> = vec![None; 1 << n];
    // Bin mask, or 0 for rejecting the lowest item.
    let mut choice = vec![0usize; 1 << n];
    best[0] = Some(Rational::zero());
    let mut nodes = 0u64;
    for mask in 1..=full {
        let low_idx = mask.trailing_zeros() as usize;
        let low = 1usize << low_idx;
        let rest = mask ^ low;
        let reject = best[rest].as_ref().expect("smaller masks are solved") + &inst.items[low_idx].penalty_or_one();
        let mut current = reject;
        let mut pick = 0usize;
        let mut sub = rest;
        loop {
            let bin = sub | low;
            nodes += 1;
            if table[bin].0 <= one {
                let cand = best[mask ^ bin].as_ref().expect("smaller masks are solved") + &one;
                if cand < current {
                    current = cand;
                    pick = bin;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask] = Some(current);
        choice[mask] = pick;
    }
    let mut bins = Vec::new();
    let mut rejected = Vec::new();
    let mut m = full;
    while m != 0 {
        let c = choice[m];
        if c == 0 {
            let low = m.trailing_zeros() as usize;
            rejected.push(low);
            m ^= 1 << low;
        } else {
            bins.push(c);
            m ^= c;
        }
    }
    rejected.sort_unstable();
    let witness = Packing::new(bins_of(&bins), rejected, inst);
    let opt_cost = best[full].clone().expect("solved");
    debug_assert_eq!(witness.cost, opt_cost);
    Ok(ExactResult { opt_cost, witness, nodes_explored: nodes })
}

pub fn exact(inst: &Instance) -> Result<ExactResult> {
    match inst.problem {
        Problem::Bpcc => exact_bpcc(inst),
        Problem::Bpr => exact_bpr(inst),
    }
}

/// First-Fit-Decreasing. With rejection an item that fits no open bin is
/// rejected whenever its penalty is below the price of a new bin.
pub fn ffd_baseline(inst: &Instance) -> Packing {
    let mut order: Vec<ItemId> = (0..inst.n()).collect();
    order.sort_by(|a, b| inst.item(*b).size.cmp(&inst.item(*a).size).then(a.cmp(b)));
    let one = Rational::one();
    let k = match inst.problem {
        Problem::Bpcc => inst.k,
        Problem::Bpr => None,
    };
    let mut bins: Vec<(Vec<ItemId>, Rational)> = Vec::new();
    let mut rejected = Vec::new();
    for id in order {
        let size = &inst.item(id).size;
        let slot = bins
            .iter_mut()
            .find(|(items, load)| k.is_none_or(|k| items.len() < k) && load.clone() + size <= one);
        match slot {
            Some((items, load)) => {
                items.push(id);
                *load += size;
            }
            None => {
                if inst.problem == Problem::Bpr && inst.item(id).penalty_or_one() < one {
                    rejected.push(id);
                } else {
                    bins.push((vec![id], size.clone()));
                }
            }
        }
    }
    rejected.sort_unstable();
    Packing::new(bins.into_iter().map(|(items, _)| items).collect(), rejected, inst)
}

/// Exact optimum of a pricing problem by enumerating all copy counts.
pub fn brute_knapsack(p: &PricingProblem) -> Result<f64> {
    let copies: usize = p.items.iter().map(|it| it.multiplicity).sum();
    if copies > BRUTE_KNAPSACK_LIMIT {
        return Err(Error::TooLarge { n: copies, limit: BRUTE_KNAPSACK_LIMIT });
    }
    let mut counts = vec![0usize; p.items.len()];
    let mut best: f64 = 0.0;
    loop {
        let card: usize = counts.iter().sum();
        if p.cardinality_bound.is_none_or(|b| card <= b) {
            let size: Rational = p
                .items
                .iter()
                .zip(&counts)
                .map(|(it, &c)| &it.size * &Rational::from_integer(c as i64))
                .sum();
            let fits = if p.capacity_strict { size < p.capacity } else { size <= p.capacity };
            if fits {
                let value = p.items.iter().zip(&counts).fold(0.0, |acc, (it, &c)| acc + it.profit * c as f64);
                best = best.max(value);
            }
        }
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return Ok(best);
            }
            if counts[pos] < p.items[pos].multiplicity {
                counts[pos] += 1;
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}
