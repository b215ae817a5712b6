//! Large/small classification, penalty rounding and linear grouping: the
//! steps that turn the input into the rounded instance the LP works on.

use std::collections::BTreeMap;

use crate::instance::{Instance, Item, ItemId, Problem};
use crate::rational::Rational;

/// A distinct rounded (size, penalty) pair together with the items carrying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemType {
    pub size: Rational,
    pub penalty: Option<Rational>,
    pub multiplicity: usize,
    /// Original item ids rounded to this type, ascending.
    pub members: Vec<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedInstance {
    pub item_types: Vec<ItemType>,
    /// Items that bypass grouping; sizes and penalties unchanged.
    pub small_items: Vec<Item>,
    /// The first grouping class of each grouped set, packed one item per bin.
    pub set_aside: Vec<Item>,
    /// Maps every rounded item to an original item that is at least as large
    /// (and, for BPR, has at least the rounded penalty).
    pub origin_map: Vec<(ItemId, ItemId)>,
    /// Number of items classified large before grouping.
    pub large_count: usize,
}

impl RoundedInstance {
    pub fn type_count(&self) -> usize {
        self.item_types.len()
    }

    pub fn total_items(&self) -> usize {
        self.item_types.iter().map(|t| t.multiplicity).sum::<usize>()
            + self.small_items.len()
            + self.set_aside.len()
    }

    /// The rounded instance as a standalone instance (ids renumbered),
    /// without the set-aside items. Used to compare optima before and after rounding.
    pub fn as_instance(&self, problem: Problem, k: Option<usize>, epsilon: Rational) -> Instance {
        let mut items = Vec::new();
        for ty in &self.item_types {
            for _ in 0..ty.multiplicity {
                items.push(Item { id: items.len(), size: ty.size.clone(), penalty: ty.penalty.clone() });
            }
        }
        for it in &self.small_items {
            items.push(Item { id: items.len(), size: it.size.clone(), penalty: it.penalty.clone() });
        }
        Instance { problem, items, k, epsilon, prepacked_zero: Vec::new() }
    }
}

/// BPCC: `s ≥ ε` is large. BPR: large iff `s ≥ ε` and `r ≥ ε`.
pub fn split_large_small(items: &[Item], epsilon: &Rational, problem: Problem) -> (Vec<Item>, Vec<Item>) {
    items.iter().cloned().partition(|it| is_large(it, epsilon, problem))
}

pub fn is_large(item: &Item, epsilon: &Rational, problem: Problem) -> bool {
    match problem {
        Problem::Bpcc => item.size >= *epsilon,
        Problem::Bpr => item.size >= *epsilon && item.penalty_or_one() >= *epsilon,
    }
}

/// Index `i` of the penalty class `[ε+iε², ε+(i+1)ε²)` containing `r`,
/// clamped to `0..=Δ` with `Δ = 1/ε² − 1/ε`.
pub fn penalty_class(r: &Rational, epsilon: &Rational) -> u64 {
    let eps2 = epsilon * epsilon;
    let inv = epsilon.recip();
    let delta = (&inv * &inv - &inv).floor();
    let raw = ((r - epsilon) / &eps2).floor();
    let raw = raw.max(0.into()).min(delta);
    num_traits::ToPrimitive::to_u64(&raw).unwrap_or(0)
}

pub fn round_penalty(r: &Rational, epsilon: &Rational) -> Rational {
    let i = penalty_class(r, epsilon);
    epsilon + &(Rational::from_integer(i as i64) * epsilon * epsilon)
}

/// Rounds penalties of the large items down to the `ε + iε²` grid; small
/// items are returned untouched.
pub fn round_penalties(items: &[Item], epsilon: &Rational) -> Vec<Item> {
    items
        .iter()
        .map(|it| {
            let mut out = it.clone();
            if is_large(it, epsilon, Problem::Bpr) {
                out.penalty = it.penalty.as_ref().map(|r| round_penalty(r, epsilon));
            }
            out
        })
        .collect()
}

/// Result of linear grouping. `classes[0]` is the set-aside class (empty
/// when there were fewer items than classes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearGrouping {
    pub classes: Vec<Vec<Item>>,
    pub rounded: bool,
}

impl LinearGrouping {
    pub fn set_aside(&self) -> &[Item] {
        &self.classes[0]
    }

    /// Items outside the first class with sizes rounded up to their class maximum.
    pub fn rounded_items(&self) -> Vec<Item> {
        let mut out = Vec::new();
        for class in self.classes.iter().skip(1) {
            let Some(max) = class.first().map(|it| it.size.clone()) else { continue };
            for it in class {
                let mut r = it.clone();
                r.size = max.clone();
                out.push(r);
            }
        }
        out
    }

    /// Each item of class `p ≥ 2` is mapped to the same position of class
    /// `p − 1`, whose items are no smaller than the rounded size. Without
    /// rounding the map is the identity.
    pub fn bijection(&self) -> Vec<(ItemId, ItemId)> {
        let mut out = Vec::new();
        for p in 1..self.classes.len() {
            for (j, it) in self.classes[p].iter().enumerate() {
                let target = if self.rounded { self.classes[p - 1][j].id } else { it.id };
                out.push((it.id, target));
            }
        }
        out
    }
}

/// Sorts by non-increasing size (ties by id) and splits into `num_classes`
/// classes whose sizes differ by at most one, larger classes first.
pub fn linear_grouping(items: &[Item], num_classes: usize) -> LinearGrouping {
    let mut sorted = items.to_vec();
    sorted.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
    if sorted.len() < num_classes || num_classes == 0 {
        let mut classes = vec![Vec::new()];
        classes.extend(sorted.into_iter().map(|it| vec![it]));
        return LinearGrouping { classes, rounded: false };
    }
    let base = sorted.len() / num_classes;
    let extra = sorted.len() % num_classes;
    let mut classes = Vec::with_capacity(num_classes);
    let mut iter = sorted.into_iter();
    for p in 0..num_classes {
        let len = base + usize::from(p < extra);
        classes.push(iter.by_ref().take(len).collect());
    }
    LinearGrouping { classes, rounded: true }
}

fn classes_count(epsilon: &Rational) -> usize {
    let inv = num_traits::ToPrimitive::to_usize(&epsilon.recip().floor()).unwrap_or(usize::MAX);
    inv.saturating_mul(inv).saturating_mul(inv)
}

fn collect_types(rounded: Vec<Item>) -> Vec<ItemType> {
    let mut map: BTreeMap<(Rational, Option<Rational>), Vec<ItemId>> = BTreeMap::new();
    for it in rounded {
        map.entry((it.size, it.penalty)).or_default().push(it.id);
    }
    let mut types: Vec<ItemType> = map
        .into_iter()
        .map(|((size, penalty), mut members)| {
            members.sort_unstable();
            ItemType { size, penalty, multiplicity: members.len(), members }
        })
        .collect();
    types.sort_by(|a, b| b.size.cmp(&a.size).then(b.penalty.cmp(&a.penalty)));
    types
}

/// Small cardinality bound: every item is grouped, nothing is small.
pub fn round_all_items(inst: &Instance) -> RoundedInstance {
    let items: Vec<Item> = inst.active_items().cloned().collect();
    let grouping = linear_grouping(&items, classes_count(&inst.epsilon));
    RoundedInstance {
        item_types: collect_types(grouping.rounded_items()),
        small_items: Vec::new(),
        set_aside: grouping.set_aside().to_vec(),
        origin_map: grouping.bijection(),
        large_count: items.len(),
    }
}

/// Large cardinality bound: only items of size at least ε are grouped.
pub fn round_large_items(inst: &Instance) -> RoundedInstance {
    let items: Vec<Item> = inst.active_items().cloned().collect();
    let (large, small) = split_large_small(&items, &inst.epsilon, Problem::Bpcc);
    let grouping = linear_grouping(&large, classes_count(&inst.epsilon));
    RoundedInstance {
        item_types: collect_types(grouping.rounded_items()),
        small_items: small,
        set_aside: grouping.set_aside().to_vec(),
        origin_map: grouping.bijection(),
        large_count: large.len(),
    }
}

/// Rejection: penalties of large items rounded down, then grouping runs
/// separately inside every penalty class.
pub fn round_with_penalties(inst: &Instance) -> RoundedInstance {
    let eps = &inst.epsilon;
    let items: Vec<Item> = inst.active_items().cloned().collect();
    let (large, small) = split_large_small(&items, eps, Problem::Bpr);
    let large = round_penalties(&large, eps);
    let mut by_class: BTreeMap<u64, Vec<Item>> = BTreeMap::new();
    for it in large.iter() {
        let class = penalty_class(it.penalty.as_ref().expect("bpr penalties"), eps);
        by_class.entry(class).or_default().push(it.clone());
    }
    let m = classes_count(eps);
    let mut rounded = Vec::new();
    let mut set_aside = Vec::new();
    let mut origin_map = Vec::new();
    for class_items in by_class.values() {
        let grouping = linear_grouping(class_items, m);
        rounded.extend(grouping.rounded_items());
        set_aside.extend(grouping.set_aside().iter().map(|it| inst.item(it.id).clone()));
        origin_map.extend(grouping.bijection());
    }
    RoundedInstance {
        item_types: collect_types(rounded),
        small_items: small,
        set_aside,
        origin_map,
        large_count: large.len(),
    }
}
