//! Instance model, JSON file format and input normalization.

use std::fmt;

use log::warn;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type ItemId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    /// Bin packing with a cardinality bound per bin.
    Bpcc,
    /// Bin packing with rejection penalties.
    Bpr,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Bpcc => f.write_str("bpcc"),
            Problem::Bpr => f.write_str("bpr"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: ItemId,
    pub size: Rational,
    pub penalty: Option<Rational>,
}

impl Item {
    pub fn new(id: ItemId, size: Rational) -> Self {
        Item { id, size, penalty: None }
    }

    pub fn with_penalty(id: ItemId, size: Rational, penalty: Rational) -> Self {
        Item { id, size, penalty: Some(penalty) }
    }

    /// Rejection penalty; items without one can never be rejected.
    pub fn penalty_or_one(&self) -> Rational {
        self.penalty.clone().unwrap_or_else(Rational::one)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub problem: Problem,
    pub items: Vec<Item>,
    /// Cardinality bound; required for BPCC, ignored for BPR.
    pub k: Option<usize>,
    pub epsilon: Rational,
    /// BPR zero-size items, packed together into one dedicated bin up front.
    pub prepacked_zero: Vec<ItemId>,
}

impl Instance {
    pub fn bpcc(sizes: Vec<Rational>, k: usize, epsilon: Rational) -> Self {
        let items = sizes.into_iter().enumerate().map(|(i, s)| Item::new(i, s)).collect();
        Instance { problem: Problem::Bpcc, items, k: Some(k), epsilon, prepacked_zero: Vec::new() }
    }

    pub fn bpr(items: Vec<(Rational, Rational)>, epsilon: Rational) -> Self {
        let items = items
            .into_iter()
            .enumerate()
            .map(|(i, (s, r))| Item::with_penalty(i, s, r))
            .collect();
        Instance { problem: Problem::Bpr, items, k: None, epsilon, prepacked_zero: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn item(&self, id: ItemId) -> &Item {
        &self.items[id]
    }

    /// `1/ε` as an integer; only meaningful after normalization.
    pub fn inv_epsilon(&self) -> u64 {
        self.epsilon.recip().floor().to_u64().unwrap_or(u64::MAX)
    }

    /// Items that still have to go through the scheme (everything but the
    /// pre-packed zero-size BPR items).
    pub fn active_items(&self) -> impl Iterator<Item = &Item> {
        self.items.iter().filter(move |it| !self.prepacked_zero.contains(&it.id))
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            problem: self.problem,
            k: self.k.map(|k| k as i64),
            items: self
                .items
                .iter()
                .map(|it| ItemRecord { size: it.size.clone(), penalty: it.penalty.clone() })
                .collect(),
        }
    }
}

/// On-disk representation: sizes and penalties are decimal strings parsed exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub problem: Problem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    pub items: Vec<ItemRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub size: Rational,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Rational>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedInstance(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization is infallible")
    }

    /// Builds an un-normalized instance; call [`validate_and_normalize`] next.
    pub fn into_instance(self, epsilon: Rational) -> Result<Instance> {
        let k = match (self.problem, self.k) {
            (Problem::Bpcc, None) => {
                return Err(Error::MalformedInstance("bpcc instance requires `k`".into()))
            }
            (Problem::Bpcc, Some(k)) if k < 1 => return Err(Error::InvalidCardinality(k)),
            (Problem::Bpcc, Some(k)) => Some(k as usize),
            (Problem::Bpr, k) => k.filter(|&k| k >= 1).map(|k| k as usize),
        };
        let items = self
            .items
            .into_iter()
            .enumerate()
            .map(|(id, rec)| Item { id, size: rec.size, penalty: rec.penalty })
            .collect();
        Ok(Instance { problem: self.problem, items, k, epsilon, prepacked_zero: Vec::new() })
    }
}

/// Rounds `ε` down to the largest `1/m` (m integer) not exceeding it.
/// The flag reports whether the value changed.
pub fn snap_epsilon(epsilon: &Rational) -> Result<(Rational, bool)> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidEpsilon(format!("{epsilon} is not positive")));
    }
    let m = epsilon.recip().ceil();
    let snapped = Rational::from_big(1.into(), m);
    let changed = &snapped != epsilon;
    Ok((snapped, changed))
}

/// Largest admissible ε per problem. BPCC admits 1/2 itself, which the
/// acceptance corpus exercises.
pub fn max_epsilon(problem: Problem) -> Rational {
    match problem {
        Problem::Bpcc => Rational::new(1, 2),
        Problem::Bpr => Rational::new(1, 3),
    }
}

/// Checks item domains, clamps BPR penalties to 1, extracts BPR zero-size
/// items into a pre-packed bin and snaps ε onto the `1/m` grid.
pub fn validate_and_normalize(raw: Instance) -> Result<Instance> {
    let mut inst = raw;
    if let (Problem::Bpcc, None) = (inst.problem, inst.k) {
        return Err(Error::InvalidCardinality(0));
    }
    if let (Problem::Bpcc, Some(0)) = (inst.problem, inst.k) {
        return Err(Error::InvalidCardinality(0));
    }
    let (epsilon, changed) = snap_epsilon(&inst.epsilon)?;
    if changed {
        warn!("epsilon {} snapped down to {}", inst.epsilon, epsilon);
    }
    if epsilon > max_epsilon(inst.problem) {
        return Err(Error::InvalidEpsilon(format!(
            "{epsilon} exceeds the maximum {} for {}",
            max_epsilon(inst.problem),
            inst.problem
        )));
    }
    inst.epsilon = epsilon;

    let one = Rational::one();
    inst.prepacked_zero.clear();
    for item in &mut inst.items {
        if item.size.is_negative() || item.size > one {
            return Err(Error::InvalidItem {
                id: item.id,
                reason: format!("size {} outside [0, 1]", item.size),
            });
        }
        match inst.problem {
            Problem::Bpcc => {}
            Problem::Bpr => {
                let penalty = item.penalty.as_ref().ok_or_else(|| Error::InvalidItem {
                    id: item.id,
                    reason: "bpr item without a penalty".into(),
                })?;
                if !penalty.is_positive() {
                    return Err(Error::InvalidItem {
                        id: item.id,
                        reason: format!("penalty {penalty} is not positive"),
                    });
                }
                if *penalty > one {
                    item.penalty = Some(one.clone());
                }
                if item.size.is_zero() {
                    inst.prepacked_zero.push(item.id);
                }
            }
        }
    }
    Ok(inst)
}
