//! Windows, configurations and generalized configurations.
//!
//! A window is addressed by integers only: `t` selects the size
//! `(1+ε)^{-t}` on the exact grid and `count` (BPCC only) the number of
//! small items the window may take. The window set is never materialized.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Item, Problem};
use crate::rational::Rational;
use crate::rounding::ItemType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Window {
    /// Size exponent: the window size is `(1+ε)^{-t}`.
    pub t: u32,
    /// Residual item count `w_n`; `None` for BPR.
    pub count: Option<u32>,
}

impl Window {
    pub fn new(t: u32, count: Option<u32>) -> Self {
        Window { t, count }
    }

    /// Componentwise dominance `self ≤ other`. Larger `t` means a smaller size.
    pub fn dominated_by(&self, other: &Window) -> bool {
        let size_ok = self.t >= other.t;
        let count_ok = match (self.count, other.count) {
            (Some(a), Some(b)) => a <= b,
            (None, None) => true,
            _ => false,
        };
        size_ok && count_ok
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.count {
            Some(c) => write!(f, "(t={}, n={})", self.t, c),
            None => write!(f, "(t={})", self.t),
        }
    }
}

/// The virtual window set for one rounded instance.
#[derive(Debug, Clone)]
pub struct WindowUniverse {
    pub epsilon: Rational,
    /// Smallest nonzero small-item size, if any.
    pub s_min: Option<Rational>,
    /// Largest grid value `(1+ε)^{-t}` not exceeding `s_min`.
    pub s_min_prime: Option<Rational>,
    /// Largest admissible size exponent.
    pub t_max: u32,
    /// Cardinality bound for BPCC windows; `None` for BPR.
    pub k: Option<u32>,
    sizes: Vec<Rational>,
    sizes_f64: Vec<f64>,
}

impl WindowUniverse {
    /// Grid over the nonzero small sizes. Without a nonzero small item the
    /// universe is degenerate: a single exponent whose window only takes
    /// zero-size items.
    pub fn build(small_items: &[Item], k: Option<usize>, epsilon: &Rational, problem: Problem) -> Self {
        let ratio = Rational::one() / (Rational::one() + epsilon);
        let s_min = small_items.iter().filter(|it| it.size.is_positive()).map(|it| it.size.clone()).min();
        let k = match problem {
            Problem::Bpcc => Some(k.expect("bpcc windows need k") as u32),
            Problem::Bpr => None,
        };
        let Some(s_min) = s_min else {
            return WindowUniverse {
                epsilon: epsilon.clone(),
                s_min: None,
                s_min_prime: None,
                t_max: 0,
                k,
                sizes: vec![Rational::one()],
                sizes_f64: vec![1.0],
            };
        };
        let mut sizes = vec![Rational::one()];
        while *sizes.last().unwrap() > s_min {
            let next = sizes.last().unwrap() * &ratio;
            sizes.push(next);
        }
        let s_min_prime = sizes.last().unwrap().clone();
        // One more exponent below s'_min: the window that leaves room only for zero sizes.
        let next = &s_min_prime * &ratio;
        sizes.push(next);
        let sizes_f64 = sizes.iter().map(Rational::to_f64).collect();
        WindowUniverse {
            epsilon: epsilon.clone(),
            s_min: Some(s_min),
            s_min_prime: Some(s_min_prime),
            t_max: (sizes.len() - 1) as u32,
            k,
            sizes,
            sizes_f64,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.s_min.is_none()
    }

    pub fn has_count_axis(&self) -> bool {
        self.k.is_some()
    }

    pub fn size(&self, t: u32) -> &Rational {
        &self.sizes[t as usize]
    }

    pub fn size_f64(&self, t: u32) -> f64 {
        self.sizes_f64[t as usize]
    }

    pub fn window_size(&self, w: &Window) -> &Rational {
        self.size(w.t)
    }

    /// The smallest window size, `s'_min/(1+ε)`: only zero-size items fit.
    pub fn is_zero_window(&self, w: &Window) -> bool {
        w.t == self.t_max
    }

    pub fn len(&self) -> usize {
        let per_size = self.k.map_or(1, |k| k as usize + 1);
        (self.t_max as usize + 1) * per_size
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, w: &Window) -> bool {
        w.t <= self.t_max
            && match (self.k, w.count) {
                (Some(k), Some(c)) => c <= k,
                (None, None) => true,
                _ => false,
            }
    }

    /// Lazily enumerates every window, size-major.
    pub fn iter(&self) -> impl Iterator<Item = Window> + '_ {
        (0..=self.t_max).flat_map(move |t| {
            let counts: Box<dyn Iterator<Item = Option<u32>>> = match self.k {
                Some(k) => Box::new((0..=k).map(Some)),
                None => Box::new(std::iter::once(None)),
            };
            counts.map(move |c| Window::new(t, c))
        })
    }

    /// Largest window with size exponent `t = 0` (and full count for BPCC).
    pub fn full_window(&self) -> Window {
        Window::new(0, self.k)
    }

    /// Main window of `config`: the largest size with `s'(C) + w_s ≥ 1` and
    /// (BPCC) count `k − |C|`.
    pub fn main_window(&self, config: &Configuration) -> Window {
        let free = Rational::one() - &config.size;
        // sizes are decreasing; the last index whose size still covers `free`.
        let t = self.sizes.iter().rposition(|s| *s >= free).unwrap_or(0);
        let count = self.k.map(|k| k.saturating_sub(config.item_count));
        Window::new(t as u32, count)
    }

    pub fn is_valid_generalized(&self, config: &Configuration, window: &Window) -> bool {
        self.contains(window) && window.dominated_by(&self.main_window(config))
    }
}

/// A multiset of item types fitting one bin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Configuration {
    /// `(type index, count)` pairs, ascending by type, counts nonzero.
    pub counts: Vec<(usize, u32)>,
    pub size: Rational,
    pub item_count: u32,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.counts == other.counts
    }
}

impl Eq for Configuration {}

impl std::hash::Hash for Configuration {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.counts.hash(state);
    }
}

impl PartialOrd for Configuration {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Configuration {
    fn cmp(&self, other: &Self) -> Ordering {
        self.counts.cmp(&other.counts)
    }
}

impl Configuration {
    pub fn empty() -> Self {
        Configuration { counts: Vec::new(), size: Rational::zero(), item_count: 0 }
    }

    pub fn new(mut counts: Vec<(usize, u32)>, types: &[ItemType]) -> Self {
        counts.retain(|&(_, c)| c > 0);
        counts.sort_unstable();
        let mut merged: Vec<(usize, u32)> = Vec::with_capacity(counts.len());
        for (ty, c) in counts {
            match merged.last_mut() {
                Some((last, acc)) if *last == ty => *acc += c,
                _ => merged.push((ty, c)),
            }
        }
        let size = merged
            .iter()
            .map(|&(ty, c)| &types[ty].size * &Rational::from_integer(c as i64))
            .sum();
        let item_count = merged.iter().map(|&(_, c)| c).sum();
        Configuration { counts: merged, size, item_count }
    }

    pub fn singleton(ty: usize, types: &[ItemType]) -> Self {
        Configuration::new(vec![(ty, 1)], types)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count_of(&self, ty: usize) -> u32 {
        self.counts.iter().find(|&&(t, _)| t == ty).map_or(0, |&(_, c)| c)
    }

    /// Fits one bin, respects the multiplicities and the optional cardinality bound.
    pub fn is_feasible(&self, types: &[ItemType], k: Option<usize>) -> bool {
        self.size <= Rational::one()
            && k.is_none_or(|k| self.item_count as usize <= k)
            && self.counts.iter().all(|&(t, c)| c as usize <= types[t].multiplicity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneralizedConfiguration {
    pub config: Configuration,
    pub window: Window,
}

impl GeneralizedConfiguration {
    pub fn new(config: Configuration, window: Window) -> Self {
        GeneralizedConfiguration { config, window }
    }
}
