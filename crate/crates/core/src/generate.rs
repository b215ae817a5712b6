//! Seeded random instances. Sizes and penalties lie on the `1/10000` grid so
//! they print as exact 4-decimal strings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{InstanceFile, ItemRecord, Problem};
use crate::rational::Rational;

const GRID: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeDist {
    /// Uniform on `{0.0001, …, 1.0000}`.
    Uniform,
    /// Half of the items near `ε`, the other half in `[0.5, 0.7]`.
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyDist {
    /// Uniform on `{0.0001, …, 1.0000}`.
    Uniform,
    /// Uniform on `[0.0001, 0.3]`; rejection is usually attractive.
    Low,
    /// Uniform on `[0.5, 1]`.
    High,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub problem: Problem,
    pub n: usize,
    pub k: Option<usize>,
    pub size_dist: SizeDist,
    pub penalty_dist: PenaltyDist,
    /// Scale of the small cluster of [`SizeDist::Clustered`].
    pub epsilon: Rational,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(problem: Problem, n: usize, seed: u64) -> Self {
        GeneratorConfig {
            problem,
            n,
            k: (problem == Problem::Bpcc).then_some(3),
            size_dist: SizeDist::Uniform,
            penalty_dist: PenaltyDist::Uniform,
            epsilon: Rational::new(1, 3),
            seed,
        }
    }
}

fn grid_value(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Rational {
    Rational::new(rng.gen_range(lo..=hi), GRID)
}

pub fn generate(cfg: &GeneratorConfig) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eps_units = (cfg.epsilon.to_f64() * GRID as f64).round() as i64;
    let items = (0..cfg.n)
        .map(|_| {
            let size = match cfg.size_dist {
                SizeDist::Uniform => grid_value(&mut rng, 1, GRID),
                SizeDist::Clustered => {
                    if rng.gen_bool(0.5) {
                        grid_value(&mut rng, (eps_units / 5).max(1), eps_units.max(1))
                    } else {
                        grid_value(&mut rng, 5_000, 7_000)
                    }
                }
            };
            let penalty = (cfg.problem == Problem::Bpr).then(|| match cfg.penalty_dist {
                PenaltyDist::Uniform => grid_value(&mut rng, 1, GRID),
                PenaltyDist::Low => grid_value(&mut rng, 1, 3_000),
                PenaltyDist::High => grid_value(&mut rng, 5_000, GRID),
            });
            ItemRecord { size, penalty }
        })
        .collect();
    InstanceFile {
        problem: cfg.problem,
        k: match cfg.problem {
            Problem::Bpcc => cfg.k.map(|k| k as i64),
            Problem::Bpr => None,
        },
        items,
    }
}
