//! Master LP, its simplex solver and column generation.

mod colgen;
mod master;
pub mod simplex;

pub use colgen::{
    column_generation, price_all_windows, price_configurations, windows_by_size, ColumnGenOptions,
    ColumnGenOutcome, PricedColumn, PricingOutcome, WindowTerms, VIOLATION_TOL,
};
pub use master::{
    is_integral, seed_master, solve_master, ColumnKind, DualPrices, FractionalSolution, MasterLp, XEntry, YEntry,
    ZERO_TOL,
};
