pub mod assembly;
pub mod config;
pub mod error;
pub mod generate;
pub mod instance;
pub mod lp;
pub mod pricing;
pub mod rational;
pub mod rounding;
pub mod solver;
pub mod verify;
