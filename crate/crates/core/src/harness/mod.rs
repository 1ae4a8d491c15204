//! Verification harness: deterministic data recipes, sector sweeps, duality
//! and semigroup checks, and report emission. The CLI crate is a thin shell
//! over this module.

pub mod config;
pub mod data;
pub mod duality;
pub mod report;
pub mod semigroup;
pub mod sweep;

pub use config::SweepConfig;
pub use report::{SweepReport, SweepRow};
pub use sweep::run_sweep;
