//! `(k, gamma, hbar_eff)` sweeps of the classical/quantum comparison
//! measures, with a crash-safe checkpoint and plot-ready output.

pub mod cell;
pub mod checkpoint;
pub mod emit;
pub mod error;
pub mod plan;
pub mod record;
pub mod run;

pub use cell::run_cell;
pub use emit::{emit, Format};
pub use error::{Result, SweepError};
pub use plan::{Budgets, Cell, SweepPlan};
pub use record::MeasureRecord;
pub use run::{run_sweep, RunOptions, SweepResult};
