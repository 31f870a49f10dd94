//! Optimization of measurement strengths, figure-grid sweeps and
//! paper-versus-simulation discrepancy reports.
//!
//! Grids, tables and reports are artifacts and work in `f64`; the optimizer is
//! generic.

pub mod grid;
pub mod optimize;
pub mod report;
pub mod sweep;

pub use grid::{Axis, GridSpec, Param};
pub use optimize::{golden_section_max, optimize_pr_numeric, try_golden_section_max, Objective, OptResult};
pub use report::{compare_paper_vs_sim, DiscrepancyReport, Quantity, QuantityRecord, ReportOptions, Tolerances};
pub use sweep::{sweep, Column, Table};
