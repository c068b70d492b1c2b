//! Sweep front end for the `driftgauge` toolkit: sweep datasets as CSV or
//! JSON, plus a seeded invariant report.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod sweeps;
pub mod table;
pub mod verify;

pub use config::{ConfigError, DiffusionKind, Format, Grid, Settings};
pub use sweeps::{drift_eigs, nm_branch, nm_surface, squeezed_gauge, Axis};
pub use table::{Cell, SweepTable};
pub use verify::{Fault, SuiteReport};
