//! Generalization-bound machinery for multi-task learning on multi-graph
//! dependent data.
//!
//! * [`graphdep`]: dependency graphs, fractional covers, fractional chromatic numbers.
//! * [`concentration`]: Bennett, Bernstein and Talagrand tail bounds.
//! * [`mcverify`]: dependent-data generators and Monte Carlo checks of those bounds.
//! * [`lfrc`]: local fractional Rademacher complexity of linear classes, sub-root fixed points.
//! * [`bounds`]: spectra, closed-form `r*` bounds and excess-risk assemblies.
//! * [`macroauc`]: the multi-label Macro-AUC pipeline and bound reports.

pub mod bounds;
pub mod concentration;
pub mod error;
pub mod exec;
pub mod graphdep;
pub mod lfrc;
pub mod macroauc;
pub mod mcverify;
pub mod rng;

pub use error::{Error, Result};
pub use exec::Execution;
