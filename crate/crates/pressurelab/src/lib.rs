//! Thermodynamic formalism for subshifts of finite type and hyperbolic rational
//! maps: pressure, equilibrium statistics, Hausdorff dimension by Bowen's
//! equation, and the pressure semi-norm on spaces of quasi-Blaschke maps.

pub mod continuation;
pub mod error;
pub mod maps;
pub mod metric;
pub mod parallel;
pub mod poly;
pub mod report;
pub mod symbolic;
pub mod thermo;

pub use error::{Error, Result};
