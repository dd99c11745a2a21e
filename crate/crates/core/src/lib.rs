//! Enclosures of the solution sets of interval parametric linear systems.

pub mod error;
pub mod examples;
pub mod interval;
pub mod model;
pub mod oracle;
pub mod precond;
pub mod raf;
pub mod solve;
pub mod realmat;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalMatrix, IntervalVector, Rounding};
pub use realmat::Matrix;
