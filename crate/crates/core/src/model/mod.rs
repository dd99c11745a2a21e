//! Parametric systems, their affine forms and the problem file format.
pub mod expr;
pub mod problem;
pub mod system;

pub use expr::{parse_expr, ParamExpr};
pub use problem::{export_problem, parse_problem, ProblemFile};
pub use system::{complex_to_real, AffineLinearSystem, IntervalAffineSystem, Linearity, ParametricSystem};
