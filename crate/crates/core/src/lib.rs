//! Guaranteed bounds on the optimal value of a linear program whose
//! constraint matrix moves as `A2 + λD` over an interval of λ.
//!
//! Upper bounds come from robust counterparts (constant, affine and
//! envelope variants), lower bounds from Lagrangian relaxations; either
//! family produces the opposite side through the LP dual. Bounds can be
//! refined by interval bisection ([`refine`]) and scored against dense
//! sampling ([`bench`]).

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod bound;
pub mod exec;
pub mod io;
pub mod lagrangian;
pub mod matrix;
pub mod methods;
pub mod model;
pub mod refine;
pub mod reuse;
pub mod robust;
pub mod simplex;
pub mod toys;
pub mod truth;

pub use bound::{BoundFunction, Provenance, Segment, Side};
pub use exec::Execution;
pub use matrix::Matrix;
pub use methods::{compute_bound, BoundContext, Method, MethodError};
pub use model::{LambdaInterval, LinearProgram, ModelError, ParametricLp, VarBound};
pub use simplex::{solve, SimplexOutcome, Status};
pub use truth::TruthOracle;
