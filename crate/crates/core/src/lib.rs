//! Greedy pursuit algorithms for sparse recovery with RIP certification,
//! closed-form bound evaluation and a seeded experiment harness.

pub mod bounds;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod pursuit;
pub mod rng;
pub mod selection;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, DenseVector, SupportSet};
pub use pursuit::{Algorithm, PursuitConfig, PursuitState, PursuitTrace, SparseSignal, Status};
pub use selection::SelectionRule;
