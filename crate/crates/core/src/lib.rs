//! Sparse recovery from resampled measurements.
//!
//! The crate implements four estimators for `y = A x* + z`:
//!
//! - **JOBS**: draw `K` bootstrap (or subsample) index sets, solve all `K`
//!   reduced problems jointly under an `l1,2` row-sparsity penalty with ADMM,
//!   and average the `K` columns of the solution.
//! - **Bagging**: solve the `K` reduced LASSO problems independently and average.
//! - **Bolasso**: intersect the supports of the `K` independent LASSO solutions
//!   and refit least squares on the common support.
//! - **l1 minimization**: one LASSO on the full data.
//!
//! Around these sit numeric evaluators for RIP/block-RIP constants and the
//! recovery bounds ([`analysis`]), the distinct-sample distribution of
//! bootstrap draws ([`sampling`]), and a seeded experiment harness that writes
//! recovery-SNR sweeps to CSV ([`experiments`]).
//!
//! All indices are zero-based.

pub mod analysis;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod solver;

pub use error::{Error, Result};
pub use estimators::{Method, RecoveryResult, SensingProblem};
pub use linalg::{DenseMatrix, DenseVector, NormalizationMatrix};
pub use sampling::{IndexMultiset, SamplingPlan, Scheme};
pub use solver::{JointProblem, SolveReport, SolverConfig};
