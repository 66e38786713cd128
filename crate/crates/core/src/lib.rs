//! Verification of floating-point matrix products.
//!
//! The crate checks a claimed product `C = A × B` without recomputing it.
//! Every randomized verifier projects both sides onto a test vector and
//! compares the projections component by component under a round-off
//! tolerance:
//!
//! * [`verifiers::gvfa_verify`] projects onto standard Gaussian vectors,
//! * [`verifiers::freivalds_verify`] onto fair 0/1 vectors,
//! * [`verifiers::poly_verify`] onto powers `(1, r, r², …)`,
//! * [`verifiers::gvfa_rowcol_verify`] projects from both sides and localizes faults,
//! * [`verifiers::huang_abraham_verify`] is the deterministic checksum scheme,
//! * [`verifiers::chain_verify`] handles products of several matrices.
//!
//! [`faults`] injects corruption into a product, and [`analysis`] evaluates
//! the Gaussian false-positive bound and runs Monte Carlo experiments that
//! measure empirical detection rates against it.

// Negated float comparisons are how NaN is made to fail checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod faults;
pub mod fixtures;
pub mod linalg;
pub mod matrix;
pub mod random;
pub mod tolerance;
pub mod verifiers;

pub use analysis::{
    magnitude_sweep, run_experiment, sigma_tilde, theorem2_bound, BoundReport, ExperimentConfig, ExperimentReport,
    FaultPlan, MatrixSource, Shape, SweepUnit,
};
pub use error::{Error, Result};
pub use faults::{apply_fault, delta_of, FaultSpec, Injection};
pub use linalg::{matvec, oracle_multiply, subtract, vecmat, AccumulationMode};
pub use matrix::DenseMatrix;
pub use random::{Family, ProjectionVector, SeededStream, DEFAULT_SEED};
pub use tolerance::{component_tolerances, ToleranceKind, TolerancePolicy};
pub use verifiers::{verify, ChecksumReport, Localization, Method, OpCount, Verdict, VerifyOptions};
