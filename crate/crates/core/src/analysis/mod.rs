//! False-positive bounds for Gaussian projections and the Monte Carlo
//! experiments that measure detection rates against them.

mod bound;
mod experiment;
pub mod normal;

pub use bound::{sigma_tilde, theorem2_bound, BoundReport, SigmaTilde};
pub use experiment::{
    binomial_interval, detection_rates_nondecreasing, magnitude_sweep, run_experiment, ExperimentConfig,
    ExperimentReport, FaultPlan, MatrixSource, Shape, SweepUnit,
};
