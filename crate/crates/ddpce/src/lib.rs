//! Data-driven polynomial chaos surrogates with ordinary, Christoffel-
//! weighted and tempered Christoffel-weighted least-squares regression.
//!
//! The pipeline: draw Monte Carlo realizations of an uncertain input vector
//! ([`sampling`]), build polynomial bases orthonormal against the empirical
//! sample measure ([`basis`]), assemble and solve weighted regressions with
//! leverage-based stability diagnostics ([`regression`]), evaluate the
//! fitted surrogate ([`surrogate`]) and compare its output distribution
//! against the Monte Carlo reference ([`metrics`]). The [`harness`] module
//! orchestrates full tempering sweeps, and [`models`] provides the
//! ground-truth functions used in the studies, including a simplified
//! priority-stack load-shedding dispatch model.

pub mod basis;
pub mod error;
pub mod harness;
mod linalg;
pub mod metrics;
pub mod models;
pub mod regression;
pub mod sampling;
pub mod surrogate;

pub use error::{Error, Result};

pub use basis::{empirical_moments, MultiIndexSet, MultivariateBasis, UnivariateBasis};
pub use harness::{emit_report, run_experiment, AlphaDirection, ExperimentConfig, ExperimentReport, ModelSelector};
pub use metrics::{percent_deviation, quantile, summarize, DeviationRow, DistributionSummary};
pub use models::{eval_dispatch, DispatchConfig, PriorityLevel, ResilienceOutcome, Storage, TestFunction};
pub use regression::{
    assemble_design, christoffel, fit, gram, sparse_fit, stability_score, weights,
    ChristoffelDiagnostics, DesignMatrix, FitResult, Scheme, SparseStop, WeightVector,
};
pub use sampling::{draw_samples, load_samples, save_samples, Dist, InputSpec, SampleSet};
pub use surrogate::{BatchPrediction, FitInfo, SurrogateModel};
