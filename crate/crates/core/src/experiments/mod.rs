//! Truths, scaling rules and contraction-rate experiments.

pub mod harness;
pub mod scaling;
pub mod truth;

pub use harness::{
    contraction_experiment, fit_replication, log_corrected_slope, rate_fit, sample_density, write_rate_fit_csv, ExperimentConfig,
    ExperimentResult, RateFit, Replication,
};
pub use scaling::{contraction_rate, rate_balance, rate_balance_ratios, scaling_rule, BalanceCheck, PriorFamily};
pub use truth::{make_truth, Setting, SmoothTruth, TruthFormula};
