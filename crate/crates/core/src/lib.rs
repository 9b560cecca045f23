//! Tests for equality of the means of several log-normal populations.
//!
//! Observations `X_ij > 0` of group `i` are modelled as
//! `log X_ij ~ N(mu_i, sigma_i^2)`, so the population mean is
//! `exp(eta_i)` with `eta_i = mu_i + sigma_i^2 / 2`. The hypothesis
//! `eta_1 = ... = eta_k` is tested by
//!
//! * the computational approach test ([`run_cat`]), a parametric resampling
//!   test built on the restricted maximum likelihood fit ([`fit_restricted`]);
//! * the likelihood ratio test ([`run_lrt`]) with its chi-square reference.
//!
//! [`run_study`] estimates the size and power of both by simulation.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cat;
pub mod error;
pub mod estimation;
pub mod lrt;
pub mod optimize;
pub mod restricted;
pub mod rng;
pub mod sim;
pub mod special;

pub use cat::{
    analyze_cat, critical_value_upper, null_replicates, pvalue_left, pvalue_right, pvalue_two_sided, run_cat,
    simulate_replicate, CatAnalysis, Method, ReplicateSet, TestResult, DEFAULT_REPLICATES,
};
pub use error::{Error, Result};
pub use estimation::{
    estimate_group, make_group_sample, summarize, theta_statistic, theta_statistic_expanded, GroupEstimate,
    GroupSample, LogSummary, ThetaInput,
};
pub use lrt::{chi2_upper_tail, run_lrt};
pub use restricted::{
    fit_restricted, fit_restricted_with, full_loglik, profile_negloglik, profile_sigma2, unrestricted_loglik,
    FitOptions, RestrictedFit,
};
pub use sim::{draw_experiment, run_study, MethodSummary, Scenario, StudyResult};
