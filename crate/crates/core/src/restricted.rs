//! Maximum likelihood under the null hypothesis that every group shares the
//! same `eta = mu_i + sigma_i^2 / 2`.
//!
//! Writing `mu_i = eta - s_i / 2`, the per-group log-likelihood is maximized
//! over `s_i` in closed form: the stationarity condition is the quadratic
//! `s^2/4 + s - (S_i^2 + (ybar_i - eta)^2) = 0`, whose positive root is
//! [`profile_sigma2`]. What remains is a smooth one-dimensional problem in
//! `eta`, solved with a bracketed Brent search.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimation::LogSummary;
use crate::optimize::{brent_minimize, widen_bracket, BracketError};

/// Default absolute tolerance on the width of the final `eta` bracket.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap of the `eta` search.
pub const DEFAULT_MAX_ITER: usize = 200;
const MAX_WIDENINGS: usize = 60;

/// Restricted MLEs under a common `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedFit {
    pub eta_rml: f64,
    pub sigma2_rml: Vec<f64>,
    pub mu_rml: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RestrictedFit {
    pub fn k(&self) -> usize {
        self.sigma2_rml.len()
    }
}

/// Normal log-likelihood of one group on the log scale, constant included.
pub(crate) fn group_loglik(summary: &LogSummary, mu: f64, sigma2: f64) -> f64 {
    let n = summary.n() as f64;
    let d = summary.ybar() - mu;
    -0.5 * n * (2.0 * PI * sigma2).ln() - n * (summary.s2() + d * d) / (2.0 * sigma2)
}

/// Log-likelihood of all groups at the given means and variances.
pub fn full_loglik(summaries: &[LogSummary], mus: &[f64], sigma2s: &[f64]) -> Result<f64> {
    let k = summaries.len();
    for len in [mus.len(), sigma2s.len()] {
        if len != k {
            return Err(Error::LengthMismatch {
                expected: k,
                got: len,
            });
        }
    }
    if let Some(&s) = sigma2s.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        return Err(Error::NonPositiveVariance(s));
    }
    Ok(summaries
        .iter()
        .zip(mus)
        .zip(sigma2s)
        .map(|((g, &mu), &s2)| group_loglik(g, mu, s2))
        .sum())
}

/// Maximized log-likelihood of each group without restriction, summed.
/// Requires every `s2 > 0`.
pub fn unrestricted_loglik(summaries: &[LogSummary]) -> Result<f64> {
    if summaries.iter().any(|g| g.s2() <= 0.0) {
        return Err(Error::DegenerateSample);
    }
    let mus: Vec<f64> = summaries.iter().map(LogSummary::ybar).collect();
    let s2s: Vec<f64> = summaries.iter().map(LogSummary::s2).collect();
    full_loglik(summaries, &mus, &s2s)
}

/// Variance maximizing the group's likelihood when `mu = eta - sigma^2/2`.
pub fn profile_sigma2(eta: f64, summary: &LogSummary) -> Result<f64> {
    let d = summary.ybar() - eta;
    let q = summary.s2() + d * d;
    if !(q > 0.0) {
        return Err(Error::DegenerateProfile);
    }
    // 2(sqrt(1+q) - 1) without the cancellation for small q
    Ok(2.0 * q / ((1.0 + q).sqrt() + 1.0))
}

fn profile_term(eta: f64, summary: &LogSummary) -> Result<f64> {
    let s = profile_sigma2(eta, summary)?;
    Ok(group_loglik(summary, eta - 0.5 * s, s))
}

/// Negative profile log-likelihood of the common `eta`.
pub fn profile_negloglik(eta: f64, summaries: &[LogSummary]) -> Result<f64> {
    let mut total = 0.0;
    for g in summaries {
        total += profile_term(eta, g)?;
    }
    Ok(-total)
}

/// Options for [`fit_restricted_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

pub fn fit_restricted(summaries: &[LogSummary], tol: f64) -> Result<RestrictedFit> {
    fit_restricted_with(
        summaries,
        FitOptions {
            tol,
            ..FitOptions::default()
        },
    )
}

/// Restricted MLE of `(eta, sigma_1^2, ..., sigma_k^2)`.
///
/// The search starts on `[min ybar_i - 1, max eta_hat_i + 1]`, which contains
/// the optimum since each group's profile term peaks at its own `eta_hat_i`,
/// and is widened if an end still slopes downhill outward.
pub fn fit_restricted_with(summaries: &[LogSummary], opts: FitOptions) -> Result<RestrictedFit> {
    if summaries.is_empty() {
        return Err(Error::TooFewGroups { k: 0, min: 1 });
    }
    if summaries.iter().any(|g| g.s2() <= 0.0) {
        return Err(Error::DegenerateSample);
    }
    if !(opts.tol > 0.0) {
        return Err(Error::NoConvergence {
            reason: format!("tolerance must be positive, got {}", opts.tol),
            iterations: 0,
        });
    }

    // s2 > 0 everywhere, so the profile is defined for every eta
    let objective = |eta: f64| profile_negloglik(eta, summaries).unwrap_or(f64::INFINITY);

    let lo = summaries
        .iter()
        .map(LogSummary::ybar)
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let hi = summaries
        .iter()
        .map(LogSummary::eta_hat)
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    let (lo, hi) = widen_bracket(objective, lo, hi, MAX_WIDENINGS).map_err(|e| {
        let reason = match e {
            BracketError::TwoDescentDirections => "profile likelihood rises at both ends of the bracket",
            BracketError::Exhausted => "could not bracket the profile maximum",
        };
        Error::NoConvergence {
            reason: reason.to_string(),
            iterations: 0,
        }
    })?;

    let best = brent_minimize(objective, lo, hi, opts.tol, opts.max_iter);
    if !best.converged {
        return Err(Error::NoConvergence {
            reason: format!(
                "eta bracket still wider than {} after {} iterations",
                opts.tol, best.iterations
            ),
            iterations: best.iterations,
        });
    }

    let eta = best.x;
    let sigma2_rml = summaries
        .iter()
        .map(|g| profile_sigma2(eta, g))
        .collect::<Result<Vec<_>>>()?;
    let mu_rml = sigma2_rml.iter().map(|s| eta - 0.5 * s).collect();
    Ok(RestrictedFit {
        eta_rml: eta,
        sigma2_rml,
        mu_rml,
        loglik: -best.fx,
        iterations: best.iterations,
        converged: true,
    })
}
