//! Likelihood ratio test for a common `eta`, referred to a chi-square
//! distribution with `k - 1` degrees of freedom.

use crate::cat::{estimates_of, Method, TestResult};
use crate::error::{Error, Result};
use crate::estimation::{GroupSample, LogSummary};
use crate::restricted::{fit_restricted, unrestricted_loglik, DEFAULT_TOL};
use crate::special::gamma_q;

/// Negative statistics down to this value are treated as rounding and set to 0.
pub const LAMBDA_SLACK: f64 = 1e-8;

/// Upper tail of the chi-square distribution, `Q(df/2, x/2)`.
pub fn chi2_upper_tail(x: f64, df: u32) -> f64 {
    assert!(df >= 1, "chi-square needs at least one degree of freedom");
    if !(x > 0.0) {
        return 1.0;
    }
    gamma_q(0.5 * df as f64, 0.5 * x).clamp(0.0, 1.0)
}

/// `2 (l_full - l_restricted)`, clamped at zero within [`LAMBDA_SLACK`].
pub fn lr_statistic(summaries: &[LogSummary]) -> Result<f64> {
    let full = unrestricted_loglik(summaries)?;
    let restricted = fit_restricted(summaries, DEFAULT_TOL)?.loglik;
    let lambda = 2.0 * (full - restricted);
    if lambda >= 0.0 {
        Ok(lambda)
    } else if lambda >= -LAMBDA_SLACK {
        Ok(0.0)
    } else {
        Err(Error::InconsistentLikelihood(lambda))
    }
}

pub fn run_lrt(samples: &[GroupSample], alpha: f64) -> Result<TestResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    // validates k and the per-group variances
    estimates_of(samples)?;
    let summaries: Vec<LogSummary> = samples.iter().map(GroupSample::summary).collect();
    let lambda = lr_statistic(&summaries)?;
    let p_value = chi2_upper_tail(lambda, (samples.len() - 1) as u32);
    Ok(TestResult {
        method: Method::Lrt,
        statistic: lambda,
        p_value,
        critical_value: None,
        alpha,
        m: None,
        seed: None,
        reject: p_value < alpha,
    })
}
