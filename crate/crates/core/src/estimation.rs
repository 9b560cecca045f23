//! Per-group log-scale summaries, maximum likelihood estimates and the
//! weighted sum-of-squares statistic used by the computational approach test.
//!
//! Everything here is closed form. A group of positive observations `X_j`
//! is modelled as `log X_j ~ N(mu, sigma^2)`; the quantity of interest is
//! the log of the population mean, `eta = mu + sigma^2 / 2`.

use crate::error::{Error, Result};

/// Raw positive observations of one population together with their logs.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSample {
    observations: Vec<f64>,
    log_values: Vec<f64>,
}

impl GroupSample {
    /// Validates `raw` and takes logs. Every value must be positive and
    /// finite and there must be at least two of them.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::TooFewObservations { n: raw.len() });
        }
        if let Some((index, &value)) = raw
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x > 0.0))
        {
            return Err(Error::NonPositiveObservation { index, value });
        }
        let log_values = raw.iter().map(|x| x.ln()).collect();
        Ok(Self {
            observations: raw,
            log_values,
        })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn n(&self) -> usize {
        self.observations.len()
    }

    pub fn summary(&self) -> LogSummary {
        LogSummary::from_log_values(&self.log_values)
    }
}

/// Builds a [`GroupSample`] from raw observations on the original scale.
pub fn make_group_sample(raw: &[f64]) -> Result<GroupSample> {
    GroupSample::new(raw.to_vec())
}

/// Sufficient statistics of one group on the log scale: size, mean and the
/// maximum likelihood variance (divisor `n`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSummary {
    n: usize,
    ybar: f64,
    s2: f64,
}

impl LogSummary {
    pub fn new(n: usize, ybar: f64, s2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewObservations { n });
        }
        if !ybar.is_finite() {
            return Err(Error::NonPositiveObservation {
                index: 0,
                value: ybar,
            });
        }
        if !(s2.is_finite() && s2 >= 0.0) {
            return Err(Error::NonPositiveVariance(s2));
        }
        Ok(Self { n, ybar, s2 })
    }

    /// Two-pass mean and variance; a constant sample gets exactly `s2 = 0`.
    /// Panics on an empty slice.
    pub fn from_log_values(ys: &[f64]) -> Self {
        assert!(!ys.is_empty(), "summary of an empty sample");
        let n = ys.len();
        if ys.iter().all(|&y| y == ys[0]) {
            return Self {
                n,
                ybar: ys[0],
                s2: 0.0,
            };
        }
        let nf = n as f64;
        let ybar = ys.iter().sum::<f64>() / nf;
        let s2 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum::<f64>() / nf;
        Self { n, ybar, s2 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ybar(&self) -> f64 {
        self.ybar
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    /// `eta_hat = ybar + s2/2`, defined even when `s2 == 0`.
    pub fn eta_hat(&self) -> f64 {
        self.ybar + 0.5 * self.s2
    }
}

pub fn summarize(sample: &GroupSample) -> LogSummary {
    sample.summary()
}

/// Unrestricted MLEs of one group and the plug-in asymptotic variance of
/// `eta_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupEstimate {
    pub n: usize,
    pub mu_hat: f64,
    pub sigma2_hat: f64,
    pub eta_hat: f64,
    pub v_hat: f64,
}

impl GroupEstimate {
    pub fn from_summary(summary: &LogSummary) -> Result<Self> {
        let s2 = summary.s2();
        if s2 <= 0.0 {
            return Err(Error::DegenerateSample);
        }
        let n = summary.n();
        Ok(Self {
            n,
            mu_hat: summary.ybar(),
            sigma2_hat: s2,
            eta_hat: summary.eta_hat(),
            v_hat: eta_variance(s2, n),
        })
    }

    /// Estimated population mean on the original scale, `exp(eta_hat)`.
    pub fn phi_hat(&self) -> f64 {
        self.eta_hat.exp()
    }
}

pub fn estimate_group(summary: &LogSummary) -> Result<GroupEstimate> {
    GroupEstimate::from_summary(summary)
}

/// `sigma2/n + (n-1) sigma2^2 / (2 n^2)`, the large-sample variance of
/// `eta_hat` for a group of size `n`.
pub fn eta_variance(sigma2: f64, n: usize) -> f64 {
    let nf = n as f64;
    sigma2 / nf + (nf - 1.0) * sigma2 * sigma2 / (2.0 * nf * nf)
}

/// Group-wise `eta` values and their variances, the input of
/// [`theta_statistic`].
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaInput {
    etas: Vec<f64>,
    vs: Vec<f64>,
}

impl ThetaInput {
    pub fn new(etas: Vec<f64>, vs: Vec<f64>) -> Result<Self> {
        if etas.len() < 2 {
            return Err(Error::TooFewGroups {
                k: etas.len(),
                min: 2,
            });
        }
        if vs.len() != etas.len() {
            return Err(Error::LengthMismatch {
                expected: etas.len(),
                got: vs.len(),
            });
        }
        if let Some(&v) = vs.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NonPositiveVariance(v));
        }
        Ok(Self { etas, vs })
    }

    pub fn from_estimates(estimates: &[GroupEstimate]) -> Result<Self> {
        Self::new(
            estimates.iter().map(|e| e.eta_hat).collect(),
            estimates.iter().map(|e| e.v_hat).collect(),
        )
    }

    pub fn k(&self) -> usize {
        self.etas.len()
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn vs(&self) -> &[f64] {
        &self.vs
    }

    /// Precision-weighted mean of the etas.
    pub fn weighted_mean(&self) -> f64 {
        weighted_mean(&self.etas, &self.vs)
    }
}

fn weighted_mean(etas: &[f64], vs: &[f64]) -> f64 {
    let (num, den) = etas
        .iter()
        .zip(vs)
        .fold((0.0, 0.0), |(num, den), (e, v)| (num + e / v, den + 1.0 / v));
    num / den
}

/// `sum_i (eta_i - eta_bar)^2 / v_i` with `eta_bar` the precision-weighted
/// mean. Exactly zero when all etas are bitwise equal.
pub fn theta_statistic(input: &ThetaInput) -> f64 {
    theta_from_slices(&input.etas, &input.vs)
}

/// The expanded form `sum eta^2/v - (sum eta/v)^2 / sum 1/v`. Algebraically
/// equal to [`theta_statistic`] but subject to cancellation; kept as a
/// cross-check.
pub fn theta_statistic_expanded(input: &ThetaInput) -> f64 {
    let (a, b, c) = input
        .etas
        .iter()
        .zip(&input.vs)
        .fold((0.0, 0.0, 0.0), |(a, b, c), (e, v)| {
            (a + e * e / v, b + e / v, c + 1.0 / v)
        });
    a - b * b / c
}

pub(crate) fn theta_from_slices(etas: &[f64], vs: &[f64]) -> f64 {
    if etas.windows(2).all(|w| w[0] == w[1]) {
        return 0.0;
    }
    let eta_bar = weighted_mean(etas, vs);
    etas.iter()
        .zip(vs)
        .map(|(e, v)| (e - eta_bar) * (e - eta_bar) / v)
        .sum()
}
