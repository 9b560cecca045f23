//! Computational approach test (CAT) for equality of log-normal means.
//!
//! The observed statistic is `theta_hat` computed from the unrestricted MLEs.
//! Its null distribution is approximated by simulating `M` datasets from the
//! restricted fit, recomputing `theta` for each, and sorting the results.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{
    eta_variance, theta_from_slices, GroupEstimate, GroupSample, LogSummary, ThetaInput,
};
use crate::restricted::{fit_restricted, RestrictedFit, DEFAULT_TOL};
use crate::rng::substream;

/// Default number of replicates for a single test.
pub const DEFAULT_REPLICATES: usize = 5000;
pub const MIN_REPLICATES: usize = 100;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cat,
    Lrt,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cat => "cat",
            Method::Lrt => "lrt",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cat" => Ok(Method::Cat),
            "lrt" => Ok(Method::Lrt),
            other => Err(format!("unknown method '{other}', expected cat or lrt")),
        }
    }
}

/// Outcome of a single test.
///
/// `reject` is always `p_value < alpha`. For the CAT the critical value is
/// reported as well; the two rules can disagree when the observed statistic
/// falls between the order statistics of rank `ceil((1-alpha)M)` and the
/// next one, and the p-value rule wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: Option<f64>,
    pub alpha: f64,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub reject: bool,
}

/// Sorted replicate statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSet {
    values: Vec<f64>,
    seed: u64,
}

impl ReplicateSet {
    /// Sorts `values` ascending. NaNs are not expected and sort last.
    pub fn new(mut values: Vec<f64>, seed: u64) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values, seed }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn count_below(&self, observed: f64) -> usize {
        self.values.partition_point(|&v| v < observed)
    }

    fn count_above(&self, observed: f64) -> usize {
        self.m() - self.values.partition_point(|&v| v <= observed)
    }

    /// Fraction of replicates strictly greater than `observed`.
    pub fn pvalue_right(&self, observed: f64) -> f64 {
        if self.m() == 0 {
            return 1.0;
        }
        self.count_above(observed) as f64 / self.m() as f64
    }

    /// Fraction of replicates strictly less than `observed`.
    pub fn pvalue_left(&self, observed: f64) -> f64 {
        if self.m() == 0 {
            return 1.0;
        }
        self.count_below(observed) as f64 / self.m() as f64
    }

    /// `2 min(p1, 1 - p1)` with `p1` the left-tail fraction.
    pub fn pvalue_two_sided(&self, observed: f64) -> f64 {
        two_sided_from_left(self.pvalue_left(observed))
    }

    /// Order statistic of rank `ceil((1 - alpha) M)`, 1-indexed.
    pub fn critical_value_upper(&self, alpha: f64) -> Result<f64> {
        let rank = upper_rank(self.m(), alpha)?;
        Ok(self.values[rank - 1])
    }
}

pub fn two_sided_from_left(p1: f64) -> f64 {
    (2.0 * p1.min(1.0 - p1)).clamp(0.0, 1.0)
}

/// `ceil((1 - alpha) M)` computed as `M - floor(alpha M)` so that exact
/// products such as `0.05 * 100` are not pushed over an integer by rounding.
pub fn upper_rank(m: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let tail = (alpha * m as f64 + 1e-9).floor() as usize;
    let rank = m.saturating_sub(tail);
    if rank == 0 {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    Ok(rank)
}

pub fn pvalue_right(replicates: &ReplicateSet, observed: f64) -> f64 {
    replicates.pvalue_right(observed)
}

pub fn pvalue_left(replicates: &ReplicateSet, observed: f64) -> f64 {
    replicates.pvalue_left(observed)
}

pub fn pvalue_two_sided(replicates: &ReplicateSet, observed: f64) -> f64 {
    replicates.pvalue_two_sided(observed)
}

pub fn critical_value_upper(replicates: &ReplicateSet, alpha: f64) -> Result<f64> {
    replicates.critical_value_upper(alpha)
}

/// One null replicate of `theta`: draws `ns[i]` log-scale values from
/// `N(mu_rml[i], sigma2_rml[i])`, re-estimates each group and evaluates the
/// statistic. A replicate in which some group has zero variance is discarded
/// and redrawn from the continuation of the same stream.
pub fn simulate_replicate<R: Rng + ?Sized>(fit: &RestrictedFit, ns: &[usize], rng: &mut R) -> Result<f64> {
    let k = fit.k();
    if ns.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            got: ns.len(),
        });
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Error::TooFewObservations { n });
    }
    let sds: Vec<f64> = fit.sigma2_rml.iter().map(|s| s.sqrt()).collect();
    let mut buf = Vec::with_capacity(ns.iter().copied().max().unwrap_or(0));
    let mut etas = vec![0.0; k];
    let mut vs = vec![0.0; k];

    'redraw: for _ in 0..MAX_REDRAWS {
        for i in 0..k {
            buf.clear();
            let (mu, sd) = (fit.mu_rml[i], sds[i]);
            buf.extend((0..ns[i]).map(|_| mu + sd * rng.sample::<f64, _>(StandardNormal)));
            let s = LogSummary::from_log_values(&buf);
            if !(s.s2() > 0.0) {
                continue 'redraw;
            }
            etas[i] = s.eta_hat();
            vs[i] = eta_variance(s.s2(), s.n());
        }
        return Ok(theta_from_slices(&etas, &vs));
    }
    Err(Error::DegenerateSample)
}

/// `m` replicate statistics, replicate `l` drawn from substream `l` of `seed`.
/// Runs on the current rayon pool; the result does not depend on its size.
pub fn null_replicates(fit: &RestrictedFit, ns: &[usize], m: usize, seed: u64) -> Result<ReplicateSet> {
    let values = (0..m as u64)
        .into_par_iter()
        .map(|l| simulate_replicate(fit, ns, &mut substream(seed, l)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ReplicateSet::new(values, seed))
}

/// Everything the CAT computes, for callers that want more than the verdict.
#[derive(Debug, Clone)]
pub struct CatAnalysis {
    pub estimates: Vec<GroupEstimate>,
    pub theta_hat: f64,
    pub fit: RestrictedFit,
    pub replicates: ReplicateSet,
    pub result: TestResult,
}

pub fn estimates_of(samples: &[GroupSample]) -> Result<Vec<GroupEstimate>> {
    if samples.len() < 2 {
        return Err(Error::TooFewGroups {
            k: samples.len(),
            min: 2,
        });
    }
    samples
        .iter()
        .map(|g| GroupEstimate::from_summary(&g.summary()))
        .collect()
}

pub fn analyze_cat(samples: &[GroupSample], m: usize, seed: u64, alpha: f64) -> Result<CatAnalysis> {
    if m < MIN_REPLICATES {
        return Err(Error::MTooSmall {
            m,
            min: MIN_REPLICATES,
        });
    }
    // validate alpha before doing any work
    upper_rank(m, alpha)?;

    let estimates = estimates_of(samples)?;
    let theta_hat = crate::estimation::theta_statistic(&ThetaInput::from_estimates(&estimates)?);

    let summaries: Vec<LogSummary> = samples.iter().map(GroupSample::summary).collect();
    let fit = fit_restricted(&summaries, DEFAULT_TOL)?;
    let ns: Vec<usize> = samples.iter().map(GroupSample::n).collect();
    let replicates = null_replicates(&fit, &ns, m, seed)?;

    let p_value = replicates.pvalue_right(theta_hat);
    let result = TestResult {
        method: Method::Cat,
        statistic: theta_hat,
        p_value,
        critical_value: Some(replicates.critical_value_upper(alpha)?),
        alpha,
        m: Some(m),
        seed: Some(seed),
        reject: p_value < alpha,
    };
    Ok(CatAnalysis {
        estimates,
        theta_hat,
        fit,
        replicates,
        result,
    })
}

/// Runs the CAT with `m` replicates drawn from `seed`.
pub fn run_cat(samples: &[GroupSample], m: usize, seed: u64, alpha: f64) -> Result<TestResult> {
    analyze_cat(samples, m, seed, alpha).map(|a| a.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::make_group_sample;
    use crate::restricted::fit_restricted;
    use proptest::prelude::*;

    fn set(v: &[f64]) -> ReplicateSet {
        ReplicateSet::new(v.to_vec(), 0)
    }

    #[test]
    fn right_tail() {
        let r = set(&[4.0, 2.0, 3.0, 1.0]);
        assert_eq!(r.values(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.pvalue_right(2.5), 0.5);
        assert_eq!(r.pvalue_right(9.0), 0.0);
        assert_eq!(r.pvalue_right(-9.0), 1.0);
    }

    #[test]
    fn left_tail_and_ties() {
        let r = set(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.pvalue_left(2.5), 0.5);
        assert_eq!(r.pvalue_left(0.0), 0.0);
        assert_eq!(r.pvalue_left(2.0), 0.25);
        assert_eq!(r.pvalue_right(2.0), 0.5);
    }

    #[test]
    fn two_sided_rule() {
        assert_eq!(two_sided_from_left(0.5), 1.0);
        assert!((two_sided_from_left(0.02) - 0.04).abs() < 1e-15);
        assert!((two_sided_from_left(0.99) - 0.02).abs() < 1e-15);
        let r = set(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.pvalue_two_sided(2.5), 1.0);
        assert_eq!(r.pvalue_two_sided(0.0), 0.0);
    }

    #[test]
    fn critical_value_ranks() {
        let r = set(&(1..=100).map(f64::from).collect::<Vec<_>>());
        assert_eq!(r.critical_value_upper(0.05).unwrap(), 95.0);
        assert_eq!(r.critical_value_upper(0.01).unwrap(), 99.0);
        assert_eq!(r.critical_value_upper(0.10).unwrap(), 90.0);
        let r = set(&(1..=10).map(f64::from).collect::<Vec<_>>());
        assert_eq!(r.critical_value_upper(0.05).unwrap(), 10.0);
        assert_eq!(r.critical_value_upper(1.5), Err(Error::AlphaOutOfRange(1.5)));
        assert_eq!(r.critical_value_upper(0.0), Err(Error::AlphaOutOfRange(0.0)));
        assert_eq!(set(&[1.0]).critical_value_upper(0.99).unwrap(), 1.0);
        assert!(set(&[]).critical_value_upper(0.5).is_err());
    }

    #[test]
    fn p_rule_implies_critical_value_rule() {
        // ranks 95 and 96 are 95.0 and 96.0; an observation strictly between
        // them exceeds the critical value yet has p = 0.05, not < 0.05
        let r = set(&(1..=100).map(f64::from).collect::<Vec<_>>());
        let cv = r.critical_value_upper(0.05).unwrap();
        let obs = 95.5;
        assert!(obs > cv);
        assert_eq!(r.pvalue_right(obs), 0.05);
        let obs = 96.5;
        assert!(r.pvalue_right(obs) < 0.05 && obs > cv);
    }

    fn near_degenerate_fit(k: usize, s2: f64) -> RestrictedFit {
        RestrictedFit {
            eta_rml: 0.0,
            sigma2_rml: vec![s2; k],
            mu_rml: vec![-s2 / 2.0; k],
            loglik: 0.0,
            iterations: 0,
            converged: true,
        }
    }

    #[test]
    fn replicate_is_deterministic() {
        let fit = near_degenerate_fit(3, 1.0);
        let a = simulate_replicate(&fit, &[5, 6, 7], &mut substream(9, 1)).unwrap();
        let b = simulate_replicate(&fit, &[5, 6, 7], &mut substream(9, 1)).unwrap();
        let c = simulate_replicate(&fit, &[5, 6, 7], &mut substream(9, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(simulate_replicate(&fit, &[5, 6], &mut substream(9, 1)).is_err());
        assert!(simulate_replicate(&fit, &[5, 1, 3], &mut substream(9, 1)).is_err());
    }

    #[test]
    fn replicates_stay_scale_free_as_variance_vanishes() {
        // theta standardizes by v_hat, so shrinking every variance does not
        // collapse the replicate distribution toward zero
        let mean_theta = |s2: f64| {
            let fit = near_degenerate_fit(2, s2);
            (0..100)
                .map(|l| simulate_replicate(&fit, &[10, 10], &mut substream(5, l)).unwrap())
                .sum::<f64>()
                / 100.0
        };
        let small = mean_theta(1e-6);
        let tiny = mean_theta(1e-10);
        assert!(tiny > 0.1 && tiny < 5.0, "tiny {tiny}");
        assert!((small - tiny).abs() < 0.01 * tiny, "{small} vs {tiny}");
    }

    #[test]
    fn replicate_null_mean_is_one_df() {
        // k = 2, n large: theta is asymptotically chi-square with 1 df
        let fit = near_degenerate_fit(2, 1.0);
        let n = 500;
        let reps = 10_000;
        let mean = (0..reps as u64)
            .into_par_iter()
            .map(|l| simulate_replicate(&fit, &[n, n], &mut substream(77, l)).unwrap())
            .sum::<f64>()
            / reps as f64;
        assert!((0.9..=1.1).contains(&mean), "mean {mean}");
    }

    #[test]
    fn copies_give_p_one() {
        let g = make_group_sample(&[1.2, 3.4, 0.5, 2.2, 7.1]).unwrap();
        let res = run_cat(&[g.clone(), g], 200, 11, 0.05).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert!(!res.reject);
        assert_eq!(res.m, Some(200));
    }

    #[test]
    fn run_cat_validation() {
        let a = make_group_sample(&[1.2, 3.4, 0.5]).unwrap();
        let b = make_group_sample(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(
            run_cat(&[a.clone(), a.clone()], 99, 1, 0.05),
            Err(Error::MTooSmall { m: 99, min: 100 })
        );
        assert_eq!(
            run_cat(std::slice::from_ref(&a), 100, 1, 0.05),
            Err(Error::TooFewGroups { k: 1, min: 2 })
        );
        assert_eq!(
            run_cat(&[a.clone(), b], 100, 1, 0.05),
            Err(Error::DegenerateSample)
        );
        assert_eq!(
            run_cat(&[a.clone(), a], 100, 1, 1.0),
            Err(Error::AlphaOutOfRange(1.0))
        );
    }

    #[test]
    fn separated_groups_reject() {
        let a = make_group_sample(&[1.0, 1.3, 0.8, 1.1, 0.9, 1.2, 1.05, 0.95]).unwrap();
        let b = make_group_sample(&[9.0, 11.0, 10.5, 8.7, 12.0, 9.9, 10.1, 10.8]).unwrap();
        let an = analyze_cat(&[a, b], 1000, 3, 0.05).unwrap();
        assert!(an.result.reject);
        assert_eq!(an.result.p_value, 0.0);
        assert!(an.theta_hat > an.result.critical_value.unwrap());
        assert_eq!(an.replicates.m(), 1000);
        assert_eq!(
            an.fit,
            fit_restricted(
                &[an.estimates[0], an.estimates[1]]
                    .map(|e| { LogSummary::new(e.n, e.mu_hat, e.sigma2_hat).unwrap() }),
                DEFAULT_TOL
            )
            .unwrap()
        );
    }

    proptest! {
        #[test]
        fn tails_partition(values in prop::collection::vec(0i32..6, 1..30), obs in -1i32..7) {
            let r = set(&values.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let o = obs as f64;
            let ties = values.iter().filter(|&&v| v == obs).count() as f64 / values.len() as f64;
            let total = r.pvalue_left(o) + r.pvalue_right(o) + ties;
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn monotone_rules(values in prop::collection::vec(-50.0f64..50.0, 1..60), a in -60.0f64..60.0, b in -60.0f64..60.0) {
            let r = set(&values);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(r.pvalue_right(hi) <= r.pvalue_right(lo));
            if upper_rank(r.m(), 0.3).is_ok() && upper_rank(r.m(), 0.1).is_ok() {
                prop_assert!(r.critical_value_upper(0.1).unwrap() >= r.critical_value_upper(0.3).unwrap());
            }
        }

        #[test]
        fn p_reject_implies_cv_reject(values in prop::collection::vec(-50.0f64..50.0, 20..200), obs in -60.0f64..60.0) {
            let r = set(&values);
            prop_assume!(!values.contains(&obs));
            let alpha = 0.05;
            let cv = r.critical_value_upper(alpha).unwrap();
            if r.pvalue_right(obs) < alpha {
                prop_assert!(obs > cv);
            }
            if obs > cv && !(r.pvalue_right(obs) < alpha) {
                // the only disagreement: obs between ranks r and r+1
                let rank = upper_rank(r.m(), alpha).unwrap();
                prop_assert!(rank < r.m());
                prop_assert!(obs < r.values()[rank]);
            }
        }
    }
}
