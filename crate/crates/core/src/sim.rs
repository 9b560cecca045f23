//! Monte Carlo estimation of the size and power of the tests.
//!
//! A study runs `reps` independent experiments. Experiment `e` draws its data
//! from substream 0 of `substream_seed(seed, e)` and seeds its CAT replicates
//! with substream 1 of the same, so results do not depend on scheduling.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cat::{run_cat, Method, MIN_REPLICATES};
use crate::error::{Error, Result};
use crate::estimation::GroupSample;
use crate::lrt::run_lrt;
use crate::rng::{substream, substream_seed};

pub const DEFAULT_REPS: usize = 2000;
pub const DEFAULT_STUDY_REPLICATES: usize = 1000;
pub const MIN_REPS: usize = 100;
/// Largest tolerated fraction of failed experiments per method.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
const NULL_TOL: f64 = 1e-12;

fn default_reps() -> usize {
    DEFAULT_REPS
}

fn default_m() -> usize {
    DEFAULT_STUDY_REPLICATES
}

fn default_alpha() -> f64 {
    0.05
}

fn default_methods() -> Vec<Method> {
    vec![Method::Cat, Method::Lrt]
}

/// Configuration of one simulation study. Deserializes from JSON with
/// `reps`, `m`, `alpha` and `methods` optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub k: usize,
    pub ns: Vec<usize>,
    pub mus: Vec<f64>,
    pub sigma2s: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

impl Scenario {
    /// Scenario whose true etas all equal `eta`: `mu_i = eta - sigma2_i / 2`.
    pub fn null(ns: Vec<usize>, sigma2s: Vec<f64>, eta: f64, seed: u64) -> Self {
        let mus = sigma2s.iter().map(|s| eta - s / 2.0).collect();
        Self {
            id: None,
            k: ns.len(),
            ns,
            mus,
            sigma2s,
            alpha: default_alpha(),
            reps: DEFAULT_REPS,
            m: DEFAULT_STUDY_REPLICATES,
            seed,
            methods: default_methods(),
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        self.mus
            .iter()
            .zip(&self.sigma2s)
            .map(|(m, s)| m + s / 2.0)
            .collect()
    }

    /// True when every `eta_i` agrees to within 1e-12 (relative to the
    /// magnitude of the etas, floored at 1).
    pub fn is_null(&self) -> bool {
        let etas = self.etas();
        let lo = etas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = etas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= NULL_TOL * lo.abs().max(hi.abs()).max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.k < 2 {
            return bad(format!("k must be at least 2, got {}", self.k));
        }
        for (name, len) in [
            ("ns", self.ns.len()),
            ("mus", self.mus.len()),
            ("sigma2s", self.sigma2s.len()),
        ] {
            if len != self.k {
                return bad(format!("{name} has {len} entries, expected k = {}", self.k));
            }
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < 2) {
            return bad(format!("every group needs n >= 2, got {n}"));
        }
        if let Some(m) = self.mus.iter().find(|m| !m.is_finite()) {
            return bad(format!("mus must be finite, got {m}"));
        }
        if let Some(s) = self.sigma2s.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return bad(format!("sigma2s must be positive, got {s}"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.reps < MIN_REPS {
            return bad(format!("reps must be at least {MIN_REPS}, got {}", self.reps));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".to_string());
        }
        if self.methods.contains(&Method::Cat) && self.m < MIN_REPLICATES {
            return bad(format!("m must be at least {MIN_REPLICATES}, got {}", self.m));
        }
        Ok(())
    }

    fn distinct_methods(&self) -> Vec<Method> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        methods
    }
}

/// One experiment's data: group `i` holds `ns[i]` values `exp(z)`,
/// `z ~ N(mus[i], sigma2s[i])`.
pub fn draw_experiment<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Vec<GroupSample>> {
    scenario
        .ns
        .iter()
        .zip(&scenario.mus)
        .zip(&scenario.sigma2s)
        .map(|((&n, &mu), &s2)| {
            let sd = s2.sqrt();
            let raw = (0..n)
                .map(|_| (mu + sd * rng.sample::<f64, _>(StandardNormal)).exp())
                .collect();
            GroupSample::new(raw)
        })
        .collect()
}

/// Aggregate outcome of one method over a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Experiments that produced a p-value.
    pub experiments: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub mc_std_error: f64,
    pub mean_p_value: f64,
    pub failures: usize,
    /// Time spent in this method, summed over experiments.
    pub wall_time_s: f64,
    /// p-values in experiment order.
    #[serde(skip)]
    pub p_values: Vec<f64>,
}

impl MethodSummary {
    /// Rejection rate the same study would have at another level.
    pub fn rejection_rate_at(&self, alpha: f64) -> f64 {
        let hits = self.p_values.iter().filter(|&&p| p < alpha).count();
        hits as f64 / self.p_values.len().max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub scenario_id: String,
    pub scenario: Scenario,
    pub is_null: bool,
    pub methods: Vec<MethodSummary>,
}

impl StudyResult {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    pub fn csv_rows(&self) -> Vec<CsvRow> {
        let s = &self.scenario;
        self.methods
            .iter()
            .map(|m| CsvRow {
                scenario_id: self.scenario_id.clone(),
                method: m.method,
                k: s.k,
                ns: s.ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";"),
                alpha: s.alpha,
                reps: s.reps,
                m: (m.method == Method::Cat).then_some(s.m),
                seed: s.seed,
                is_null: self.is_null,
                rejection_rate: m.rejection_rate,
                mc_std_error: m.mc_std_error,
                mean_p_value: m.mean_p_value,
                failures: m.failures,
                wall_time_s: m.wall_time_s,
            })
            .collect()
    }
}

/// One line of the study CSV. Field order is the column order; `ns` is
/// `;`-separated and `m` is empty for the LRT.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scenario_id: String,
    pub method: Method,
    pub k: usize,
    pub ns: String,
    pub alpha: f64,
    pub reps: usize,
    pub m: Option<usize>,
    pub seed: u64,
    pub is_null: bool,
    pub rejection_rate: f64,
    pub mc_std_error: f64,
    pub mean_p_value: f64,
    pub failures: usize,
    pub wall_time_s: f64,
}

pub const CSV_COLUMNS: [&str; 14] = [
    "scenario_id",
    "method",
    "k",
    "ns",
    "alpha",
    "reps",
    "m",
    "seed",
    "is_null",
    "rejection_rate",
    "mc_std_error",
    "mean_p_value",
    "failures",
    "wall_time_s",
];

type Outcome = (Result<f64>, Duration);

fn run_experiment(scenario: &Scenario, methods: &[Method], e: u64) -> Vec<Outcome> {
    let base = substream_seed(scenario.seed, e);
    let samples = draw_experiment(scenario, &mut substream(base, 0));
    methods
        .iter()
        .map(|method| {
            let start = Instant::now();
            let p = samples.as_ref().map_err(Clone::clone).and_then(|g| match method {
                Method::Cat => run_cat(g, scenario.m, substream_seed(base, 1), scenario.alpha),
                Method::Lrt => run_lrt(g, scenario.alpha),
            });
            (p.map(|r| r.p_value), start.elapsed())
        })
        .collect()
}

/// Runs the study on the current rayon pool.
pub fn run_study(scenario: &Scenario) -> Result<StudyResult> {
    run_study_with_id(scenario, scenario.id.clone().unwrap_or_else(|| "0".to_string()))
}

pub fn run_study_with_id(scenario: &Scenario, scenario_id: String) -> Result<StudyResult> {
    scenario.validate()?;
    let methods = scenario.distinct_methods();
    let outcomes: Vec<Vec<Outcome>> = (0..scenario.reps as u64)
        .into_par_iter()
        .map(|e| run_experiment(scenario, &methods, e))
        .collect();

    let mut summaries = Vec::with_capacity(methods.len());
    for (j, &method) in methods.iter().enumerate() {
        let mut p_values = Vec::with_capacity(scenario.reps);
        let mut failures = 0;
        let mut time = Duration::ZERO;
        for row in &outcomes {
            let (p, dt) = &row[j];
            time += *dt;
            match p {
                Ok(p) => p_values.push(*p),
                Err(_) => failures += 1,
            }
        }
        if failures as f64 > MAX_FAILURE_FRACTION * scenario.reps as f64 {
            return Err(Error::TooManyFailures {
                method: method.to_string(),
                failures,
                reps: scenario.reps,
            });
        }
        let experiments = p_values.len();
        let rejections = p_values.iter().filter(|&&p| p < scenario.alpha).count();
        let rate = rejections as f64 / experiments as f64;
        summaries.push(MethodSummary {
            method,
            experiments,
            rejections,
            rejection_rate: rate,
            mc_std_error: (rate * (1.0 - rate) / experiments as f64).sqrt(),
            mean_p_value: p_values.iter().sum::<f64>() / experiments as f64,
            failures,
            wall_time_s: time.as_secs_f64(),
            p_values,
        });
    }

    Ok(StudyResult {
        scenario_id,
        scenario: scenario.clone(),
        is_null: scenario.is_null(),
        methods: summaries,
    })
}
