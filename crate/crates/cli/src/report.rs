//! JSON and text renderings of test and study results.

use std::fmt::Write as _;

use lncat::cat::CatAnalysis;
use lncat::{GroupEstimate, Method, StudyResult, TestResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub label: String,
    pub n: usize,
    pub ybar: f64,
    pub s2: f64,
    pub eta_hat: f64,
    pub v_hat: f64,
}

impl GroupReport {
    pub fn new(label: &str, e: &GroupEstimate) -> Self {
        Self {
            label: label.to_string(),
            n: e.n,
            ybar: e.mu_hat,
            s2: e.sigma2_hat,
            eta_hat: e.eta_hat,
            v_hat: e.v_hat,
        }
    }
}

/// Output of `lncat test`. Field names and order are stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: Method,
    pub alpha: f64,
    pub groups: Vec<GroupReport>,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: Option<f64>,
    pub df: Option<u32>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub reject: bool,
    /// Restricted estimate of the common log-mean.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta_restricted: Option<f64>,
}

impl TestReport {
    pub fn new(groups: Vec<GroupReport>, result: &TestResult, analysis: Option<&CatAnalysis>) -> Self {
        let df = (result.method == Method::Lrt).then(|| (groups.len() - 1) as u32);
        Self {
            method: result.method,
            alpha: result.alpha,
            groups,
            statistic: result.statistic,
            p_value: result.p_value,
            critical_value: result.critical_value,
            df,
            replicates: result.m,
            seed: result.seed,
            reject: result.reject,
            eta_restricted: analysis.map(|a| a.fit.eta_rml),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let title = match self.method {
            Method::Cat => format!(
                "Computational approach test (M = {}, seed = {})",
                self.replicates.unwrap_or(0),
                self.seed.unwrap_or(0)
            ),
            Method::Lrt => format!(
                "Likelihood ratio test (chi-square, df = {})",
                self.df.unwrap_or(0)
            ),
        };
        let _ = writeln!(out, "{title}");
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:>12} {:>12} {:>12} {:>12}",
            "group", "n", "ybar", "S^2", "eta_hat", "v_hat"
        );
        for g in &self.groups {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                g.label, g.n, g.ybar, g.s2, g.eta_hat, g.v_hat
            );
        }
        let name = match self.method {
            Method::Cat => "theta",
            Method::Lrt => "Lambda",
        };
        let _ = writeln!(out, "statistic ({name}): {:.6}", self.statistic);
        if let Some(cv) = self.critical_value {
            let _ = writeln!(out, "critical value at alpha = {}: {:.6}", self.alpha, cv);
        }
        let _ = writeln!(out, "p-value: {:.6}", self.p_value);
        let verdict = if self.reject { "reject" } else { "do not reject" };
        let _ = writeln!(out, "decision: {verdict} equal means at alpha = {}", self.alpha);
        out
    }
}

pub fn study_table(results: &[StudyResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<6} {:>4} {:>6} {:>6} {:>10} {:>9} {:>8} {:>9}",
        "scenario", "method", "k", "null", "reps", "rej. rate", "mc s.e.", "mean p", "failures"
    );
    for r in results {
        for m in &r.methods {
            let _ = writeln!(
                out,
                "{:<12} {:<6} {:>4} {:>6} {:>6} {:>10.4} {:>9.4} {:>8.4} {:>9}",
                r.scenario_id,
                m.method.as_str(),
                r.scenario.k,
                r.is_null,
                r.scenario.reps,
                m.rejection_rate,
                m.mc_std_error,
                m.mean_p_value,
                m.failures
            );
        }
    }
    out
}
