use serde::Serialize;
use serde_json::{json, Value};

use crate::output::fmt_g;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    /// `value <= threshold`
    #[serde(rename = "<=")]
    AtMost,
    /// `value >= threshold`
    #[serde(rename = ">=")]
    AtLeast,
    /// `|value| <= threshold`
    #[serde(rename = "|.|<=")]
    AbsAtMost,
}

/// One scalar check of a verification suite.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub case_id: String,
    /// Everything needed to rerun the case in isolation.
    pub params: Value,
    pub seed: Option<u64>,
    pub value: f64,
    pub threshold: f64,
    pub relation: Sense,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(case_id: impl Into<String>, params: Value, seed: Option<u64>, value: f64, relation: Sense, threshold: f64) -> Self {
        Self {
            case_id: case_id.into(),
            params,
            seed,
            value,
            threshold,
            relation,
            error: None,
        }
    }

    /// A case that could not be evaluated; always a violation.
    pub fn failed(case_id: impl Into<String>, params: Value, seed: Option<u64>, error: impl ToString) -> Self {
        Self {
            case_id: case_id.into(),
            params,
            seed,
            value: f64::NAN,
            threshold: f64::NAN,
            relation: Sense::AtMost,
            error: Some(error.to_string()),
        }
    }

    /// Distance to the threshold, positive when the check holds.
    pub fn margin(&self) -> f64 {
        match self.relation {
            Sense::AtMost => self.threshold - self.value,
            Sense::AtLeast => self.value - self.threshold,
            Sense::AbsAtMost => self.threshold - self.value.abs(),
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.margin() >= 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: Value,
    pub n_cases: usize,
    /// Smallest margin over all checks (negative when something failed).
    pub worst_margin: Option<f64>,
    pub violations: Vec<Check>,
    pub pass: bool,
    pub wall_time_s: Option<f64>,
}

impl VerificationReport {
    pub fn from_checks(suite: &str, params: Value, checks: &[Check], wall_time_s: Option<f64>) -> Self {
        let worst_margin = checks
            .iter()
            .map(Check::margin)
            .filter(|m| !m.is_nan())
            .reduce(f64::min);
        let violations: Vec<Check> = checks.iter().filter(|c| !c.passed()).cloned().collect();
        Self {
            suite: suite.to_string(),
            params,
            n_cases: checks.len(),
            worst_margin,
            pass: violations.is_empty(),
            violations,
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// One summary row plus one row per violation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,n_cases,worst_margin,violations,pass\n");
        out += &format!(
            "{},{},{},{},{}\n",
            self.suite,
            self.n_cases,
            self.worst_margin.map(fmt_g).unwrap_or_default(),
            self.violations.len(),
            self.pass
        );
        if !self.violations.is_empty() {
            out += "\ncase_id,seed,value,relation,threshold,params\n";
            for v in &self.violations {
                out += &format!(
                    "{},{},{},{},{},\"{}\"\n",
                    v.case_id,
                    v.seed.map(|s| s.to_string()).unwrap_or_default(),
                    fmt_g(v.value),
                    json!(v.relation).as_str().unwrap_or_default(),
                    fmt_g(v.threshold),
                    v.params.to_string().replace('"', "\"\"")
                );
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_pass_flag() {
        let ok = Check::new("a", json!({}), None, 1e-6, Sense::AtMost, 1e-5);
        let low = Check::new("b", json!({}), Some(3), -0.1, Sense::AtLeast, -5e-4);
        let abs = Check::new("c", json!({}), None, -2e-13, Sense::AbsAtMost, 1e-12);
        assert!(ok.passed() && abs.passed() && !low.passed());
        let failed = Check::failed("d", json!({}), None, "boom");
        assert!(!failed.passed());

        let r = VerificationReport::from_checks("s", json!({}), &[ok.clone(), abs.clone()], None);
        assert!(r.pass && r.violations.is_empty());
        let r = VerificationReport::from_checks("s", json!({}), &[ok, low, abs, failed], None);
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 2);
        assert!((r.worst_margin.unwrap() - (-0.1 + 5e-4)).abs() < 1e-15);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["suite", "params", "n_cases", "worst_margin", "violations", "pass", "wall_time_s"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        for key in ["case_id", "params", "seed", "value", "threshold"] {
            assert!(v["violations"][0].get(key).is_some(), "{key}");
        }
    }
}
