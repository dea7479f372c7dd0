//! Machine-readable run reports shared by the command line and the
//! verification suite.

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One named comparison between an expected and an observed value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub actual: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Check {
    /// Exact equality of serializable values (counts, flags, factor lists).
    pub fn exact<T: Serialize + PartialEq>(name: &str, expected: T, actual: T) -> Self {
        let pass = expected == actual;
        Self {
            name: name.to_string(),
            expected: to_value(&expected),
            actual: to_value(&actual),
            tolerance: None,
            pass,
        }
    }

    /// `|expected − actual| <= tol`.
    pub fn approx(name: &str, expected: f64, actual: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            expected: to_value(&expected),
            actual: to_value(&actual),
            tolerance: Some(tol),
            pass: (expected - actual).abs() <= tol,
        }
    }

    /// `actual <= bound`, reported with the bound as the expected value.
    pub fn at_most(name: &str, bound: f64, actual: f64) -> Self {
        Self {
            name: name.to_string(),
            expected: to_value(&format!("<= {bound:e}")),
            actual: to_value(&actual),
            tolerance: Some(bound),
            pass: actual <= bound,
        }
    }

    pub fn holds(name: &str, actual: bool) -> Self {
        Self::exact(name, true, actual)
    }

    /// A check that could not be evaluated because the computation failed.
    pub fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.to_string(),
            expected: Value::String("success".into()),
            actual: Value::String(format!("error: {err}")),
            tolerance: None,
            pass: false,
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    // non-finite floats have no JSON form; report them as strings
    serde_json::to_value(v).ok().filter(|v| !v.is_null()).unwrap_or_else(|| {
        Value::String(
            serde_json::to_string(v).unwrap_or_else(|_| "unserializable".into()),
        )
    })
}

/// Result of one command: echo of the inputs, free-form results and checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl RunReport {
    pub fn new(command: &str, inputs: Value, results: Value, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self {
            command: command.to_string(),
            inputs,
            results,
            checks,
            pass,
            elapsed_ms: None,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Plain-text rendering: scalar results, one line per check, then the verdict.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.command);
        if let Value::Object(m) = &self.results {
            for (k, v) in m {
                if !v.is_array() && !v.is_object() {
                    out.push_str(&format!("  {k} = {v}\n"));
                }
            }
        }
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: expected {}, got {}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            ));
        }
        out.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    #[allow(clippy::approx_constant)]
    fn checks_and_aggregation() {
        let ok = Check::exact("count", 108u64, 108);
        let near = Check::approx("ln2", std::f64::consts::LN_2, 0.6931471805599, 1e-12);
        let bad = Check::at_most("residual", 1e-10, 1e-3);
        assert!(ok.pass && near.pass && !bad.pass);
        let r = RunReport::new("demo", json!({}), json!({"x": 1}), vec![ok.clone(), near]);
        assert!(r.pass);
        let r = RunReport::new("demo", json!({}), json!(null), vec![ok, bad]);
        assert!(!r.pass);
        assert_eq!(r.failures().count(), 1);
        assert!(r.to_text().contains("[FAIL] residual"));
    }

    #[test]
    fn timing_is_omitted_by_default() {
        let r = RunReport::new("demo", json!({}), json!({}), vec![]);
        assert!(!r.to_json_pretty().contains("elapsed_ms"));
        let back: RunReport = serde_json::from_str(&r.to_json_pretty()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let c = Check::approx("nan", 0.0, f64::NAN, 1.0);
        assert!(!c.pass);
        assert!(serde_json::to_string(&c).is_ok());
    }
}
