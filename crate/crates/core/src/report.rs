//! Machine-readable check results.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one check. `status` is `pass` exactly when the residual is
/// finite and at most the tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub inputs: String,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, seed: u64, inputs: impl Into<String>) -> Report {
        let status = if residual.is_finite() && residual <= tolerance {
            Status::Pass
        } else {
            Status::Fail
        };
        Report {
            name: name.into(),
            status,
            residual,
            tolerance,
            seed,
            inputs: inputs.into(),
            details: serde_json::Value::Null,
        }
    }

    /// A failed check that could not be evaluated.
    pub fn error(name: impl Into<String>, tolerance: f64, seed: u64, err: &crate::Error) -> Report {
        Report::new(name, f64::INFINITY, tolerance, seed, "").with_details(serde_json::json!({ "error": err.to_string() }))
    }

    pub fn with_details(mut self, details: impl Serialize) -> Report {
        self.details = serde_json::to_value(details).unwrap_or(serde_json::Value::Null);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        format!("{tag} {} residual={:.3e} tol={:.1e}", self.name, self.residual, self.tolerance)
    }
}

pub fn all_pass(reports: &[Report]) -> bool {
    reports.iter().all(Report::passed)
}

/// Pretty JSON array; non-finite residuals become `null`.
pub fn to_json(reports: &[Report]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_follows_residual() {
        assert!(Report::new("a", 1e-12, 1e-10, 0, "").passed());
        assert!(Report::new("a", 1e-10, 1e-10, 0, "").passed());
        assert!(!Report::new("a", 2e-10, 1e-10, 0, "").passed());
        assert!(!Report::new("a", f64::NAN, 1e-10, 0, "").passed());
        let e = Report::error("b", 1.0, 3, &crate::Error::Config("x".into()));
        assert!(!e.passed());
        assert!(to_json(&[e]).contains("\"residual\": null"));
    }
}
