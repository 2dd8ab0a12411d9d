//! Verification reports: named numeric checks against thresholds.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// How `value` is compared with `threshold`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparison {
    /// Passes when `value ≤ threshold` (residuals).
    AtMost,
    /// Passes when `value > threshold` (margins, minimum singular values).
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "nan_as_null")]
    pub value: f64,
    #[serde(with = "nan_as_null")]
    pub threshold: f64,
    pub comparison: Comparison,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a residual check. A NaN value fails.
    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        let status = if value <= threshold { Status::Pass } else { Status::Fail };
        self.push(name, value, threshold, Comparison::AtMost, status, None)
    }

    /// Records a margin check. A NaN value fails.
    pub fn above(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        let status = if value > threshold { Status::Pass } else { Status::Fail };
        self.push(name, value, threshold, Comparison::Above, status, None)
    }

    pub fn skip(&mut self, name: &str, reason: &str) -> &mut Self {
        self.push(
            name,
            f64::NAN,
            f64::NAN,
            Comparison::AtMost,
            Status::Skip,
            Some(reason.to_string()),
        )
    }

    /// Records a check that could not be evaluated at all; counts as failure.
    pub fn error(&mut self, name: &str, reason: &str) -> &mut Self {
        self.push(
            name,
            f64::NAN,
            f64::NAN,
            Comparison::AtMost,
            Status::Fail,
            Some(reason.to_string()),
        )
    }

    fn push(
        &mut self,
        name: &str,
        value: f64,
        threshold: f64,
        comparison: Comparison,
        status: Status,
        note: Option<String>,
    ) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold,
            comparison,
            status,
            note,
        });
        self
    }

    pub fn with_note(&mut self, note: &str) -> &mut Self {
        if let Some(c) = self.checks.last_mut() {
            c.note = Some(note.to_string());
        }
        self
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// True when no check failed; skipped checks do not count against it.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|c| c.value)
    }
}

/// JSON has no NaN; unevaluated numbers travel as `null`.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(if *v > 0.0 { f64::MAX } else { f64::MIN })
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        let mut r = VerificationReport::new();
        r.at_most("a", f64::NAN, 1.0);
        assert!(!r.passed());
        let mut r = VerificationReport::new();
        r.above("b", f64::NAN, 0.0);
        assert!(!r.passed());
    }

    #[test]
    fn json_round_trip_keeps_skips() {
        let mut r = VerificationReport::new();
        r.at_most("a", 1e-9, 1e-7).skip("b", "why");
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back.checks[0], r.checks[0]);
        assert!(back.checks[1].value.is_nan());
        assert_eq!(back.checks[1].status, Status::Skip);
    }

    #[test]
    fn skip_does_not_fail() {
        let mut r = VerificationReport::new();
        r.at_most("a", 0.5, 1.0).skip("b", "hypothesis not met");
        assert!(r.passed());
        assert_eq!(r.get("b").unwrap().status, Status::Skip);
    }
}
