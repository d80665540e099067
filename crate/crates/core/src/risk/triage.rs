//! The one-page departmental scoring template.
//!
//! A manager picks their most complex or most material process, grades it
//! like a full assessment, and scores five confidence questions from 1
//! (bad) to 3 (good). The mean confidence stands in for the control depth.

use serde::{Deserialize, Serialize};

use super::{base_band, RatingBand, RiskError};

pub const GREEN_MESSAGE: &str = "You are Green. Please return this spreadsheet to Data Governance - no further action needed, however you are accountable for the results which you have returned. Any incidents as a direct result of spreadsheet errors that impact on a material process will need to be reported to Data Governance urgently.";
pub const AMBER_MESSAGE: &str = "You are Amber. Action is needed. Return this spreadsheet to Data Governance. Your spreadsheets and applications need to be assessed, errant ones recorded on Magique and there needs to be an action plan to fix.";
pub const RED_MESSAGE: &str = "You are Red. Urgent action is needed. Return this spreadsheet to Data Governance. Your spreadsheets and applications need to be assessed, errant ones recorded on Magique and there needs to be an urgent action plan to fix.";

/// One returned template. Everything after `has_euc` may be left blank
/// when the department has no applications.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TriageSubmission {
    pub department: String,
    pub has_euc: u8,
    #[serde(default)]
    pub process: Option<String>,
    #[serde(default)]
    pub materiality: Option<u8>,
    #[serde(default)]
    pub complexity: Option<u8>,
    #[serde(default)]
    pub fix_knowledge: Option<f64>,
    #[serde(default)]
    pub staffing_resilience: Option<f64>,
    #[serde(default)]
    pub recovery: Option<f64>,
    #[serde(default)]
    pub version_control: Option<f64>,
    #[serde(default)]
    pub misuse_protection: Option<f64>,
    #[serde(default)]
    pub gdpr: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriageResult {
    pub band: RatingBand,
    pub message: String,
}

impl TriageResult {
    fn for_band(band: RatingBand) -> Self {
        let message = match band {
            RatingBand::Blue | RatingBand::Green => GREEN_MESSAGE,
            RatingBand::Amber => AMBER_MESSAGE,
            RatingBand::Red => RED_MESSAGE,
        };
        TriageResult {
            band: band.max(RatingBand::Green),
            message: message.to_string(),
        }
    }
}

fn flag(field: &'static str, value: Option<u8>) -> Result<bool, RiskError> {
    match value {
        Some(0) => Ok(false),
        Some(1) => Ok(true),
        Some(v) => Err(RiskError::OutOfRange {
            field,
            value: v.to_string(),
        }),
        None => Err(RiskError::MissingField(field)),
    }
}

fn grade(field: &'static str, value: Option<u8>) -> Result<u8, RiskError> {
    match value {
        Some(v @ 1..=3) => Ok(v),
        Some(v) => Err(RiskError::OutOfRange {
            field,
            value: v.to_string(),
        }),
        None => Err(RiskError::MissingField(field)),
    }
}

fn confidence(field: &'static str, value: Option<f64>) -> Result<f64, RiskError> {
    match value {
        Some(v) if (1.0..=3.0).contains(&v) => Ok(v),
        Some(v) => Err(RiskError::OutOfRange {
            field,
            value: v.to_string(),
        }),
        None => Err(RiskError::MissingField(field)),
    }
}

pub fn triage(sub: &TriageSubmission) -> Result<TriageResult, RiskError> {
    if !flag("has_euc", Some(sub.has_euc))? {
        return Ok(TriageResult::for_band(RatingBand::Green));
    }
    let materiality = grade("materiality", sub.materiality)?;
    let complexity = grade("complexity", sub.complexity)?;
    let scores = [
        confidence("fix_knowledge", sub.fix_knowledge)?,
        confidence("staffing_resilience", sub.staffing_resilience)?,
        confidence("recovery", sub.recovery)?,
        confidence("version_control", sub.version_control)?,
        confidence("misuse_protection", sub.misuse_protection)?,
    ];
    let gdpr = flag("gdpr", sub.gdpr)?;

    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let depth: u8 = if mean >= 2.5 {
        1
    } else if mean >= 1.75 {
        2
    } else {
        3
    };
    let mut band = base_band(complexity * materiality * depth).max(RatingBand::Green);
    if gdpr && scores.iter().any(|&s| s < 2.0) {
        band = band.escalate();
    }
    Ok(TriageResult::for_band(band))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn submission(m: u8, c: u8, confidences: [f64; 5], gdpr: u8) -> TriageSubmission {
        TriageSubmission {
            department: "Middle Office".into(),
            has_euc: 1,
            process: Some("Month-end reconciliation".into()),
            materiality: Some(m),
            complexity: Some(c),
            fix_knowledge: Some(confidences[0]),
            staffing_resilience: Some(confidences[1]),
            recovery: Some(confidences[2]),
            version_control: Some(confidences[3]),
            misuse_protection: Some(confidences[4]),
            gdpr: Some(gdpr),
        }
    }

    #[test]
    fn no_applications_is_green() {
        let sub = TriageSubmission {
            department: "Facilities".into(),
            has_euc: 0,
            ..Default::default()
        };
        let r = triage(&sub).unwrap();
        assert_eq!(r.band, RatingBand::Green);
        assert_eq!(r.message, GREEN_MESSAGE);
    }

    #[test]
    fn worst_case_is_red() {
        let r = triage(&submission(3, 3, [1.0; 5], 1)).unwrap();
        assert_eq!(r.band, RatingBand::Red);
        assert_eq!(r.message, RED_MESSAGE);
    }

    #[test]
    fn middling_confidence_is_amber() {
        let r = triage(&submission(2, 3, [1.5, 2.5, 2.0, 2.0, 2.0], 0)).unwrap();
        assert_eq!(r.band, RatingBand::Amber);
        assert!(r.message.starts_with("You are Amber. Action is needed."));
    }

    #[test]
    fn gdpr_with_weak_confidence_escalates() {
        // 2 x 2 x K'=1 = 4 Green; a single score below 2 escalates
        let calm = triage(&submission(2, 2, [3.0, 3.0, 3.0, 3.0, 1.5], 1)).unwrap();
        assert_eq!(calm.band, RatingBand::Amber);
        let no_gdpr = triage(&submission(2, 2, [3.0, 3.0, 3.0, 3.0, 1.5], 0)).unwrap();
        assert_eq!(no_gdpr.band, RatingBand::Green);
    }

    #[test]
    fn out_of_range_inputs() {
        assert!(matches!(
            triage(&submission(4, 1, [2.0; 5], 0)),
            Err(RiskError::OutOfRange {
                field: "materiality",
                ..
            })
        ));
        assert!(matches!(
            triage(&submission(1, 1, [2.0, 3.5, 2.0, 2.0, 2.0], 0)),
            Err(RiskError::OutOfRange {
                field: "staffing_resilience",
                ..
            })
        ));
        assert!(matches!(
            triage(&submission(1, 1, [2.0, 0.5, 2.0, 2.0, 2.0], 0)),
            Err(RiskError::OutOfRange { .. })
        ));
        let mut s = submission(1, 1, [2.0; 5], 0);
        s.has_euc = 2;
        assert!(matches!(
            triage(&s),
            Err(RiskError::OutOfRange { field: "has_euc", .. })
        ));
        let mut s = submission(1, 1, [2.0; 5], 0);
        s.recovery = None;
        assert_eq!(triage(&s), Err(RiskError::MissingField("recovery")));
    }

    #[test]
    fn nan_confidence_rejected() {
        assert!(triage(&submission(1, 1, [f64::NAN, 2.0, 2.0, 2.0, 2.0], 0)).is_err());
    }
}
