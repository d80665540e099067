//! Triage of returned department templates.

use euc_governance::risk::{triage, TriageSubmission};

fn main() {
    let returns = [
        TriageSubmission {
            department: "Facilities".into(),
            has_euc: 0,
            ..Default::default()
        },
        TriageSubmission {
            department: "Pensions".into(),
            has_euc: 1,
            process: Some("Monthly annuity uplift".into()),
            materiality: Some(3),
            complexity: Some(2),
            fix_knowledge: Some(1.5),
            staffing_resilience: Some(2.0),
            recovery: Some(2.0),
            version_control: Some(1.0),
            misuse_protection: Some(2.5),
            gdpr: Some(1),
        },
        TriageSubmission {
            department: "Marketing".into(),
            has_euc: 1,
            process: Some("Campaign tracker".into()),
            materiality: Some(1),
            complexity: Some(2),
            fix_knowledge: Some(3.0),
            staffing_resilience: Some(3.0),
            recovery: Some(2.5),
            version_control: Some(3.0),
            misuse_protection: Some(3.0),
            gdpr: Some(0),
        },
    ];

    for sub in &returns {
        match triage(sub) {
            Ok(r) => println!("{:<11} {:<6} {}", sub.department, r.band.as_str(), r.message),
            Err(e) => println!("{:<11} rejected: {e}", sub.department),
        }
    }
}
