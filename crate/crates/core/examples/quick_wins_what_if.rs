//! Tries fixing each failed control on its own and reports which fixes
//! lower the band.

use chrono::NaiveDate;
use euc_governance::risk::{assess, what_if, AssessmentInput, ComplexityGrade, ImpactCategory, MaterialityGrade};
use euc_governance::seed;

fn main() {
    let input = AssessmentInput {
        complexity: ComplexityGrade::High,
        materiality: MaterialityGrade::Medium,
        impact: ImpactCategory::LossOfBusiness,
        controls: seed::controls_with_failures(8),
        assessed_on: NaiveDate::from_ymd_opt(2019, 6, 3).unwrap(),
    };
    let current = assess(&input);
    println!("now: {} (score {})", current.band.as_str(), current.risk_score);

    for field in &current.reasons {
        let r = what_if(&input, &[field]).unwrap();
        let marker = if r.band < current.band { "*" } else { " " };
        println!(
            "{marker} fix {field:<24} -> {} (score {})",
            r.band.as_str(),
            r.risk_score
        );
    }

    let all: Vec<&str> = current.reasons.iter().take(5).map(String::as_str).collect();
    let r = what_if(&input, &all).unwrap();
    println!(
        "fix first five together -> {} (score {})",
        r.band.as_str(),
        r.risk_score
    );
}
