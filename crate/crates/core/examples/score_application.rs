//! Scores one application on the risk cube and prints the breakdown.

use chrono::NaiveDate;
use euc_governance::risk::{
    assess, AssessmentInput, ComplexityGrade, ControlAnswers, ImpactCategory, MaterialityGrade,
};

fn main() {
    let mut controls = ControlAnswers::all_pass();
    for failed in [
        "version_controlled",
        "testing_evidenced",
        "second_person_can_fix",
        "technical_docs_exist",
    ] {
        controls.set(failed, false).unwrap();
    }
    controls.holds_sensitive_personal_data = true;

    let input = AssessmentInput {
        complexity: ComplexityGrade::Medium,
        materiality: MaterialityGrade::High,
        impact: ImpactCategory::Financial,
        controls,
        assessed_on: NaiveDate::from_ymd_opt(2019, 4, 1).unwrap(),
    };
    let r = assess(&input);

    println!("deficiency     {:.3}", r.deficiency);
    println!("control depth  {}", r.control_depth.label());
    println!(
        "score          {} = {} x {} x {}",
        r.risk_score,
        input.complexity.value(),
        input.materiality.value(),
        r.control_depth.value()
    );
    println!("band           {} ({})", r.band.as_str(), r.band.action());
    println!("DLC required   {}", r.dlc_required);
    println!("next review    {}", r.next_review);
    println!("failed         {}", r.reasons.join(", "));
}
