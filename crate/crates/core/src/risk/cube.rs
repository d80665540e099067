use serde::{Deserialize, Serialize};

use super::{
    add_one_year, AssessmentInput, AssessmentResult, ComplexityGrade, ControlAnswers, ControlDepth, ImpactCategory,
    MaterialityGrade, RatingBand, RiskError, CONTROL_FIELDS,
};

/// Deficiency `d` (failed controls / 11) and the cube layer it selects:
/// front for `d < 1/3`, middle for `1/3 <= d < 2/3`, back otherwise.
pub fn control_depth(controls: &ControlAnswers) -> (f64, ControlDepth) {
    let failed = controls.failed_controls().len();
    let total = CONTROL_FIELDS.len();
    // Compare 3*failed against total to keep the thirds exact.
    let depth = if 3 * failed < total {
        ControlDepth::Front
    } else if 3 * failed < 2 * total {
        ControlDepth::Middle
    } else {
        ControlDepth::Back
    };
    (failed as f64 / total as f64, depth)
}

/// Numeric rating `C x M x K`, between 1 and 27.
pub fn risk_score(complexity: ComplexityGrade, materiality: MaterialityGrade, depth: ControlDepth) -> u8 {
    complexity.value() * materiality.value() * depth.value()
}

/// Blue up to 2, Green 3 to 6, Amber 7 to 12, Red from 13.
pub fn base_band(score: u8) -> RatingBand {
    match score {
        0..=2 => RatingBand::Blue,
        3..=6 => RatingBand::Green,
        7..=12 => RatingBand::Amber,
        _ => RatingBand::Red,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandOutcome {
    pub band: RatingBand,
    pub escalated_for_data: bool,
    pub clamped_by_impact: bool,
}

fn impact_ceiling(impact: ImpactCategory) -> RatingBand {
    match impact {
        ImpactCategory::Inconvenient => RatingBand::Green,
        ImpactCategory::PoorCustomerOutcomes | ImpactCategory::Reputational => RatingBand::Amber,
        ImpactCategory::LossOfBusiness | ImpactCategory::Financial | ImpactCategory::StatutoryLegislative => {
            RatingBand::Red
        }
    }
}

/// Base band, then one step up when sensitive personal data sits behind
/// broken access or integrity controls, then the impact ceiling.
pub fn band_rules(score: u8, impact: ImpactCategory, controls: &ControlAnswers) -> BandOutcome {
    let mut band = base_band(score);
    let escalated_for_data = controls.holds_sensitive_personal_data
        && (!controls.access_restricted || !controls.integrity_protected)
        && band != RatingBand::Red;
    if escalated_for_data {
        band = band.escalate();
    }
    let ceiling = impact_ceiling(impact);
    let clamped_by_impact = band > ceiling;
    BandOutcome {
        band: band.min(ceiling),
        escalated_for_data,
        clamped_by_impact,
    }
}

pub fn assess(input: &AssessmentInput) -> AssessmentResult {
    let (deficiency, depth) = control_depth(&input.controls);
    let score = risk_score(input.complexity, input.materiality, depth);
    let outcome = band_rules(score, input.impact, &input.controls);
    AssessmentResult {
        deficiency,
        control_depth: depth,
        risk_score: score,
        band: outcome.band,
        dlc_required: input.complexity.value() + input.materiality.value() >= 5,
        escalated_for_data: outcome.escalated_for_data,
        clamped_by_impact: outcome.clamped_by_impact,
        reasons: input
            .controls
            .failed_controls()
            .into_iter()
            .map(str::to_string)
            .collect(),
        next_review: add_one_year(input.assessed_on),
    }
}

/// Re-scores `input` with the named answers flipped. `input` is untouched.
pub fn what_if<S: AsRef<str>>(input: &AssessmentInput, toggles: &[S]) -> Result<AssessmentResult, RiskError> {
    let mut flipped = *input;
    for name in toggles {
        flipped.controls.toggle(name.as_ref())?;
    }
    Ok(assess(&flipped))
}
