//! The Complexity x Materiality x Control risk cube.
//!
//! Complexity and materiality are self-assessed grades (1 to 3) that locate
//! an application on the front face of the cube. Eleven yes/no control
//! questions decide how far back it sits: the fraction of failed controls
//! picks a depth layer of 1, 2 or 3. The numeric rating is the product of
//! the three coordinates, mapped onto the Blue / Green / Amber / Red bands
//! and then capped by the impact category.

mod cube;
mod triage;

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use cube::{assess, band_rules, base_band, control_depth, risk_score, what_if, BandOutcome};
pub use triage::{triage, TriageResult, TriageSubmission, AMBER_MESSAGE, GREEN_MESSAGE, RED_MESSAGE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RiskError {
    #[error("unknown control field `{0}`")]
    UnknownField(String),
    #[error("{field} out of range: {value}")]
    OutOfRange { field: &'static str, value: String },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
}

macro_rules! graded {
    ($(#[$meta:meta])* $name:ident { $($variant:ident = $value:literal => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "u8", into = "u8")]
        pub enum $name {
            $($variant = $value),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn value(self) -> u8 {
                self as u8
            }

            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl TryFrom<u8> for $name {
            type Error = RiskError;

            fn try_from(v: u8) -> Result<Self, RiskError> {
                match v {
                    $($value => Ok($name::$variant),)+
                    other => Err(RiskError::OutOfRange {
                        field: stringify!($name),
                        value: other.to_string(),
                    }),
                }
            }
        }

        impl From<$name> for u8 {
            fn from(g: $name) -> u8 {
                g as u8
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

graded! {
    /// Logging-only, simple formulas, or complex (links, macros, modelling).
    ComplexityGrade { Low = 1 => "Low", Medium = 2 => "Medium", High = 3 => "High" }
}

graded! {
    /// Internal operations, management reporting, or financial / regulatory /
    /// confidential.
    MaterialityGrade { Low = 1 => "Low", Medium = 2 => "Medium", High = 3 => "High" }
}

graded! {
    /// Worst outcome should the application fail. Only ever caps the band.
    ImpactCategory {
        Inconvenient = 1 => "Inconvenient",
        PoorCustomerOutcomes = 2 => "Poor Customer Outcomes",
        Reputational = 3 => "Reputational",
        LossOfBusiness = 4 => "Loss of Business",
        Financial = 5 => "Financial",
        StatutoryLegislative = 6 => "Statutory / Legislative",
    }
}

graded! {
    /// Cube layer: 1 is the well-controlled front face, 3 the back.
    ControlDepth { Front = 1 => "Front", Middle = 2 => "Middle", Back = 3 => "Back" }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RatingBand {
    Blue,
    Green,
    Amber,
    Red,
}

impl RatingBand {
    pub const ALL: [RatingBand; 4] = [RatingBand::Blue, RatingBand::Green, RatingBand::Amber, RatingBand::Red];

    pub fn as_str(self) -> &'static str {
        match self {
            RatingBand::Blue => "Blue",
            RatingBand::Green => "Green",
            RatingBand::Amber => "Amber",
            RatingBand::Red => "Red",
        }
    }

    pub fn rank(self) -> u8 {
        self as u8
    }

    pub fn escalate(self) -> RatingBand {
        match self {
            RatingBand::Blue => RatingBand::Green,
            RatingBand::Green => RatingBand::Amber,
            RatingBand::Amber | RatingBand::Red => RatingBand::Red,
        }
    }

    pub fn action(self) -> &'static str {
        match self {
            RatingBand::Blue => "No action needed.",
            RatingBand::Green => "Controls adequate; keep under annual review.",
            RatingBand::Amber => "Action needed: record the risk and agree an action plan to fix.",
            RatingBand::Red => {
                "Urgent action needed: fix within a month, or before the application is next run if later."
            }
        }
    }
}

impl fmt::Display for RatingBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RatingBand {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self, RiskError> {
        RatingBand::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RiskError::OutOfRange {
                field: "band",
                value: s.to_string(),
            })
    }
}

/// Answers to the control questionnaire. `true` means the control is in
/// place. The two personal-data flags describe the data held, not a
/// control, and take no part in the deficiency count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlAnswers {
    // a. accessibility
    pub location_known: bool,
    pub operating_instructions: bool,
    // b. continuity
    pub backup_in_place: bool,
    pub recovery_tested: bool,
    // c. change control
    pub version_controlled: bool,
    pub review_current: bool,
    pub testing_evidenced: bool,
    // d. security, privacy and integrity
    pub access_restricted: bool,
    pub integrity_protected: bool,
    // e. supportability
    pub second_person_can_fix: bool,
    pub technical_docs_exist: bool,
    // f. personal data
    pub holds_personal_data: bool,
    pub holds_sensitive_personal_data: bool,
}

/// The eleven control questions, in questionnaire order.
pub const CONTROL_FIELDS: [&str; 11] = [
    "location_known",
    "operating_instructions",
    "backup_in_place",
    "recovery_tested",
    "version_controlled",
    "review_current",
    "testing_evidenced",
    "access_restricted",
    "integrity_protected",
    "second_person_can_fix",
    "technical_docs_exist",
];

pub const DATA_FIELDS: [&str; 2] = ["holds_personal_data", "holds_sensitive_personal_data"];

impl ControlAnswers {
    /// Every control in place, no personal data.
    pub fn all_pass() -> Self {
        Self::from_bits(0x7FF)
    }

    /// Builds answers from a 13-bit mask in field order (bit 0 is
    /// `location_known`, bit 12 is `holds_sensitive_personal_data`).
    pub fn from_bits(bits: u16) -> Self {
        let b = |i: u32| bits & (1 << i) != 0;
        ControlAnswers {
            location_known: b(0),
            operating_instructions: b(1),
            backup_in_place: b(2),
            recovery_tested: b(3),
            version_controlled: b(4),
            review_current: b(5),
            testing_evidenced: b(6),
            access_restricted: b(7),
            integrity_protected: b(8),
            second_person_can_fix: b(9),
            technical_docs_exist: b(10),
            holds_personal_data: b(11),
            holds_sensitive_personal_data: b(12),
        }
    }

    pub fn field_names() -> impl Iterator<Item = &'static str> {
        CONTROL_FIELDS.into_iter().chain(DATA_FIELDS)
    }

    pub fn get(&self, field: &str) -> Result<bool, RiskError> {
        let mut copy = *self;
        copy.slot_mut(field).map(|v| *v)
    }

    pub fn set(&mut self, field: &str, value: bool) -> Result<(), RiskError> {
        *self.slot_mut(field)? = value;
        Ok(())
    }

    pub fn toggle(&mut self, field: &str) -> Result<(), RiskError> {
        let slot = self.slot_mut(field)?;
        *slot = !*slot;
        Ok(())
    }

    fn slot_mut(&mut self, field: &str) -> Result<&mut bool, RiskError> {
        Ok(match field {
            "location_known" => &mut self.location_known,
            "operating_instructions" => &mut self.operating_instructions,
            "backup_in_place" => &mut self.backup_in_place,
            "recovery_tested" => &mut self.recovery_tested,
            "version_controlled" => &mut self.version_controlled,
            "review_current" => &mut self.review_current,
            "testing_evidenced" => &mut self.testing_evidenced,
            "access_restricted" => &mut self.access_restricted,
            "integrity_protected" => &mut self.integrity_protected,
            "second_person_can_fix" => &mut self.second_person_can_fix,
            "technical_docs_exist" => &mut self.technical_docs_exist,
            "holds_personal_data" => &mut self.holds_personal_data,
            "holds_sensitive_personal_data" => &mut self.holds_sensitive_personal_data,
            other => return Err(RiskError::UnknownField(other.to_string())),
        })
    }

    /// Names of the controls answered "no", in questionnaire order.
    pub fn failed_controls(&self) -> Vec<&'static str> {
        CONTROL_FIELDS
            .into_iter()
            .filter(|f| !self.get(f).expect("known field"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssessmentInput {
    pub complexity: ComplexityGrade,
    pub materiality: MaterialityGrade,
    pub impact: ImpactCategory,
    pub controls: ControlAnswers,
    pub assessed_on: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentResult {
    /// Fraction of the eleven controls answered "no".
    pub deficiency: f64,
    pub control_depth: ControlDepth,
    pub risk_score: u8,
    pub band: RatingBand,
    pub dlc_required: bool,
    pub escalated_for_data: bool,
    pub clamped_by_impact: bool,
    pub reasons: Vec<String>,
    pub next_review: NaiveDate,
}

/// One calendar year later. 29 February maps to 28 February.
pub fn add_one_year(date: NaiveDate) -> NaiveDate {
    use chrono::Datelike;
    date.with_year(date.year() + 1)
        .unwrap_or_else(|| NaiveDate::from_ymd_opt(date.year() + 1, 2, 28).expect("28 February exists"))
}
