//! Ready-made inventories for demos and tests.
//!
//! [`banded_portfolio`] holds 158 assessed applications: 8 Red, 14 Amber,
//! 116 Green and 20 Blue, spread over the impact categories within what
//! the impact ceiling allows. [`concentrated_portfolio`] holds 100
//! unassessed applications in 12 departments, 85 of them in the largest 7.

use chrono::{DateTime, NaiveDate, TimeZone, Utc};

use crate::inventory::{EucaMetadata, Store};
use crate::risk::{
    assess, AssessmentInput, ComplexityGrade, ControlAnswers, ImpactCategory, MaterialityGrade, RatingBand,
};

/// Timestamp used for every seeded record, so seeded documents are
/// byte-for-byte reproducible.
pub fn fixed_clock() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2019, 3, 1, 9, 0, 0).unwrap()
}

pub const DEPARTMENTS: [&str; 12] = [
    "Finance",
    "Actuarial",
    "Customer Services",
    "Investments",
    "Marketing",
    "Human Resources",
    "Compliance",
    "Information Technology",
    "Legal",
    "Sales",
    "Risk",
    "Facilities",
];

/// (band, complexity, materiality, failed controls, count per impact 1..=6)
const BANDED: [(RatingBand, u8, u8, u32, [usize; 6]); 4] = [
    // 3 x 3 x K2 = 18
    (RatingBand::Red, 3, 3, 4, [0, 0, 0, 2, 3, 3]),
    // 3 x 2 x K2 = 12
    (RatingBand::Amber, 3, 2, 4, [0, 2, 3, 3, 4, 2]),
    // 2 x 2 x K1 = 4
    (RatingBand::Green, 2, 2, 0, [30, 25, 25, 16, 12, 8]),
    // 1 x 2 x K1 = 2
    (RatingBand::Blue, 1, 2, 0, [10, 5, 5, 0, 0, 0]),
];

fn seeded_store() -> Store {
    let mut store = Store::in_memory();
    store.set_clock(fixed_clock);
    store
}

fn metadata(n: usize, name: String, department: &str) -> EucaMetadata {
    EucaMetadata {
        name,
        department: department.to_string(),
        team: format!("{department} team {}", n % 3 + 1),
        manager: format!("Manager {:02}", n % 17 + 1),
        sme: format!("SME {:03}", n + 1),
        app_type: if n.is_multiple_of(5) {
            "Access 2010"
        } else {
            "Excel 2013"
        }
        .to_string(),
        file_location: format!(r"\\fs01\{}\app{:03}.xlsx", department.replace(' ', "_"), n + 1),
        ..Default::default()
    }
}

/// Answers with the last `failures` controls in questionnaire order
/// answered "no", and no personal data.
pub fn controls_with_failures(failures: u32) -> ControlAnswers {
    ControlAnswers::from_bits(0x7FF >> failures)
}

pub fn banded_portfolio() -> Store {
    let mut store = seeded_store();
    let mut n = 0;
    for (band, c, m, failures, impacts) in BANDED {
        for (i, &count) in impacts.iter().enumerate() {
            for _ in 0..count {
                let dept = DEPARTMENTS[n % DEPARTMENTS.len()];
                let id = store
                    .upsert_euca(metadata(n, format!("{band} application {:03}", n + 1), dept))
                    .expect("seed metadata is complete")
                    .id;
                let input = AssessmentInput {
                    complexity: ComplexityGrade::try_from(c).unwrap(),
                    materiality: MaterialityGrade::try_from(m).unwrap(),
                    impact: ImpactCategory::try_from(i as u8 + 1).unwrap(),
                    controls: controls_with_failures(failures),
                    assessed_on: NaiveDate::from_ymd_opt(2018, (n % 12) as u32 + 1, (n % 28) as u32 + 1).unwrap(),
                };
                let result = assess(&input);
                debug_assert_eq!(result.band, band);
                store
                    .record_assessment(&id, input, result)
                    .expect("fresh result is consistent");
                n += 1;
            }
        }
    }
    store
}

/// Department sizes of [`concentrated_portfolio`], largest first.
pub const CONCENTRATED_SIZES: [usize; 12] = [20, 18, 14, 11, 9, 7, 6, 5, 4, 3, 2, 1];

pub fn concentrated_portfolio() -> Store {
    let mut store = seeded_store();
    let mut n = 0;
    for (dept, size) in DEPARTMENTS.iter().zip(CONCENTRATED_SIZES) {
        for k in 0..size {
            store
                .upsert_euca(metadata(n, format!("{dept} tool {}", k + 1), dept))
                .expect("seed metadata is complete");
            n += 1;
        }
    }
    store
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_reproducible() {
        assert_eq!(banded_portfolio().to_json(), banded_portfolio().to_json());
        assert_eq!(banded_portfolio().records().len(), 158);
        assert_eq!(concentrated_portfolio().records().len(), 100);
    }
}
