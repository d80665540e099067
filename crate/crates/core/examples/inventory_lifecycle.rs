//! Registers an application in a file-backed store, assesses it, confirms
//! a review and retires it.

use chrono::NaiveDate;
use euc_governance::inventory::{EucaMetadata, Lifecycle, Store};
use euc_governance::risk::{assess, AssessmentInput, ComplexityGrade, ImpactCategory, MaterialityGrade};
use euc_governance::seed;

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("inventory.json");
    let mut store = Store::open(&path)?;

    let rec = store.transact(|s| {
        s.upsert_euca(EucaMetadata {
            name: "Commission calculator".into(),
            department: "Sales".into(),
            manager: "A. Singh".into(),
            app_type: "Excel".into(),
            ..Default::default()
        })
    })?;
    println!("registered {} ({})", rec.id, rec.name);

    let input = AssessmentInput {
        complexity: ComplexityGrade::Medium,
        materiality: MaterialityGrade::Medium,
        impact: ImpactCategory::Financial,
        controls: seed::controls_with_failures(3),
        assessed_on: date(2019, 2, 11),
    };
    let rec = store.transact(|s| s.record_assessment(&rec.id, input, assess(&input)))?;
    println!(
        "assessed {:?}, next review {:?}",
        rec.band().map(|b| b.as_str()),
        rec.next_review
    );

    let rec = store.transact(|s| s.confirm_review(&rec.id, date(2020, 2, 29)))?;
    println!("review confirmed, next review {:?}", rec.next_review);

    let rec = store.transact(|s| s.set_lifecycle(&rec.id, Lifecycle::Retired, Some("moved to the sales system")))?;
    println!("lifecycle {}", rec.lifecycle_status.as_str());

    let reopened = Store::open(&path)?;
    println!("reopened store holds {} record(s)", reopened.records().len());
    Ok(())
}
