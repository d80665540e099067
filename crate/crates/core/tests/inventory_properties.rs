use std::collections::BTreeSet;

use chrono::NaiveDate;
use euc_governance::inventory::{
    read_csv, write_csv, EucaFilter, EucaMetadata, InventoryError, Lifecycle, NewRisk, RiskStatus, Store, StoreDocument,
};
use euc_governance::risk::{assess, AssessmentInput, ComplexityGrade, ImpactCategory, MaterialityGrade, RatingBand};
use euc_governance::seed;
use proptest::prelude::*;

mod common;
use common::{apply, arb_date, arb_op, euca_id, populated, Op};

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn meta(name: &str, department: &str, manager: &str) -> EucaMetadata {
    EucaMetadata {
        name: name.into(),
        department: department.into(),
        manager: manager.into(),
        ..Default::default()
    }
}

fn input(c: u8, m: u8, impact: u8, failures: u32, on: &str) -> AssessmentInput {
    AssessmentInput {
        complexity: ComplexityGrade::try_from(c).unwrap(),
        materiality: MaterialityGrade::try_from(m).unwrap(),
        impact: ImpactCategory::try_from(impact).unwrap(),
        controls: seed::controls_with_failures(failures),
        assessed_on: date(on),
    }
}

fn risk(il: u8, is: u8, rl: u8, rs: u8, opened: &str) -> NewRisk {
    NewRisk {
        description: "Manual rekeying of premiums".into(),
        inherent_likelihood: il,
        inherent_severity: is,
        residual_likelihood: rl,
        residual_severity: rs,
        opened: date(opened),
    }
}

#[test]
fn upsert_mints_updates_and_rejects() {
    let mut store = Store::in_memory();
    let rec = store
        .upsert_euca(meta("Complaints DB", "Compliance", "R. Patel"))
        .unwrap();
    assert!(rec.id.starts_with("EUCA-"));
    assert_eq!(rec.lifecycle_status, Lifecycle::Live);
    assert_eq!(rec.next_review, None);

    let mut changed = rec.metadata();
    changed.manager = "L. Okafor".into();
    let updated = store.upsert_euca(changed).unwrap();
    assert_eq!(updated.created_at, rec.created_at);
    assert!(updated.updated_at > rec.updated_at);
    assert_eq!(updated.manager, "L. Okafor");

    let mut ghost = meta("Ghost", "Finance", "Nobody");
    ghost.id = Some("EUCA-99999".into());
    assert!(matches!(store.upsert_euca(ghost), Err(InventoryError::UnknownId(_))));
    assert!(matches!(
        store.upsert_euca(meta("", "Finance", "A")),
        Err(InventoryError::MissingField("name"))
    ));
    assert!(matches!(
        store.upsert_euca(meta("X", "Finance", " ")),
        Err(InventoryError::MissingField("manager"))
    ));
}

#[test]
fn assessments_set_review_and_accumulate() {
    let mut store = Store::in_memory();
    let id = store
        .upsert_euca(meta("Reserving model", "Actuarial", "K. Lee"))
        .unwrap()
        .id;
    let red = input(3, 3, 5, 4, "2019-01-15");
    let rec = store.record_assessment(&id, red, assess(&red)).unwrap();
    assert_eq!(rec.band(), Some(RatingBand::Red));
    assert_eq!(rec.next_review, Some(date("2020-01-15")));

    let mut forged = assess(&red);
    forged.band = RatingBand::Green;
    assert!(matches!(
        store.record_assessment(&id, red, forged),
        Err(InventoryError::InconsistentResult { .. })
    ));

    let fixed = input(3, 3, 5, 0, "2019-06-01");
    let rec = store.record_assessment(&id, fixed, assess(&fixed)).unwrap();
    assert_eq!(rec.band(), Some(RatingBand::Amber));
    assert_eq!(rec.assessment_history.len(), 2);
    assert_eq!(rec.latest_assessment.unwrap().input, fixed);
}

#[test]
fn review_confirmation_steps_a_year() {
    let mut store = Store::in_memory();
    let id = store.upsert_euca(meta("Rota", "Facilities", "J. Bloggs")).unwrap().id;
    let rec = store.confirm_review(&id, date("2019-03-10")).unwrap();
    assert_eq!(rec.next_review, Some(date("2020-03-10")));
    let rec = store.confirm_review(&id, date("2020-02-29")).unwrap();
    assert_eq!(rec.next_review, Some(date("2021-02-28")));

    let before = store.document().clone();
    store.confirm_review(&id, date("2020-02-29")).unwrap();
    assert_eq!(store.document(), &before);

    store.set_lifecycle(&id, Lifecycle::Retired, Some("replaced")).unwrap();
    assert!(matches!(
        store.confirm_review(&id, date("2020-03-01")),
        Err(InventoryError::RetiredRecord(_))
    ));
    assert!(matches!(
        store.confirm_review("EUCA-00404", date("2020-03-01")),
        Err(InventoryError::UnknownId(_))
    ));
}

#[test]
fn lifecycle_is_idempotent_and_revival_needs_reason() {
    let mut store = Store::in_memory();
    let id = store.upsert_euca(meta("Old tracker", "Sales", "P. Jones")).unwrap().id;
    let once = store.set_lifecycle(&id, Lifecycle::Retired, None).unwrap();
    let twice = store.set_lifecycle(&id, Lifecycle::Retired, None).unwrap();
    assert_eq!(once, twice);
    assert_eq!(once.lifecycle_history.len(), 1);
    assert!(matches!(
        store.set_lifecycle(&id, Lifecycle::Live, None),
        Err(InventoryError::MissingField("reason"))
    ));
    let back = store
        .set_lifecycle(&id, Lifecycle::Live, Some("still used for Q4"))
        .unwrap();
    assert_eq!(back.lifecycle_status, Lifecycle::Live);
    assert_eq!(back.lifecycle_history.len(), 2);
}

#[test]
fn register_entries_follow_scale_rules() {
    let mut store = Store::in_memory();
    let id = store.upsert_euca(meta("Pricing", "Finance", "M. Chen")).unwrap().id;
    let entry = store.link_risk(&id, risk(4, 4, 2, 3, "2019-02-01")).unwrap();
    assert_eq!((entry.inherent_score(), entry.residual_score()), (16, 6));
    assert_eq!(entry.status, RiskStatus::Open);
    assert_eq!(store.get(&id).unwrap().risk_ids, vec![entry.risk_id.clone()]);

    assert!(matches!(
        store.link_risk(&id, risk(4, 4, 5, 5, "2019-02-01")),
        Err(InventoryError::ResidualExceedsInherent {
            inherent: 16,
            residual: 25
        })
    ));
    assert!(matches!(
        store.link_risk(&id, risk(7, 4, 1, 1, "2019-02-01")),
        Err(InventoryError::ScaleViolation { value: 7, .. })
    ));
    assert!(matches!(
        store.close_risk(&entry.risk_id, date("2019-01-31")),
        Err(InventoryError::DateOrder { .. })
    ));
    let closed = store.close_risk(&entry.risk_id, date("2019-05-01")).unwrap();
    assert_eq!(
        (closed.status, closed.closed),
        (RiskStatus::Closed, Some(date("2019-05-01")))
    );
    assert!(matches!(
        store.close_risk(&entry.risk_id, date("2019-05-02")),
        Err(InventoryError::AlreadyClosed(_))
    ));
    assert!(matches!(
        store.close_risk("RISK-00404", date("2019-05-02")),
        Err(InventoryError::UnknownRisk(_))
    ));
}

#[test]
fn listing_the_banded_portfolio() {
    let store = seed::banded_portfolio();
    let red = store.list_eucas(&EucaFilter {
        band: Some(RatingBand::Red),
        ..Default::default()
    });
    assert_eq!(red.len(), 8);
    let retired = store.list_eucas(&EucaFilter {
        lifecycle: Some(Lifecycle::Retired),
        ..Default::default()
    });
    assert!(retired.is_empty());

    let due = date("2019-06-01");
    let listed: BTreeSet<_> = store
        .list_eucas(&EucaFilter {
            due_before: Some(due),
            ..Default::default()
        })
        .into_iter()
        .map(|r| r.id.clone())
        .collect();
    let scanned: BTreeSet<_> = store
        .records()
        .iter()
        .filter(|r| r.next_review.is_some_and(|n| n < due))
        .map(|r| r.id.clone())
        .collect();
    assert_eq!(listed, scanned);
    assert!(!listed.is_empty());
}

#[test]
fn csv_export_has_one_row_per_record() {
    let store = seed::banded_portfolio();
    let mut out = Vec::new();
    assert_eq!(write_csv(&store, &mut out).unwrap(), 158);
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 159);
    assert!(text.starts_with(
        "id,name,department,team,manager,sme,data_owner,app_type,file_location,lifecycle_status,\
         complexity,materiality,impact,band,risk_score,dlc_required,next_review,risk_ids,disposition\n"
    ));
}

#[test]
fn file_store_survives_reopen_and_failed_transactions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inventory.json");
    let mut store = Store::open(&path).unwrap();
    let id = store
        .transact(|s| s.upsert_euca(meta("Claims log", "Customer Services", "T. Ward")))
        .unwrap()
        .id;
    let bytes = std::fs::read(&path).unwrap();
    let err = store.transact(|s| {
        s.confirm_review(&id, date("2019-04-01"))?;
        s.close_risk("RISK-00001", date("2019-04-01"))
    });
    assert!(matches!(err, Err(InventoryError::UnknownRisk(_))));
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert_eq!(store.get(&id).unwrap().next_review, None);

    let reopened = Store::open(&path).unwrap();
    assert_eq!(reopened.document(), store.document());

    std::fs::write(&path, b"{ not json").unwrap();
    assert!(matches!(Store::open(&path), Err(InventoryError::Corrupt { .. })));
}

fn check_invariants(doc: &StoreDocument, reviewed: &BTreeSet<String>) -> Result<(), TestCaseError> {
    prop_assert_eq!(doc.integrity_violations(), Vec::<String>::new());
    for e in &doc.register {
        prop_assert!(e.residual_score() <= e.inherent_score());
        prop_assert!(e.closed.is_none_or(|c| c >= e.opened));
    }
    for r in &doc.records {
        prop_assert_eq!(r.next_review.is_some(), reviewed.contains(&r.id));
        prop_assert!(r.updated_at >= r.created_at);
        if let Some(a) = &r.latest_assessment {
            prop_assert_eq!(Some(a), r.assessment_history.last());
        }
    }
    Ok(())
}

fn arb_filter() -> impl Strategy<Value = EucaFilter> {
    (
        prop::option::of(prop::sample::select(seed::DEPARTMENTS.to_vec())),
        prop::option::of(prop::sample::select(RatingBand::ALL.to_vec())),
        prop::option::of(prop::sample::select(vec![Lifecycle::Live, Lifecycle::Retired])),
        prop::option::of(arb_date()),
    )
        .prop_map(|(d, b, l, due)| EucaFilter {
            department: d.map(str::to_string),
            band: b,
            lifecycle: l,
            due_before: due,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn op_sequences_keep_the_store_consistent(ops in prop::collection::vec(arb_op(), 1..40)) {
        let mut store = Store::in_memory();
        let mut reviewed = BTreeSet::new();
        for op in &ops {
            let before = store.document().clone();
            match store.transact(|s| apply(s, op)) {
                Ok(()) => {
                    if let Op::Assess(i, _) | Op::Confirm(i, _) = op {
                        reviewed.insert(euca_id(&store, *i));
                    }
                }
                Err(_) => prop_assert_eq!(store.document(), &before),
            }
            check_invariants(store.document(), &reviewed)?;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn json_round_trip(ops in prop::collection::vec(arb_op(), 0..30)) {
        let store = populated(&ops);
        let parsed: StoreDocument = serde_json::from_str(&store.to_json()).unwrap();
        prop_assert_eq!(&parsed, store.document());
    }

    #[test]
    fn csv_round_trip(ops in prop::collection::vec(arb_op(), 0..30)) {
        let store = populated(&ops);
        let mut csv = Vec::new();
        write_csv(&store, &mut csv).unwrap();
        let mut copy = store.clone();
        read_csv(&mut copy, csv.as_slice()).unwrap();
        prop_assert_eq!(copy.document(), store.document());
    }

    #[test]
    fn listing_equals_linear_scan(ops in prop::collection::vec(arb_op(), 0..30), filter in arb_filter()) {
        let store = populated(&ops);
        let mut expected: Vec<_> = store
            .records()
            .iter()
            .filter(|r| filter.department.as_ref().is_none_or(|d| &r.department == d))
            .filter(|r| filter.band.is_none_or(|b| r.band() == Some(b)))
            .filter(|r| filter.lifecycle.is_none_or(|l| r.lifecycle_status == l))
            .filter(|r| filter.due_before.is_none_or(|d| r.next_review.is_some_and(|n| n < d)))
            .collect();
        expected.sort_by_key(|r| (r.department.clone(), r.name.clone(), r.id.clone()));
        prop_assert_eq!(store.list_eucas(&filter), expected);
    }

    #[test]
    fn confirm_review_is_idempotent(ops in prop::collection::vec(arb_op(), 0..30), on in arb_date()) {
        let mut store = populated(&ops);
        let live: Vec<String> = store.records().iter().filter(|r| r.is_live()).map(|r| r.id.clone()).collect();
        for id in live {
            store.confirm_review(&id, on).unwrap();
            let once = store.document().clone();
            store.confirm_review(&id, on).unwrap();
            prop_assert_eq!(store.document(), &once);
        }
    }
}
