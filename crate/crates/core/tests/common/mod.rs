//! Random inventory operations shared by the property tests and the
//! acceptance run.
#![allow(dead_code)]

use chrono::NaiveDate;
use euc_governance::inventory::{EucaMetadata, InventoryError, Lifecycle, NewRisk, Store};
use euc_governance::risk::{
    assess, AssessmentInput, ComplexityGrade, ControlAnswers, ImpactCategory, MaterialityGrade,
};
use euc_governance::seed;
use proptest::prelude::*;

fn meta(name: &str, department: &str) -> EucaMetadata {
    EucaMetadata {
        name: name.into(),
        department: department.into(),
        manager: "Owner".into(),
        ..Default::default()
    }
}

#[derive(Debug, Clone)]
pub enum Op {
    Add(usize, usize),
    Rename(usize, usize),
    Assess(usize, AssessmentInput),
    Forge(usize, AssessmentInput),
    Confirm(usize, NaiveDate),
    Retire(usize),
    Revive(usize, bool),
    Link(usize, [u8; 4], NaiveDate),
    Close(usize, NaiveDate),
}

const NAMES: [&str; 5] = ["Ledger", "Rota", "Tracker", "Model", "Claims"];

pub fn arb_date() -> impl Strategy<Value = NaiveDate> {
    (0i64..1500).prop_map(|d| NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + chrono::Duration::days(d))
}

fn arb_input() -> impl Strategy<Value = AssessmentInput> {
    (1..=3u8, 1..=3u8, 1..=6u8, 0..1u16 << 13, arb_date()).prop_map(|(c, m, i, b, on)| AssessmentInput {
        complexity: ComplexityGrade::try_from(c).unwrap(),
        materiality: MaterialityGrade::try_from(m).unwrap(),
        impact: ImpactCategory::try_from(i).unwrap(),
        controls: ControlAnswers::from_bits(b),
        assessed_on: on,
    })
}

pub fn arb_op() -> impl Strategy<Value = Op> {
    let idx = 0usize..8;
    prop_oneof![
        (0usize..5, 0usize..12).prop_map(|(n, d)| Op::Add(n, d)),
        (idx.clone(), 0usize..5).prop_map(|(i, n)| Op::Rename(i, n)),
        (idx.clone(), arb_input()).prop_map(|(i, x)| Op::Assess(i, x)),
        (idx.clone(), arb_input()).prop_map(|(i, x)| Op::Forge(i, x)),
        (idx.clone(), arb_date()).prop_map(|(i, d)| Op::Confirm(i, d)),
        idx.clone().prop_map(Op::Retire),
        (idx.clone(), any::<bool>()).prop_map(|(i, r)| Op::Revive(i, r)),
        (idx.clone(), prop::array::uniform4(0u8..=6), arb_date()).prop_map(|(i, s, d)| Op::Link(i, s, d)),
        (0usize..8, arb_date()).prop_map(|(i, d)| Op::Close(i, d)),
    ]
}

/// Euca id at position `i`, or an id that does not exist.
pub fn euca_id(store: &Store, i: usize) -> String {
    store
        .records()
        .get(i)
        .map(|r| r.id.clone())
        .unwrap_or_else(|| format!("EUCA-9{i:04}"))
}

pub fn apply(store: &mut Store, op: &Op) -> Result<(), InventoryError> {
    match op {
        Op::Add(n, d) => store.upsert_euca(meta(NAMES[*n], seed::DEPARTMENTS[*d])).map(drop),
        Op::Rename(i, n) => {
            let mut m = meta(NAMES[*n], "Finance");
            m.id = Some(euca_id(store, *i));
            store.upsert_euca(m).map(drop)
        }
        Op::Assess(i, x) => store.record_assessment(&euca_id(store, *i), *x, assess(x)).map(drop),
        Op::Forge(i, x) => {
            let mut r = assess(x);
            r.risk_score += 1;
            store.record_assessment(&euca_id(store, *i), *x, r).map(drop)
        }
        Op::Confirm(i, d) => store.confirm_review(&euca_id(store, *i), *d).map(drop),
        Op::Retire(i) => store
            .set_lifecycle(&euca_id(store, *i), Lifecycle::Retired, Some("no longer used"))
            .map(drop),
        Op::Revive(i, with_reason) => store
            .set_lifecycle(
                &euca_id(store, *i),
                Lifecycle::Live,
                with_reason.then_some("back in use"),
            )
            .map(drop),
        Op::Link(i, s, d) => {
            let r = NewRisk {
                description: "risk".into(),
                inherent_likelihood: s[0],
                inherent_severity: s[1],
                residual_likelihood: s[2],
                residual_severity: s[3],
                opened: *d,
            };
            store.link_risk(&euca_id(store, *i), r).map(drop)
        }
        Op::Close(i, d) => {
            let id = store
                .register()
                .get(*i)
                .map(|e| e.risk_id.clone())
                .unwrap_or_else(|| "RISK-99999".into());
            store.close_risk(&id, *d).map(drop)
        }
    }
}

/// Applies every op in its own transaction, ignoring failures.
pub fn populated(ops: &[Op]) -> Store {
    let mut store = Store::in_memory();
    for op in ops {
        let _ = store.transact(|s| apply(s, op));
    }
    store
}
