//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Random sampling uses a deterministic proptest runner so every
//! run sees the same cases.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use euc_governance::inventory::Store;
use euc_governance::inventory::{read_csv, write_csv, StoreDocument};
use euc_governance::reporting::{department_concentration, kpi_snapshot};
use euc_governance::risk::{
    add_one_year, assess, AssessmentInput, ComplexityGrade, ControlAnswers, ImpactCategory, MaterialityGrade,
    RatingBand, CONTROL_FIELDS,
};
use euc_governance::scanner::{diff_against_baseline, parse_workbook, scan_path, ChangeKind, ScannedMetrics};
use euc_governance::seed;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::Value;

mod common;

type Outcome = Result<String, String>;

struct Criterion {
    id: u8,
    name: &'static str,
    tolerance: &'static str,
    budget: Option<Duration>,
    check: fn() -> Outcome,
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn manifest() -> Value {
    let text = std::fs::read_to_string(fixture("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sample<S: Strategy>(runner: &mut TestRunner, strategy: &S) -> S::Value {
    strategy.new_tree(runner).unwrap().current()
}

fn input(c: u8, m: u8, impact: u8, bits: u16) -> AssessmentInput {
    AssessmentInput {
        complexity: ComplexityGrade::try_from(c).unwrap(),
        materiality: MaterialityGrade::try_from(m).unwrap(),
        impact: ImpactCategory::try_from(impact).unwrap(),
        controls: ControlAnswers::from_bits(bits),
        assessed_on: date("2019-03-01"),
    }
}

fn portfolio_counts() -> Outcome {
    let store = seed::banded_portfolio();
    let k = kpi_snapshot(&store, date("2019-03-01"));
    let counts: Vec<u64> = RatingBand::ALL.iter().rev().map(|b| k.band_counts[b]).collect();
    ensure(counts == [8, 14, 116, 20], || {
        format!("red/amber/green/blue = {counts:?}")
    })?;
    let cells: u64 = k.band_impact_matrix.iter().flatten().sum();
    ensure(cells == 158, || format!("matrix total {cells}"))?;
    Ok(format!("red/amber/green/blue = {counts:?}, matrix total {cells}"))
}

fn impact_clamps() -> Outcome {
    let mut checked = 0u32;
    let mut violations = Vec::new();
    for c in 1..=3u8 {
        for m in 1..=3u8 {
            for i in 1..=6u8 {
                for bits in 0..1u16 << 13 {
                    let x = input(c, m, i, bits);
                    let band = assess(&x).band;
                    let ceiling = match i {
                        1 => RatingBand::Green,
                        2 | 3 => RatingBand::Amber,
                        _ => RatingBand::Red,
                    };
                    if band > ceiling {
                        violations.push(format!("C={c} M={m} I={i} bits={bits:#x} -> {}", band.as_str()));
                    }
                    checked += 1;
                }
            }
        }
    }
    ensure(checked == 442_368, || format!("only {checked} inputs enumerated"))?;
    ensure(violations.is_empty(), || {
        format!("{} violations, first {}", violations.len(), violations[0])
    })?;
    Ok(format!("{checked} inputs, 0 violations"))
}

fn remediation_monotone() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let strategy = (1..=3u8, 1..=3u8, 1..=6u8, 0..1u16 << 13, any::<prop::sample::Index>());
    let mut flips = 0u32;
    while flips < 10_000 {
        let (c, m, i, bits, pick) = sample(&mut runner, &strategy);
        let x = input(c, m, i, bits);
        let failing: Vec<&str> = CONTROL_FIELDS
            .iter()
            .copied()
            .filter(|f| !x.controls.get(f).unwrap())
            .collect();
        if failing.is_empty() {
            continue;
        }
        let field = failing[pick.index(failing.len())];
        let mut fixed = x;
        fixed.controls.set(field, true).unwrap();
        let (before, after) = (assess(&x).band, assess(&fixed).band);
        ensure(after.rank() <= before.rank(), || {
            format!("{x:?}: fixing {field} moved {} -> {}", before.as_str(), after.as_str())
        })?;
        flips += 1;
    }
    Ok(format!("{flips} single-control fixes, no band increase"))
}

fn dlc_rule() -> Outcome {
    for c in 1..=3u8 {
        for m in 1..=3u8 {
            for bits in [0u16, 0x7FF, 0x1FFF] {
                let r = assess(&input(c, m, 4, bits));
                ensure(r.dlc_required == (c + m >= 5), || {
                    format!("C={c} M={m}: dlc {}", r.dlc_required)
                })?;
            }
        }
    }
    Ok("9 grade pairs".into())
}

fn fixture_metrics() -> Outcome {
    let m = manifest();
    let mut matched = 0;
    for wb in m["workbooks"].as_array().unwrap() {
        let file = wb["file"].as_str().unwrap();
        let path = fixture(file);
        let report = scan_path(&path).map_err(|e| format!("{file}: {e}"))?;
        let ScannedMetrics::Available(metrics) = &report.metrics else {
            return Err(format!("{file}: metrics unavailable"));
        };
        let mut expected = wb["metrics"].clone();
        expected["workbook_size_bytes"] = std::fs::metadata(&path).unwrap().len().into();
        let actual = serde_json::to_value(metrics).unwrap();
        ensure(actual == expected, || format!("{file}: {actual} != {expected}"))?;
        let grade = report.complexity_grade.map(|g| u64::from(g.value()));
        ensure(grade == wb["complexity_grade"].as_u64(), || {
            format!("{file}: grade {grade:?}")
        })?;
        matched += 1;
    }
    ensure(matched >= 6, || format!("only {matched} fixtures"))?;
    for (file, want) in [
        ("logging_only.xlsx", 1u8),
        ("simple_formulas.xlsx", 2),
        ("links.xlsx", 3),
        ("macro.xlsm", 3),
    ] {
        let grade = scan_path(fixture(file)).unwrap().complexity_grade.map(|g| g.value());
        ensure(grade == Some(want), || {
            format!("{file}: grade {grade:?}, expected {want}")
        })?;
    }
    Ok(format!("{matched} fixtures match, grades 1/2/3/3"))
}

fn controls_framework() -> Outcome {
    let present = scan_path(fixture("controls_framework.xlsx"))
        .unwrap()
        .controls_framework
        .unwrap();
    ensure(present.present, || format!("missing sheets {:?}", present.missing))?;
    let m = manifest();
    let single = m["workbooks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|w| w["metrics"]["sheet_count"] == 1)
        .and_then(|w| w["file"].as_str())
        .ok_or("no single-sheet fixture")?;
    let absent = scan_path(fixture(single)).unwrap().controls_framework.unwrap();
    ensure(!absent.present, || format!("{single} reported a framework"))?;
    Ok(format!("controls_framework.xlsx present, {single} absent"))
}

fn review_dates() -> Outcome {
    let mut store = Store::in_memory();
    let id = store
        .upsert_euca(euc_governance::inventory::EucaMetadata {
            name: "Rota".into(),
            department: "Facilities".into(),
            manager: "Owner".into(),
            ..Default::default()
        })
        .unwrap()
        .id;
    for (on, next) in [("2019-03-10", "2020-03-10"), ("2020-02-29", "2021-02-28")] {
        let rec = store.confirm_review(&id, date(on)).map_err(|e| e.to_string())?;
        ensure(rec.next_review == Some(date(next)), || {
            format!("{on} -> {:?}", rec.next_review)
        })?;
        ensure(add_one_year(date(on)) == date(next), || format!("add_one_year({on})"))?;
    }
    Ok("2019-03-10 -> 2020-03-10, 2020-02-29 -> 2021-02-28".into())
}

fn baseline_diff() -> Outcome {
    let baseline = parse_workbook(fixture("baseline.xlsx")).map_err(|e| e.to_string())?;
    let mutated = parse_workbook(fixture("baseline_mutated.xlsx")).map_err(|e| e.to_string())?;
    let same = diff_against_baseline(&baseline, &baseline);
    ensure(same.is_empty(), || {
        format!("self diff has {} entries", same.entries.len())
    })?;
    let d = diff_against_baseline(&baseline, &mutated);
    ensure(d.entries.len() == 1, || format!("{} entries", d.entries.len()))?;
    let e = &d.entries[0];
    ensure(
        e.kind == ChangeKind::FormulaReplacedByConstant && e.sheet == "Ledger" && e.address.as_deref() == Some("B5"),
        || format!("{e:?}"),
    )?;
    Ok("self diff empty, one FORMULA_REPLACED_BY_CONSTANT at Ledger!B5".into())
}

fn concentration() -> Outcome {
    let c = department_concentration(&seed::concentrated_portfolio(), 7).map_err(|e| e.to_string())?;
    ensure(c.top_k_share == 0.85, || format!("share {}", c.top_k_share))?;
    Ok(format!("top-7 share {} of {}", c.top_k_share, c.total))
}

fn round_trips() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let ops = prop::collection::vec(common::arb_op(), 1..40);
    let mut stores = vec![seed::banded_portfolio(), seed::concentrated_portfolio()];
    for run in 0..1_000 {
        let mut store = Store::in_memory();
        for op in sample(&mut runner, &ops) {
            let _ = store.transact(|s| common::apply(s, &op));
            let v = store.document().integrity_violations();
            ensure(v.is_empty(), || format!("sequence {run}: {v:?}"))?;
        }
        if run % 10 == 0 {
            stores.push(store);
        }
    }
    for store in &stores {
        let parsed: StoreDocument = serde_json::from_str(&store.to_json()).map_err(|e| e.to_string())?;
        ensure(&parsed == store.document(), || "JSON round trip differs".into())?;
        let mut csv = Vec::new();
        write_csv(store, &mut csv).map_err(|e| e.to_string())?;
        let mut copy = store.clone();
        read_csv(&mut copy, csv.as_slice()).map_err(|e| e.to_string())?;
        ensure(copy.document() == store.document(), || "CSV round trip differs".into())?;
    }
    Ok(format!("1000 sequences clean, {} stores round-tripped", stores.len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "portfolio band counts",
            tolerance: "exact, < 1 s",
            budget: Some(Duration::from_secs(1)),
            check: portfolio_counts,
        },
        Criterion {
            id: 2,
            name: "impact clamps, exhaustive",
            tolerance: "0 violations, < 10 s",
            budget: Some(Duration::from_secs(10)),
            check: impact_clamps,
        },
        Criterion {
            id: 3,
            name: "remediation never raises band",
            tolerance: "10000 flips, 0 increases",
            budget: None,
            check: remediation_monotone,
        },
        Criterion {
            id: 4,
            name: "DLC rule",
            tolerance: "exact",
            budget: None,
            check: dlc_rule,
        },
        Criterion {
            id: 5,
            name: "fixture metrics and grades",
            tolerance: ">= 6 fixtures, exact",
            budget: None,
            check: fixture_metrics,
        },
        Criterion {
            id: 6,
            name: "controls framework detection",
            tolerance: "exact",
            budget: None,
            check: controls_framework,
        },
        Criterion {
            id: 7,
            name: "review date roll",
            tolerance: "exact",
            budget: None,
            check: review_dates,
        },
        Criterion {
            id: 8,
            name: "baseline diff",
            tolerance: "exact",
            budget: None,
            check: baseline_diff,
        },
        Criterion {
            id: 9,
            name: "department concentration",
            tolerance: "== 0.85",
            budget: None,
            check: concentration,
        },
        Criterion {
            id: 10,
            name: "store round trips and integrity",
            tolerance: "equal stores, 0 violations",
            budget: None,
            check: round_trips,
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.check)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {elapsed:.2?}, budget {budget:?}"));
            }
        }
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{status} {:>2} {:<34} {:<30} {:>9.2?}  {detail}",
            c.id,
            c.name,
            format!("[{}]", c.tolerance),
            elapsed
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
