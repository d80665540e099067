//! Governance reporting over an inventory snapshot: band counts, the band
//! by impact grid, department concentration, overdue reviews and Amber/Red
//! applications missing from the risk register.
//!
//! Retired records are left out unless a caller asks for them.

mod render;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::inventory::{EucaRecord, Store};
use crate::risk::{ImpactCategory, RatingBand};

pub use render::{render_report, Report, ReportFormat};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("unsupported report format `{0}` (expected md, csv or json)")]
    UnsupportedFormat(String),
    #[error("the store holds no live records")]
    EmptyStore,
    #[error("top_k must be at least 1")]
    ZeroTopK,
}

/// Rows follow band order (Blue first), columns impact order (1 first).
pub type BandImpactMatrix = [[u64; 6]; 4];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpiSnapshot {
    pub as_of: NaiveDate,
    pub band_counts: BTreeMap<RatingBand, u64>,
    pub band_impact_matrix: BandImpactMatrix,
    pub department_histogram: BTreeMap<String, u64>,
    pub total_assessed: u64,
    pub overdue_count: u64,
    pub unregistered_amber_red_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverdueReview {
    pub record: EucaRecord,
    pub days_overdue: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepartmentCount {
    pub department: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    /// Largest first; equal counts in name order.
    pub departments: Vec<DepartmentCount>,
    pub total: u64,
    pub top_k: usize,
    pub top_k_share: f64,
}

fn in_scope(store: &Store, include_retired: bool) -> impl Iterator<Item = &EucaRecord> {
    store.records().iter().filter(move |r| include_retired || r.is_live())
}

fn assessed(r: &EucaRecord) -> Option<(RatingBand, ImpactCategory)> {
    r.latest_assessment.as_ref().map(|a| (a.result.band, a.input.impact))
}

fn matrix_over<'a>(records: impl Iterator<Item = &'a EucaRecord>) -> BandImpactMatrix {
    let mut m = [[0; 6]; 4];
    for (band, impact) in records.filter_map(assessed) {
        m[band.rank() as usize][impact.value() as usize - 1] += 1;
    }
    m
}

/// Live records counted by (band, impact) of their latest assessment.
pub fn band_impact_matrix(store: &Store) -> BandImpactMatrix {
    matrix_over(in_scope(store, false))
}

pub fn kpi_snapshot(store: &Store, as_of: NaiveDate) -> KpiSnapshot {
    kpi_snapshot_scoped(store, as_of, false)
}

pub fn kpi_snapshot_scoped(store: &Store, as_of: NaiveDate, include_retired: bool) -> KpiSnapshot {
    let matrix = matrix_over(in_scope(store, include_retired));
    let band_counts: BTreeMap<RatingBand, u64> = RatingBand::ALL
        .into_iter()
        .map(|b| (b, matrix[b.rank() as usize].iter().sum()))
        .collect();
    let mut department_histogram = BTreeMap::new();
    for r in in_scope(store, include_retired) {
        *department_histogram.entry(r.department.clone()).or_insert(0) += 1;
    }
    KpiSnapshot {
        as_of,
        total_assessed: band_counts.values().sum(),
        band_counts,
        band_impact_matrix: matrix,
        department_histogram,
        overdue_count: overdue_scoped(store, as_of, include_retired).len() as u64,
        unregistered_amber_red_count: unregistered_scoped(store, include_retired).len() as u64,
    }
}

/// Share of live records held by the `top_k` largest departments.
pub fn department_concentration(store: &Store, top_k: usize) -> Result<Concentration, ReportError> {
    if top_k == 0 {
        return Err(ReportError::ZeroTopK);
    }
    let mut histogram: BTreeMap<&str, u64> = BTreeMap::new();
    for r in in_scope(store, false) {
        *histogram.entry(r.department.as_str()).or_insert(0) += 1;
    }
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Err(ReportError::EmptyStore);
    }
    let mut departments: Vec<DepartmentCount> = histogram
        .into_iter()
        .map(|(department, count)| DepartmentCount {
            department: department.to_string(),
            count,
        })
        .collect();
    departments.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.department.cmp(&b.department)));
    let top: u64 = departments.iter().take(top_k).map(|d| d.count).sum();
    Ok(Concentration {
        departments,
        total,
        top_k,
        top_k_share: top as f64 / total as f64,
    })
}

/// Live records whose next review falls strictly before `as_of`, most
/// overdue first.
pub fn overdue_reviews(store: &Store, as_of: NaiveDate) -> Vec<OverdueReview> {
    overdue_scoped(store, as_of, false)
}

fn overdue_scoped(store: &Store, as_of: NaiveDate, include_retired: bool) -> Vec<OverdueReview> {
    let mut out: Vec<OverdueReview> = in_scope(store, include_retired)
        .filter_map(|r| {
            let due = r.next_review.filter(|d| *d < as_of)?;
            Some(OverdueReview {
                record: r.clone(),
                days_overdue: (as_of - due).num_days(),
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.days_overdue
            .cmp(&a.days_overdue)
            .then_with(|| a.record.id.cmp(&b.record.id))
    });
    out
}

/// Live Amber and Red records with no open risk-register entry.
pub fn unregistered_amber_red(store: &Store) -> Vec<EucaRecord> {
    unregistered_scoped(store, false)
}

fn unregistered_scoped(store: &Store, include_retired: bool) -> Vec<EucaRecord> {
    let doc = store.document();
    in_scope(store, include_retired)
        .filter(|r| matches!(r.band(), Some(RatingBand::Amber | RatingBand::Red)))
        .filter(|r| !r.risk_ids.iter().any(|id| doc.risk(id).is_some_and(|e| e.is_open())))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::{EucaMetadata, Lifecycle, NewRisk};
    use crate::risk::{assess, AssessmentInput, ComplexityGrade, ControlAnswers, MaterialityGrade};

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn add(store: &mut Store, dept: &str, c: u8, m: u8, impact: u8, failures: u32) -> String {
        let id = store
            .upsert_euca(EucaMetadata {
                name: format!("app {}", store.records().len()),
                department: dept.into(),
                manager: "M".into(),
                ..Default::default()
            })
            .unwrap()
            .id;
        let bits = 0x7FFu16 >> failures;
        let input = AssessmentInput {
            complexity: ComplexityGrade::try_from(c).unwrap(),
            materiality: MaterialityGrade::try_from(m).unwrap(),
            impact: ImpactCategory::try_from(impact).unwrap(),
            controls: ControlAnswers::from_bits(bits),
            assessed_on: d("2018-06-01"),
        };
        store.record_assessment(&id, input, assess(&input)).unwrap();
        id
    }

    #[test]
    fn empty_store_is_all_zero() {
        let k = kpi_snapshot(&Store::in_memory(), d("2019-03-31"));
        assert_eq!(k.total_assessed, 0);
        assert!(k.band_counts.values().all(|&v| v == 0));
        assert_eq!(k.band_impact_matrix, [[0; 6]; 4]);
        assert!(k.department_histogram.is_empty());
        assert_eq!(
            department_concentration(&Store::in_memory(), 1),
            Err(ReportError::EmptyStore)
        );
    }

    #[test]
    fn single_red_financial_record() {
        let mut s = Store::in_memory();
        add(&mut s, "Finance", 3, 3, 5, 11);
        let m = band_impact_matrix(&s);
        assert_eq!(m[RatingBand::Red.rank() as usize][4], 1);
        assert_eq!(m.iter().flatten().sum::<u64>(), 1);
    }

    #[test]
    fn overdue_is_strict_and_live_only() {
        let mut s = Store::in_memory();
        let a = add(&mut s, "Finance", 1, 1, 1, 0);
        let b = add(&mut s, "Finance", 1, 1, 1, 0);
        let c = add(&mut s, "Finance", 1, 1, 1, 0);
        s.confirm_review(&a, d("2018-03-01")).unwrap();
        s.confirm_review(&b, d("2018-04-01")).unwrap();
        s.confirm_review(&c, d("2018-01-01")).unwrap();
        s.set_lifecycle(&c, Lifecycle::Retired, None).unwrap();
        let due = overdue_reviews(&s, d("2019-04-01"));
        assert_eq!(due.len(), 1);
        assert_eq!(due[0].record.id, a);
        assert_eq!(due[0].days_overdue, 31);
    }

    #[test]
    fn unregistered_needs_an_open_entry() {
        let mut s = Store::in_memory();
        let red = add(&mut s, "Finance", 3, 3, 5, 11);
        add(&mut s, "Finance", 1, 1, 1, 0);
        assert_eq!(unregistered_amber_red(&s).len(), 1);
        let e = s
            .link_risk(
                &red,
                NewRisk {
                    description: "manual rekeying".into(),
                    inherent_likelihood: 4,
                    inherent_severity: 4,
                    residual_likelihood: 2,
                    residual_severity: 3,
                    opened: d("2019-01-01"),
                },
            )
            .unwrap();
        assert!(unregistered_amber_red(&s).is_empty());
        s.close_risk(&e.risk_id, d("2019-02-01")).unwrap();
        assert_eq!(unregistered_amber_red(&s).len(), 1);
    }

    #[test]
    fn concentration_orders_and_clamps() {
        let mut s = Store::in_memory();
        for (dept, n) in [("B", 3), ("A", 3), ("C", 4)] {
            for _ in 0..n {
                add(&mut s, dept, 1, 1, 1, 0);
            }
        }
        let c = department_concentration(&s, 2).unwrap();
        let order: Vec<_> = c.departments.iter().map(|d| d.department.as_str()).collect();
        assert_eq!(order, ["C", "A", "B"]);
        assert_eq!(c.top_k_share, 0.7);
        assert_eq!(department_concentration(&s, 10).unwrap().top_k_share, 1.0);
        assert_eq!(department_concentration(&s, 0), Err(ReportError::ZeroTopK));
    }

    #[test]
    fn remediation_moves_counts_between_snapshots() {
        let mut s = Store::in_memory();
        let id = add(&mut s, "Finance", 3, 3, 5, 11);
        let before = kpi_snapshot(&s, d("2019-03-31"));
        let mut input = s.get(&id).unwrap().latest_assessment.clone().unwrap().input;
        input.controls = ControlAnswers::all_pass();
        s.record_assessment(&id, input, assess(&input)).unwrap();
        let after = kpi_snapshot(&s, d("2019-05-31"));
        assert_eq!(before.band_counts[&RatingBand::Red], 1);
        assert_eq!(after.band_counts[&RatingBand::Red], 0);
    }
}
