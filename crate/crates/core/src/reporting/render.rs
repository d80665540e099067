use std::fmt::Write as _;

use serde::Serialize;

use super::{Concentration, KpiSnapshot, OverdueReview, ReportError};
use crate::inventory::EucaRecord;
use crate::risk::{ImpactCategory, RatingBand};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, ReportError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(ReportError::UnsupportedFormat(s.to_string())),
        }
    }
}

/// Anything the reporting functions produce.
#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Kpi(&'a KpiSnapshot),
    Records(&'a [EucaRecord]),
    Overdue(&'a [OverdueReview]),
    Concentration(&'a Concentration),
}

pub fn render_report(report: Report<'_>, format: &str) -> Result<String, ReportError> {
    Ok(match format.parse()? {
        ReportFormat::Json => match report {
            Report::Kpi(k) => json(k),
            Report::Records(r) => json(&r),
            Report::Overdue(o) => json(&o),
            Report::Concentration(c) => json(c),
        },
        ReportFormat::Markdown => {
            let (title, table) = rows(report);
            let mut out = String::new();
            if let Some(title) = title {
                let _ = writeln!(out, "# {title}\n");
            }
            for (i, t) in table.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                markdown_table(&mut out, t);
            }
            if let Report::Concentration(c) = report {
                let _ = writeln!(out, "\nTop {} share: {}", c.top_k, c.top_k_share);
            }
            out
        }
        ReportFormat::Csv => match report {
            Report::Kpi(k) => kpi_csv(k),
            other => {
                let (_, tables) = rows(other);
                csv_table(&tables[0])
            }
        },
    })
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

struct Table {
    heading: Option<String>,
    header: Vec<String>,
    body: Vec<Vec<String>>,
}

fn table(heading: Option<&str>, header: &[&str], body: Vec<Vec<String>>) -> Table {
    Table {
        heading: heading.map(str::to_string),
        header: header.iter().map(|h| h.to_string()).collect(),
        body,
    }
}

fn opt_date(d: Option<chrono::NaiveDate>) -> String {
    d.map(|d| d.to_string()).unwrap_or_default()
}

fn rows(report: Report<'_>) -> (Option<String>, Vec<Table>) {
    match report {
        Report::Kpi(k) => {
            let mut bands: Vec<Vec<String>> = k
                .band_counts
                .iter()
                .map(|(b, n)| vec![b.to_string(), n.to_string()])
                .collect();
            bands.push(vec!["Total".into(), k.total_assessed.to_string()]);
            let mut header = vec!["Band"];
            header.extend(ImpactCategory::ALL.iter().map(|i| i.label()));
            let grid = RatingBand::ALL
                .iter()
                .map(|b| {
                    std::iter::once(b.to_string())
                        .chain(k.band_impact_matrix[b.rank() as usize].iter().map(u64::to_string))
                        .collect()
                })
                .collect();
            let depts = k
                .department_histogram
                .iter()
                .map(|(d, n)| vec![d.clone(), n.to_string()])
                .collect();
            let flags = vec![
                vec!["Overdue reviews".into(), k.overdue_count.to_string()],
                vec![
                    "Amber/Red without open register entry".into(),
                    k.unregistered_amber_red_count.to_string(),
                ],
            ];
            (
                Some(format!("KPI snapshot {}", k.as_of)),
                vec![
                    table(None, &["Band", "Count"], bands),
                    table(Some("Band by impact"), &header, grid),
                    table(Some("Departments"), &["Department", "Count"], depts),
                    table(Some("Follow-up"), &["Measure", "Count"], flags),
                ],
            )
        }
        Report::Records(records) => {
            let body = records
                .iter()
                .map(|r| {
                    vec![
                        r.id.clone(),
                        r.name.clone(),
                        r.department.clone(),
                        r.manager.clone(),
                        r.lifecycle_status.as_str().to_string(),
                        r.band().map(|b| b.to_string()).unwrap_or_default(),
                        opt_date(r.next_review),
                    ]
                })
                .collect();
            (
                None,
                vec![table(
                    None,
                    &[
                        "id",
                        "name",
                        "department",
                        "manager",
                        "lifecycle_status",
                        "band",
                        "next_review",
                    ],
                    body,
                )],
            )
        }
        Report::Overdue(items) => {
            let body = items
                .iter()
                .map(|o| {
                    vec![
                        o.record.id.clone(),
                        o.record.name.clone(),
                        o.record.department.clone(),
                        o.record.manager.clone(),
                        opt_date(o.record.next_review),
                        o.days_overdue.to_string(),
                    ]
                })
                .collect();
            (
                None,
                vec![table(
                    None,
                    &["id", "name", "department", "manager", "next_review", "days_overdue"],
                    body,
                )],
            )
        }
        Report::Concentration(c) => {
            let mut running = 0;
            let body = c
                .departments
                .iter()
                .map(|d| {
                    running += d.count;
                    vec![
                        d.department.clone(),
                        d.count.to_string(),
                        (running as f64 / c.total as f64).to_string(),
                    ]
                })
                .collect();
            (
                None,
                vec![table(None, &["department", "count", "cumulative_share"], body)],
            )
        }
    }
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn markdown_table(out: &mut String, t: &Table) {
    if let Some(h) = &t.heading {
        let _ = writeln!(out, "## {h}\n");
    }
    let line = |cells: &[String]| {
        let inner: Vec<String> = cells.iter().map(|c| md_cell(c)).collect();
        format!("| {} |\n", inner.join(" | "))
    };
    out.push_str(&line(&t.header));
    out.push_str(&format!("|{}\n", "---|".repeat(t.header.len())));
    for row in &t.body {
        out.push_str(&line(row));
    }
}

fn csv_table(t: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).expect("in-memory write");
    for row in &t.body {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

/// Long format, one `section,key,count` row per non-zero figure.
fn kpi_csv(k: &KpiSnapshot) -> String {
    let mut body = Vec::new();
    let mut push = |section: &str, key: String, n: u64| {
        if n > 0 {
            body.push(vec![section.to_string(), key, n.to_string()]);
        }
    };
    for (b, n) in &k.band_counts {
        push("band", b.to_string(), *n);
    }
    for b in RatingBand::ALL {
        for i in ImpactCategory::ALL {
            let n = k.band_impact_matrix[b.rank() as usize][i.value() as usize - 1];
            push("band_impact", format!("{b}/{}", i.value()), n);
        }
    }
    for (d, n) in &k.department_histogram {
        push("department", d.clone(), *n);
    }
    push("total", "assessed".into(), k.total_assessed);
    push("total", "overdue".into(), k.overdue_count);
    push("total", "unregistered_amber_red".into(), k.unregistered_amber_red_count);
    csv_table(&table(None, &["section", "key", "count"], body))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inventory::Store;
    use crate::reporting::kpi_snapshot;

    fn empty() -> KpiSnapshot {
        kpi_snapshot(&Store::in_memory(), "2019-03-31".parse().unwrap())
    }

    #[test]
    fn empty_snapshot_csv_is_header_only() {
        assert_eq!(
            render_report(Report::Kpi(&empty()), "csv").unwrap(),
            "section,key,count\n"
        );
    }

    #[test]
    fn markdown_has_band_rows() {
        let md = render_report(Report::Kpi(&empty()), "md").unwrap();
        assert!(md.starts_with("# KPI snapshot 2019-03-31"));
        assert!(md.contains("| Band | Count |\n|---|---|\n| Blue | 0 |"));
        assert!(md.contains("| Red | 0 | 0 | 0 | 0 | 0 | 0 |"));
    }

    #[test]
    fn unknown_format() {
        assert_eq!(
            render_report(Report::Kpi(&empty()), "pdf"),
            Err(ReportError::UnsupportedFormat("pdf".into()))
        );
    }

    #[test]
    fn json_mirrors_field_names() {
        let v: serde_json::Value =
            serde_json::from_str(&render_report(Report::Kpi(&empty()), "json").unwrap()).unwrap();
        for key in [
            "as_of",
            "band_counts",
            "band_impact_matrix",
            "department_histogram",
            "total_assessed",
            "overdue_count",
            "unregistered_amber_red_count",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["band_counts"]["Red"], 0);
    }
}
