//! Text renderings for command results that are not reports.

use serde::Serialize;
use serde_json::Value;

use crate::scanner::{BaselineDiff, ScanReport};

pub fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result serialises");
    s.push('\n');
    s
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            items.iter().map(scalar).collect::<Vec<_>>().join(";")
        }
        other => other.to_string(),
    }
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(header.len()));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| md_escape(c)).collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    out
}

fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

fn table(format: &str, header: &[&str], rows: &[Vec<String>]) -> String {
    match format {
        "csv" => csv_table(header, rows),
        _ => md_table(header, rows),
    }
}

/// JSON as is; otherwise one `field, value` row per top-level field.
pub fn value(v: &impl Serialize, format: &str) -> String {
    if format == "json" {
        return json(v);
    }
    let rows: Vec<Vec<String>> = match serde_json::to_value(v).expect("result serialises") {
        Value::Object(map) => map.iter().map(|(k, v)| vec![k.clone(), scalar(v)]).collect(),
        other => vec![vec!["value".into(), scalar(&other)]],
    };
    table(format, &["field", "value"], &rows)
}

pub fn count(label: &str, n: usize, format: &str) -> String {
    match format {
        "json" => json(&serde_json::json!({ label: n })),
        _ => format!("{label} {n} records\n"),
    }
}

/// JSON is always an array of reports, one per file in argument order.
pub fn scans(reports: &[ScanReport], format: &str) -> String {
    if format == "json" {
        return json(&reports);
    }
    let mut header = vec!["file".to_string()];
    let mut rows = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        let metrics = match serde_json::to_value(&r.metrics).expect("metrics serialise") {
            Value::Object(m) => m,
            _ => unreachable!("metrics are an object"),
        };
        if i == 0 {
            header.extend(metrics.keys().cloned());
            header.push("complexity_grade".into());
            header.push("controls_framework".into());
        }
        let mut row = vec![r.file.clone()];
        row.extend(metrics.values().map(scalar));
        row.push(r.complexity_grade.map(|g| g.value().to_string()).unwrap_or_default());
        row.push(
            r.controls_framework
                .as_ref()
                .map(|c| c.present.to_string())
                .unwrap_or_default(),
        );
        rows.push(row);
    }
    if rows.is_empty() {
        return table(format, &["file"], &[]);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    if format == "csv" {
        return csv_table(&header, &rows);
    }
    // Markdown reads better with one column per file.
    let mut md_header = vec!["metric"];
    md_header.extend(rows.iter().map(|r| r[0].as_str()));
    let transposed: Vec<Vec<String>> = (1..header.len())
        .map(|i| {
            std::iter::once(header[i].to_string())
                .chain(rows.iter().map(|r| r[i].clone()))
                .collect()
        })
        .collect();
    md_table(&md_header, &transposed)
}

pub fn diff(d: &BaselineDiff, format: &str) -> String {
    if format == "json" {
        return json(d);
    }
    let rows: Vec<Vec<String>> = d
        .entries
        .iter()
        .map(|e| {
            vec![
                e.sheet.clone(),
                e.address.clone().unwrap_or_default(),
                e.kind.as_str().to_string(),
                if e.kind.is_high_severity() { "high" } else { "normal" }.to_string(),
                e.before.clone().unwrap_or_default(),
                e.after.clone().unwrap_or_default(),
            ]
        })
        .collect();
    table(
        format,
        &["sheet", "address", "kind", "severity", "before", "after"],
        &rows,
    )
}
