//! CSV exchange with department heads.
//!
//! The export carries the owner-editable metadata plus a read-only summary
//! of the latest assessment. Import applies the metadata columns by id and
//! checks the summary columns for well-formedness only: assessments enter
//! the store through `record_assessment`, never through a spreadsheet.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{Disposition, EucaMetadata, InventoryError, Lifecycle, Store};
use crate::risk::RatingBand;

pub const CSV_COLUMNS: [&str; 19] = [
    "id",
    "name",
    "department",
    "team",
    "manager",
    "sme",
    "data_owner",
    "app_type",
    "file_location",
    "lifecycle_status",
    "complexity",
    "materiality",
    "impact",
    "band",
    "risk_score",
    "dlc_required",
    "next_review",
    "risk_ids",
    "disposition",
];

const IMPORT_REASON: &str = "CSV import";

fn csv_err(e: csv::Error) -> InventoryError {
    let row = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => InventoryError::Io {
            path: "<csv>".into(),
            source,
        },
        other => InventoryError::MalformedRow {
            row,
            detail: format!("{other:?}"),
        },
    }
}

/// Writes one row per record, ordered like `list_eucas`. Returns the
/// number of data rows.
pub fn write_csv(store: &Store, out: impl Write) -> Result<usize, InventoryError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    let records = store.list_eucas(&Default::default());
    for r in &records {
        let a = r.latest_assessment.as_ref();
        let row: [String; 19] = [
            r.id.clone(),
            r.name.clone(),
            r.department.clone(),
            r.team.clone(),
            r.manager.clone(),
            r.sme.clone(),
            r.data_owner.clone(),
            r.app_type.clone(),
            r.file_location.clone(),
            r.lifecycle_status.as_str().into(),
            a.map(|a| a.input.complexity.value().to_string()).unwrap_or_default(),
            a.map(|a| a.input.materiality.value().to_string()).unwrap_or_default(),
            a.map(|a| a.input.impact.value().to_string()).unwrap_or_default(),
            a.map(|a| a.result.band.to_string()).unwrap_or_default(),
            a.map(|a| a.result.risk_score.to_string()).unwrap_or_default(),
            a.map(|a| a.result.dlc_required.to_string()).unwrap_or_default(),
            r.next_review.map(|d| d.to_string()).unwrap_or_default(),
            r.risk_ids.join(";"),
            r.disposition.as_str().into(),
        ];
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| InventoryError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(records.len())
}

pub fn export_csv(store: &Store, path: impl AsRef<Path>) -> Result<usize, InventoryError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| InventoryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(store, std::io::BufWriter::new(file))
}

struct ImportRow {
    line: u64,
    id: Option<String>,
    name: String,
    department: String,
    team: String,
    manager: String,
    sme: String,
    data_owner: String,
    app_type: String,
    file_location: String,
    lifecycle: Lifecycle,
    disposition: Disposition,
}

fn optional<T>(
    value: &str,
    parse: impl FnOnce(&str) -> Option<T>,
    column: &str,
    line: u64,
) -> Result<Option<T>, InventoryError> {
    if value.trim().is_empty() {
        return Ok(None);
    }
    parse(value.trim())
        .map(Some)
        .ok_or_else(|| InventoryError::MalformedRow {
            row: line,
            detail: format!("bad {column} `{value}`"),
        })
}

fn in_range(max: u8) -> impl FnOnce(&str) -> Option<u8> {
    move |s| s.parse::<u8>().ok().filter(|v| (1..=max).contains(v))
}

fn parse_row(rec: &csv::StringRecord) -> Result<ImportRow, InventoryError> {
    let line = rec.position().map(|p| p.line()).unwrap_or(0);
    let f = |i: usize| rec.get(i).unwrap_or("").to_string();
    let bad = |detail: String| InventoryError::MalformedRow { row: line, detail };

    optional(&f(10), in_range(3), "complexity", line)?;
    optional(&f(11), in_range(3), "materiality", line)?;
    optional(&f(12), in_range(6), "impact", line)?;
    optional(&f(13), |s| s.parse::<RatingBand>().ok(), "band", line)?;
    optional(&f(14), in_range(27), "risk_score", line)?;
    optional(&f(15), |s| s.parse::<bool>().ok(), "dlc_required", line)?;
    optional(&f(16), |s| s.parse::<NaiveDate>().ok(), "next_review", line)?;
    if f(17).split(';').any(|id| id.trim().is_empty()) && !f(17).trim().is_empty() {
        return Err(bad(format!("bad risk_ids `{}`", f(17))));
    }

    let id = f(0).trim().to_string();
    Ok(ImportRow {
        line,
        id: (!id.is_empty()).then_some(id),
        name: f(1),
        department: f(2),
        team: f(3),
        manager: f(4),
        sme: f(5),
        data_owner: f(6),
        app_type: f(7),
        file_location: f(8),
        lifecycle: f(9).parse().map_err(bad)?,
        disposition: f(18).parse().map_err(bad)?,
    })
}

fn apply_row(store: &mut Store, row: ImportRow) -> Result<(), InventoryError> {
    let existing = row.id.as_deref().and_then(|id| store.document().record(id));
    let mut meta = existing.map(|r| r.metadata()).unwrap_or_default();
    meta.name = row.name;
    meta.department = row.department;
    meta.team = row.team;
    meta.manager = row.manager;
    meta.sme = row.sme;
    meta.data_owner = row.data_owner;
    meta.app_type = row.app_type;
    meta.file_location = row.file_location;
    meta.disposition = row.disposition;
    let as_row = |e: InventoryError| match e {
        InventoryError::MissingField(field) => InventoryError::MalformedRow {
            row: row.line,
            detail: format!("missing {field}"),
        },
        other => other,
    };
    let record = match (existing.is_some(), row.id) {
        (true, id) => store.upsert_euca(EucaMetadata { id, ..meta }).map_err(as_row)?,
        (false, None) => store.upsert_euca(meta).map_err(as_row)?,
        (false, Some(id)) => {
            // Validate through upsert's rules before inserting under the
            // imported id.
            Store::in_memory().upsert_euca(meta.clone()).map_err(as_row)?;
            store.insert(id, &meta)
        }
    };
    store.set_lifecycle(&record.id, row.lifecycle, Some(IMPORT_REASON))?;
    Ok(())
}

/// Upserts every row by id (blank id creates a record). All rows are
/// validated before anything is applied; on error the store is unchanged.
pub fn read_csv(store: &mut Store, input: impl Read) -> Result<usize, InventoryError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(InventoryError::SchemaMismatch {
            expected: CSV_COLUMNS.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in reader.records() {
        let row = parse_row(&rec.map_err(csv_err)?)?;
        if let Some(id) = &row.id {
            if !seen.insert(id.clone()) {
                return Err(InventoryError::MalformedRow {
                    row: row.line,
                    detail: format!("duplicate id `{id}`"),
                });
            }
        }
        rows.push(row);
    }
    let count = rows.len();
    let mut next = store.clone();
    for row in rows {
        apply_row(&mut next, row)?;
    }
    *store = next;
    Ok(count)
}

pub fn import_csv(store: &mut Store, path: impl AsRef<Path>) -> Result<usize, InventoryError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| InventoryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(store, std::io::BufReader::new(file))
}
