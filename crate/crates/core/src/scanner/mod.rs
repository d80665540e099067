//! Workbook scanning: parse an OpenXML package into a cell/formula model,
//! count complexity indicators, grade complexity, check for the
//! Control/Validation/Documentation tab convention, and diff a workbook
//! against its baseline copy.

mod diff;
pub mod formula;
mod framework;
mod metrics;
mod package;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use diff::{diff_against_baseline, BaselineDiff, ChangeKind, DiffEntry};
pub use formula::{nested_if_depth, UnbalancedFormula};
pub use framework::{detect_controls_framework, ControlsFramework, FRAMEWORK_TABS};
pub use metrics::{
    extract_metrics, grade_complexity, scan_path, EncryptedMetrics, ScanReport, ScannedMetrics, WorkbookMetrics,
};
pub use package::{parse_workbook, parse_workbook_bytes};

pub const MAX_ROWS: u32 = 1_048_576;
pub const MAX_COLUMNS: u32 = 16_384;

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a workbook: missing ZIP signature")]
    NotAWorkbook,
    /// The file is an OLE compound document, which is how Office stores
    /// password-encrypted OpenXML packages.
    #[error("workbook is encrypted (compound-file container)")]
    EncryptedWorkbook { file_size: u64 },
    #[error("malformed part `{part}`: {detail}")]
    MalformedPart { part: String, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Visibility {
    Visible,
    Hidden,
    VeryHidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Number,
    Text,
    Bool,
    Error,
    Empty,
}

/// Cached cell value as stored in the package.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CellValue {
    Number(f64),
    Text(String),
    Bool(bool),
    Error(String),
    Empty,
}

impl CellValue {
    pub fn kind(&self) -> ValueKind {
        match self {
            CellValue::Number(_) => ValueKind::Number,
            CellValue::Text(_) => ValueKind::Text,
            CellValue::Bool(_) => ValueKind::Bool,
            CellValue::Error(_) => ValueKind::Error,
            CellValue::Empty => ValueKind::Empty,
        }
    }

    /// Display form used in diff output.
    pub fn render(&self) -> String {
        match self {
            CellValue::Number(n) => n.to_string(),
            CellValue::Text(s) | CellValue::Error(s) => s.clone(),
            CellValue::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
            CellValue::Empty => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    /// A1-style address without sheet or `$`.
    pub address: String,
    /// Formula text without the leading `=`.
    pub formula: Option<String>,
    pub value: CellValue,
    pub array_formula: bool,
    pub style_id: Option<u32>,
}

impl Cell {
    /// (row, column) for ordering cells in reading order.
    pub fn position(&self) -> (u32, u32) {
        formula::split_address(&self.address)
            .map(|(col, row)| (row, col))
            .unwrap_or((u32::MAX, u32::MAX))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetModel {
    pub name: String,
    pub visibility: Visibility,
    pub protected: bool,
    /// 1-based indices of rows marked hidden.
    pub hidden_rows: Vec<u32>,
    /// 1-based indices of columns marked hidden.
    pub hidden_columns: Vec<u32>,
    /// Cells with a formula or a non-empty value, in reading order.
    pub cells: Vec<Cell>,
}

impl SheetModel {
    pub fn new(name: impl Into<String>) -> Self {
        SheetModel {
            name: name.into(),
            visibility: Visibility::Visible,
            protected: false,
            hidden_rows: Vec::new(),
            hidden_columns: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn cell(&self, address: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.address == address)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefinedName {
    pub name: String,
    pub refers_to: String,
}

/// Explicit ARGB colours resolved from a cell format (`cellXfs` entry).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellStyle {
    pub font_rgb: Option<String>,
    pub fill_rgb: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkbookModel {
    pub sheets: Vec<SheetModel>,
    pub defined_names: Vec<DefinedName>,
    pub pivot_part_count: u32,
    /// Target files of the package's external-reference parts, in
    /// `[n]` index order.
    pub external_link_targets: Vec<String>,
    pub vba_present: bool,
    pub workbook_protection: bool,
    pub file_size: u64,
    /// Indexed by style id.
    pub styles: Vec<CellStyle>,
}

impl WorkbookModel {
    pub fn sheet(&self, name: &str) -> Option<&SheetModel> {
        self.sheets.iter().find(|s| s.name == name)
    }

    pub fn cell(&self, sheet: &str, address: &str) -> Option<&Cell> {
        self.sheet(sheet)?.cell(address)
    }

    /// External link count: distinct targets across package parts and
    /// `[n]`/`[file]` prefixes in formulas.
    pub fn external_link_keys(&self) -> std::collections::BTreeSet<String> {
        let mut keys: std::collections::BTreeSet<String> =
            self.external_link_targets.iter().map(|t| normalize_target(t)).collect();
        for cell in self.sheets.iter().flat_map(|s| &s.cells) {
            let Some(f) = &cell.formula else { continue };
            for target in formula::external_targets(f) {
                let key = match target {
                    formula::ExternalTarget::Index(n) => self
                        .external_link_targets
                        .get((n as usize).wrapping_sub(1))
                        .map(|t| normalize_target(t))
                        .unwrap_or_else(|| format!("[{n}]")),
                    formula::ExternalTarget::File(name) => normalize_target(&name),
                };
                keys.insert(key);
            }
        }
        keys
    }
}

fn normalize_target(target: &str) -> String {
    target.rsplit(['/', '\\']).next().unwrap_or(target).to_ascii_lowercase()
}
