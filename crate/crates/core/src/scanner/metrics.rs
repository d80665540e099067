use std::path::Path;

use serde::{Deserialize, Serialize};

use super::formula::{if_call_count, nested_if_depth};
use super::framework::{detect_controls_framework, ControlsFramework};
use super::{parse_workbook, ScanError, ValueKind, Visibility, WorkbookModel};
use crate::risk::ComplexityGrade;

/// Complexity indicators for one workbook.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkbookMetrics {
    pub sheet_count: u64,
    pub formulas_with_errors: u64,
    pub array_formulas: u64,
    pub nested_if_count: u64,
    pub max_nested_if_level: u64,
    pub external_links: u64,
    pub pivot_tables: u64,
    pub named_items: u64,
    pub hidden_rows: u64,
    pub hidden_columns: u64,
    pub hidden_sheets: u64,
    pub very_hidden_sheets: u64,
    pub password_protected: bool,
    pub workbook_size_bytes: u64,
    pub invisible_cells: u64,
    pub formula_count: u64,
    pub vba_present: bool,
}

/// Metrics for a workbook that could not be opened because it is
/// encrypted. Everything except protection and file size is unavailable
/// and serialises as `null`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncryptedMetrics {
    pub sheet_count: Option<u64>,
    pub formulas_with_errors: Option<u64>,
    pub array_formulas: Option<u64>,
    pub nested_if_count: Option<u64>,
    pub max_nested_if_level: Option<u64>,
    pub external_links: Option<u64>,
    pub pivot_tables: Option<u64>,
    pub named_items: Option<u64>,
    pub hidden_rows: Option<u64>,
    pub hidden_columns: Option<u64>,
    pub hidden_sheets: Option<u64>,
    pub very_hidden_sheets: Option<u64>,
    pub password_protected: bool,
    pub workbook_size_bytes: u64,
    pub invisible_cells: Option<u64>,
    pub formula_count: Option<u64>,
    pub vba_present: Option<bool>,
}

impl EncryptedMetrics {
    pub fn new(file_size: u64) -> Self {
        EncryptedMetrics {
            sheet_count: None,
            formulas_with_errors: None,
            array_formulas: None,
            nested_if_count: None,
            max_nested_if_level: None,
            external_links: None,
            pivot_tables: None,
            named_items: None,
            hidden_rows: None,
            hidden_columns: None,
            hidden_sheets: None,
            very_hidden_sheets: None,
            password_protected: true,
            workbook_size_bytes: file_size,
            invisible_cells: None,
            formula_count: None,
            vba_present: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScannedMetrics {
    Available(WorkbookMetrics),
    Encrypted(EncryptedMetrics),
}

impl ScannedMetrics {
    pub fn available(&self) -> Option<&WorkbookMetrics> {
        match self {
            ScannedMetrics::Available(m) => Some(m),
            ScannedMetrics::Encrypted(_) => None,
        }
    }

    pub fn password_protected(&self) -> bool {
        match self {
            ScannedMetrics::Available(m) => m.password_protected,
            ScannedMetrics::Encrypted(m) => m.password_protected,
        }
    }
}

/// Everything `scan` reports for one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanReport {
    pub file: String,
    pub metrics: ScannedMetrics,
    /// Absent when the workbook is encrypted.
    pub complexity_grade: Option<ComplexityGrade>,
    pub controls_framework: Option<ControlsFramework>,
}

pub fn extract_metrics(model: &WorkbookModel) -> WorkbookMetrics {
    let mut m = WorkbookMetrics {
        sheet_count: model.sheets.len() as u64,
        pivot_tables: model.pivot_part_count as u64,
        named_items: model.defined_names.len() as u64,
        password_protected: model.workbook_protection || model.sheets.iter().any(|s| s.protected),
        workbook_size_bytes: model.file_size,
        vba_present: model.vba_present,
        external_links: model.external_link_keys().len() as u64,
        ..WorkbookMetrics::default()
    };
    for sheet in &model.sheets {
        match sheet.visibility {
            Visibility::Hidden => m.hidden_sheets += 1,
            Visibility::VeryHidden => m.very_hidden_sheets += 1,
            Visibility::Visible => {}
        }
        m.hidden_rows += sheet.hidden_rows.len() as u64;
        m.hidden_columns += sheet.hidden_columns.len() as u64;
        for cell in &sheet.cells {
            if is_invisible(model, cell) {
                m.invisible_cells += 1;
            }
            let Some(formula) = &cell.formula else { continue };
            m.formula_count += 1;
            if cell.array_formula {
                m.array_formulas += 1;
            }
            if cell.value.kind() == ValueKind::Error {
                m.formulas_with_errors += 1;
            }
            m.nested_if_count += if_call_count(formula) as u64;
            let depth = match nested_if_depth(formula) {
                Ok(d) => d,
                Err(unbalanced) => unbalanced.depth,
            };
            m.max_nested_if_level = m.max_nested_if_level.max(depth as u64);
        }
    }
    m
}

fn is_invisible(model: &WorkbookModel, cell: &super::Cell) -> bool {
    if cell.value.kind() == ValueKind::Empty {
        return false;
    }
    let Some(style) = cell.style_id.and_then(|id| model.styles.get(id as usize)) else {
        return false;
    };
    matches!((&style.font_rgb, &style.fill_rgb), (Some(font), Some(fill)) if font == fill)
}

/// Low: no formulas. Medium: formulas only. High: macros, external links,
/// array formulas, pivot tables or IF nesting three deep.
pub fn grade_complexity(metrics: &WorkbookMetrics) -> ComplexityGrade {
    if metrics.vba_present
        || metrics.external_links > 0
        || metrics.array_formulas > 0
        || metrics.pivot_tables > 0
        || metrics.max_nested_if_level >= 3
    {
        ComplexityGrade::High
    } else if metrics.formula_count > 0 {
        ComplexityGrade::Medium
    } else {
        ComplexityGrade::Low
    }
}

/// Parses, measures and grades one file. Encrypted workbooks produce a
/// report with unavailable metrics instead of an error.
pub fn scan_path(path: impl AsRef<Path>) -> Result<ScanReport, ScanError> {
    let path = path.as_ref();
    let file = path.display().to_string();
    match parse_workbook(path) {
        Ok(model) => {
            let metrics = extract_metrics(&model);
            Ok(ScanReport {
                file,
                complexity_grade: Some(grade_complexity(&metrics)),
                controls_framework: Some(detect_controls_framework(&model)),
                metrics: ScannedMetrics::Available(metrics),
            })
        }
        Err(ScanError::EncryptedWorkbook { file_size }) => Ok(ScanReport {
            file,
            metrics: ScannedMetrics::Encrypted(EncryptedMetrics::new(file_size)),
            complexity_grade: None,
            controls_framework: None,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanner::{Cell, CellStyle, CellValue, SheetModel};

    fn formula_cell(addr: &str, f: &str) -> Cell {
        Cell {
            address: addr.into(),
            formula: Some(f.into()),
            value: CellValue::Number(0.0),
            array_formula: false,
            style_id: None,
        }
    }

    fn model(sheets: Vec<SheetModel>) -> WorkbookModel {
        WorkbookModel {
            sheets,
            defined_names: vec![],
            pivot_part_count: 0,
            external_link_targets: vec![],
            vba_present: false,
            workbook_protection: false,
            file_size: 0,
            styles: vec![],
        }
    }

    #[test]
    fn grade_examples() {
        let zero = WorkbookMetrics::default();
        assert_eq!(grade_complexity(&zero), ComplexityGrade::Low);
        let simple = WorkbookMetrics {
            formula_count: 5,
            max_nested_if_level: 1,
            nested_if_count: 1,
            ..zero.clone()
        };
        assert_eq!(grade_complexity(&simple), ComplexityGrade::Medium);
        let linked = WorkbookMetrics {
            external_links: 2,
            ..zero.clone()
        };
        assert_eq!(grade_complexity(&linked), ComplexityGrade::High);
        let deep = WorkbookMetrics {
            formula_count: 1,
            max_nested_if_level: 3,
            nested_if_count: 3,
            ..zero
        };
        assert_eq!(grade_complexity(&deep), ComplexityGrade::High);
    }

    #[test]
    fn counts_from_in_memory_model() {
        let mut s1 = SheetModel::new("Sheet1");
        s1.cells.push(formula_cell("B1", "IF(A1,IF(A2,1,2),3)"));
        s1.cells.push(formula_cell("C1", "[1]Book2!A1"));
        let mut err = formula_cell("D1", "1/0");
        err.value = CellValue::Error("#DIV/0!".into());
        s1.cells.push(err);
        s1.hidden_rows = vec![3, 4];
        let mut s2 = SheetModel::new("Hidden");
        s2.visibility = Visibility::Hidden;
        s2.protected = true;
        let m = extract_metrics(&model(vec![s1, s2]));
        assert_eq!(m.formula_count, 3);
        assert_eq!(m.nested_if_count, 2);
        assert_eq!(m.max_nested_if_level, 2);
        assert_eq!(m.external_links, 1);
        assert_eq!(m.formulas_with_errors, 1);
        assert_eq!(m.hidden_rows, 2);
        assert_eq!(m.hidden_sheets, 1);
        assert!(m.password_protected);
    }

    #[test]
    fn external_links_deduplicate_part_and_formula() {
        let mut s1 = SheetModel::new("Sheet1");
        s1.cells.push(formula_cell("A1", "[1]Book2!A1+[1]Book2!A2"));
        s1.cells.push(formula_cell("A2", "'[Book2.xlsx]Sheet1'!A1"));
        s1.cells.push(formula_cell("A3", "[2]Other!A1"));
        let mut wb = model(vec![s1]);
        wb.external_link_targets = vec!["file:///C:/data/Book2.xlsx".into()];
        // book2.xlsx (part, [1], literal) and unresolved [2]
        assert_eq!(extract_metrics(&wb).external_links, 2);
    }

    #[test]
    fn invisible_cells_need_matching_explicit_colours() {
        let mut s1 = SheetModel::new("Sheet1");
        for (addr, style) in [("A1", 0), ("A2", 1), ("A3", 2)] {
            s1.cells.push(Cell {
                address: addr.into(),
                formula: None,
                value: CellValue::Text("x".into()),
                array_formula: false,
                style_id: Some(style),
            });
        }
        let mut wb = model(vec![s1]);
        wb.styles = vec![
            CellStyle::default(),
            CellStyle {
                font_rgb: Some("FFFFFFFF".into()),
                fill_rgb: Some("FFFFFFFF".into()),
            },
            CellStyle {
                font_rgb: Some("FF000000".into()),
                fill_rgb: Some("FFFFFFFF".into()),
            },
        ];
        assert_eq!(extract_metrics(&wb).invisible_cells, 1);
    }

    #[test]
    fn encrypted_metrics_serialise_with_nulls() {
        let json = serde_json::to_value(ScannedMetrics::Encrypted(EncryptedMetrics::new(4096))).unwrap();
        assert_eq!(json["password_protected"], true);
        assert_eq!(json["workbook_size_bytes"], 4096);
        assert!(json["sheet_count"].is_null());
        assert!(json["formula_count"].is_null());
    }
}
