//! Cell-level comparison of a working workbook against its baseline copy.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Cell, SheetModel, WorkbookModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChangeKind {
    SheetAdded,
    SheetRemoved,
    FormulaChanged,
    FormulaReplacedByConstant,
    ConstantReplacedByFormula,
    ValueChanged,
    CellAdded,
    CellRemoved,
}

impl ChangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::SheetAdded => "SHEET_ADDED",
            ChangeKind::SheetRemoved => "SHEET_REMOVED",
            ChangeKind::FormulaChanged => "FORMULA_CHANGED",
            ChangeKind::FormulaReplacedByConstant => "FORMULA_REPLACED_BY_CONSTANT",
            ChangeKind::ConstantReplacedByFormula => "CONSTANT_REPLACED_BY_FORMULA",
            ChangeKind::ValueChanged => "VALUE_CHANGED",
            ChangeKind::CellAdded => "CELL_ADDED",
            ChangeKind::CellRemoved => "CELL_REMOVED",
        }
    }

    /// A formula overwritten by a typed or pasted constant is the classic
    /// copy/paste loss event, so it is the one change flagged high.
    pub fn is_high_severity(self) -> bool {
        self == ChangeKind::FormulaReplacedByConstant
    }

    /// The kind reported when the comparison runs the other way round.
    pub fn mirrored(self) -> ChangeKind {
        match self {
            ChangeKind::SheetAdded => ChangeKind::SheetRemoved,
            ChangeKind::SheetRemoved => ChangeKind::SheetAdded,
            ChangeKind::CellAdded => ChangeKind::CellRemoved,
            ChangeKind::CellRemoved => ChangeKind::CellAdded,
            ChangeKind::FormulaReplacedByConstant => ChangeKind::ConstantReplacedByFormula,
            ChangeKind::ConstantReplacedByFormula => ChangeKind::FormulaReplacedByConstant,
            k => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub sheet: String,
    /// `None` for sheet-level entries.
    pub address: Option<String>,
    pub kind: ChangeKind,
    pub before: Option<String>,
    pub after: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineDiff {
    pub entries: Vec<DiffEntry>,
}

impl BaselineDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn high_severity(&self) -> impl Iterator<Item = &DiffEntry> {
        self.entries.iter().filter(|e| e.kind.is_high_severity())
    }
}

fn show(cell: &Cell) -> String {
    match &cell.formula {
        Some(f) => format!("={f}"),
        None => cell.value.render(),
    }
}

fn compare_cells(before: &Cell, after: &Cell) -> Option<(ChangeKind, String, String)> {
    let kind = match (&before.formula, &after.formula) {
        (Some(a), Some(b)) if a != b => ChangeKind::FormulaChanged,
        (Some(_), None) => ChangeKind::FormulaReplacedByConstant,
        (None, Some(_)) => ChangeKind::ConstantReplacedByFormula,
        _ if before.value != after.value => {
            return Some((ChangeKind::ValueChanged, before.value.render(), after.value.render()))
        }
        _ => return None,
    };
    Some((kind, show(before), show(after)))
}

fn diff_sheet(baseline: &SheetModel, current: &SheetModel, out: &mut Vec<DiffEntry>) {
    let mut addresses: BTreeSet<((u32, u32), &str)> = BTreeSet::new();
    let before: BTreeMap<&str, &Cell> = baseline.cells.iter().map(|c| (c.address.as_str(), c)).collect();
    let after: BTreeMap<&str, &Cell> = current.cells.iter().map(|c| (c.address.as_str(), c)).collect();
    for cell in baseline.cells.iter().chain(&current.cells) {
        addresses.insert((cell.position(), cell.address.as_str()));
    }
    for (_, address) in addresses {
        let entry = match (before.get(address), after.get(address)) {
            (Some(b), Some(a)) => compare_cells(b, a).map(|(kind, was, now)| (kind, Some(was), Some(now))),
            (Some(b), None) => Some((ChangeKind::CellRemoved, Some(show(b)), None)),
            (None, Some(a)) => Some((ChangeKind::CellAdded, None, Some(show(a)))),
            (None, None) => None,
        };
        if let Some((kind, was, now)) = entry {
            out.push(DiffEntry {
                sheet: current.name.clone(),
                address: Some(address.to_string()),
                kind,
                before: was,
                after: now,
            });
        }
    }
}

/// Compares formula text first, then cached value. Sheets are matched by
/// name; an added or removed sheet is one sheet-level entry.
pub fn diff_against_baseline(baseline: &WorkbookModel, current: &WorkbookModel) -> BaselineDiff {
    let mut entries = Vec::new();
    for sheet in &baseline.sheets {
        match current.sheet(&sheet.name) {
            Some(now) => diff_sheet(sheet, now, &mut entries),
            None => entries.push(DiffEntry {
                sheet: sheet.name.clone(),
                address: None,
                kind: ChangeKind::SheetRemoved,
                before: None,
                after: None,
            }),
        }
    }
    for sheet in &current.sheets {
        if baseline.sheet(&sheet.name).is_none() {
            entries.push(DiffEntry {
                sheet: sheet.name.clone(),
                address: None,
                kind: ChangeKind::SheetAdded,
                before: None,
                after: None,
            });
        }
    }
    BaselineDiff { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanner::CellValue;

    fn cell(addr: &str, formula: Option<&str>, value: CellValue) -> Cell {
        Cell {
            address: addr.into(),
            formula: formula.map(str::to_string),
            value,
            array_formula: false,
            style_id: None,
        }
    }

    fn book(sheets: Vec<SheetModel>) -> WorkbookModel {
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

    fn ledger() -> SheetModel {
        let mut s = SheetModel::new("Ledger");
        for (i, v) in [10.0, 11.0, 12.0, 9.0].iter().enumerate() {
            s.cells.push(cell(&format!("B{}", i + 1), None, CellValue::Number(*v)));
        }
        s.cells.push(cell("B5", Some("SUM(B1:B4)"), CellValue::Number(42.0)));
        s
    }

    #[test]
    fn reflexive() {
        let a = book(vec![ledger()]);
        assert!(diff_against_baseline(&a, &a).is_empty());
    }

    #[test]
    fn formula_overwritten_by_constant() {
        let a = book(vec![ledger()]);
        let mut b = a.clone();
        b.sheets[0].cells[4] = cell("B5", None, CellValue::Number(42.0));
        let d = diff_against_baseline(&a, &b);
        assert_eq!(d.entries.len(), 1);
        let e = &d.entries[0];
        assert_eq!(e.kind, ChangeKind::FormulaReplacedByConstant);
        assert_eq!(e.address.as_deref(), Some("B5"));
        assert_eq!(e.before.as_deref(), Some("=SUM(B1:B4)"));
        assert_eq!(e.after.as_deref(), Some("42"));
        assert_eq!(d.high_severity().count(), 1);
    }

    #[test]
    fn added_sheet_is_one_entry() {
        let a = book(vec![ledger()]);
        let mut b = a.clone();
        let mut scratch = SheetModel::new("Scratch");
        scratch.cells.push(cell("A1", None, CellValue::Text("notes".into())));
        b.sheets.push(scratch);
        let d = diff_against_baseline(&a, &b);
        assert_eq!(d.entries.len(), 1);
        assert_eq!(d.entries[0].kind, ChangeKind::SheetAdded);
        assert_eq!(d.entries[0].sheet, "Scratch");
    }

    #[test]
    fn each_kind_classified() {
        let a = book(vec![ledger()]);
        let mut b = a.clone();
        let s = &mut b.sheets[0];
        s.cells[0].value = CellValue::Number(100.0);
        s.cells[1] = cell("B2", Some("B1+1"), CellValue::Number(101.0));
        s.cells[4].formula = Some("SUM(B1:B3)".into());
        s.cells.remove(3);
        s.cells.push(cell("C1", None, CellValue::Bool(true)));
        let kinds: Vec<_> = diff_against_baseline(&a, &b)
            .entries
            .into_iter()
            .map(|e| (e.address.unwrap(), e.kind))
            .collect();
        assert_eq!(
            kinds,
            vec![
                ("B1".to_string(), ChangeKind::ValueChanged),
                ("C1".to_string(), ChangeKind::CellAdded),
                ("B2".to_string(), ChangeKind::ConstantReplacedByFormula),
                ("B4".to_string(), ChangeKind::CellRemoved),
                ("B5".to_string(), ChangeKind::FormulaChanged),
            ]
        );
    }

    #[test]
    fn kinds_serialise_screaming_snake() {
        let json = serde_json::to_string(&ChangeKind::FormulaReplacedByConstant).unwrap();
        assert_eq!(json, "\"FORMULA_REPLACED_BY_CONSTANT\"");
        assert_eq!(ChangeKind::CellAdded.as_str(), "CELL_ADDED");
    }
}
