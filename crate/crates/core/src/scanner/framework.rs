use serde::{Deserialize, Serialize};

use super::WorkbookModel;

/// Tab names of the Spreadsheet Controls Framework, in reporting order.
pub const FRAMEWORK_TABS: [&str; 3] = ["Control", "Validation", "Documentation"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlsFramework {
    pub present: bool,
    pub missing: Vec<String>,
}

/// Checks for the Control / Validation / Documentation tabs. Names match
/// case-insensitively with surrounding whitespace ignored.
pub fn detect_controls_framework(model: &WorkbookModel) -> ControlsFramework {
    let missing: Vec<String> = FRAMEWORK_TABS
        .iter()
        .filter(|tab| !model.sheets.iter().any(|s| s.name.trim().eq_ignore_ascii_case(tab)))
        .map(|tab| tab.to_string())
        .collect();
    ControlsFramework {
        present: missing.is_empty(),
        missing,
    }
}
