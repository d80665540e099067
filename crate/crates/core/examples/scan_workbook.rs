//! Scans a workbook and prints its complexity indicators.
//!
//! ```text
//! cargo run --example scan_workbook -- path/to/book.xlsx
//! ```
//!
//! With no argument the bundled `links.xlsx` fixture is used.

use std::path::PathBuf;

use euc_governance::scanner::{scan_path, ScannedMetrics};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/links.xlsx"));

    let report = scan_path(&path)?;
    println!("{}", report.file);
    match &report.metrics {
        ScannedMetrics::Available(m) => {
            println!("  sheets            {}", m.sheet_count);
            println!("  formulas          {}", m.formula_count);
            println!("  max IF nesting    {}", m.max_nested_if_level);
            println!("  external links    {}", m.external_links);
            println!("  pivot tables      {}", m.pivot_tables);
            println!(
                "  hidden sheets     {} (+{} very hidden)",
                m.hidden_sheets, m.very_hidden_sheets
            );
            println!("  macros            {}", m.vba_present);
        }
        ScannedMetrics::Encrypted(_) => println!("  encrypted, counts unavailable"),
    }
    if let Some(grade) = report.complexity_grade {
        println!("  complexity grade  {} ({})", grade.value(), grade.label());
    }
    Ok(())
}
