//! Compares a workbook against its signed-off baseline.
//!
//! ```text
//! cargo run --example baseline_compare -- baseline.xlsx current.xlsx
//! ```

use std::path::PathBuf;

use euc_governance::scanner::{diff_against_baseline, parse_workbook};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut args = std::env::args_os().skip(1).map(PathBuf::from);
    let baseline = args.next().unwrap_or_else(|| fixtures.join("baseline.xlsx"));
    let current = args.next().unwrap_or_else(|| fixtures.join("baseline_mutated.xlsx"));

    let diff = diff_against_baseline(&parse_workbook(&baseline)?, &parse_workbook(&current)?);
    if diff.is_empty() {
        println!("no changes");
        return Ok(());
    }
    for e in &diff.entries {
        let at = match &e.address {
            Some(a) => format!("{}!{a}", e.sheet),
            None => e.sheet.clone(),
        };
        println!(
            "{at:<12} {:<30} {:?} -> {:?}",
            e.kind.as_str(),
            e.before.as_deref().unwrap_or(""),
            e.after.as_deref().unwrap_or("")
        );
    }
    println!("{} high severity", diff.high_severity().count());
    Ok(())
}
