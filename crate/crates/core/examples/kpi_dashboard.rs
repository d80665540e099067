//! Prints the KPI snapshot and concentration report for the seeded
//! portfolio in each output format.

use chrono::NaiveDate;
use euc_governance::reporting::{department_concentration, kpi_snapshot, render_report, Report};
use euc_governance::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = seed::banded_portfolio();
    let kpi = kpi_snapshot(&store, NaiveDate::from_ymd_opt(2019, 3, 1).unwrap());
    println!("{}", render_report(Report::Kpi(&kpi), "md")?);
    println!("{}", render_report(Report::Kpi(&kpi), "csv")?);

    let c = department_concentration(&seed::concentrated_portfolio(), 7)?;
    println!("{}", render_report(Report::Concentration(&c), "json")?);
    Ok(())
}
