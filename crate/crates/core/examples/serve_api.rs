//! Serves a seeded store over HTTP on a free local port and queries it.
//! Pass `--wait` to keep the service running.

use chrono::NaiveDate;
use euc_governance::api::serve;
use euc_governance::risk::{AssessmentInput, ComplexityGrade, ImpactCategory, MaterialityGrade};
use euc_governance::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("inventory.json");
    seed::banded_portfolio().save_as(&path)?;

    let server = serve(&path, 0)?;
    println!("listening on {}", server.addr());

    let client = reqwest::blocking::Client::new();
    let kpi: serde_json::Value = client.get(server.url("/api/kpi?as_of=2019-03-01")).send()?.json()?;
    println!("band counts {}", kpi["band_counts"]);

    let input = AssessmentInput {
        complexity: ComplexityGrade::High,
        materiality: MaterialityGrade::High,
        impact: ImpactCategory::Financial,
        controls: seed::controls_with_failures(6),
        assessed_on: NaiveDate::from_ymd_opt(2019, 5, 1).unwrap(),
    };
    let res = client.post(server.url("/api/assess")).json(&input).send()?;
    println!("POST /api/assess -> {} {}", res.status(), res.text()?);

    if std::env::args().any(|a| a == "--wait") {
        server.wait()?;
    } else {
        server.shutdown()?;
    }
    Ok(())
}
