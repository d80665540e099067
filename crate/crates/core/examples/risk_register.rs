//! Links register entries to an application and closes one.

use chrono::NaiveDate;
use euc_governance::inventory::{EucaMetadata, NewRisk};
use euc_governance::reporting::unregistered_amber_red;
use euc_governance::seed;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut store = seed::banded_portfolio();
    println!("amber/red without a risk: {}", unregistered_amber_red(&store).len());

    let id = store
        .upsert_euca(EucaMetadata {
            name: "Reinsurance bordereaux".into(),
            department: "Underwriting".into(),
            manager: "C. Novak".into(),
            ..Default::default()
        })?
        .id;
    let opened = NaiveDate::from_ymd_opt(2019, 1, 7).unwrap();
    let entry = store.link_risk(
        &id,
        NewRisk {
            description: "Bordereaux rekeyed by hand each month".into(),
            inherent_likelihood: 4,
            inherent_severity: 4,
            residual_likelihood: 2,
            residual_severity: 3,
            opened,
        },
    )?;
    println!(
        "{} inherent {} residual {}",
        entry.risk_id,
        entry.inherent_score(),
        entry.residual_score()
    );

    let closed = store.close_risk(&entry.risk_id, NaiveDate::from_ymd_opt(2019, 9, 30).unwrap())?;
    println!("{} {:?} on {:?}", closed.risk_id, closed.status, closed.closed);

    let bad = store.link_risk(
        &id,
        NewRisk {
            description: "residual above inherent".into(),
            inherent_likelihood: 2,
            inherent_severity: 2,
            residual_likelihood: 3,
            residual_severity: 3,
            opened,
        },
    );
    println!("rejected: {}", bad.unwrap_err());

    Ok(())
}
