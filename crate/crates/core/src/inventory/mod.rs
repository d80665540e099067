//! Inventory of EUC applications: metadata records, their assessments,
//! the annual review cycle and the risk register, held in one JSON
//! document on disk.

mod exchange;
mod store;

use std::path::PathBuf;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::risk::{AssessmentInput, AssessmentResult, RatingBand};

pub use exchange::{export_csv, import_csv, read_csv, write_csv, CSV_COLUMNS};
pub use store::{EucaFilter, NewRisk, Store};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum InventoryError {
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("unknown EUCA id `{0}`")]
    UnknownId(String),
    #[error("unknown risk id `{0}`")]
    UnknownRisk(String),
    #[error("stored result for `{euca_id}` does not match a fresh assessment of its input")]
    InconsistentResult { euca_id: String },
    #[error("`{0}` is retired")]
    RetiredRecord(String),
    #[error("{field} must be between 1 and 5, got {value}")]
    ScaleViolation { field: &'static str, value: u8 },
    #[error("residual score {residual} exceeds inherent score {inherent}")]
    ResidualExceedsInherent { inherent: u8, residual: u8 },
    #[error("risk `{0}` is already closed")]
    AlreadyClosed(String),
    #[error("closing date {closed} is before opening date {opened}")]
    DateOrder { opened: NaiveDate, closed: NaiveDate },
    #[error("CSV header mismatch: expected `{expected}`, found `{found}`")]
    SchemaMismatch { expected: String, found: String },
    #[error("CSV line {row}: {detail}")]
    MalformedRow { row: u64, detail: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {detail}")]
    Corrupt { path: PathBuf, detail: String },
}

impl InventoryError {
    /// Stable machine token, shared by the CLI and the HTTP service.
    pub fn code(&self) -> &'static str {
        match self {
            InventoryError::MissingField(_) => "MissingField",
            InventoryError::UnknownId(_) => "UnknownId",
            InventoryError::UnknownRisk(_) => "UnknownRisk",
            InventoryError::InconsistentResult { .. } => "InconsistentResult",
            InventoryError::RetiredRecord(_) => "RetiredRecord",
            InventoryError::ScaleViolation { .. } => "ScaleViolation",
            InventoryError::ResidualExceedsInherent { .. } => "ResidualExceedsInherent",
            InventoryError::AlreadyClosed(_) => "AlreadyClosed",
            InventoryError::DateOrder { .. } => "DateOrder",
            InventoryError::SchemaMismatch { .. } => "SchemaMismatch",
            InventoryError::MalformedRow { .. } => "MalformedRow",
            InventoryError::Io { .. } => "Io",
            InventoryError::Corrupt { .. } => "StoreUnreadable",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lifecycle {
    #[default]
    Live,
    Retired,
}

impl Lifecycle {
    pub fn as_str(self) -> &'static str {
        match self {
            Lifecycle::Live => "live",
            Lifecycle::Retired => "retired",
        }
    }
}

impl std::str::FromStr for Lifecycle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(Lifecycle::Live),
            "retired" => Ok(Lifecycle::Retired),
            other => Err(format!("unknown lifecycle status `{other}`")),
        }
    }
}

/// Chosen response to an application's risk: fix it, get rid of it, or
/// live with it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disposition {
    Mitigate,
    Remove,
    Accept,
    #[default]
    None,
}

impl Disposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Disposition::Mitigate => "mitigate",
            Disposition::Remove => "remove",
            Disposition::Accept => "accept",
            Disposition::None => "none",
        }
    }
}

impl std::str::FromStr for Disposition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mitigate" => Ok(Disposition::Mitigate),
            "remove" => Ok(Disposition::Remove),
            "accept" => Ok(Disposition::Accept),
            "none" | "" => Ok(Disposition::None),
            other => Err(format!("unknown disposition `{other}`")),
        }
    }
}

/// Descriptive fields an owner supplies for an application. `id` is empty
/// for a new record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EucaMetadata {
    pub id: Option<String>,
    pub group_division: String,
    pub department: String,
    pub team: String,
    pub manager: String,
    pub sme: String,
    pub data_steward: String,
    pub data_owner: String,
    pub tester: String,
    pub name: String,
    pub description: String,
    pub version: String,
    pub last_release_date: Option<NaiveDate>,
    pub last_changed_date: Option<NaiveDate>,
    pub processes: Vec<String>,
    pub app_type: String,
    pub file_location: String,
    pub decision_making: bool,
    pub key_data_items: Vec<String>,
    pub disposition: Disposition,
}

/// An assessment as submitted: the answers and the result they produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub input: AssessmentInput,
    pub result: AssessmentResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleEvent {
    pub status: Lifecycle,
    pub reason: Option<String>,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EucaRecord {
    pub id: String,
    pub group_division: String,
    pub department: String,
    pub team: String,
    pub manager: String,
    pub sme: String,
    pub data_steward: String,
    pub data_owner: String,
    pub tester: String,
    pub name: String,
    pub description: String,
    pub version: String,
    pub last_release_date: Option<NaiveDate>,
    pub last_changed_date: Option<NaiveDate>,
    pub processes: Vec<String>,
    pub app_type: String,
    pub file_location: String,
    pub lifecycle_status: Lifecycle,
    pub decision_making: bool,
    pub key_data_items: Vec<String>,
    pub latest_assessment: Option<Assessment>,
    /// Every assessment ever attached, oldest first.
    #[serde(default)]
    pub assessment_history: Vec<Assessment>,
    pub next_review: Option<NaiveDate>,
    pub risk_ids: Vec<String>,
    pub disposition: Disposition,
    #[serde(default)]
    pub lifecycle_history: Vec<LifecycleEvent>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

impl EucaRecord {
    pub fn band(&self) -> Option<RatingBand> {
        self.latest_assessment.as_ref().map(|a| a.result.band)
    }

    pub fn is_live(&self) -> bool {
        self.lifecycle_status == Lifecycle::Live
    }

    pub fn metadata(&self) -> EucaMetadata {
        EucaMetadata {
            id: Some(self.id.clone()),
            group_division: self.group_division.clone(),
            department: self.department.clone(),
            team: self.team.clone(),
            manager: self.manager.clone(),
            sme: self.sme.clone(),
            data_steward: self.data_steward.clone(),
            data_owner: self.data_owner.clone(),
            tester: self.tester.clone(),
            name: self.name.clone(),
            description: self.description.clone(),
            version: self.version.clone(),
            last_release_date: self.last_release_date,
            last_changed_date: self.last_changed_date,
            processes: self.processes.clone(),
            app_type: self.app_type.clone(),
            file_location: self.file_location.clone(),
            decision_making: self.decision_making,
            key_data_items: self.key_data_items.clone(),
            disposition: self.disposition,
        }
    }

    /// Copies every metadata field except `id`. Returns whether anything
    /// changed.
    fn apply_metadata(&mut self, m: &EucaMetadata) -> bool {
        let before = self.metadata();
        self.group_division = m.group_division.clone();
        self.department = m.department.clone();
        self.team = m.team.clone();
        self.manager = m.manager.clone();
        self.sme = m.sme.clone();
        self.data_steward = m.data_steward.clone();
        self.data_owner = m.data_owner.clone();
        self.tester = m.tester.clone();
        self.name = m.name.clone();
        self.description = m.description.clone();
        self.version = m.version.clone();
        self.last_release_date = m.last_release_date;
        self.last_changed_date = m.last_changed_date;
        self.processes = m.processes.clone();
        self.app_type = m.app_type.clone();
        self.file_location = m.file_location.clone();
        self.decision_making = m.decision_making;
        self.key_data_items = m.key_data_items.clone();
        self.disposition = m.disposition;
        self.metadata() != before
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskStatus {
    Open,
    Closed,
}

/// One likelihood x severity risk, scored before (inherent) and after
/// (residual) mitigation on 1 to 5 scales.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RiskRegisterEntry {
    pub risk_id: String,
    pub euca_id: String,
    pub description: String,
    pub inherent_likelihood: u8,
    pub inherent_severity: u8,
    pub residual_likelihood: u8,
    pub residual_severity: u8,
    pub opened: NaiveDate,
    pub closed: Option<NaiveDate>,
    pub status: RiskStatus,
}

impl RiskRegisterEntry {
    pub fn inherent_score(&self) -> u8 {
        self.inherent_likelihood * self.inherent_severity
    }

    pub fn residual_score(&self) -> u8 {
        self.residual_likelihood * self.residual_severity
    }

    pub fn is_open(&self) -> bool {
        self.status == RiskStatus::Open
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreDocument {
    pub schema_version: u32,
    pub records: Vec<EucaRecord>,
    pub register: Vec<RiskRegisterEntry>,
    /// Partially completed questionnaires, keyed by caller-chosen names.
    #[serde(default)]
    pub drafts: std::collections::BTreeMap<String, serde_json::Value>,
}

impl Default for StoreDocument {
    fn default() -> Self {
        StoreDocument {
            schema_version: SCHEMA_VERSION,
            records: Vec::new(),
            register: Vec::new(),
            drafts: Default::default(),
        }
    }
}

impl StoreDocument {
    pub fn record(&self, id: &str) -> Option<&EucaRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn risk(&self, risk_id: &str) -> Option<&RiskRegisterEntry> {
        self.register.iter().find(|r| r.risk_id == risk_id)
    }

    /// Every broken cross-reference, unique-id clash, or register entry
    /// outside its scales. Empty for a healthy store.
    pub fn integrity_violations(&self) -> Vec<String> {
        let mut problems = Vec::new();
        let mut ids = std::collections::BTreeSet::new();
        for r in &self.records {
            if !ids.insert(r.id.as_str()) {
                problems.push(format!("duplicate EUCA id {}", r.id));
            }
            for risk in &r.risk_ids {
                match self.risk(risk) {
                    Some(e) if e.euca_id == r.id => {}
                    Some(e) => problems.push(format!("{} lists {risk}, which belongs to {}", r.id, e.euca_id)),
                    None => problems.push(format!("{} lists unknown risk {risk}", r.id)),
                }
            }
        }
        let mut risk_ids = std::collections::BTreeSet::new();
        for e in &self.register {
            if !risk_ids.insert(e.risk_id.as_str()) {
                problems.push(format!("duplicate risk id {}", e.risk_id));
            }
            match self.record(&e.euca_id) {
                Some(r) if r.risk_ids.contains(&e.risk_id) => {}
                Some(_) => problems.push(format!("{} not listed on {}", e.risk_id, e.euca_id)),
                None => problems.push(format!("{} points at unknown EUCA {}", e.risk_id, e.euca_id)),
            }
            let scales = [
                e.inherent_likelihood,
                e.inherent_severity,
                e.residual_likelihood,
                e.residual_severity,
            ];
            if scales.iter().any(|v| !(1..=5).contains(v)) {
                problems.push(format!("{} has a score outside 1-5", e.risk_id));
            }
            if e.residual_score() > e.inherent_score() {
                problems.push(format!("{} residual exceeds inherent", e.risk_id));
            }
            if (e.status == RiskStatus::Closed) != e.closed.is_some() {
                problems.push(format!("{} status and closing date disagree", e.risk_id));
            }
            if e.closed.is_some_and(|c| c < e.opened) {
                problems.push(format!("{} closed before it opened", e.risk_id));
            }
        }
        problems
    }
}
