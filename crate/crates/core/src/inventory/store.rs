use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use super::{
    Assessment, EucaMetadata, EucaRecord, InventoryError, Lifecycle, LifecycleEvent, RiskRegisterEntry, RiskStatus,
    StoreDocument,
};
use crate::risk::{add_one_year, assess, AssessmentInput, AssessmentResult, RatingBand};

const EUCA_PREFIX: &str = "EUCA-";
const RISK_PREFIX: &str = "RISK-";

/// The inventory document plus where it lives. Mutations change memory
/// only; [`Store::save`] or [`Store::transact`] writes them out.
#[derive(Debug, Clone)]
pub struct Store {
    path: Option<PathBuf>,
    doc: StoreDocument,
    clock: fn() -> DateTime<Utc>,
}

/// Predicates for [`Store::list_eucas`]; unset fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EucaFilter {
    pub department: Option<String>,
    pub band: Option<RatingBand>,
    pub lifecycle: Option<Lifecycle>,
    pub due_before: Option<NaiveDate>,
}

impl EucaFilter {
    pub fn matches(&self, r: &EucaRecord) -> bool {
        self.department.as_ref().is_none_or(|d| &r.department == d)
            && self.band.is_none_or(|b| r.band() == Some(b))
            && self.lifecycle.is_none_or(|l| r.lifecycle_status == l)
            && self.due_before.is_none_or(|due| r.next_review.is_some_and(|n| n < due))
    }
}

/// A register entry before it has an id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewRisk {
    pub description: String,
    pub inherent_likelihood: u8,
    pub inherent_severity: u8,
    pub residual_likelihood: u8,
    pub residual_severity: u8,
    pub opened: NaiveDate,
}

fn now_millis() -> DateTime<Utc> {
    Utc::now().trunc_subsecs(3)
}

fn next_id(prefix: &str, existing: impl Iterator<Item = impl AsRef<str>>) -> String {
    let max = existing
        .filter_map(|id| id.as_ref().strip_prefix(prefix)?.parse::<u64>().ok())
        .max()
        .unwrap_or(0);
    format!("{prefix}{:05}", max + 1)
}

fn require(field: &'static str, value: &str) -> Result<(), InventoryError> {
    if value.trim().is_empty() {
        Err(InventoryError::MissingField(field))
    } else {
        Ok(())
    }
}

fn check_scale(field: &'static str, value: u8) -> Result<(), InventoryError> {
    if (1..=5).contains(&value) {
        Ok(())
    } else {
        Err(InventoryError::ScaleViolation { field, value })
    }
}

impl Store {
    pub fn in_memory() -> Self {
        Store {
            path: None,
            doc: StoreDocument::default(),
            clock: now_millis,
        }
    }

    pub fn from_document(doc: StoreDocument) -> Self {
        Store {
            doc,
            ..Store::in_memory()
        }
    }

    /// Loads the store at `path`. A missing file is an empty store that
    /// will be created on first save.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, InventoryError> {
        let path = path.as_ref().to_path_buf();
        let doc = match std::fs::read(&path) {
            Ok(bytes) => {
                let doc: StoreDocument = serde_json::from_slice(&bytes).map_err(|e| InventoryError::Corrupt {
                    path: path.clone(),
                    detail: e.to_string(),
                })?;
                if let Some(problem) = doc.integrity_violations().into_iter().next() {
                    return Err(InventoryError::Corrupt { path, detail: problem });
                }
                doc
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => StoreDocument::default(),
            Err(source) => return Err(InventoryError::Io { path, source }),
        };
        Ok(Store {
            path: Some(path),
            ..Store::from_document(doc)
        })
    }

    /// Replaces the timestamp source, e.g. with a fixed clock for
    /// reproducible documents.
    pub fn set_clock(&mut self, clock: fn() -> DateTime<Utc>) {
        self.clock = clock;
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn document(&self) -> &StoreDocument {
        &self.doc
    }

    pub fn records(&self) -> &[EucaRecord] {
        &self.doc.records
    }

    pub fn register(&self) -> &[RiskRegisterEntry] {
        &self.doc.register
    }

    pub fn get(&self, id: &str) -> Result<&EucaRecord, InventoryError> {
        self.doc
            .record(id)
            .ok_or_else(|| InventoryError::UnknownId(id.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.doc).expect("document serialises");
        text.push('\n');
        text
    }

    /// Writes the document to a temporary file beside the target and
    /// renames it into place. No-op for in-memory stores.
    pub fn save(&self) -> Result<(), InventoryError> {
        let Some(path) = &self.path else { return Ok(()) };
        let io = |source| InventoryError::Io {
            path: path.clone(),
            source,
        };
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(self.to_json().as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(path).map_err(|e| io(e.error))?;
        Ok(())
    }

    /// Points the store at `path` and saves it there.
    pub fn save_as(&mut self, path: impl AsRef<Path>) -> Result<(), InventoryError> {
        self.path = Some(path.as_ref().to_path_buf());
        self.save()
    }

    /// Runs `op` on a copy, saves the copy, then adopts it. On any error
    /// the store in memory and on disk is left as it was.
    pub fn transact<T>(
        &mut self,
        op: impl FnOnce(&mut Store) -> Result<T, InventoryError>,
    ) -> Result<T, InventoryError> {
        let mut next = self.clone();
        let out = op(&mut next)?;
        if next.doc != self.doc {
            next.save()?;
        }
        *self = next;
        Ok(out)
    }

    fn record_mut(&mut self, id: &str) -> Result<&mut EucaRecord, InventoryError> {
        self.doc
            .records
            .iter_mut()
            .find(|r| r.id == id)
            .ok_or_else(|| InventoryError::UnknownId(id.to_string()))
    }

    /// A timestamp strictly later than `previous`.
    fn stamp_after(&self, previous: DateTime<Utc>) -> DateTime<Utc> {
        (self.clock)().max(previous + Duration::milliseconds(1))
    }

    fn touch(&mut self, id: &str) {
        let previous = self.get(id).expect("caller checked id").updated_at;
        let at = self.stamp_after(previous);
        self.record_mut(id).expect("caller checked id").updated_at = at;
    }

    /// Creates a record (fresh id) or replaces the metadata of an
    /// existing one. Creation time and governance state are kept.
    pub fn upsert_euca(&mut self, meta: EucaMetadata) -> Result<EucaRecord, InventoryError> {
        require("name", &meta.name)?;
        require("department", &meta.department)?;
        require("manager", &meta.manager)?;
        match meta.id.as_deref().filter(|id| !id.is_empty()) {
            Some(id) => {
                if self.record_mut(id)?.apply_metadata(&meta) {
                    self.touch(id);
                }
                Ok(self.get(id)?.clone())
            }
            None => {
                let id = next_id(EUCA_PREFIX, self.doc.records.iter().map(|r| &r.id));
                Ok(self.insert(id, &meta))
            }
        }
    }

    /// Inserts a new record under a caller-chosen id. The id must not be
    /// in use.
    pub(super) fn insert(&mut self, id: String, meta: &EucaMetadata) -> EucaRecord {
        debug_assert!(self.doc.record(&id).is_none());
        let now = (self.clock)();
        let mut record = EucaRecord {
            id,
            group_division: String::new(),
            department: String::new(),
            team: String::new(),
            manager: String::new(),
            sme: String::new(),
            data_steward: String::new(),
            data_owner: String::new(),
            tester: String::new(),
            name: String::new(),
            description: String::new(),
            version: String::new(),
            last_release_date: None,
            last_changed_date: None,
            processes: Vec::new(),
            app_type: String::new(),
            file_location: String::new(),
            lifecycle_status: Lifecycle::Live,
            decision_making: false,
            key_data_items: Vec::new(),
            latest_assessment: None,
            assessment_history: Vec::new(),
            next_review: None,
            risk_ids: Vec::new(),
            disposition: Default::default(),
            lifecycle_history: Vec::new(),
            created_at: now,
            updated_at: now,
        };
        record.apply_metadata(meta);
        self.doc.records.push(record.clone());
        record
    }

    /// Attaches an assessment after checking `result` against a fresh
    /// scoring of `input`.
    pub fn record_assessment(
        &mut self,
        euca_id: &str,
        input: AssessmentInput,
        result: AssessmentResult,
    ) -> Result<EucaRecord, InventoryError> {
        self.get(euca_id)?;
        if assess(&input) != result {
            return Err(InventoryError::InconsistentResult {
                euca_id: euca_id.to_string(),
            });
        }
        let assessment = Assessment { input, result };
        let record = self.record_mut(euca_id)?;
        record.next_review = Some(assessment.result.next_review);
        record.assessment_history.push(assessment.clone());
        record.latest_assessment = Some(assessment);
        self.touch(euca_id);
        Ok(self.get(euca_id)?.clone())
    }

    /// Steps the next review to one year after `confirmed_on`.
    pub fn confirm_review(&mut self, euca_id: &str, confirmed_on: NaiveDate) -> Result<EucaRecord, InventoryError> {
        let record = self.record_mut(euca_id)?;
        if !record.is_live() {
            return Err(InventoryError::RetiredRecord(euca_id.to_string()));
        }
        let due = add_one_year(confirmed_on);
        if record.next_review != Some(due) {
            record.next_review = Some(due);
            self.touch(euca_id);
        }
        Ok(self.get(euca_id)?.clone())
    }

    /// Retires or revives a record. Setting the current status again
    /// changes nothing; reviving needs a reason.
    pub fn set_lifecycle(
        &mut self,
        euca_id: &str,
        status: Lifecycle,
        reason: Option<&str>,
    ) -> Result<EucaRecord, InventoryError> {
        let current = self.get(euca_id)?.lifecycle_status;
        if current == status {
            return Ok(self.get(euca_id)?.clone());
        }
        let reason = reason.map(str::trim).filter(|r| !r.is_empty());
        if status == Lifecycle::Live && reason.is_none() {
            return Err(InventoryError::MissingField("reason"));
        }
        let at = self.stamp_after(self.get(euca_id)?.updated_at);
        let record = self.record_mut(euca_id)?;
        record.lifecycle_status = status;
        record.lifecycle_history.push(LifecycleEvent {
            status,
            reason: reason.map(str::to_string),
            at,
        });
        record.updated_at = at;
        Ok(record.clone())
    }

    pub fn link_risk(&mut self, euca_id: &str, risk: NewRisk) -> Result<RiskRegisterEntry, InventoryError> {
        self.get(euca_id)?;
        check_scale("inherent_likelihood", risk.inherent_likelihood)?;
        check_scale("inherent_severity", risk.inherent_severity)?;
        check_scale("residual_likelihood", risk.residual_likelihood)?;
        check_scale("residual_severity", risk.residual_severity)?;
        let entry = RiskRegisterEntry {
            risk_id: next_id(RISK_PREFIX, self.doc.register.iter().map(|r| &r.risk_id)),
            euca_id: euca_id.to_string(),
            description: risk.description,
            inherent_likelihood: risk.inherent_likelihood,
            inherent_severity: risk.inherent_severity,
            residual_likelihood: risk.residual_likelihood,
            residual_severity: risk.residual_severity,
            opened: risk.opened,
            closed: None,
            status: RiskStatus::Open,
        };
        if entry.residual_score() > entry.inherent_score() {
            return Err(InventoryError::ResidualExceedsInherent {
                inherent: entry.inherent_score(),
                residual: entry.residual_score(),
            });
        }
        self.record_mut(euca_id)?.risk_ids.push(entry.risk_id.clone());
        self.touch(euca_id);
        self.doc.register.push(entry.clone());
        Ok(entry)
    }

    pub fn close_risk(&mut self, risk_id: &str, closed_on: NaiveDate) -> Result<RiskRegisterEntry, InventoryError> {
        let entry = self
            .doc
            .register
            .iter_mut()
            .find(|e| e.risk_id == risk_id)
            .ok_or_else(|| InventoryError::UnknownRisk(risk_id.to_string()))?;
        if entry.status == RiskStatus::Closed {
            return Err(InventoryError::AlreadyClosed(risk_id.to_string()));
        }
        if closed_on < entry.opened {
            return Err(InventoryError::DateOrder {
                opened: entry.opened,
                closed: closed_on,
            });
        }
        entry.status = RiskStatus::Closed;
        entry.closed = Some(closed_on);
        Ok(entry.clone())
    }

    /// Matching records ordered by department, then name, then id.
    pub fn list_eucas(&self, filter: &EucaFilter) -> Vec<&EucaRecord> {
        let mut out: Vec<&EucaRecord> = self.doc.records.iter().filter(|r| filter.matches(r)).collect();
        out.sort_by(|a, b| (&a.department, &a.name, &a.id).cmp(&(&b.department, &b.name, &b.id)));
        out
    }

    pub fn draft(&self, key: &str) -> Option<&serde_json::Value> {
        self.doc.drafts.get(key)
    }

    pub fn put_draft(&mut self, key: &str, value: serde_json::Value) {
        self.doc.drafts.insert(key.to_string(), value);
    }

    pub fn remove_draft(&mut self, key: &str) -> Option<serde_json::Value> {
        self.doc.drafts.remove(key)
    }
}
