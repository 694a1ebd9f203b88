//! The union catalog.
//!
//! Entries are keyed by OAI identifier. Code clauses are answered from an
//! inverted index keyed by `(element, canonical code)`, where every code is
//! also filed under each of its `/`-separated ancestors and Ethnologue
//! codes with an ISO twin are filed under the ISO code. Text clauses scan.
//!
//! A directory-backed catalog keeps three files:
//!
//! - `catalog.snapshot`: one JSON [`CatalogEntry`] per line, sorted by
//!   identifier;
//! - `catalog.log`: operations since the snapshot, one JSON object per
//!   line, either `{"op":"upsert","entry":{...}}` or
//!   `{"op":"delete","identifier":"..."}`;
//! - `providers.json`: the harvester's provider states.
//!
//! Opening replays the log over the snapshot. A final log line without its
//! newline (an interrupted append) is discarded.

pub mod api;
mod query;
mod render;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harvest::HarvestState;
use crate::model::{has_errors, validate_record, Diagnostic, ElementName, MetadataRecord, ModelError};
use crate::oai::OaiIdentifier;
use crate::vocab::{VocabError, VocabId, VocabularyRegistry};

pub use query::{Clause, ElementSelector, MatchKind, Query};
pub use render::{RenderedEntry, RenderedRow};

use query::{element_key, key_prefixes, ResolvedClause};

const SNAPSHOT_FILE: &str = "catalog.snapshot";
const LOG_FILE: &str = "catalog.log";
const PROVIDERS_FILE: &str = "providers.json";

/// Log length that triggers compaction into the snapshot.
pub const COMPACT_AFTER: usize = 1000;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("record for {identifier} is not valid: {}", first_error(.diagnostics))]
    InvalidRecord {
        identifier: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{identifier} does not belong to provider {provider_id:?}")]
    IdentifierMismatch { identifier: String, provider_id: String },
    #[error("no entry {0}")]
    NotFound(String),
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("{0} does not carry codes")]
    NotCoded(ElementName),
    #[error("a query needs at least one clause")]
    EmptyQuery,
    #[error("malformed clause {0:?}: expected <element>:<code|text|any>:<value>")]
    BadClause(String),
    #[error(transparent)]
    Vocabulary(#[from] VocabError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn first_error(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .find(|d| d.is_error())
        .map(|d| d.to_string())
        .unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub identifier: String,
    pub provider_id: String,
    pub datestamp: DateTime<Utc>,
    pub record: MetadataRecord,
}

impl CatalogEntry {
    /// An entry whose provider is the identifier's archive segment.
    pub fn new(identifier: impl Into<String>, datestamp: DateTime<Utc>, record: MetadataRecord) -> Self {
        let identifier = identifier.into();
        let provider_id = identifier
            .parse::<OaiIdentifier>()
            .map(|id| id.archive().to_string())
            .unwrap_or_default();
        CatalogEntry {
            identifier,
            provider_id,
            datestamp,
            record,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpsertOutcome {
    Added,
    Updated,
    /// The stored entry was already identical.
    Unchanged,
}

/// An entry with the codes that satisfied the query's code clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchHit {
    pub entry: CatalogEntry,
    pub matched_codes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum LogOp {
    Upsert { entry: CatalogEntry },
    Delete { identifier: String },
}

type IndexKey = (ElementName, String);

#[derive(Default)]
struct Inner {
    entries: BTreeMap<String, CatalogEntry>,
    index: HashMap<IndexKey, BTreeSet<String>>,
    log_lines: usize,
}

impl Inner {
    fn keys(registry: &VocabularyRegistry, entry: &CatalogEntry) -> BTreeSet<IndexKey> {
        let mut keys = BTreeSet::new();
        for e in entry.record.elements() {
            if let Some((_, key)) = element_key(registry, e) {
                for p in key_prefixes(&key) {
                    keys.insert((e.name(), p.to_string()));
                }
            }
        }
        keys
    }

    fn insert(&mut self, registry: &VocabularyRegistry, entry: CatalogEntry) {
        self.remove(registry, &entry.identifier.clone());
        for key in Self::keys(registry, &entry) {
            self.index.entry(key).or_default().insert(entry.identifier.clone());
        }
        self.entries.insert(entry.identifier.clone(), entry);
    }

    fn remove(&mut self, registry: &VocabularyRegistry, identifier: &str) -> Option<CatalogEntry> {
        let old = self.entries.remove(identifier)?;
        for key in Self::keys(registry, &old) {
            if let Some(ids) = self.index.get_mut(&key) {
                ids.remove(identifier);
                if ids.is_empty() {
                    self.index.remove(&key);
                }
            }
        }
        Some(old)
    }

    fn apply(&mut self, registry: &VocabularyRegistry, op: LogOp) {
        match op {
            LogOp::Upsert { entry } => self.insert(registry, entry),
            LogOp::Delete { identifier } => {
                self.remove(registry, &identifier);
            }
        }
    }

    fn code_hits(&self, clause: &ResolvedClause) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (vocab, code) in &clause.codes {
            for name in ElementName::ALL {
                if clause.element.matches(name) && name.descriptor().code_vocabulary == Some(*vocab) {
                    if let Some(ids) = self.index.get(&(name, code.clone())) {
                        out.extend(ids.iter().cloned());
                    }
                }
            }
        }
        out
    }

    fn text_hits(&self, clause: &ResolvedClause) -> BTreeSet<String> {
        self.entries
            .values()
            .filter(|entry| entry.record.elements().iter().any(|e| clause.text_matches(e)))
            .map(|entry| entry.identifier.clone())
            .collect()
    }

    fn search(&self, clauses: &[ResolvedClause]) -> Vec<&CatalogEntry> {
        let mut result: Option<BTreeSet<String>> = None;
        for clause in clauses {
            let mut hits = self.code_hits(clause);
            if clause.kind != MatchKind::Code {
                hits.extend(self.text_hits(clause));
            }
            result = Some(match result {
                None => hits,
                Some(r) => r.intersection(&hits).cloned().collect(),
            });
            if result.as_ref().is_some_and(BTreeSet::is_empty) {
                break;
            }
        }
        result
            .unwrap_or_default()
            .iter()
            .filter_map(|id| self.entries.get(id))
            .collect()
    }
}

/// The union catalog. Readers see consistent snapshots; writers are
/// serialized and logged before they become visible.
pub struct Catalog {
    registry: Arc<VocabularyRegistry>,
    dir: Option<PathBuf>,
    inner: RwLock<Inner>,
    providers: Mutex<Vec<HarvestState>>,
}

impl std::fmt::Debug for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalog")
            .field("dir", &self.dir)
            .field("len", &self.len())
            .finish_non_exhaustive()
    }
}

impl Catalog {
    /// An in-memory catalog.
    pub fn new(registry: Arc<VocabularyRegistry>) -> Self {
        Catalog {
            registry,
            dir: None,
            inner: RwLock::new(Inner::default()),
            providers: Mutex::new(Vec::new()),
        }
    }

    /// Opens (creating if needed) a directory-backed catalog.
    pub fn open(dir: impl AsRef<Path>, registry: Arc<VocabularyRegistry>) -> Result<Self, CatalogError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut inner = Inner::default();

        let snapshot = dir.join(SNAPSHOT_FILE);
        if snapshot.exists() {
            let text = fs::read_to_string(&snapshot).map_err(io_err(&snapshot))?;
            for (n, line) in text.lines().enumerate() {
                let entry: CatalogEntry = serde_json::from_str(line).map_err(|e| CatalogError::Corrupt {
                    path: snapshot.clone(),
                    line: n + 1,
                    message: e.to_string(),
                })?;
                inner.insert(&registry, entry);
            }
        }

        let log = dir.join(LOG_FILE);
        if log.exists() {
            let text = fs::read_to_string(&log).map_err(io_err(&log))?;
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            if complete.len() != text.len() {
                tracing::warn!(path = %log.display(), "discarding interrupted log line");
                let f = OpenOptions::new().write(true).open(&log).map_err(io_err(&log))?;
                f.set_len(complete.len() as u64).map_err(io_err(&log))?;
            }
            for (n, line) in complete.lines().enumerate() {
                let op: LogOp = serde_json::from_str(line).map_err(|e| CatalogError::Corrupt {
                    path: log.clone(),
                    line: n + 1,
                    message: e.to_string(),
                })?;
                inner.apply(&registry, op);
                inner.log_lines += 1;
            }
        }

        let providers_path = dir.join(PROVIDERS_FILE);
        let providers = if providers_path.exists() {
            let text = fs::read_to_string(&providers_path).map_err(io_err(&providers_path))?;
            serde_json::from_str(&text).map_err(|e| CatalogError::Corrupt {
                path: providers_path.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        } else {
            Vec::new()
        };

        Ok(Catalog {
            registry,
            dir: Some(dir.to_path_buf()),
            inner: RwLock::new(inner),
            providers: Mutex::new(providers),
        })
    }

    pub fn registry(&self) -> &Arc<VocabularyRegistry> {
        &self.registry
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn append(&self, inner: &mut Inner, op: &LogOp) -> Result<(), CatalogError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(LOG_FILE);
        let mut line = serde_json::to_string(op).expect("log ops serialize");
        line.push('\n');
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        f.write_all(line.as_bytes()).map_err(io_err(&path))?;
        f.sync_data().map_err(io_err(&path))?;
        inner.log_lines += 1;
        Ok(())
    }

    /// Inserts or replaces an entry by identifier.
    pub fn upsert(&self, entry: CatalogEntry) -> Result<UpsertOutcome, CatalogError> {
        let id: OaiIdentifier = entry.identifier.parse().map_err(|_| CatalogError::IdentifierMismatch {
            identifier: entry.identifier.clone(),
            provider_id: entry.provider_id.clone(),
        })?;
        if id.archive() != entry.provider_id {
            return Err(CatalogError::IdentifierMismatch {
                identifier: entry.identifier,
                provider_id: entry.provider_id,
            });
        }
        let diagnostics = validate_record(&entry.record, &self.registry);
        if has_errors(&diagnostics) {
            return Err(CatalogError::InvalidRecord {
                identifier: entry.identifier,
                diagnostics,
            });
        }
        let mut inner = self.inner.write().unwrap();
        let outcome = match inner.entries.get(&entry.identifier) {
            None => UpsertOutcome::Added,
            Some(old) if *old == entry => return Ok(UpsertOutcome::Unchanged),
            Some(_) => UpsertOutcome::Updated,
        };
        let op = LogOp::Upsert { entry };
        self.append(&mut inner, &op)?;
        inner.apply(&self.registry, op);
        self.maybe_compact(&mut inner)?;
        Ok(outcome)
    }

    /// Removes an entry; `Ok(false)` when it was not present.
    pub fn delete(&self, identifier: &str) -> Result<bool, CatalogError> {
        let mut inner = self.inner.write().unwrap();
        if !inner.entries.contains_key(identifier) {
            return Ok(false);
        }
        let op = LogOp::Delete {
            identifier: identifier.to_string(),
        };
        self.append(&mut inner, &op)?;
        inner.apply(&self.registry, op);
        self.maybe_compact(&mut inner)?;
        Ok(true)
    }

    pub fn get(&self, identifier: &str) -> Result<CatalogEntry, CatalogError> {
        self.inner
            .read()
            .unwrap()
            .entries
            .get(identifier)
            .cloned()
            .ok_or_else(|| CatalogError::NotFound(identifier.to_string()))
    }

    /// All entries ordered by identifier.
    pub fn entries(&self) -> Vec<CatalogEntry> {
        self.inner.read().unwrap().entries.values().cloned().collect()
    }

    /// Identifiers held for one provider.
    pub fn provider_identifiers(&self, provider_id: &str) -> BTreeSet<String> {
        self.inner
            .read()
            .unwrap()
            .entries
            .values()
            .filter(|e| e.provider_id == provider_id)
            .map(|e| e.identifier.clone())
            .collect()
    }

    fn resolve(&self, query: &Query) -> Result<Vec<ResolvedClause>, CatalogError> {
        query.clauses().iter().map(|c| c.resolve(&self.registry)).collect()
    }

    /// Entries matching every clause, ordered by identifier.
    pub fn search(&self, query: &Query) -> Result<Vec<CatalogEntry>, CatalogError> {
        let clauses = self.resolve(query)?;
        let inner = self.inner.read().unwrap();
        Ok(inner.search(&clauses).into_iter().cloned().collect())
    }

    /// As [`Catalog::search`], reporting which codes each entry matched on.
    pub fn search_hits(&self, query: &Query) -> Result<Vec<SearchHit>, CatalogError> {
        let clauses = self.resolve(query)?;
        let inner = self.inner.read().unwrap();
        Ok(inner
            .search(&clauses)
            .into_iter()
            .map(|entry| {
                let mut codes: Vec<String> = Vec::new();
                for c in &clauses {
                    for code in c.matched_codes(&self.registry, &entry.record) {
                        if !codes.iter().any(|k| k == code) {
                            codes.push(code.to_string());
                        }
                    }
                }
                SearchHit {
                    entry: entry.clone(),
                    matched_codes: codes,
                }
            })
            .collect())
    }

    /// Pairs `(l, r)` with `l` matching `left`, `r` matching `right`, and
    /// sharing a canonical code on `join_on`; self-pairs are excluded.
    /// Ordered by `(l.identifier, r.identifier)`.
    pub fn join_query(
        &self,
        left: &Query,
        right: &Query,
        join_on: ElementName,
    ) -> Result<Vec<(CatalogEntry, CatalogEntry)>, CatalogError> {
        if !join_on.descriptor().is_coded() {
            return Err(CatalogError::NotCoded(join_on));
        }
        let left = self.resolve(left)?;
        let right = self.resolve(right)?;
        let inner = self.inner.read().unwrap();
        let rights = inner.search(&right);
        let mut by_code: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in rights.iter().enumerate() {
            for code in self.codes_on(r, join_on) {
                by_code.entry(code).or_default().push(i);
            }
        }
        let mut pairs = Vec::new();
        for l in inner.search(&left) {
            let mut partners = BTreeSet::new();
            for code in self.codes_on(l, join_on) {
                if let Some(rs) = by_code.get(&code) {
                    partners.extend(rs.iter().copied());
                }
            }
            // `rights` is identifier-ordered, so index order is too
            for i in partners {
                let r = rights[i];
                if r.identifier != l.identifier {
                    pairs.push((l.clone(), r.clone()));
                }
            }
        }
        Ok(pairs)
    }

    fn codes_on(&self, entry: &CatalogEntry, element: ElementName) -> BTreeSet<String> {
        entry
            .record
            .elements_named(element)
            .filter_map(|e| element_key(&self.registry, e))
            .map(|(_, k)| k)
            .collect()
    }

    /// Number of entries carrying each canonical code of `element`.
    pub fn facet_counts(&self, element: ElementName) -> Result<BTreeMap<String, usize>, CatalogError> {
        let Some(vocab) = element.descriptor().code_vocabulary else {
            return Err(CatalogError::NotCoded(element));
        };
        let inner = self.inner.read().unwrap();
        let mut counts = BTreeMap::new();
        for entry in inner.entries.values() {
            let codes: BTreeSet<String> = entry
                .record
                .elements_named(element)
                .filter_map(|e| e.code())
                .filter_map(|c| self.registry.canonical_code(vocab, c).ok())
                .collect();
            for code in codes {
                *counts.entry(code).or_insert(0) += 1;
            }
        }
        Ok(counts)
    }

    /// Label of a code in `element`'s vocabulary.
    pub fn code_label(&self, element: ElementName, code: &str, display_lang: &str) -> Option<String> {
        let vocab: VocabId = element.descriptor().code_vocabulary?;
        self.registry.label(vocab, code, display_lang).ok()
    }

    /// Every entry as one JSON line, ordered by identifier. Two catalogs
    /// with equal content export identical bytes.
    pub fn export_snapshot(&self) -> String {
        let inner = self.inner.read().unwrap();
        snapshot_text(&inner)
    }

    /// Folds the log into the snapshot.
    pub fn compact(&self) -> Result<(), CatalogError> {
        let mut inner = self.inner.write().unwrap();
        self.compact_locked(&mut inner)
    }

    fn maybe_compact(&self, inner: &mut Inner) -> Result<(), CatalogError> {
        if inner.log_lines >= COMPACT_AFTER {
            self.compact_locked(inner)?;
        }
        Ok(())
    }

    fn compact_locked(&self, inner: &mut Inner) -> Result<(), CatalogError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        write_atomic(&dir.join(SNAPSHOT_FILE), snapshot_text(inner).as_bytes())?;
        // replaying stale log lines over the new snapshot is harmless
        let log = dir.join(LOG_FILE);
        File::create(&log).map_err(io_err(&log))?;
        inner.log_lines = 0;
        Ok(())
    }

    /// Provider states in registration order.
    pub fn provider_states(&self) -> Vec<HarvestState> {
        self.providers.lock().unwrap().clone()
    }

    pub fn provider_state(&self, provider_id: &str) -> Option<HarvestState> {
        self.providers
            .lock()
            .unwrap()
            .iter()
            .find(|s| s.provider.archive_id == provider_id)
            .cloned()
    }

    /// Applies `f` to the provider list and persists the result.
    pub(crate) fn update_providers<T>(&self, f: impl FnOnce(&mut Vec<HarvestState>) -> T) -> Result<T, CatalogError> {
        let mut providers = self.providers.lock().unwrap();
        let mut next = providers.clone();
        let out = f(&mut next);
        if let Some(dir) = &self.dir {
            let json = serde_json::to_string_pretty(&next).expect("states serialize");
            write_atomic(&dir.join(PROVIDERS_FILE), json.as_bytes())?;
        }
        *providers = next;
        Ok(out)
    }
}

fn snapshot_text(inner: &Inner) -> String {
    let mut out = String::new();
    for entry in inner.entries.values() {
        out.push_str(&serde_json::to_string(entry).expect("entries serialize"));
        out.push('\n');
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CatalogError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_data().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}
