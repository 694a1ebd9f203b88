use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::envelope::{EnvelopeWriter, ECHOED_PARAMS};
use super::token::{ListVerb, ResumptionToken};
use super::{
    dc_crosswalk, epoch_sentinel, is_valid_archive_id, ArchiveItem, MetadataPrefix, OaiErrorCode, OaiIdentifier,
    RepositoryInfo, DEFAULT_PAGE_SIZE,
};
use crate::clock::{format_datestamp, parse_datestamp, Clock, DayBound, SystemClock};
use crate::model::{has_errors, validate_record, Diagnostic, MetadataRecord};
use crate::vocab::VocabularyRegistry;
use crate::xml;

const INFO_FILE: &str = "repository.info";
const INDEX_FILE: &str = "index.tsv";
const ITEMS_DIR: &str = "items";

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("archive id {0:?} must be lowercase alphanumeric")]
    InvalidArchiveId(String),
    #[error("{0}")]
    InvalidIdentifier(String),
    #[error("{identifier} does not belong to archive {archive_id:?}")]
    IdentifierMismatch { identifier: String, archive_id: String },
    #[error("record for {identifier} is not valid: {}", first_error(.diagnostics))]
    InvalidRecord {
        identifier: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("datestamp {new} for {identifier} is earlier than its current datestamp {current}")]
    NonMonotonicDatestamp {
        identifier: String,
        current: DateTime<Utc>,
        new: DateTime<Utc>,
    },
    #[error("no live item {0}")]
    NotFound(String),
    #[error("{path}:{line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("repository already exists at {0}")]
    AlreadyExists(PathBuf),
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

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RepoError + '_ {
    move |source| RepoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct RepositoryConfig {
    pub archive_id: String,
    pub name: String,
    pub base_url: String,
    pub page_size: usize,
}

impl RepositoryConfig {
    pub fn new(archive_id: impl Into<String>, name: impl Into<String>) -> Self {
        RepositoryConfig {
            archive_id: archive_id.into(),
            name: name.into(),
            base_url: String::new(),
            page_size: DEFAULT_PAGE_SIZE,
        }
    }

    pub fn with_base_url(mut self, base_url: impl Into<String>) -> Self {
        self.base_url = base_url.into();
        self
    }

    pub fn with_page_size(mut self, page_size: usize) -> Self {
        self.page_size = page_size.max(1);
        self
    }
}

#[derive(Debug, Default)]
struct State {
    items: BTreeMap<String, ArchiveItem>,
    // XOR of per-item digests; changes with any item change
    fingerprint: [u8; 32],
}

impl State {
    fn toggle(&mut self, item: &ArchiveItem) {
        let digest = item_digest(item);
        for (f, d) in self.fingerprint.iter_mut().zip(digest.iter()) {
            *f ^= d;
        }
    }

    fn replace(&mut self, item: ArchiveItem) {
        if let Some(old) = self.items.remove(&item.identifier) {
            self.toggle(&old);
        }
        self.toggle(&item);
        self.items.insert(item.identifier.clone(), item);
    }

    fn fingerprint_hex(&self) -> String {
        self.fingerprint[..12].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn item_digest(item: &ArchiveItem) -> [u8; 32] {
    let json = serde_json::to_vec(item).expect("items serialize");
    Sha256::digest(&json).into()
}

/// A data provider's holdings.
///
/// Readers see a consistent snapshot; writes are serialized and, when the
/// repository is backed by a directory, persisted before they become
/// visible.
///
/// On-disk layout: `repository.info` (`archive_id=`, `name=` lines),
/// `index.tsv` (`identifier<TAB>datestamp<TAB>deleted`) and one record
/// document per live item under `items/`.
pub struct Repository {
    config: RepositoryConfig,
    registry: Arc<VocabularyRegistry>,
    clock: Arc<dyn Clock>,
    storage: Option<PathBuf>,
    state: RwLock<State>,
}

impl std::fmt::Debug for Repository {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Repository")
            .field("config", &self.config)
            .field("storage", &self.storage)
            .finish_non_exhaustive()
    }
}

impl Repository {
    /// An in-memory repository.
    pub fn new(config: RepositoryConfig, registry: Arc<VocabularyRegistry>) -> Result<Self, RepoError> {
        if !is_valid_archive_id(&config.archive_id) {
            return Err(RepoError::InvalidArchiveId(config.archive_id));
        }
        Ok(Repository {
            config,
            registry,
            clock: Arc::new(SystemClock),
            storage: None,
            state: RwLock::new(State::default()),
        })
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    /// Initialises an empty repository directory.
    pub fn create(
        dir: impl AsRef<Path>,
        config: RepositoryConfig,
        registry: Arc<VocabularyRegistry>,
    ) -> Result<Self, RepoError> {
        let dir = dir.as_ref();
        let mut repo = Self::new(config, registry)?;
        let info_path = dir.join(INFO_FILE);
        if info_path.exists() {
            return Err(RepoError::AlreadyExists(dir.to_path_buf()));
        }
        fs::create_dir_all(dir.join(ITEMS_DIR)).map_err(io_err(dir))?;
        let info = format!("archive_id={}\nname={}\n", repo.config.archive_id, repo.config.name);
        write_atomic(&info_path, info.as_bytes())?;
        write_atomic(&dir.join(INDEX_FILE), b"")?;
        repo.storage = Some(dir.to_path_buf());
        Ok(repo)
    }

    /// Loads a repository directory written by [`Repository::create`].
    pub fn open(
        dir: impl AsRef<Path>,
        base_url: impl Into<String>,
        page_size: usize,
        registry: Arc<VocabularyRegistry>,
    ) -> Result<Self, RepoError> {
        let dir = dir.as_ref();
        let info_path = dir.join(INFO_FILE);
        let info = fs::read_to_string(&info_path).map_err(io_err(&info_path))?;
        let mut archive_id = None;
        let mut name = None;
        for (n, line) in info.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('=') {
                Some(("archive_id", v)) => archive_id = Some(v.trim().to_string()),
                Some(("name", v)) => name = Some(v.trim().to_string()),
                _ => {
                    return Err(RepoError::Corrupt {
                        path: info_path,
                        line: n + 1,
                        message: format!("unexpected line {line:?}"),
                    })
                }
            }
        }
        let archive_id = archive_id.ok_or_else(|| RepoError::Corrupt {
            path: info_path.clone(),
            line: 0,
            message: "missing archive_id".into(),
        })?;
        let config = RepositoryConfig::new(archive_id, name.unwrap_or_default())
            .with_base_url(base_url)
            .with_page_size(page_size);
        let mut repo = Self::new(config, registry)?;

        let index_path = dir.join(INDEX_FILE);
        let index = fs::read_to_string(&index_path).map_err(io_err(&index_path))?;
        let mut state = State::default();
        for (n, line) in index.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |message: String| RepoError::Corrupt {
                path: index_path.clone(),
                line: n + 1,
                message,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [identifier, datestamp, deleted] = fields[..] else {
                return Err(corrupt("expected identifier<TAB>datestamp<TAB>deleted".into()));
            };
            repo.check_identifier(identifier).map_err(|e| corrupt(e.to_string()))?;
            let datestamp = parse_datestamp(datestamp, DayBound::Start)
                .ok_or_else(|| corrupt(format!("bad datestamp {datestamp:?}")))?;
            let deleted: bool = deleted
                .parse()
                .map_err(|_| corrupt(format!("bad deleted flag {deleted:?}")))?;
            if state.items.contains_key(identifier) {
                return Err(corrupt(format!("duplicate identifier {identifier}")));
            }
            let record = if deleted {
                None
            } else {
                let path = item_path(dir, identifier);
                let bytes = fs::read(&path).map_err(|e| corrupt(format!("{}: {e}", path.display())))?;
                let parsed = xml::parse_record(&bytes).map_err(|e| corrupt(format!("{}: {e}", path.display())))?;
                let diagnostics = validate_record(&parsed.record, &repo.registry);
                if has_errors(&diagnostics) {
                    return Err(corrupt(format!("{}: {}", path.display(), first_error(&diagnostics))));
                }
                Some(parsed.record)
            };
            state.replace(ArchiveItem {
                identifier: identifier.to_string(),
                datestamp,
                record,
            });
        }
        repo.state = RwLock::new(state);
        repo.storage = Some(dir.to_path_buf());
        Ok(repo)
    }

    pub fn config(&self) -> &RepositoryConfig {
        &self.config
    }

    pub fn registry(&self) -> &Arc<VocabularyRegistry> {
        &self.registry
    }

    pub fn info(&self) -> RepositoryInfo {
        let state = self.state.read().unwrap();
        self.info_from(&state)
    }

    fn info_from(&self, state: &State) -> RepositoryInfo {
        RepositoryInfo {
            archive_id: self.config.archive_id.clone(),
            name: self.config.name.clone(),
            base_url: self.config.base_url.clone(),
            earliest_datestamp: state
                .items
                .values()
                .map(|i| i.datestamp)
                .min()
                .unwrap_or_else(epoch_sentinel),
        }
    }

    fn check_identifier(&self, identifier: &str) -> Result<(), RepoError> {
        let id: OaiIdentifier = identifier.parse().map_err(RepoError::InvalidIdentifier)?;
        if id.archive() != self.config.archive_id {
            return Err(RepoError::IdentifierMismatch {
                identifier: identifier.to_string(),
                archive_id: self.config.archive_id.clone(),
            });
        }
        Ok(())
    }

    /// Adds or replaces an item, stamping it with the current time (never
    /// earlier than its previous datestamp).
    pub fn put(&self, identifier: &str, record: MetadataRecord) -> Result<DateTime<Utc>, RepoError> {
        self.write(identifier, Some(record), None)
    }

    pub fn put_at(
        &self,
        identifier: &str,
        record: MetadataRecord,
        datestamp: DateTime<Utc>,
    ) -> Result<DateTime<Utc>, RepoError> {
        self.write(identifier, Some(record), Some(datestamp))
    }

    /// Replaces a live item by a tombstone.
    pub fn delete(&self, identifier: &str) -> Result<DateTime<Utc>, RepoError> {
        self.write(identifier, None, None)
    }

    pub fn delete_at(&self, identifier: &str, datestamp: DateTime<Utc>) -> Result<DateTime<Utc>, RepoError> {
        self.write(identifier, None, Some(datestamp))
    }

    fn write(
        &self,
        identifier: &str,
        record: Option<MetadataRecord>,
        datestamp: Option<DateTime<Utc>>,
    ) -> Result<DateTime<Utc>, RepoError> {
        self.check_identifier(identifier)?;
        if let Some(record) = &record {
            let diagnostics = validate_record(record, &self.registry);
            if has_errors(&diagnostics) {
                return Err(RepoError::InvalidRecord {
                    identifier: identifier.to_string(),
                    diagnostics,
                });
            }
        }
        let mut state = self.state.write().unwrap();
        let current = state.items.get(identifier);
        if record.is_none() && current.is_none_or(ArchiveItem::is_deleted) {
            return Err(RepoError::NotFound(identifier.to_string()));
        }
        let previous = current.map(|i| i.datestamp);
        let datestamp = match (datestamp, previous) {
            (Some(new), Some(current)) if new < current => {
                return Err(RepoError::NonMonotonicDatestamp {
                    identifier: identifier.to_string(),
                    current,
                    new,
                })
            }
            (Some(new), _) => crate::clock::truncate_to_second(new),
            (None, prev) => {
                let now = self.clock.now();
                prev.map_or(now, |p| p.max(now))
            }
        };
        let item = ArchiveItem {
            identifier: identifier.to_string(),
            datestamp,
            record,
        };
        if let Some(dir) = &self.storage {
            persist(dir, &item, &state)?;
        }
        state.replace(item);
        Ok(datestamp)
    }

    pub fn get(&self, identifier: &str) -> Option<ArchiveItem> {
        self.state.read().unwrap().items.get(identifier).cloned()
    }

    /// All items including tombstones, ordered by identifier.
    pub fn items(&self) -> Vec<ArchiveItem> {
        self.state.read().unwrap().items.values().cloned().collect()
    }

    pub fn live_count(&self) -> usize {
        self.state
            .read()
            .unwrap()
            .items
            .values()
            .filter(|i| !i.is_deleted())
            .count()
    }

    /// Answers one protocol request given its query parameters and returns
    /// the XML envelope.
    pub fn handle(&self, params: &[(String, String)]) -> String {
        let state = self.state.read().unwrap();
        let now = self.clock.now();
        let echo: Vec<(&str, &str)> = params
            .iter()
            .filter(|(k, _)| ECHOED_PARAMS.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect();
        let writer = |echo: &[(&str, &str)]| EnvelopeWriter::new(&now, &self.config.base_url, echo);
        match self.dispatch(&state, params, writer(&echo)) {
            Ok(body) => body,
            Err((code, message)) => {
                let echo: &[(&str, &str)] = match code {
                    OaiErrorCode::BadVerb | OaiErrorCode::BadArgument => &[],
                    _ => &echo,
                };
                writer(echo).error(code, &message)
            }
        }
    }

    fn dispatch(
        &self,
        state: &State,
        params: &[(String, String)],
        writer: EnvelopeWriter,
    ) -> Result<String, (OaiErrorCode, String)> {
        let bad_arg = |m: String| (OaiErrorCode::BadArgument, m);
        let mut seen = HashSet::new();
        for (k, _) in params {
            if !seen.insert(k.as_str()) {
                return Err(bad_arg(format!("argument {k:?} repeated")));
            }
        }
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let verb = get("verb").ok_or((OaiErrorCode::BadVerb, "missing verb".to_string()))?;
        let allowed: &[&str] = match verb {
            "Identify" => &[],
            "ListRecords" | "ListIdentifiers" => &["metadataPrefix", "from", "until", "resumptionToken"],
            "GetRecord" => &["identifier", "metadataPrefix"],
            other => return Err((OaiErrorCode::BadVerb, format!("unknown verb {other:?}"))),
        };
        if let Some((k, _)) = params
            .iter()
            .find(|(k, _)| k != "verb" && !allowed.contains(&k.as_str()))
        {
            return Err(bad_arg(format!("argument {k:?} not allowed for {verb}")));
        }
        match verb {
            "Identify" => Ok(writer.identify(&self.info_from(state))),
            "GetRecord" => {
                let identifier = get("identifier").ok_or_else(|| bad_arg("missing identifier".into()))?;
                let prefix = parse_prefix(get("metadataPrefix"))?;
                let item = state
                    .items
                    .get(identifier)
                    .ok_or_else(|| (OaiErrorCode::IdDoesNotExist, format!("no item {identifier}")))?;
                let mut writer = writer;
                writer.open("GetRecord");
                self.write_record(&mut writer, item, prefix);
                writer.close("GetRecord");
                Ok(writer.finish())
            }
            list => {
                let verb = if list == "ListRecords" {
                    ListVerb::ListRecords
                } else {
                    ListVerb::ListIdentifiers
                };
                self.list(state, verb, &get, writer)
            }
        }
    }

    fn list<'p>(
        &self,
        state: &State,
        verb: ListVerb,
        get: &dyn Fn(&str) -> Option<&'p str>,
        mut writer: EnvelopeWriter,
    ) -> Result<String, (OaiErrorCode, String)> {
        let request = if let Some(token) = get("resumptionToken") {
            if get("metadataPrefix").is_some() || get("from").is_some() || get("until").is_some() {
                return Err((
                    OaiErrorCode::BadArgument,
                    "resumptionToken is an exclusive argument".into(),
                ));
            }
            let bad_token = || {
                (
                    OaiErrorCode::BadResumptionToken,
                    format!("invalid or expired token {token:?}"),
                )
            };
            let decoded = ResumptionToken::decode(token).ok_or_else(bad_token)?;
            if decoded.verb != verb || decoded.fingerprint != state.fingerprint_hex() {
                return Err(bad_token());
            }
            decoded
        } else {
            let prefix = parse_prefix(get("metadataPrefix"))?;
            let from = parse_bound(get("from"), DayBound::Start)?;
            let until = parse_bound(get("until"), DayBound::End)?;
            if let (Some(f), Some(u)) = (from, until) {
                if f > u {
                    return Err((OaiErrorCode::BadArgument, "from is later than until".into()));
                }
            }
            ResumptionToken {
                verb,
                prefix,
                from,
                until,
                fingerprint: state.fingerprint_hex(),
                offset: 0,
            }
        };

        let mut matching: Vec<&ArchiveItem> = state
            .items
            .values()
            .filter(|i| request.from.is_none_or(|f| i.datestamp >= f))
            .filter(|i| request.until.is_none_or(|u| i.datestamp <= u))
            .collect();
        matching.sort_by(|a, b| (a.datestamp, &a.identifier).cmp(&(b.datestamp, &b.identifier)));
        let total = matching.len();
        if total == 0 {
            return Err((OaiErrorCode::NoRecordsMatch, "no items match the request".into()));
        }
        if request.offset >= total {
            return Err((
                OaiErrorCode::BadResumptionToken,
                "token is past the end of the list".into(),
            ));
        }
        let end = (request.offset + self.config.page_size).min(total);
        writer.open(verb.as_str());
        for item in &matching[request.offset..end] {
            match verb {
                ListVerb::ListRecords => self.write_record(&mut writer, item, request.prefix),
                ListVerb::ListIdentifiers => writer.header(item, 4),
            }
        }
        if end < total || request.offset > 0 {
            let next = (end < total).then(|| {
                ResumptionToken {
                    offset: end,
                    ..request.clone()
                }
                .encode()
            });
            writer.resumption(next.as_deref(), total, request.offset);
        }
        writer.close(verb.as_str());
        Ok(writer.finish())
    }

    fn write_record(&self, writer: &mut EnvelopeWriter, item: &ArchiveItem, prefix: MetadataPrefix) {
        match (&item.record, prefix) {
            (None, _) => writer.record(item, None),
            (Some(record), MetadataPrefix::Olac) => writer.record(item, Some((record, false))),
            (Some(record), MetadataPrefix::OaiDc) => {
                let dc = dc_crosswalk(record, &self.registry).expect("stored records validate");
                writer.record(item, Some((&dc, true)));
            }
        }
    }
}

fn parse_prefix(value: Option<&str>) -> Result<MetadataPrefix, (OaiErrorCode, String)> {
    value
        .ok_or_else(|| "missing metadataPrefix".to_string())
        .and_then(str::parse)
        .map_err(|m| (OaiErrorCode::BadArgument, m))
}

fn parse_bound(value: Option<&str>, bound: DayBound) -> Result<Option<DateTime<Utc>>, (OaiErrorCode, String)> {
    value
        .map(|v| parse_datestamp(v, bound).ok_or_else(|| (OaiErrorCode::BadArgument, format!("bad date {v:?}"))))
        .transpose()
}

fn item_path(dir: &Path, identifier: &str) -> PathBuf {
    let mut name = String::with_capacity(identifier.len() + 4);
    for b in identifier.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-') {
            name.push(b as char);
        } else {
            name.push_str(&format!("%{b:02X}"));
        }
    }
    name.push_str(".xml");
    dir.join(ITEMS_DIR).join(name)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(bytes).map_err(io_err(&tmp))?;
    file.sync_data().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

// Writes the item's document (or removes it for a tombstone), then the
// index reflecting `state` with `item` applied.
fn persist(dir: &Path, item: &ArchiveItem, state: &State) -> Result<(), RepoError> {
    let path = item_path(dir, &item.identifier);
    match &item.record {
        Some(record) => {
            let mut doc = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
            xml::write_olac(&mut doc, record, 0);
            write_atomic(&path, doc.as_bytes())?;
        }
        None => {
            if path.exists() {
                fs::remove_file(&path).map_err(io_err(&path))?;
            }
        }
    }
    let mut index = String::new();
    let rows = state
        .items
        .values()
        .filter(|i| i.identifier != item.identifier)
        .chain(std::iter::once(item));
    let mut rows: Vec<&ArchiveItem> = rows.collect();
    rows.sort_by(|a, b| a.identifier.cmp(&b.identifier));
    for row in rows {
        index.push_str(&format!(
            "{}\t{}\t{}\n",
            row.identifier,
            format_datestamp(&row.datestamp),
            row.is_deleted()
        ));
    }
    write_atomic(&dir.join(INDEX_FILE), index.as_bytes())
}
