//! Harvesting providers into the union catalog.
//!
//! A full harvest lists everything a provider holds and afterwards drops
//! catalog entries of that provider that the listing no longer mentions.
//! An incremental harvest lists from the provider's `last_success`. On
//! completion `last_success` becomes the harvest's start moment, taken as
//! the `responseDate` of its first response, so items changed while the
//! harvest ran are fetched again next time.

mod transport;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, Utc};
use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, CatalogEntry, CatalogError, UpsertOutcome};
use crate::clock::{format_datestamp, Clock, SystemClock};
use crate::oai::envelope::{parse_envelope, Body, Envelope, Payload, Resumption};
use crate::oai::{is_valid_archive_id, OaiErrorCode, OaiIdentifier, RepositoryInfo};

pub use transport::{HttpTransport, LocalTransport, Transport, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestState {
    pub provider: RepositoryInfo,
    /// Start moment of the last completed harvest.
    pub last_success: Option<DateTime<Utc>>,
    /// Live catalog entries from this provider.
    pub items_held: usize,
    pub last_error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarvestMode {
    Full,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarvestOutcome {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarvestReport {
    pub provider_id: String,
    pub mode: HarvestMode,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub added: usize,
    pub updated: usize,
    pub deleted: usize,
    /// Records skipped because they failed validation or named another
    /// archive.
    pub rejected: usize,
    pub pages: usize,
    pub outcome: HarvestOutcome,
    pub error: Option<String>,
}

impl HarvestReport {
    pub fn is_complete(&self) -> bool {
        self.outcome == HarvestOutcome::Complete
    }
}

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error(transparent)]
    Unreachable(TransportError),
    #[error("bad Identify response from {url}: {message}")]
    BadIdentify { url: String, message: String },
    #[error("archive {0:?} is already registered")]
    DuplicateArchive(String),
    #[error("no provider {0:?} is registered")]
    UnknownProvider(String),
    #[error("no providers are registered")]
    NoProviders,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("page failed after {attempts} attempts: {last}")]
    PartialPageFailure { attempts: u32, last: TransportError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone)]
pub struct HarvesterConfig {
    /// Providers harvested at once by [`Harvester::harvest_all`].
    pub parallelism: usize,
    /// Attempts per page before the harvest fails.
    pub retry_attempts: u32,
    pub retry_backoff: Duration,
}

impl Default for HarvesterConfig {
    fn default() -> Self {
        HarvesterConfig {
            parallelism: 4,
            retry_attempts: 3,
            retry_backoff: Duration::from_millis(500),
        }
    }
}

/// Registers providers and harvests them into a catalog.
pub struct Harvester<T: Transport = HttpTransport> {
    catalog: Arc<Catalog>,
    transport: T,
    config: HarvesterConfig,
    clock: Arc<dyn Clock>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

#[derive(Default)]
struct Tally {
    added: usize,
    updated: usize,
    deleted: usize,
    rejected: usize,
    pages: usize,
}

impl<T: Transport> Harvester<T> {
    pub fn new(catalog: Arc<Catalog>, transport: T, config: HarvesterConfig) -> Self {
        Harvester {
            catalog,
            transport,
            config,
            clock: Arc::new(SystemClock),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = clock;
        self
    }

    pub fn catalog(&self) -> &Arc<Catalog> {
        &self.catalog
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn providers(&self) -> Vec<HarvestState> {
        self.catalog.provider_states()
    }

    /// Asks `base_url` to identify itself and records it.
    pub async fn register_provider(&self, base_url: &str) -> Result<RepositoryInfo, HarvestError> {
        let bad = |message: String| HarvestError::BadIdentify {
            url: base_url.to_string(),
            message,
        };
        let body = self
            .transport
            .fetch(base_url, &[("verb", "Identify")])
            .await
            .map_err(HarvestError::Unreachable)?;
        let envelope = parse_envelope(&body).map_err(|e| bad(e.to_string()))?;
        let Body::Identify { mut info, .. } = envelope.body else {
            return Err(bad("response is not an Identify answer".into()));
        };
        if !is_valid_archive_id(&info.archive_id) {
            return Err(bad(format!("invalid archive id {:?}", info.archive_id)));
        }
        info.base_url = base_url.to_string();
        let registered = info.clone();
        self.catalog.update_providers(|providers| {
            if providers.iter().any(|p| p.provider.archive_id == info.archive_id) {
                return Err(HarvestError::DuplicateArchive(info.archive_id.clone()));
            }
            let items_held = self.catalog.provider_identifiers(&info.archive_id).len();
            providers.push(HarvestState {
                provider: info,
                last_success: None,
                items_held,
                last_error: None,
            });
            Ok(())
        })??;
        tracing::info!(archive = %registered.archive_id, url = base_url, "registered provider");
        Ok(registered)
    }

    /// Forgets a provider; its catalog entries stay.
    pub fn unregister_provider(&self, provider_id: &str) -> Result<HarvestState, HarvestError> {
        self.catalog
            .update_providers(|providers| {
                let i = providers.iter().position(|p| p.provider.archive_id == provider_id)?;
                Some(providers.remove(i))
            })?
            .ok_or_else(|| HarvestError::UnknownProvider(provider_id.to_string()))
    }

    fn lock_for(&self, provider_id: &str) -> Arc<tokio::sync::Mutex<()>> {
        self.locks
            .lock()
            .unwrap()
            .entry(provider_id.to_string())
            .or_default()
            .clone()
    }

    /// Harvests one provider. Harvest failures are reported in the
    /// returned report; `Err` means the provider is unknown or the state
    /// could not be stored.
    pub async fn harvest(&self, provider_id: &str, mode: HarvestMode) -> Result<HarvestReport, HarvestError> {
        let lock = self.lock_for(provider_id);
        let _guard = lock.lock().await;
        let state = self
            .catalog
            .provider_state(provider_id)
            .ok_or_else(|| HarvestError::UnknownProvider(provider_id.to_string()))?;
        let started_at = self.clock.now();
        let mut tally = Tally::default();
        let result = self.run(&state, mode, &mut tally).await;
        let finished_at = self.clock.now();

        let items_held = self.catalog.provider_identifiers(provider_id).len();
        let error = result.as_ref().err().map(ToString::to_string);
        self.catalog.update_providers(|providers| {
            if let Some(s) = providers.iter_mut().find(|p| p.provider.archive_id == provider_id) {
                s.items_held = items_held;
                s.last_error = error.clone();
                if let Ok(start) = &result {
                    s.last_success = Some(s.last_success.map_or(*start, |prev| prev.max(*start)));
                }
            }
        })?;
        let report = HarvestReport {
            provider_id: provider_id.to_string(),
            mode,
            started_at,
            finished_at,
            added: tally.added,
            updated: tally.updated,
            deleted: tally.deleted,
            rejected: tally.rejected,
            pages: tally.pages,
            outcome: if error.is_none() {
                HarvestOutcome::Complete
            } else {
                HarvestOutcome::Failed
            },
            error,
        };
        match &report.error {
            None => tracing::info!(
                provider = provider_id,
                added = report.added,
                updated = report.updated,
                deleted = report.deleted,
                rejected = report.rejected,
                pages = report.pages,
                "harvest complete"
            ),
            Some(e) => tracing::warn!(provider = provider_id, error = %e, "harvest failed"),
        }
        Ok(report)
    }

    /// Harvests every registered provider, at most `parallelism` at a time.
    /// Reports come back in registration order.
    pub async fn harvest_all(&self, mode: HarvestMode) -> Result<Vec<HarvestReport>, HarvestError> {
        let ids: Vec<String> = self.providers().into_iter().map(|s| s.provider.archive_id).collect();
        if ids.is_empty() {
            return Err(HarvestError::NoProviders);
        }
        let reports: Vec<Result<HarvestReport, HarvestError>> = stream::iter(ids)
            .map(|id| async move { self.harvest(&id, mode).await })
            .buffered(self.config.parallelism.max(1))
            .collect()
            .await;
        reports.into_iter().collect()
    }

    async fn fetch_page(&self, base_url: &str, params: &[(&str, &str)]) -> Result<Envelope, HarvestError> {
        let attempts = self.config.retry_attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.transport.fetch(base_url, params).await {
                Ok(body) => return parse_envelope(&body).map_err(|e| HarvestError::Protocol(e.to_string())),
                Err(e) if attempt >= attempts => return Err(HarvestError::PartialPageFailure { attempts, last: e }),
                Err(e) => {
                    tracing::debug!(error = %e, attempt, "page fetch failed; retrying");
                    tokio::time::sleep(self.config.retry_backoff).await;
                }
            }
        }
    }

    // Returns the harvest's start moment.
    async fn run(
        &self,
        state: &HarvestState,
        mode: HarvestMode,
        tally: &mut Tally,
    ) -> Result<DateTime<Utc>, HarvestError> {
        let info = &state.provider;
        let from = match mode {
            HarvestMode::Full => None,
            HarvestMode::Incremental => state.last_success.map(|t| format_datestamp(&t)),
        };
        let mut params: Vec<(&str, &str)> = vec![("verb", "ListRecords"), ("metadataPrefix", "olac")];
        if let Some(from) = &from {
            params.push(("from", from));
        }
        let mut start = None;
        let mut seen = BTreeSet::new();
        let mut token: Option<String> = None;
        loop {
            let page_params: Vec<(&str, &str)> = match &token {
                None => params.clone(),
                Some(t) => vec![("verb", "ListRecords"), ("resumptionToken", t)],
            };
            let envelope = self.fetch_page(&info.base_url, &page_params).await?;
            start.get_or_insert(envelope.response_date);
            tally.pages += 1;
            let (records, resumption) = match envelope.body {
                Body::ListRecords { records, resumption } => (records, resumption),
                Body::Error {
                    code: OaiErrorCode::NoRecordsMatch,
                    ..
                } if token.is_none() => (Vec::new(), Resumption::default()),
                Body::Error { code, message } => return Err(HarvestError::Protocol(format!("{code}: {message}"))),
                _ => return Err(HarvestError::Protocol("unexpected response to ListRecords".into())),
            };
            for received in records {
                let identifier = received.header.identifier;
                let belongs = identifier
                    .parse::<OaiIdentifier>()
                    .is_ok_and(|id| id.archive() == info.archive_id);
                if !belongs {
                    tracing::warn!(provider = %info.archive_id, identifier, "record names another archive");
                    tally.rejected += 1;
                    continue;
                }
                seen.insert(identifier.clone());
                match received.metadata {
                    None => {
                        if self.catalog.delete(&identifier)? {
                            tally.deleted += 1;
                        }
                    }
                    Some(Payload::Olac(record)) => {
                        let entry = CatalogEntry {
                            identifier: identifier.clone(),
                            provider_id: info.archive_id.clone(),
                            datestamp: received.header.datestamp,
                            record,
                        };
                        match self.catalog.upsert(entry) {
                            Ok(UpsertOutcome::Added) => tally.added += 1,
                            Ok(UpsertOutcome::Updated) => tally.updated += 1,
                            Ok(UpsertOutcome::Unchanged) => {}
                            Err(CatalogError::InvalidRecord { .. }) => {
                                tracing::warn!(identifier, "rejected invalid record");
                                tally.rejected += 1;
                            }
                            Err(e) => return Err(e.into()),
                        }
                    }
                    Some(Payload::Dc(_)) => {
                        tracing::warn!(identifier, "rejected non-OLAC payload");
                        tally.rejected += 1;
                    }
                }
            }
            match resumption.token {
                Some(t) => token = Some(t),
                None => break,
            }
        }
        if mode == HarvestMode::Full {
            for stale in self.catalog.provider_identifiers(&info.archive_id) {
                if !seen.contains(&stale) && self.catalog.delete(&stale)? {
                    tally.deleted += 1;
                }
            }
        }
        Ok(start.expect("at least one page was fetched"))
    }
}
