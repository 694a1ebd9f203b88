//! The data-provider side of harvesting.
//!
//! A [`Repository`] holds archive items and answers protocol requests
//! (`verb=Identify`, `ListRecords`, `ListIdentifiers`, `GetRecord`) with XML
//! envelopes; [`server`] exposes it over HTTP GET. Records are offered in two
//! formats: `olac` (the qualified record) and `oai_dc` (the unqualified
//! Dublin Core view produced by [`dc_crosswalk`]).

mod crosswalk;
pub mod envelope;
mod repository;
pub mod server;
mod token;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::MetadataRecord;

pub use crosswalk::{dc_crosswalk, CrosswalkError};
pub use repository::{RepoError, Repository, RepositoryConfig};

/// Version string reported by `Identify`.
pub const PROTOCOL_VERSION: &str = "olac-desk-1";

/// Page size used when none is configured.
pub const DEFAULT_PAGE_SIZE: usize = 100;

/// `earliest_datestamp` of a repository with no items.
pub fn epoch_sentinel() -> DateTime<Utc> {
    DateTime::UNIX_EPOCH
}

/// A parsed `oai:<archive>:<local>` identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OaiIdentifier {
    archive: String,
    local: String,
}

impl OaiIdentifier {
    pub fn archive(&self) -> &str {
        &self.archive
    }

    pub fn local(&self) -> &str {
        &self.local
    }
}

impl FromStr for OaiIdentifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !crate::vocab::is_oai_identifier(s) {
            return Err(format!("{s:?} is not of the form oai:<archive>:<local-id>"));
        }
        let mut parts = s.splitn(3, ':');
        parts.next();
        Ok(OaiIdentifier {
            archive: parts.next().unwrap_or_default().to_string(),
            local: parts.next().unwrap_or_default().to_string(),
        })
    }
}

impl fmt::Display for OaiIdentifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "oai:{}:{}", self.archive, self.local)
    }
}

/// Short archive names are lowercase ASCII alphanumerics.
pub fn is_valid_archive_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
}

/// One repository item. A deleted item is a tombstone: it keeps its
/// identifier and datestamp but no record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchiveItem {
    pub identifier: String,
    pub datestamp: DateTime<Utc>,
    pub record: Option<MetadataRecord>,
}

impl ArchiveItem {
    pub fn is_deleted(&self) -> bool {
        self.record.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepositoryInfo {
    pub archive_id: String,
    pub name: String,
    pub base_url: String,
    pub earliest_datestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetadataPrefix {
    #[serde(rename = "olac")]
    Olac,
    #[serde(rename = "oai_dc")]
    OaiDc,
}

impl MetadataPrefix {
    pub fn as_str(self) -> &'static str {
        match self {
            MetadataPrefix::Olac => "olac",
            MetadataPrefix::OaiDc => "oai_dc",
        }
    }
}

impl FromStr for MetadataPrefix {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "olac" => Ok(MetadataPrefix::Olac),
            "oai_dc" => Ok(MetadataPrefix::OaiDc),
            other => Err(format!("unsupported metadataPrefix {other:?}")),
        }
    }
}

/// Protocol error codes carried in an envelope's `error` element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OaiErrorCode {
    #[serde(rename = "badVerb")]
    BadVerb,
    #[serde(rename = "badArgument")]
    BadArgument,
    #[serde(rename = "badResumptionToken")]
    BadResumptionToken,
    #[serde(rename = "idDoesNotExist")]
    IdDoesNotExist,
    #[serde(rename = "noRecordsMatch")]
    NoRecordsMatch,
}

impl OaiErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            OaiErrorCode::BadVerb => "badVerb",
            OaiErrorCode::BadArgument => "badArgument",
            OaiErrorCode::BadResumptionToken => "badResumptionToken",
            OaiErrorCode::IdDoesNotExist => "idDoesNotExist",
            OaiErrorCode::NoRecordsMatch => "noRecordsMatch",
        }
    }
}

impl FromStr for OaiErrorCode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            OaiErrorCode::BadVerb,
            OaiErrorCode::BadArgument,
            OaiErrorCode::BadResumptionToken,
            OaiErrorCode::IdDoesNotExist,
            OaiErrorCode::NoRecordsMatch,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| format!("unknown error code {s:?}"))
    }
}

impl fmt::Display for OaiErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
