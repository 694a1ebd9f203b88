//! Opaque resumption tokens.
//!
//! A token carries the list request it continues, the repository content
//! fingerprint it was issued against and the next offset, plus a checksum.
//! Any repository mutation changes the fingerprint and so expires every
//! outstanding token.

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

use super::MetadataPrefix;
use crate::clock::{format_datestamp, parse_datestamp, DayBound};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ListVerb {
    ListRecords,
    ListIdentifiers,
}

impl ListVerb {
    pub fn as_str(self) -> &'static str {
        match self {
            ListVerb::ListRecords => "ListRecords",
            ListVerb::ListIdentifiers => "ListIdentifiers",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ResumptionToken {
    pub verb: ListVerb,
    pub prefix: MetadataPrefix,
    pub from: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
    pub fingerprint: String,
    pub offset: usize,
}

fn checksum(payload: &str) -> String {
    let digest = Sha256::digest(payload.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn opt_date(d: &Option<DateTime<Utc>>) -> String {
    d.as_ref().map(format_datestamp).unwrap_or_else(|| "-".to_string())
}

impl ResumptionToken {
    pub fn encode(&self) -> String {
        let payload = format!(
            "{}|{}|{}|{}|{}|{}",
            self.verb.as_str(),
            self.prefix.as_str(),
            opt_date(&self.from),
            opt_date(&self.until),
            self.fingerprint,
            self.offset
        );
        let check = checksum(&payload);
        URL_SAFE_NO_PAD.encode(format!("{payload}|{check}"))
    }

    pub fn decode(token: &str) -> Option<Self> {
        let raw = String::from_utf8(URL_SAFE_NO_PAD.decode(token).ok()?).ok()?;
        let (payload, check) = raw.rsplit_once('|')?;
        if checksum(payload) != check {
            return None;
        }
        let fields: Vec<&str> = payload.split('|').collect();
        let [verb, prefix, from, until, fingerprint, offset] = fields[..] else {
            return None;
        };
        let verb = match verb {
            "ListRecords" => ListVerb::ListRecords,
            "ListIdentifiers" => ListVerb::ListIdentifiers,
            _ => return None,
        };
        let date = |s: &str| -> Option<Option<DateTime<Utc>>> {
            if s == "-" {
                Some(None)
            } else {
                parse_datestamp(s, DayBound::Start).map(Some)
            }
        };
        Some(ResumptionToken {
            verb,
            prefix: prefix.parse().ok()?,
            from: date(from)?,
            until: date(until)?,
            fingerprint: fingerprint.to_string(),
            offset: offset.parse().ok()?,
        })
    }
}
