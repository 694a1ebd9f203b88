//! Response envelopes.
//!
//! ```xml
//! <repository-response>
//!   <responseDate>2002-05-01T12:00:00Z</responseDate>
//!   <request verb="ListRecords" metadataPrefix="olac">http://host/</request>
//!   <ListRecords>
//!     <record>
//!       <header><identifier>oai:ldc:X</identifier><datestamp>...</datestamp></header>
//!       <metadata><olac xmlns="...">...</olac></metadata>
//!     </record>
//!     <record><header status="deleted">...</header></record>
//!     <resumptionToken completeListSize="3" cursor="0">...</resumptionToken>
//!   </ListRecords>
//! </repository-response>
//! ```
//!
//! Errors replace the verb element with `<error code="badArgument">text</error>`.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{ArchiveItem, OaiErrorCode, RepositoryInfo, PROTOCOL_VERSION};
use crate::clock::{format_datestamp, parse_datestamp, DayBound};
use crate::model::MetadataRecord;
use crate::xml::dom::{self, Element};
use crate::xml::{self, escape_attr, escape_text, XmlError};

pub const ENVELOPE_ROOT: &str = "repository-response";

/// Query parameters echoed in the `request` element.
pub(crate) const ECHOED_PARAMS: [&str; 6] = [
    "verb",
    "metadataPrefix",
    "from",
    "until",
    "identifier",
    "resumptionToken",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("malformed response: {0}")]
pub struct EnvelopeError(pub String);

impl From<XmlError> for EnvelopeError {
    fn from(e: XmlError) -> Self {
        EnvelopeError(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    pub identifier: String,
    pub datestamp: DateTime<Utc>,
    pub deleted: bool,
}

/// A record as received: its header plus the payload (absent for
/// tombstones). The payload is either an OLAC or a Dublin Core record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedRecord {
    pub header: Header,
    pub metadata: Option<Payload>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Olac(MetadataRecord),
    Dc(MetadataRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Resumption {
    /// `None` on the last page.
    pub token: Option<String>,
    pub complete_list_size: Option<usize>,
    pub cursor: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Identify {
        info: RepositoryInfo,
        protocol_version: String,
    },
    ListRecords {
        records: Vec<ReceivedRecord>,
        resumption: Resumption,
    },
    ListIdentifiers {
        headers: Vec<Header>,
        resumption: Resumption,
    },
    GetRecord(ReceivedRecord),
    Error {
        code: OaiErrorCode,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub response_date: DateTime<Utc>,
    pub body: Body,
}

// ---- writing -------------------------------------------------------------

pub(crate) struct EnvelopeWriter {
    out: String,
}

impl EnvelopeWriter {
    pub fn new(response_date: &DateTime<Utc>, base_url: &str, request: &[(&str, &str)]) -> Self {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(out, "<{ENVELOPE_ROOT}>");
        let _ = writeln!(
            out,
            "  <responseDate>{}</responseDate>",
            format_datestamp(response_date)
        );
        out.push_str("  <request");
        for (k, v) in request {
            let _ = write!(out, " {k}=\"");
            escape_attr(&mut out, v);
            out.push('"');
        }
        out.push('>');
        escape_text(&mut out, base_url);
        out.push_str("</request>\n");
        EnvelopeWriter { out }
    }

    pub fn error(mut self, code: OaiErrorCode, message: &str) -> String {
        let _ = write!(self.out, "  <error code=\"{code}\">");
        escape_text(&mut self.out, message);
        self.out.push_str("</error>\n");
        self.finish()
    }

    pub fn identify(mut self, info: &RepositoryInfo) -> String {
        let o = &mut self.out;
        o.push_str("  <Identify>\n");
        for (tag, value) in [
            ("archiveId", info.archive_id.as_str()),
            ("repositoryName", info.name.as_str()),
            ("baseURL", info.base_url.as_str()),
            ("protocolVersion", PROTOCOL_VERSION),
            ("earliestDatestamp", &format_datestamp(&info.earliest_datestamp)),
        ] {
            let _ = write!(o, "    <{tag}>");
            escape_text(o, value);
            let _ = writeln!(o, "</{tag}>");
        }
        o.push_str("  </Identify>\n");
        self.finish()
    }

    pub fn open(&mut self, verb: &str) {
        let _ = writeln!(self.out, "  <{verb}>");
    }

    pub fn close(&mut self, verb: &str) {
        let _ = writeln!(self.out, "  </{verb}>");
    }

    pub fn header(&mut self, item: &ArchiveItem, indent: usize) {
        let pad = " ".repeat(indent);
        let status = if item.is_deleted() { " status=\"deleted\"" } else { "" };
        let _ = write!(self.out, "{pad}<header{status}><identifier>");
        escape_text(&mut self.out, &item.identifier);
        let _ = writeln!(
            self.out,
            "</identifier><datestamp>{}</datestamp></header>",
            format_datestamp(&item.datestamp)
        );
    }

    /// Writes a `record` element; `dc` selects the Dublin Core payload.
    pub fn record(&mut self, item: &ArchiveItem, payload: Option<(&MetadataRecord, bool)>) {
        self.out.push_str("    <record>\n");
        self.header(item, 6);
        if let Some((record, dc)) = payload {
            self.out.push_str("      <metadata>\n");
            if dc {
                xml::write_dc(&mut self.out, record, 8);
            } else {
                xml::write_olac(&mut self.out, record, 8);
            }
            self.out.push_str("      </metadata>\n");
        }
        self.out.push_str("    </record>\n");
    }

    pub fn resumption(&mut self, token: Option<&str>, complete_list_size: usize, cursor: usize) {
        let _ = write!(
            self.out,
            "    <resumptionToken completeListSize=\"{complete_list_size}\" cursor=\"{cursor}\">"
        );
        if let Some(token) = token {
            escape_text(&mut self.out, token);
        }
        self.out.push_str("</resumptionToken>\n");
    }

    pub fn finish(mut self) -> String {
        let _ = writeln!(self.out, "</{ENVELOPE_ROOT}>");
        self.out
    }
}

// ---- reading -------------------------------------------------------------

fn err(msg: impl Into<String>) -> EnvelopeError {
    EnvelopeError(msg.into())
}

fn required<'a>(parent: &'a Element, tag: &str) -> Result<&'a Element, EnvelopeError> {
    parent
        .child(tag)
        .ok_or_else(|| err(format!("<{}> lacks <{tag}>", parent.local)))
}

fn datestamp(s: &str) -> Result<DateTime<Utc>, EnvelopeError> {
    parse_datestamp(s.trim(), DayBound::Start).ok_or_else(|| err(format!("bad datestamp {s:?}")))
}

fn header_from(e: &Element) -> Result<Header, EnvelopeError> {
    Ok(Header {
        identifier: required(e, "identifier")?.text().trim().to_string(),
        datestamp: datestamp(&required(e, "datestamp")?.text())?,
        deleted: e.attr("status") == Some("deleted"),
    })
}

fn record_from(e: &Element) -> Result<ReceivedRecord, EnvelopeError> {
    let header = header_from(required(e, "header")?)?;
    let metadata = match e.child("metadata") {
        None => None,
        Some(m) => {
            let payload = m.child_elements().next().ok_or_else(|| err("empty <metadata>"))?;
            Some(if payload.local == "dc" {
                Payload::Dc(xml::dc_from_element(payload)?)
            } else {
                let mut ignored = Vec::new();
                Payload::Olac(xml::record_from_element(payload, &mut ignored)?)
            })
        }
    };
    if header.deleted != metadata.is_none() {
        return Err(err(format!(
            "record {} must carry metadata iff it is not deleted",
            header.identifier
        )));
    }
    Ok(ReceivedRecord { header, metadata })
}

fn resumption_from(e: &Element) -> Result<Resumption, EnvelopeError> {
    let Some(t) = e.child("resumptionToken") else {
        return Ok(Resumption::default());
    };
    let num = |name: &str| -> Result<Option<usize>, EnvelopeError> {
        t.attr(name)
            .map(|v| v.parse().map_err(|_| err(format!("bad {name} {v:?}"))))
            .transpose()
    };
    let token = t.text().trim().to_string();
    Ok(Resumption {
        token: (!token.is_empty()).then_some(token),
        complete_list_size: num("completeListSize")?,
        cursor: num("cursor")?,
    })
}

/// Parses a response envelope.
pub fn parse_envelope(bytes: &[u8]) -> Result<Envelope, EnvelopeError> {
    let root = dom::parse_document(bytes).map_err(err)?;
    if root.local != ENVELOPE_ROOT {
        return Err(err(format!("unexpected root <{}>", root.local)));
    }
    let response_date = datestamp(&required(&root, "responseDate")?.text())?;
    let body_el = root
        .child_elements()
        .find(|e| e.local != "responseDate" && e.local != "request")
        .ok_or_else(|| err("response has no body"))?;
    let body = match body_el.local.as_str() {
        "error" => {
            let code = body_el.attr("code").ok_or_else(|| err("<error> without code"))?;
            Body::Error {
                code: code.parse().map_err(err)?,
                message: body_el.text().trim().to_string(),
            }
        }
        "Identify" => {
            let text = |tag| required(body_el, tag).map(|e| e.text().trim().to_string());
            Body::Identify {
                info: RepositoryInfo {
                    archive_id: text("archiveId")?,
                    name: text("repositoryName")?,
                    base_url: text("baseURL")?,
                    earliest_datestamp: datestamp(&text("earliestDatestamp")?)?,
                },
                protocol_version: text("protocolVersion")?,
            }
        }
        "ListRecords" => Body::ListRecords {
            records: body_el
                .child_elements()
                .filter(|e| e.local == "record")
                .map(record_from)
                .collect::<Result<_, _>>()?,
            resumption: resumption_from(body_el)?,
        },
        "ListIdentifiers" => Body::ListIdentifiers {
            headers: body_el
                .child_elements()
                .filter(|e| e.local == "header")
                .map(header_from)
                .collect::<Result<_, _>>()?,
            resumption: resumption_from(body_el)?,
        },
        "GetRecord" => Body::GetRecord(record_from(required(body_el, "record")?)?),
        other => return Err(err(format!("unknown response body <{other}>"))),
    };
    Ok(Envelope { response_date, body })
}
