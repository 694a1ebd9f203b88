//! XML interchange format for metadata records.
//!
//! A record document has root `olac` in the OLAC 0.3 namespace. The root's
//! `lang` attribute lists the reader languages; each child is one metadata
//! element carrying optional `refine`, `code` and `lang` attributes and free
//! text. Serialization is deterministic: the namespace is declared on the
//! root, default-valued attributes are omitted, element attributes are
//! written in the order refine, code, lang and elements keep stored order.

pub(crate) mod dom;

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    has_errors, validate_record, Diagnostic, ElementName, Location, MetadataElement, MetadataRecord, Rule,
};
use crate::vocab::VocabularyRegistry;

pub(crate) use dom_bridge::record_from_element;

pub const OLAC_NAMESPACE: &str = "http://www.language-archives.org/OLAC/0.3/";
pub const XSI_NAMESPACE: &str = "http://www.w3.org/2001/XMLSchema-instance";
pub const DC_NAMESPACE: &str = "http://purl.org/dc/elements/1.1/";

const XML_DECLARATION: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlError {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("expected root <olac> in namespace {OLAC_NAMESPACE}, found <{root}> in {}", namespace.as_deref().unwrap_or("no namespace"))]
    WrongRootOrNamespace { root: String, namespace: Option<String> },
    #[error("record is not valid ({} error(s))", .0.iter().filter(|d| d.is_error()).count())]
    InvalidRecord(Vec<Diagnostic>),
}

impl XmlError {
    /// The failure as a record-level diagnostic.
    pub fn to_diagnostic(&self) -> Diagnostic {
        let rule = match self {
            XmlError::MalformedDocument(_) => Rule::MalformedDocument,
            XmlError::WrongRootOrNamespace { .. } => Rule::WrongRootOrNamespace,
            XmlError::InvalidRecord(_) => Rule::CodeUnknown,
        };
        Diagnostic::error(Location::Record, rule, self.to_string())
    }
}

/// A structurally parsed record plus structural findings. Semantic
/// validation is [`validate_record`]'s job.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub record: MetadataRecord,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses an OLAC record document.
///
/// Diagnostic locations refer to the position of the child element in the
/// document, counting dropped elements.
pub fn parse_record(bytes: &[u8]) -> Result<ParseOutcome, XmlError> {
    let root = dom::parse_document(bytes).map_err(XmlError::MalformedDocument)?;
    let mut diagnostics = Vec::new();
    let record = record_from_element(&root, &mut diagnostics)?;
    Ok(ParseOutcome { record, diagnostics })
}

mod dom_bridge {
    use super::*;
    use crate::xml::dom::{Element, Node};

    /// Builds a record from an already parsed `olac` element.
    pub(crate) fn record_from_element(
        root: &Element,
        diagnostics: &mut Vec<Diagnostic>,
    ) -> Result<MetadataRecord, XmlError> {
        if !root.local.eq_ignore_ascii_case("olac") || root.ns.as_deref() != Some(OLAC_NAMESPACE) {
            return Err(XmlError::WrongRootOrNamespace {
                root: root.local.clone(),
                namespace: root.ns.clone(),
            });
        }
        let mut alternatives = Vec::new();
        for attr in &root.attrs {
            match (attr.ns.as_deref(), attr.local.as_str()) {
                (None, "lang") => {
                    alternatives = attr.value.split_whitespace().map(str::to_string).collect();
                }
                (Some(XSI_NAMESPACE), _) => {}
                _ => diagnostics.push(Diagnostic::warning(
                    Location::Record,
                    Rule::UnknownAttribute,
                    format!("attribute {:?} on <olac> ignored", attr.local),
                )),
            }
        }

        let mut elements = Vec::new();
        let mut position = 0;
        for node in &root.children {
            let child = match node {
                Node::Text(t) => {
                    if !t.trim().is_empty() {
                        diagnostics.push(Diagnostic::warning(
                            Location::Record,
                            Rule::StrayText,
                            format!("text {:?} directly inside <olac> ignored", t.trim()),
                        ));
                    }
                    continue;
                }
                Node::Element(e) => e,
            };
            let at = Location::Element(position);
            position += 1;
            if let Some(element) = element_from(child, at, diagnostics) {
                elements.push(element);
            }
        }
        Ok(MetadataRecord::new(alternatives, elements))
    }

    fn element_from(child: &Element, at: Location, diagnostics: &mut Vec<Diagnostic>) -> Option<MetadataElement> {
        let name = match child.local.parse::<ElementName>() {
            Ok(name) if child.ns.as_deref() == Some(OLAC_NAMESPACE) => name,
            _ => {
                diagnostics.push(Diagnostic::error(
                    at,
                    Rule::UnknownElement,
                    format!(
                        "unknown element <{}>{} dropped",
                        child.local,
                        child.ns.as_deref().map(|ns| format!(" in {ns}")).unwrap_or_default()
                    ),
                ));
                return None;
            }
        };
        if child.local != name.as_str() {
            diagnostics.push(Diagnostic::warning(
                at,
                Rule::ElementNameCase,
                format!("<{}> read as {name}", child.local),
            ));
        }
        if let Some(close) = &child.close_tag_case {
            diagnostics.push(Diagnostic::warning(
                at,
                Rule::CloseTagCase,
                format!("</{close}> closes <{}>", child.local),
            ));
        }
        if child.child_elements().next().is_some() {
            diagnostics.push(Diagnostic::error(
                at,
                Rule::NestedElement,
                format!("{name} contains nested markup and was dropped"),
            ));
            return None;
        }
        let mut element = MetadataElement::new(name, child.text());
        for attr in &child.attrs {
            element = match (attr.ns.as_deref(), attr.local.as_str()) {
                (None, "refine") => element.with_refine(attr.value.clone()),
                (None, "code") => element.with_code(attr.value.clone()),
                (None, "lang") => element.with_lang(attr.value.clone()),
                _ => {
                    diagnostics.push(Diagnostic::warning(
                        at,
                        Rule::UnknownAttribute,
                        format!("attribute {:?} on {name} dropped", attr.local),
                    ));
                    element
                }
            };
        }
        Some(element)
    }
}

pub(crate) fn escape_text(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

pub(crate) fn escape_attr(out: &mut String, s: &str) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
}

/// Serializes a record that validates without errors.
pub fn serialize_record(record: &MetadataRecord, registry: &VocabularyRegistry) -> Result<String, XmlError> {
    let diagnostics = validate_record(record, registry);
    if has_errors(&diagnostics) {
        return Err(XmlError::InvalidRecord(diagnostics));
    }
    let mut out = String::from(XML_DECLARATION);
    write_olac(&mut out, record, 0);
    Ok(out)
}

/// Writes the `olac` element (no declaration) indented by `indent` spaces.
pub(crate) fn write_olac(out: &mut String, record: &MetadataRecord, indent: usize) {
    let pad = " ".repeat(indent);
    let _ = write!(out, "{pad}<olac xmlns=\"{OLAC_NAMESPACE}\"");
    if !record.has_default_alternatives() {
        out.push_str(" lang=\"");
        escape_attr(out, &record.alternatives().join(" "));
        out.push('"');
    }
    if record.elements().is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for element in record.elements() {
        let _ = write!(out, "{pad}  <{}", element.name());
        for (key, value) in [
            ("refine", element.refine()),
            ("code", element.code()),
            ("lang", element.lang()),
        ] {
            if let Some(value) = value {
                let _ = write!(out, " {key}=\"");
                escape_attr(out, value);
                out.push('"');
            }
        }
        if element.content().is_empty() {
            out.push_str("/>\n");
        } else {
            out.push('>');
            escape_text(out, element.content());
            let _ = writeln!(out, "</{}>", element.name());
        }
    }
    let _ = writeln!(out, "{pad}</olac>");
}

/// Serializes an unqualified Dublin Core record: root `dc`, one child per
/// element named after it, no attributes.
pub fn serialize_dc(record: &MetadataRecord) -> String {
    let mut out = String::from(XML_DECLARATION);
    write_dc(&mut out, record, 0);
    out
}

pub(crate) fn write_dc(out: &mut String, record: &MetadataRecord, indent: usize) {
    let pad = " ".repeat(indent);
    let _ = write!(out, "{pad}<dc xmlns=\"{DC_NAMESPACE}\"");
    if record.elements().is_empty() {
        out.push_str("/>\n");
        return;
    }
    out.push_str(">\n");
    for element in record.elements() {
        let _ = write!(out, "{pad}  <{}>", element.name());
        escape_text(out, element.content());
        let _ = writeln!(out, "</{}>", element.name());
    }
    let _ = writeln!(out, "{pad}</dc>");
}

/// Reads a Dublin Core document produced by [`serialize_dc`].
pub fn parse_dc(bytes: &[u8]) -> Result<MetadataRecord, XmlError> {
    let root = dom::parse_document(bytes).map_err(XmlError::MalformedDocument)?;
    dc_from_element(&root)
}

pub(crate) fn dc_from_element(root: &dom::Element) -> Result<MetadataRecord, XmlError> {
    if root.local != "dc" || root.ns.as_deref() != Some(DC_NAMESPACE) {
        return Err(XmlError::WrongRootOrNamespace {
            root: root.local.clone(),
            namespace: root.ns.clone(),
        });
    }
    let mut elements = Vec::new();
    for child in root.child_elements() {
        let name = child
            .local
            .parse::<ElementName>()
            .ok()
            .filter(|n| n.is_dublin_core())
            .ok_or_else(|| XmlError::MalformedDocument(format!("<{}> is not a Dublin Core element", child.local)))?;
        elements.push(MetadataElement::new(name, child.text()));
    }
    Ok(MetadataRecord::from_elements(elements))
}
