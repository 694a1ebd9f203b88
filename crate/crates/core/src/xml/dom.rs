//! A minimal namespace-aware element tree built on quick-xml.
//!
//! End tags are matched case-insensitively so that documents such as
//! `<Type.functionality>...</type.functionality>` still load; each such
//! mismatch is reported back to the caller.

use quick_xml::events::{BytesStart, Event};
use quick_xml::name::ResolveResult;
use quick_xml::NsReader;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Attr {
    pub ns: Option<String>,
    pub local: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Element {
    pub ns: Option<String>,
    pub local: String,
    pub attrs: Vec<Attr>,
    pub children: Vec<Node>,
    /// Set when the closing tag differed from the opening tag by case only.
    pub close_tag_case: Option<String>,
}

impl Element {
    pub fn child_elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, local: &str) -> Option<&Element> {
        self.child_elements().find(|e| e.local == local)
    }

    /// Concatenated text of direct text children.
    pub fn text(&self) -> String {
        self.children
            .iter()
            .filter_map(|n| match n {
                Node::Text(t) => Some(t.as_str()),
                Node::Element(_) => None,
            })
            .collect()
    }

    pub fn attr(&self, local: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|a| a.ns.is_none() && a.local == local)
            .map(|a| a.value.as_str())
    }
}

fn ns_of(resolved: ResolveResult<'_>) -> Result<Option<String>, String> {
    match resolved {
        ResolveResult::Bound(ns) => Ok(Some(
            std::str::from_utf8(ns.as_ref()).map_err(|e| e.to_string())?.to_string(),
        )),
        ResolveResult::Unbound => Ok(None),
        ResolveResult::Unknown(prefix) => Err(format!(
            "undeclared namespace prefix {:?}",
            String::from_utf8_lossy(&prefix)
        )),
    }
}

fn open_element(reader: &NsReader<&[u8]>, start: &BytesStart<'_>) -> Result<(Element, Vec<u8>), String> {
    let (resolved, local) = reader.resolve_element(start.name());
    let ns = ns_of(resolved)?;
    let local = std::str::from_utf8(local.as_ref())
        .map_err(|e| e.to_string())?
        .to_string();
    let mut attrs = Vec::new();
    for attr in start.attributes().with_checks(true) {
        let attr = attr.map_err(|e| e.to_string())?;
        let key = attr.key;
        if key.as_namespace_binding().is_some() {
            continue;
        }
        let (resolved, attr_local) = reader.resolve_attribute(key);
        let value = attr
            .decode_and_unescape_value(reader.decoder())
            .map_err(|e| e.to_string())?
            .into_owned();
        attrs.push(Attr {
            ns: ns_of(resolved)?,
            local: std::str::from_utf8(attr_local.as_ref())
                .map_err(|e| e.to_string())?
                .to_string(),
            value,
        });
    }
    Ok((
        Element {
            ns,
            local,
            attrs,
            children: Vec::new(),
            close_tag_case: None,
        },
        start.name().as_ref().to_vec(),
    ))
}

/// Parses a whole document and returns its root element.
///
/// DTDs are refused; only the five predefined entities and character
/// references are expanded.
pub(crate) fn parse_document(bytes: &[u8]) -> Result<Element, String> {
    let text = std::str::from_utf8(bytes).map_err(|e| format!("document is not UTF-8: {e}"))?;
    let mut reader = NsReader::from_str(text);
    {
        let config = reader.config_mut();
        config.check_end_names = false;
        config.expand_empty_elements = true;
        config.check_comments = true;
    }
    let mut stack: Vec<(Element, Vec<u8>)> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let pos = reader.buffer_position();
        let event = reader.read_event().map_err(|e| format!("at byte {pos}: {e}"))?;
        match event {
            Event::Start(start) => {
                if root.is_some() {
                    return Err("content after the root element".to_string());
                }
                stack.push(open_element(&reader, &start)?);
            }
            Event::End(end) => {
                let (mut element, open_name) = stack.pop().ok_or_else(|| "unexpected closing tag".to_string())?;
                let close_name = end.name().as_ref().to_vec();
                if close_name != open_name {
                    if close_name.eq_ignore_ascii_case(&open_name) {
                        element.close_tag_case = Some(String::from_utf8_lossy(&close_name).into_owned());
                    } else {
                        return Err(format!(
                            "closing tag </{}> does not match <{}>",
                            String::from_utf8_lossy(&close_name),
                            String::from_utf8_lossy(&open_name)
                        ));
                    }
                }
                match stack.last_mut() {
                    Some((parent, _)) => parent.children.push(Node::Element(element)),
                    None => root = Some(element),
                }
            }
            Event::Text(t) => {
                let s = t.unescape().map_err(|e| e.to_string())?;
                push_text(&mut stack, &root, &s)?;
            }
            Event::CData(c) => {
                let s = std::str::from_utf8(&c).map_err(|e| e.to_string())?.to_string();
                push_text(&mut stack, &root, &s)?;
            }
            Event::DocType(_) => return Err("DTDs are not supported".to_string()),
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) => {}
            Event::Empty(_) => unreachable!("empty elements are expanded"),
            Event::Eof => break,
        }
    }
    if !stack.is_empty() {
        return Err("unexpected end of document".to_string());
    }
    root.ok_or_else(|| "document has no root element".to_string())
}

fn push_text(stack: &mut [(Element, Vec<u8>)], root: &Option<Element>, s: &str) -> Result<(), String> {
    match stack.last_mut() {
        Some((parent, _)) => {
            if let Some(Node::Text(prev)) = parent.children.last_mut() {
                prev.push_str(s);
            } else {
                parent.children.push(Node::Text(s.to_string()));
            }
            Ok(())
        }
        None if s.trim().is_empty() => Ok(()),
        None if root.is_some() => Err("text after the root element".to_string()),
        None => Err("text before the root element".to_string()),
    }
}
